"""Command-line entry point ``lambda-clock``.

    lambda-clock run --config scenario.json [--set k=v ...] [--out path]
    lambda-clock list-scenarios
    lambda-clock check

``LAMBDA_CLOCK_SEED`` overrides the seed in the config file; ``--set seed=...``
overrides both.  Exit status is 0 iff every embedded check passes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exceptions import ConfigError, LambdaClockError
from .scenarios import SCENARIOS, ScenarioConfig, apply_override, emit_report, run_scenario

SEED_ENV = "LAMBDA_CLOCK_SEED"


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None


def _report_failures(report) -> int:
    for name in report.failed:
        print(f"FAILED {report.scenario}: {name}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_run(args) -> int:
    doc = _load_config(args.config)
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if os.environ.get(SEED_ENV):
        try:
            doc["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    for assignment in args.set or []:
        apply_override(doc, assignment)
    config = ScenarioConfig.from_dict(doc)
    report = run_scenario(config)
    payload = emit_report(report, config.output_format)
    out = args.out or config.output_path
    if out:
        with open(out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return _report_failures(report)


def cmd_list(args) -> int:
    for name, (fn, defaults) in SCENARIOS.items():
        params = ", ".join(f"{k}={json.dumps(v)}" for k, v in defaults.items())
        print(f"{name}: {params}")
    return 0


def cmd_check(args) -> int:
    status = 0
    for name in SCENARIOS:
        report = run_scenario(ScenarioConfig.from_dict({"scenario": name}))
        print(f"{'PASS' if report.passed else 'FAIL'} {name} "
              f"({len(report.checks) - len(report.failed)}/{len(report.checks)} checks)")
        status |= _report_failures(report)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-clock",
        description="Clock time reconstructed from accumulated Fisher distinguishability.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a JSON config")
    run.add_argument("--config", required=True, help="scenario config (JSON)")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config entry, e.g. omega=2 or numerics.fd_step=1e-5")
    run.add_argument("--out", help="output file (default: config output.path or stdout)")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list-scenarios", help="list scenarios and default parameters")
    lst.set_defaults(func=cmd_list)

    chk = sub.add_parser("check", help="run every scenario with defaults as a self-test")
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LambdaClockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
