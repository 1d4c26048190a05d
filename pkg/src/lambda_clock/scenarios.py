"""Built-in scenarios and machine-readable reports.

A scenario is configured by a JSON document::

    {"scenario": "qubit-clock",
     "params": {"omega": 1.0},
     "numerics": {"integ_refine_tol": 1e-9},
     "constants": {"hbar": 1.0},
     "seed": 0,
     "output": {"format": "csv", "path": "qubit.csv"}}

Every scenario computes its series and summary values, then evaluates named
checks against closed-form expectations.  Output depends only on the config and
the seed.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import classical, clock, dynamics, quantum, records
from .config import NumericalConfig, PhysicalConstants
from .ensembles import random_density_operator, random_unitary
from .exceptions import ConfigError, LambdaClockError

__all__ = [
    "Check",
    "ScenarioConfig",
    "ScenarioReport",
    "SCENARIOS",
    "run_scenario",
    "emit_report",
    "apply_override",
]

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: Any
    expected: Any
    tolerance: Optional[float] = None

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured,
                "expected": self.expected, "tolerance": self.tolerance}


def _close(name, measured, expected, tol, relative=True) -> Check:
    measured, expected = float(measured), float(expected)
    scale = max(abs(expected), np.finfo(float).tiny) if relative else 1.0
    return Check(name, bool(abs(measured - expected) <= tol * scale), measured, expected, tol)


@dataclass
class ScenarioReport:
    scenario: str
    params: dict
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "params": self.params,
            "summary": self.summary,
            "checks": [c.as_dict() for c in self.checks],
            "passed": self.passed,
            "series": self.series,
        }


# -- scenario implementations ----------------------------------------------

def _qubit_clock(p, cfg, const, seed):
    omega, t_max, steps = p["omega"], p["t_max"], p["steps"]
    hbar = const.hbar
    t = np.linspace(0.0, t_max, steps + 1)
    H = quantum.qubit_clock_hamiltonian(omega, const)
    psi0 = quantum.plus_state()
    traj = dynamics.evolve_unitary(dynamics.UnitaryEvolutionSpec(H, psi0, t), const)
    param = dynamics.reparameterize_by_lambda(traj, H, cfg, const)
    table = dynamics.trajectory_table(param)
    fq = quantum.qfi_unitary(psi0, H, const)
    spread = quantum.energy_variance(psi0, H)
    bound = dynamics.mandelstam_tamm_bound(spread, const, cfg)
    t_perp = dynamics.orthogonalization_time(traj, H, const, cfg)
    residual = dynamics.lambda_schrodinger_residual(param, H, cfg, const)

    rel = np.abs(param.lambdas[1:] - omega * t[1:]) / (omega * t[1:])
    overlap_err = np.max(np.abs(np.array(table["overlap"]) - np.cos(0.5 * omega * t) ** 2))
    calibration = clock.build_calibration([0.0, omega * t_max], [0.0, t_max])
    t_hat = calibration.predict(np.clip(param.lambdas, 0.0, omega * t_max))
    time_err = np.max(np.abs(t_hat[1:] - t[1:]) / t[1:])

    checks = [
        Check("lambda_equals_omega_t", bool(rel.max() <= 1e-6), float(rel.max()), 0.0, 1e-6),
        _close("qfi_equals_omega_squared", fq, omega**2, 1e-12),
        _close("delta_h_equals_hbar_omega_over_2", spread, 0.5 * hbar * omega, 1e-12),
        Check("overlap_law", bool(overlap_err <= 1e-10), float(overlap_err), 0.0, 1e-10),
        Check("time_reconstruction", bool(time_err <= 1e-6), float(time_err), 0.0, 1e-6),
        Check("parameterization_valid", param.valid, param.valid, True),
    ]
    if t_max >= math.pi / omega:
        checks.append(_close("t_perp_saturates_bound", t_perp, math.pi / omega, 1e-6))
        checks.append(Check("t_perp_respects_bound", bool(t_perp >= bound - 1e-9),
                            t_perp, bound, 1e-9))
    series = {k: table[k] for k in ("t", "Lambda", "DeltaH", "overlap")}
    summary = {"Lambda_total": float(param.lambdas[-1]), "F_Q": fq, "DeltaH": spread,
               "tau_bound": bound, "t_perp": t_perp, "lambda_residual": residual,
               "crosscheck_error": param.crosscheck_error}
    return series, summary, checks


def _decay(p, cfg, const, seed):
    gamma, n0, n = p["gamma"], p["n0"], p["n"]
    lam = clock.decay_lambda(n, n0)
    t_rec = clock.decay_time(lam, gamma)
    grid = np.linspace(0.0, p["t_max"], p["steps"] + 1)
    pop = clock.decay_population(n0, gamma, grid)
    lam_grid = clock.decay_lambda(pop, n0)
    t_grid_rec = clock.decay_time(lam_grid, gamma)
    round_trip = float(np.max(np.abs(t_grid_rec - grid) / np.maximum(grid, 1.0)))
    checks = [
        _close("time_from_lambda", t_rec, math.log(n0 / n) / gamma, 1e-12),
        Check("decay_round_trip", bool(round_trip <= 1e-12), round_trip, 0.0, 1e-12),
    ]
    series = {"t": grid.tolist(), "N": pop.tolist(), "Lambda_D": lam_grid.tolist(),
              "t_reconstructed": t_grid_rec.tolist()}
    return series, {"Lambda_D": lam, "t": t_rec}, checks


def _phase_clock(p, cfg, const, seed):
    omega, phi0, amp = p["omega"], p["phi0"], p["amplitude"]
    rng = np.random.default_rng(seed)
    phi = np.sort(phi0 + rng.uniform(0.0, 4.0 * math.pi, p["samples"]))
    t = clock.phase_clock_time(phi, phi0, omega)
    x_phase = clock.oscillator_position(amp, phi)
    x_time = amp * np.cos(omega * t + phi0)
    err = float(np.max(np.abs(x_phase - x_time)))
    checks = [Check("position_from_reconstructed_time", bool(err <= 1e-12 * max(1.0, amp)),
                    err, 0.0, 1e-12),
              Check("time_at_reference_phase", clock.phase_clock_time(phi0, phi0, omega) == 0.0,
                    float(clock.phase_clock_time(phi0, phi0, omega)), 0.0)]
    series = {"phi": phi.tolist(), "t": t.tolist(), "x": x_phase.tolist()}
    return series, {"max_position_error": err}, checks


def _clock_quality(p, cfg, const, seed):
    ticks = clock.qubit_clock_ticks(p["omega"], p["tick_dt"], p["n_ticks"])
    etas = clock.tick_distinguishability(ticks, cfg)
    ideal = clock.stability_functional(etas, cfg)
    rng = np.random.default_rng(seed)
    jitter = rng.normal(p["jitter_mean"], p["jitter_sigma"], p["jitter_ticks"])
    noisy = clock.stability_functional(jitter, cfg)
    expected_sc = 1.0 / p["jitter_sigma"] ** 2
    eta_err = float(np.max(np.abs(etas - p["omega"] * p["tick_dt"])))
    checks = [
        Check("ideal_eta_constant", bool(eta_err <= 1e-10), eta_err, 0.0, 1e-10),
        Check("ideal_clock_perfect", ideal.perfect, ideal.perfect, True),
        _close("jitter_stability", noisy.s_c, expected_sc, 0.10),
    ]
    series = {"N": ticks.indices[1:].tolist(), "eta": etas.tolist()}
    summary = {"ideal_variance": ideal.variance, "ideal_s_c": ideal.s_c,
               "ideal_perfect": ideal.perfect, "jitter_variance": noisy.variance,
               "jitter_s_c": noisy.s_c}
    return series, summary, checks


def _depolarized(psi, r):
    return r * np.outer(psi, psi.conj()) + (1.0 - r) * np.eye(psi.size) / psi.size


def _mixed_qfi(p, cfg, const, seed):
    omega, t0 = p["omega"], p["t_probe"]
    hbar = const.hbar
    H = quantum.qubit_clock_hamiltonian(omega, const)

    def state_at(t):
        return dynamics.propagator(H, t, const) @ quantum.plus_state()

    grid = np.linspace(0.0, math.pi / omega, p["steps"] + 1)
    pure = np.array([state_at(t) for t in grid])

    rows = {"r": [], "F_Q": [], "expected_F_Q": [], "bures_length": [], "expected_bures": []}
    checks = []
    for r in p["r_values"]:
        rho = _depolarized(state_at(t0), r)
        drho = -1j * (H @ rho - rho @ H) / hbar
        fq = quantum.qfi_sld(rho, drho, cfg)
        path = quantum.StateTrajectory(grid, np.array([_depolarized(s, r) for s in pure]))
        length = quantum.bures_path_length(path, cfg)
        rows["r"].append(r)
        rows["F_Q"].append(fq)
        rows["expected_F_Q"].append(r**2 * omega**2)
        rows["bures_length"].append(length)
        rows["expected_bures"].append(0.5 * r * math.pi)
        checks.append(_close(f"qfi_r_squared_law[r={r:g}]", fq, r**2 * omega**2, 1e-6))
        checks.append(_close(f"bures_length[r={r:g}]", length, 0.5 * r * math.pi, 1e-6))

    pure_traj = quantum.StateTrajectory(grid, pure)
    fs = quantum.fs_path_length(pure_traj, cfg)
    bures = quantum.bures_path_length(pure_traj, cfg)
    checks.append(_close("bures_is_half_fs", bures, 0.5 * fs, 1e-6))
    rho_pure = np.outer(state_at(t0), state_at(t0).conj())
    fq_pure = quantum.qfi_sld(rho_pure, -1j * (H @ rho_pure - rho_pure @ H) / hbar, cfg)
    checks.append(_close("sld_matches_unitary_qfi", fq_pure,
                         quantum.qfi_unitary(state_at(t0), H, const), 1e-8))
    return rows, {"fs_length": fs, "bures_length_pure": bures}, checks


def _speed_limit(p, cfg, const, seed):
    cases = {
        "qubit": (np.array([-0.5, 0.5]) * const.hbar * p["omega"], np.array([0.5, 0.5])),
        "three_level": (np.asarray(p["energies"], float), np.asarray(p["weights"], float)),
    }
    rows = {"case": [], "DeltaH": [], "tau_bound": [], "t_perp": [], "oracle_t_perp": []}
    checks = []
    for name, (energies, weights) in cases.items():
        H = np.diag(energies).astype(complex)
        psi0 = np.sqrt(weights / weights.sum()).astype(complex)
        spread = quantum.energy_variance(psi0, H)
        bound = dynamics.mandelstam_tamm_bound(spread, const, cfg)
        t = np.linspace(0.0, p["t_max"], p["steps"] + 1)
        traj = dynamics.evolve_unitary(dynamics.UnitaryEvolutionSpec(H, psi0, t), const)
        t_perp = dynamics.orthogonalization_time(traj, H, const, cfg)
        # dense-grid oracle: bottom of the first dip of the survival probability
        dense = np.linspace(0.0, p["t_max"], 50 * p["steps"] + 1)
        w = np.abs(psi0) ** 2
        surv = np.abs(np.exp(-1j * np.outer(dense, energies) / const.hbar) @ w) ** 2
        hits = np.flatnonzero(surv <= 1e-3)
        oracle = None
        if hits.size:
            start = hits[0]
            above = np.flatnonzero(surv[start:] > 1e-3)
            stop = start + above[0] if above.size else surv.size
            bottom = start + int(np.argmin(surv[start:stop]))
            oracle = float(dense[bottom]) if surv[bottom] <= 1e-6 else None
        rows["case"].append(name)
        rows["DeltaH"].append(spread)
        rows["tau_bound"].append(bound)
        rows["t_perp"].append(t_perp)
        rows["oracle_t_perp"].append(oracle)
        if t_perp is None:
            checks.append(Check(f"{name}_orthogonalizes", False, None, "a time", None))
            continue
        checks.append(Check(f"{name}_respects_bound", bool(t_perp >= bound - 1e-9),
                            t_perp, bound, 1e-9))
        if oracle is not None:
            step = dense[1] - dense[0]
            checks.append(Check(f"{name}_matches_dense_oracle",
                                bool(abs(t_perp - oracle) <= 2 * step), t_perp, oracle, 2 * step))
        if name == "qubit":
            checks.append(_close("qubit_saturates_bound", t_perp, bound, 1e-6))
        else:
            checks.append(Check("three_level_strict", bool(t_perp > bound + 1e-9),
                                t_perp, bound, 1e-9))
    return rows, {}, checks


def _classical_path(p, cfg, const, seed):
    model = classical.bernoulli()
    a, b, n = p["p_start"], p["p_end"], p["samples"]
    lam = np.linspace(0.0, 1.0, n)
    line = classical.ParamTrajectory.from_function(lambda s: a + (b - a) * s, lam)
    cubic = classical.ParamTrajectory.from_function(lambda s: a + (b - a) * s**3, lam)
    expo = classical.ParamTrajectory.from_function(
        lambda s: a + (b - a) * (math.exp(s) - 1.0) / (math.e - 1.0), lam)
    profile = classical.path_length_profile(model, line, cfg)
    length = float(profile[-1])
    l_cubic = classical.path_length(model, cubic, cfg)
    l_expo = classical.path_length(model, expo, cfg)
    exact = 2.0 * (math.asin(math.sqrt(b)) - math.asin(math.sqrt(a)))
    tol = 10 * cfg.integ_refine_tol
    g_like = classical.fisher_metric(classical.gaussian_likelihood(), [0.0, 1.0], cfg).g
    g_err = float(np.max(np.abs(g_like - np.diag([1.0, 2.0]))))
    checks = [
        _close("closed_form_arcsine", length, exact, 1e-6),
        _close("reparameterization_cubic", l_cubic, length, tol),
        _close("reparameterization_exp", l_expo, length, tol),
        Check("gaussian_likelihood_fisher_matrix", bool(g_err <= 1e-8), g_err, 0.0, 1e-8),
    ]
    series = {"lambda": lam.tolist(), "theta": line.thetas[:, 0].tolist(),
              "Lambda": profile.tolist()}
    summary = {"Lambda_F": length, "Lambda_F_cubic": l_cubic, "Lambda_F_exp": l_expo,
               "closed_form": exact}
    return series, summary, checks


def _records(p, cfg, const, seed):
    rng = np.random.default_rng(seed)
    dim, length = p["dim"], p["length"]
    monotone = True
    unitary_gap = 0.0
    first = None
    for _ in range(p["n_sequences"]):
        seq = records.RecordSequence(
            np.array([random_density_operator(rng, dim) for _ in range(length)]))
        sums = records.record_partial_sums(seq, cfg)
        monotone &= bool(np.all(np.diff(sums) >= 0))
        first = (seq, sums) if first is None else first
        u = random_unitary(rng, dim)
        rho, sigma = seq.states[1], seq.states[0]
        d = records.relative_entropy(rho, sigma, cfg)
        d_u = records.relative_entropy(u @ rho @ u.conj().T, u @ sigma @ u.conj().T, cfg)
        unitary_gap = max(unitary_gap, abs(d - d_u))
    if p["states"] is not None:
        seq = records.RecordSequence.from_json(p["states"])
        first = (seq, records.record_partial_sums(seq, cfg))
        monotone &= bool(np.all(np.diff(first[1]) >= 0))

    diag = records.RecordSequence(np.array([np.diag([0.75, 0.25]), np.diag([0.5, 0.5])],
                                           dtype=complex))
    kl = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    checks = [
        Check("partial_sums_nondecreasing", monotone, monotone, True),
        _close("diagonal_example_kl", records.record_lambda(diag, cfg), kl, 1e-10,
               relative=False),
        Check("unitary_invariance", bool(unitary_gap <= 1e-10), unitary_gap, 0.0, 1e-10),
    ]
    seq, sums = first
    series = {"k": list(range(len(seq))), "Lambda_rec": sums.tolist()}
    return series, {"Lambda_rec": float(sums[-1])}, checks


SCENARIOS: dict[str, tuple[Callable, dict]] = {
    "qubit-clock": (_qubit_clock, {"omega": 1.0, "t_max": math.pi, "steps": 512}),
    "decay": (_decay, {"gamma": 0.5, "n0": 1.0, "n": math.exp(-2.0), "t_max": 10.0,
                       "steps": 100}),
    "phase-clock": (_phase_clock, {"omega": 2.0, "phi0": 0.3, "amplitude": 1.5,
                                   "samples": 100}),
    "clock-quality": (_clock_quality, {"omega": 1.0, "tick_dt": 0.1, "n_ticks": 32,
                                       "jitter_mean": 1.0, "jitter_sigma": 0.1,
                                       "jitter_ticks": 10000}),
    "mixed-qfi": (_mixed_qfi, {"omega": 1.0, "t_probe": 0.7, "r_values": [0.25, 0.5, 0.9],
                               "steps": 256}),
    "speed-limit": (_speed_limit, {"omega": 1.0, "energies": [0.0, 1.0, 3.0],
                                   "weights": [0.5, 0.25, 0.25], "t_max": 4.0,
                                   "steps": 800}),
    "classical-path": (_classical_path, {"p_start": 0.25, "p_end": 0.75, "samples": 33}),
    "records": (_records, {"n_sequences": 200, "length": 6, "dim": 3, "states": None}),
}


# -- configuration -----------------------------------------------------------

def _coerce(name: str, value: Any, default: Any) -> Any:
    try:
        if isinstance(default, bool):
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true")
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {name!r}: cannot use {value!r}") from None
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict
    numerics: NumericalConfig = field(default_factory=NumericalConfig)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    seed: int = 0
    output_format: str = "json"
    output_path: Optional[str] = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - {"scenario", "params", "numerics", "constants", "seed", "output"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        name = doc.get("scenario")
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
        defaults = SCENARIOS[name][1]
        given = dict(doc.get("params") or {})
        bad = set(given) - set(defaults)
        if bad:
            raise ConfigError(f"scenario {name!r} has no parameters {sorted(bad)}; "
                              f"known: {sorted(defaults)}")
        params = {k: _coerce(k, given.get(k, v), v) for k, v in defaults.items()}
        try:
            numerics = NumericalConfig.from_mapping(doc.get("numerics"))
            constants = PhysicalConstants.from_mapping(doc.get("constants"))
            seed = int(doc.get("seed", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        output = doc.get("output") or {}
        fmt = output.get("format", "json")
        if fmt not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}, got {fmt!r}")
        return cls(name, params, numerics, constants, seed, fmt, output.get("path"))


def apply_override(doc: dict, assignment: str) -> dict:
    """Apply a ``key=value`` override to a raw config document.

    Keys are dotted paths (``numerics.fd_step``, ``output.format``); a bare key
    other than ``scenario`` or ``seed`` addresses ``params``.  Values are parsed
    as JSON when possible and kept as strings otherwise.
    """
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    path = key.strip().split(".")
    if len(path) == 1 and path[0] not in ("scenario", "seed"):
        path = ["params"] + path
    target = doc
    for part in path[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise ConfigError(f"cannot set {key!r}")
    target[path[-1]] = value
    return doc


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    fn, _ = SCENARIOS[config.scenario]
    try:
        series, summary, checks = fn(config.params, config.numerics, config.constants,
                                     config.seed)
    except LambdaClockError as exc:
        annotated = copy.copy(exc)
        annotated.args = (f"scenario {config.scenario!r}: {exc}",) + exc.args[1:]
        raise annotated from exc
    return ScenarioReport(config.scenario, dict(config.params), series, summary, checks,
                          config.seed)


# -- output ------------------------------------------------------------------

def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _fmt(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, list):
        return json.dumps(value)
    return str(value)


def emit_report(report: ScenarioReport, fmt: str = "json") -> bytes:
    """Serialize a report as CSV or JSON bytes.

    CSV has one header row, one row per series sample, then ``#`` comment lines
    with the summary and checks.  Floats are written with 17 significant digits.
    """
    if fmt == "json":
        text = json.dumps(_plain(report.as_dict()), indent=2, allow_nan=False) + "\n"
        return text.encode()
    if fmt != "csv":
        raise ConfigError(f"unknown output format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(report.series)
    writer.writerow(columns)
    for row in zip(*(report.series[c] for c in columns)):
        writer.writerow(_fmt(v) for v in row)
    buf.write(f"# scenario={report.scenario}\n# seed={report.seed}\n")
    for key, value in report.params.items():
        buf.write(f"# param.{key}={_fmt(value)}\n")
    for key, value in report.summary.items():
        buf.write(f"# {key}={_fmt(value)}\n")
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        buf.write(f"# check {c.name} {status} measured={_fmt(c.measured)} "
                  f"expected={_fmt(c.expected)} tolerance={_fmt(c.tolerance)}\n")
    return buf.getvalue().encode()
