"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from lambda_clock import (
    CalibrationMap,
    ParamTrajectory,
    StateTrajectory,
    UnitaryEvolutionSpec,
    bernoulli,
    bures_path_length,
    check_score,
    decay_lambda,
    decay_population,
    decay_time,
    energy_variance,
    evolve_unitary,
    exponential_rate,
    fisher_metric,
    fs_line_element,
    fs_path_length,
    fs_path_profile,
    gaussian_likelihood,
    gaussian_mean,
    lambda_schrodinger_residual,
    mandelstam_tamm_bound,
    orthogonalization_time,
    path_length,
    plus_state,
    projector,
    qfi_sld,
    qfi_unitary,
    qubit_clock_ticks,
    qubit_clock_hamiltonian,
    RecordSequence,
    record_lambda,
    record_partial_sums,
    relative_entropy,
    reparameterize_by_lambda,
    stability_functional,
    tick_distinguishability,
    verify_cramer_rao_mc,
)
from lambda_clock.ensembles import (
    random_density_operator,
    random_hermitian,
    random_pure_state,
    random_unitary,
)

from .conftest import ACCEPTANCE_RESULTS


def verdict(number, title, checks):
    """Record and print one line for a criterion; ``checks`` maps label -> (ok, detail)."""
    ok = all(passed for passed, _ in checks.values())
    details = "; ".join(f"{k}={d}" for k, (_, d) in checks.items())
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} [{details}]"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    failed = [k for k, (passed, _) in checks.items() if not passed]
    assert ok, f"criterion {number} failed: {failed}"


def qubit_trajectory(omega, n, t_max=math.pi):
    H = qubit_clock_hamiltonian(omega)
    t = np.linspace(0.0, t_max, n)
    return H, evolve_unitary(UnitaryEvolutionSpec(H, plus_state(), t))


def test_criterion_01_qubit_clock_identity():
    omega = 1.0
    start = time.perf_counter()
    H, traj = qubit_trajectory(omega, 513)
    profile = fs_path_profile(traj)
    fq = qfi_unitary(plus_state(), H)
    elapsed = time.perf_counter() - start
    rel = np.max(np.abs(profile[1:] - omega * traj.times[1:]) / (omega * traj.times[1:]))
    verdict(1, "qubit clock identity", {
        "Lambda_rel_err": (rel <= 1e-6 and profile[0] == 0.0, f"{rel:.2e}"),
        "F_Q_err": (abs(fq - omega**2) <= 1e-12, f"{abs(fq - omega**2):.2e}"),
        "runtime_s": (elapsed < 1.0, f"{elapsed:.3f}"),
    })


def test_criterion_02_overlap_law():
    omega = 1.0
    _, traj = qubit_trajectory(omega, 513)
    overlap = np.abs(traj.states @ traj.states[0].conj()) ** 2
    err = np.max(np.abs(overlap - np.cos(omega * traj.times / 2) ** 2))
    verdict(2, "overlap law", {"max_err": (err <= 1e-10, f"{err:.2e}")})


def test_criterion_03_speed_limit():
    omega = 1.0
    H, traj = qubit_trajectory(omega, 513, t_max=2 * math.pi)
    t_perp = orthogonalization_time(traj, H)
    bound = mandelstam_tamm_bound(energy_variance(plus_state(), H))
    rel = abs(t_perp - math.pi / omega) / (math.pi / omega)

    H3 = np.diag([0.0, 1.0, 3.0]).astype(complex)
    psi3 = np.sqrt([0.5, 0.25, 0.25]).astype(complex)
    t3 = np.linspace(0.0, 4.0, 801)
    traj3 = evolve_unitary(UnitaryEvolutionSpec(H3, psi3, t3))
    t_perp3 = orthogonalization_time(traj3, H3)
    bound3 = mandelstam_tamm_bound(energy_variance(psi3, H3))
    verdict(3, "speed-limit saturation", {
        "t_perp_rel_err": (rel <= 1e-6, f"{rel:.2e}"),
        "qubit_respects_bound": (t_perp >= bound - 1e-9, f"{t_perp:.12f}>={bound:.12f}"),
        "three_level_strict": (t_perp3 is not None and t_perp3 > bound3 + 1e-9,
                               f"{t_perp3:.6f}>{bound3:.6f}"),
    })


def test_criterion_04_lambda_schrodinger_residual():
    residuals = []
    for n in (1024, 2048, 4096):
        H, traj = qubit_trajectory(1.0, n)
        residuals.append(lambda_schrodinger_residual(reparameterize_by_lambda(traj, H), H))
    ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]]
    H, still = qubit_trajectory(1.0, 64)
    still = evolve_unitary(UnitaryEvolutionSpec(H, np.array([1, 0], dtype=complex), still.times))
    param = reparameterize_by_lambda(still, H)
    verdict(4, "Lambda-Schrodinger residual", {
        "residual_1024": (residuals[0] <= 1e-4, f"{residuals[0]:.2e}"),
        "doubling_ratios": (min(ratios) >= 3.5, ",".join(f"{r:.2f}" for r in ratios)),
        "eigenstate_invalid": (not param.valid and "DeltaH=0" in (param.invalid_reason or ""),
                               f"valid={param.valid}"),
    })


def test_criterion_05_pure_mixed_consistency():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 6))
        psi, H = random_pure_state(rng, n), random_hermitian(rng, n)
        rho = projector(psi)
        fq = qfi_sld(rho, -1j * (H @ rho - rho @ H))
        worst = max(worst, abs(fq - qfi_unitary(psi, H)) / qfi_unitary(psi, H))
    omega = 1.0
    H = qubit_clock_hamiltonian(omega)
    psi_t = evolve_unitary(UnitaryEvolutionSpec(H, plus_state(), [0.0, 0.7])).states[-1]
    mixed_err = 0.0
    for r in (0.25, 0.5, 0.9):
        rho = r * projector(psi_t) + (1 - r) * np.eye(2) / 2
        fq = qfi_sld(rho, -1j * (H @ rho - rho @ H))
        mixed_err = max(mixed_err, abs(fq - r**2 * omega**2) / (r**2 * omega**2))
    verdict(5, "pure/mixed consistency", {
        "rank1_rel_err": (worst <= 1e-8, f"{worst:.2e}"),
        "depolarized_rel_err": (mixed_err <= 1e-6, f"{mixed_err:.2e}"),
    })


def test_criterion_06_bures_factor():
    _, traj = qubit_trajectory(1.0, 129, t_max=math.pi / 2)
    fs = fs_path_length(traj)
    bures = bures_path_length(traj.to_density())
    rel = abs(bures - 0.5 * fs) / (0.5 * fs)
    verdict(6, "Bures factor", {"rel_err": (rel <= 1e-6, f"{rel:.2e}")})


def test_criterion_07_decay_reconstruction():
    rng = np.random.default_rng(7)
    gamma = rng.uniform(0.01, 5.0, 100)
    t = rng.uniform(0.0, 20.0, 100)
    n0 = 1.0
    recovered = decay_time(decay_lambda(decay_population(n0, gamma, t), n0), gamma)
    err = np.max(np.abs(recovered - t) / np.maximum(t, 1.0))
    verdict(7, "decay reconstruction", {"max_err": (err <= 1e-12, f"{err:.2e}")})


def test_criterion_08_classical_fisher_oracles():
    probes = np.linspace(0.02, 0.98, 50)
    bern = max(abs(fisher_metric(bernoulli(), [p]).g[0, 0] - 1 / (p * (1 - p))) for p in probes)
    gauss = max(abs(fisher_metric(gaussian_mean(sigma=s), [mu]).g[0, 0] - 1 / s**2)
                for s in (0.5, 1.0, 2.0) for mu in (-3.0, 0.0, 4.0))
    traj = ParamTrajectory(np.array([0.0, 1.0]), np.array([0.25, 0.75]))
    exact = 2 * (math.asin(math.sqrt(0.75)) - math.asin(math.sqrt(0.25)))
    rel = abs(path_length(bernoulli(), traj) - exact) / exact
    verdict(8, "classical Fisher oracles", {
        "bernoulli_abs_err": (bern <= 1e-10, f"{bern:.2e}"),
        "gaussian_abs_err": (gauss <= 1e-8, f"{gauss:.2e}"),
        "path_rel_err": (rel <= 1e-6, f"{rel:.2e}"),
    })


def test_criterion_09_cramer_rao_monte_carlo():
    start = time.perf_counter()
    b = verify_cramer_rao_mc(bernoulli(), [0.5], np.mean, n_trials=10_000, seed=0, n_samples=100)
    g = verify_cramer_rao_mc(gaussian_mean(), [0.0], np.mean, n_trials=10_000, seed=0)
    elapsed = time.perf_counter() - start
    verdict(9, "Cramer-Rao Monte Carlo", {
        "bernoulli": (b.satisfied, f"{b.empirical_var:.6f}>={b.bound:.6f}*0.97"),
        "gaussian": (g.satisfied, f"{g.empirical_var:.5f}>={g.bound:.5f}*0.97"),
        "runtime_s": (elapsed < 10.0, f"{elapsed:.2f}"),
    })


def test_criterion_10_clock_quality():
    ideal = stability_functional(tick_distinguishability(qubit_clock_ticks(1.0, 0.1, 32)))
    jitter = stability_functional(np.random.default_rng(0).normal(1.0, 0.1, 10_000))
    rel = abs(jitter.s_c - 100.0) / 100.0
    verdict(10, "clock quality", {
        "ideal_perfect": (ideal.perfect and ideal.variance < 1e-15, f"var={ideal.variance:.1e}"),
        "jitter_S_C": (rel <= 0.10, f"{jitter.s_c:.2f}"),
    })


def test_criterion_11_records():
    rng = np.random.default_rng(11)
    monotone = True
    gap = 0.0
    for _ in range(200):
        seq = RecordSequence(np.array([random_density_operator(rng, 3) for _ in range(6)]))
        monotone &= bool(np.all(np.diff(record_partial_sums(seq)) >= 0))
        u = random_unitary(rng, 3)
        rho, sigma = seq.states[1], seq.states[0]
        rotated = relative_entropy(u @ rho @ u.conj().T, u @ sigma @ u.conj().T)
        gap = max(gap, abs(rotated - relative_entropy(rho, sigma)))
    diag = RecordSequence(np.array([np.diag([0.75, 0.25]), np.diag([0.5, 0.5])], dtype=complex))
    kl = 0.5 * math.log(0.5 / 0.75) + 0.5 * math.log(0.5 / 0.25)
    kl_err = abs(record_lambda(diag) - kl)
    verdict(11, "records", {
        "partial_sums_monotone": (monotone, str(monotone)),
        "diagonal_kl_err": (kl_err <= 1e-10, f"{kl_err:.2e}"),
        "unitary_gap": (gap <= 1e-10, f"{gap:.2e}"),
    })


def _cli_check():
    exe = shutil.which("lambda-clock")
    cmd = [exe, "check"] if exe else [sys.executable, "-m", "lambda_clock.cli", "check"]
    return subprocess.run(cmd, capture_output=True, text=True)


def test_criterion_12_property_suite():
    rng = np.random.default_rng(12)
    checks = {}

    # classical reparameterization invariance, lambda -> lambda^3 and e^lambda
    tol = 1e-9
    lam = np.linspace(0.0, 1.0, 17)
    base = path_length(bernoulli(), ParamTrajectory.from_function(lambda s: 0.25 + 0.5 * s, lam))
    relabels = [lambda s: s**3, lambda s: (math.exp(s) - 1) / (math.e - 1)]
    worst = max(abs(path_length(bernoulli(), ParamTrajectory.from_function(
        lambda s, f=f: 0.25 + 0.5 * f(s), lam)) - base) / base for f in relabels)
    checks["classical_reparam"] = (worst <= 10 * tol, f"{worst:.1e}")

    # FS reparameterization: quadratically stretched sampling of the same path
    H = qubit_clock_hamiltonian(1.0)
    uniform = np.linspace(0.0, math.pi, 257)
    stretched = math.pi * np.linspace(0.0, 1.0, 257) ** 2
    lengths = [fs_path_length(evolve_unitary(UnitaryEvolutionSpec(H, plus_state(), t)))
               for t in (uniform, stretched)]
    fs_gap = abs(lengths[0] - lengths[1]) / lengths[0]
    checks["fs_reparam"] = (fs_gap <= 1e-6, f"{fs_gap:.1e}")

    # gauge invariance of the FS line element, 100 random cases
    gauge = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        psi = random_pure_state(rng, n)
        dpsi = 1e-2 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        phase, eps = np.exp(1j * rng.uniform(0, 2 * np.pi)), rng.uniform(-1, 1)
        moved = fs_line_element(phase * psi, phase * (dpsi + 1j * eps * psi))
        gauge = max(gauge, abs(moved - fs_line_element(psi, dpsi)))
    checks["fs_gauge"] = (gauge <= 1e-10, f"{gauge:.1e}")

    # metric symmetry / PSD and score agreement at 100 random points per model
    draws = [
        (bernoulli(), lambda: [rng.uniform(0.02, 0.98)]),
        (gaussian_mean(), lambda: [rng.uniform(-10, 10)]),
        (exponential_rate(), lambda: [rng.uniform(0.5, 20)]),
        (gaussian_likelihood(), lambda: [rng.uniform(-10, 10), rng.uniform(0.5, 3.0)]),
    ]
    asym, neg, score_gap = 0.0, 0.0, 0.0
    for model, draw in draws:
        for k in range(100):
            theta = draw()
            g = fisher_metric(model, theta).g
            asym = max(asym, float(np.max(np.abs(g - g.T))))
            neg = max(neg, -float(np.linalg.eigvalsh(g).min()) / np.linalg.norm(g, 2))
            if k < 5:
                score_gap = max(score_gap, check_score(model, theta))
    checks["metric_symmetric"] = (asym <= 1e-12, f"{asym:.1e}")
    checks["metric_psd"] = (neg <= 1e-10, f"{neg:.1e}")
    checks["score_fd"] = (score_gap <= 1e-5, f"{score_gap:.1e}")

    # calibration-map round trip over 1000 probes
    lam_k = np.cumsum(rng.uniform(0.01, 1.0, 50))
    t_k = np.cumsum(rng.uniform(0.01, 1.0, 50))
    cal = CalibrationMap().fit(lam_k, t_k)
    probes = rng.uniform(lam_k[0], lam_k[-1], 1000)
    trip = float(np.max(np.abs(cal.inverse(cal.predict(probes)) - probes)))
    checks["calibration_round_trip"] = (trip <= 1e-12, f"{trip:.1e}")

    result = _cli_check()
    checks["lambda_clock_check_exit"] = (result.returncode == 0, str(result.returncode))
    verdict(12, "property suite", checks)
