"""Unitary evolution, reparameterization by quantum path length, and speed limits."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .config import NumericalConfig, PhysicalConstants
from .exceptions import (
    DegenerateGenerator,
    DimensionMismatch,
    InvalidParameterization,
    LambdaClockError,
)
from .quantum import StateTrajectory, energy_variance, fs_segment_lengths
from .validation import check_hermitian, check_labels, check_pure_state

__all__ = [
    "PiecewiseHamiltonian",
    "UnitaryEvolutionSpec",
    "LambdaParameterization",
    "evolve_unitary",
    "propagator",
    "reparameterize_by_lambda",
    "lambda_schrodinger_residual",
    "mandelstam_tamm_bound",
    "orthogonalization_time",
    "trajectory_table",
    "trajectory_csv",
]


@dataclass(frozen=True, eq=False)
class PiecewiseHamiltonian:
    """Hamiltonian that is constant on consecutive time windows.

    ``hamiltonians[i]`` acts from ``starts[i]`` until ``starts[i + 1]``; the last
    one acts forever.  The first window also covers all earlier times.
    """

    starts: np.ndarray
    hamiltonians: tuple

    def __init__(self, starts: Sequence[float], hamiltonians: Sequence):
        starts = check_labels(starts, min_samples=1, name="segment starts")
        hams = tuple(check_hermitian(h, "Hamiltonian") for h in hamiltonians)
        if len(hams) != starts.size:
            raise DimensionMismatch("need one Hamiltonian per segment start")
        if len({h.shape for h in hams}) != 1:
            raise DimensionMismatch("all segment Hamiltonians must share a dimension")
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "hamiltonians", hams)

    @property
    def dim(self) -> int:
        return self.hamiltonians[0].shape[0]

    def index_at(self, t: float) -> int:
        return max(int(np.searchsorted(self.starts, t, side="right")) - 1, 0)

    def at(self, t: float) -> np.ndarray:
        return self.hamiltonians[self.index_at(t)]


HamiltonianLike = Union[np.ndarray, PiecewiseHamiltonian]


def _as_piecewise(H: HamiltonianLike) -> PiecewiseHamiltonian:
    if isinstance(H, PiecewiseHamiltonian):
        return H
    return PiecewiseHamiltonian([0.0], [H])


@dataclass(frozen=True, eq=False)
class UnitaryEvolutionSpec:
    hamiltonian: HamiltonianLike
    initial_state: np.ndarray
    t_grid: np.ndarray

    def __post_init__(self):
        t_grid = check_labels(self.t_grid, name="t_grid")
        psi0 = check_pure_state(self.initial_state)
        H = self.hamiltonian
        if not isinstance(H, PiecewiseHamiltonian):
            H = check_hermitian(H, "Hamiltonian")
        dim = H.dim if isinstance(H, PiecewiseHamiltonian) else H.shape[0]
        if dim != psi0.size:
            raise DimensionMismatch(f"Hamiltonian is {dim}-dim, state is {psi0.size}-dim")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "initial_state", psi0)
        object.__setattr__(self, "t_grid", t_grid)


def propagator(H, dt: float, constants: PhysicalConstants | None = None) -> np.ndarray:
    """``exp(-i H dt / hbar)`` via the Hermitian eigendecomposition."""
    hbar = (constants or PhysicalConstants()).hbar
    evals, evecs = np.linalg.eigh(np.asarray(H, dtype=complex))
    return (evecs * np.exp(-1j * evals * dt / hbar)) @ evecs.conj().T


def _evolve_segment(H, psi, dt, hbar):
    evals, evecs = np.linalg.eigh(H)
    return evecs @ (np.exp(-1j * evals * dt / hbar) * (evecs.conj().T @ psi))


def _switch_times(H: PiecewiseHamiltonian, t0: float, t1: float) -> list:
    return [s for s in H.starts[1:] if t0 < s < t1]


def _evolve_between(H: PiecewiseHamiltonian, psi, t0, t1, hbar):
    """Propagate from ``t0`` to ``t1`` splitting at Hamiltonian switches."""
    cuts = [t0] + _switch_times(H, t0, t1) + [t1]
    for a, b in zip(cuts[:-1], cuts[1:]):
        psi = _evolve_segment(H.at(a), psi, b - a, hbar)
    return psi


def evolve_unitary(spec: UnitaryEvolutionSpec,
                   constants: PhysicalConstants | None = None) -> StateTrajectory:
    """Solve the Schrödinger equation on ``spec.t_grid`` starting at ``t_grid[0]``.

    A constant Hamiltonian is applied in closed form from the initial time to
    every sample; piecewise Hamiltonians are stepped sample to sample.
    """
    hbar = (constants or PhysicalConstants()).hbar
    t = spec.t_grid
    psi0 = spec.initial_state
    states = np.empty((t.size, psi0.size), dtype=complex)
    states[0] = psi0
    H = spec.hamiltonian
    if isinstance(H, PiecewiseHamiltonian):
        for k in range(1, t.size):
            states[k] = _evolve_between(H, states[k - 1], t[k - 1], t[k], hbar)
    else:
        evals, evecs = np.linalg.eigh(H)
        coeffs = evecs.conj().T @ psi0
        phases = np.exp(-1j * np.outer(t[1:] - t[0], evals) / hbar)
        states[1:] = (phases * coeffs) @ evecs.T
    return StateTrajectory(t, states, label="t", validate=False)


@dataclass(frozen=True, eq=False)
class LambdaParameterization:
    """A trajectory relabelled by accumulated quantum distinguishability.

    ``valid`` is false exactly when some segment had an energy spread at or
    below ``degeneracy_eps``; ``valid_segments`` then lists the maximal sample
    index ranges ``(start, stop)`` (inclusive) on which the labelling is usable.
    ``crosscheck_error`` is the largest relative gap between the accumulated
    Fubini-Study length and the integral of ``2 Delta H / hbar``.
    """

    lambdas: np.ndarray
    states: np.ndarray
    times: np.ndarray
    delta_h: np.ndarray
    valid: bool
    invalid_reason: Optional[str] = None
    valid_segments: list = field(default_factory=list)
    crosscheck_error: float = 0.0

    @property
    def pairs(self):
        return list(zip(self.lambdas.tolist(), self.states))

    def __len__(self):
        return self.lambdas.size


def _interval_hamiltonians(H: PiecewiseHamiltonian, times) -> list:
    out = []
    for a, b in zip(times[:-1], times[1:]):
        if _switch_times(H, a, b):
            raise LambdaClockError(
                f"Hamiltonian switches inside ({a}, {b}); put switch times on the grid")
        out.append(H.at(a))
    return out


def reparameterize_by_lambda(traj: StateTrajectory, H: HamiltonianLike,
                             cfg: NumericalConfig | None = None,
                             constants: PhysicalConstants | None = None
                             ) -> LambdaParameterization:
    """Label each sample of a unitary trajectory by its accumulated FS length.

    Degenerate segments (energy spread at or below ``degeneracy_eps``) add no
    length and mark the result invalid; nothing is raised because a stationary
    state is physics, not a usage error.
    """
    cfg = cfg or NumericalConfig()
    hbar = (constants or PhysicalConstants()).hbar
    pw = _as_piecewise(H)
    times, states = traj.times, traj.states
    seg_h = _interval_hamiltonians(pw, times)
    dt = np.diff(times)

    mid_spread = np.array([
        energy_variance(_evolve_segment(h, states[k], 0.5 * dt[k], hbar), h)
        for k, h in enumerate(seg_h)
    ])
    degenerate = mid_spread <= cfg.degeneracy_eps

    lengths = fs_segment_lengths(traj, cfg)
    lengths[degenerate] = 0.0
    lambdas = np.concatenate([[0.0], np.cumsum(lengths)])
    expected = np.concatenate([[0.0], np.cumsum(2.0 * mid_spread * dt / hbar)])
    scale = np.maximum(np.abs(expected), np.finfo(float).tiny)
    gaps = np.abs(lambdas - expected)
    crosscheck = float(np.max(np.where(expected > 0, gaps / scale, gaps)))

    sample_h = [pw.at(t) for t in times[:-1]] + [seg_h[-1]]
    delta_h = np.array([energy_variance(s, h) for s, h in zip(states, sample_h)])

    segments, start = [], None
    for k, bad in enumerate(degenerate):
        if not bad and start is None:
            start = k
        if bad and start is not None:
            segments.append((start, k))
            start = None
    if start is not None:
        segments.append((start, len(degenerate)))

    reason = None
    if degenerate.any():
        first = int(np.argmax(degenerate))
        reason = (f"DeltaH=0 (<= {cfg.degeneracy_eps:g}) on segment {first}: the state only "
                  "acquires a global phase, so Lambda_Q is not a valid evolution parameter")
    return LambdaParameterization(lambdas, states, times, delta_h, not degenerate.any(),
                                  reason, segments, crosscheck)


def _parallel_transport(states: np.ndarray) -> np.ndarray:
    """Fix phases so that consecutive overlaps are real and positive."""
    out = states.copy()
    for k in range(1, out.shape[0]):
        ov = np.vdot(out[k], out[k - 1])
        if abs(ov) > 0:
            out[k] *= ov / abs(ov)
    return out


def lambda_schrodinger_residual(param: LambdaParameterization, H: HamiltonianLike,
                                cfg: NumericalConfig | None = None,
                                constants: PhysicalConstants | None = None,
                                derivatives=None) -> float:
    """Largest violation of ``i dpsi/dLambda = H psi / (2 Delta H)`` on the grid.

    Derivatives come from second-order finite differences on the Lambda grid
    after phase-aligning the samples (or from ``derivatives`` if supplied).
    Each residual is minimized over the local phase gauge, i.e. over adding a
    real multiple of ``psi`` (which is what a Lambda-dependent phase does).
    Pieces with different Hamiltonians are differentiated separately.
    """
    if not param.valid:
        raise InvalidParameterization(param.invalid_reason or "parameterization is not valid")
    pw = _as_piecewise(H)
    lam, times = param.lambdas, param.times
    states = np.asarray(param.states, dtype=complex)
    piece = np.array([pw.index_at(t) for t in times[:-1]] + [pw.index_at(times[-2])])
    sample_h = [pw.hamiltonians[i] for i in piece]

    if derivatives is not None:
        deriv = np.asarray(derivatives, dtype=complex)
        if deriv.shape != states.shape:
            raise DimensionMismatch("need one derivative vector per sample")
        aligned = states
    else:
        aligned = _parallel_transport(states)
        deriv = np.empty_like(aligned)
        bounds = np.flatnonzero(np.diff(piece)) + 1
        for idx in np.split(np.arange(lam.size), bounds):
            if idx.size < 3:
                raise InvalidParameterization("each Hamiltonian piece needs at least 3 samples")
            deriv[idx] = np.gradient(aligned[idx], lam[idx], axis=0, edge_order=2)

    worst = 0.0
    for psi, d, h, spread in zip(aligned, deriv, sample_h, param.delta_h):
        v = 1j * d - (h @ psi) / (2.0 * spread)
        r2 = float(np.vdot(v, v).real) - float(np.vdot(psi, v).real) ** 2
        worst = max(worst, float(np.sqrt(max(r2, 0.0))))
    return worst


def mandelstam_tamm_bound(delta_h: float, constants: PhysicalConstants | None = None,
                          cfg: NumericalConfig | None = None) -> float:
    """Minimal time ``pi hbar / (2 Delta H)`` to reach an orthogonal state."""
    cfg = cfg or NumericalConfig()
    hbar = (constants or PhysicalConstants()).hbar
    if not delta_h > cfg.degeneracy_eps:
        raise DegenerateGenerator(
            f"Delta H = {delta_h!r} is not above {cfg.degeneracy_eps:g}: no orthogonalization")
    return float(np.pi * hbar / (2.0 * delta_h))


def _bisect(fn, lo, hi, iterations=200):
    f_lo = fn(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = fn(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def orthogonalization_time(traj: StateTrajectory, H=None,
                           constants: PhysicalConstants | None = None,
                           cfg: NumericalConfig | None = None) -> Optional[float]:
    """First time at which the state becomes orthogonal to the initial one.

    Local minima of the survival probability ``|<psi_0|psi_t>|^2`` on the grid
    are candidates.  With a time-independent ``H`` each candidate is refined by
    bisection on the derivative of the survival probability between the
    bracketing samples.  Returns ``None`` if no candidate drops to
    ``orthogonality_tol``.
    """
    cfg = cfg or NumericalConfig()
    hbar = (constants or PhysicalConstants()).hbar
    psi = traj.states
    t = traj.times
    q = np.abs(psi @ psi[0].conj()) ** 2
    tol = cfg.orthogonality_tol

    survival = rate = None
    if H is not None:
        evals, evecs = np.linalg.eigh(check_hermitian(H, "Hamiltonian"))
        weights = np.abs(evecs.conj().T @ psi[0]) ** 2
        freqs = evals / hbar

        def amplitude(s):
            return np.sum(weights * np.exp(-1j * freqs * (s - t[0])))

        def survival(s):
            return abs(amplitude(s)) ** 2

        def rate(s):
            a = amplitude(s)
            da = np.sum(-1j * freqs * weights * np.exp(-1j * freqs * (s - t[0])))
            return 2.0 * float(np.real(np.conj(a) * da))

    n = t.size
    for k in range(1, n):
        left = q[k] <= q[k - 1]
        right = k == n - 1 or q[k] <= q[k + 1]
        if not (left and right):
            continue
        if rate is None:
            if q[k] <= tol:
                return float(t[k])
            continue
        lo, hi = t[k - 1], t[min(k + 1, n - 1)]
        if rate(lo) < 0 < rate(hi):
            root = _bisect(rate, lo, hi)
            if survival(root) <= tol:
                return float(root)
        if q[k] <= tol:
            return float(t[k])
    return None


def trajectory_table(param: LambdaParameterization) -> dict:
    """Columns ``t, Lambda, re_i, im_i, ..., DeltaH, overlap`` as ordered lists."""
    states = np.asarray(param.states)
    table = {"t": param.times.tolist(), "Lambda": param.lambdas.tolist()}
    for i in range(states.shape[1]):
        table[f"re_{i}"] = states[:, i].real.tolist()
        table[f"im_{i}"] = states[:, i].imag.tolist()
    table["DeltaH"] = param.delta_h.tolist()
    table["overlap"] = (np.abs(states @ states[0].conj()) ** 2).tolist()
    return table


def trajectory_csv(param: LambdaParameterization) -> str:
    table = trajectory_table(param)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.keys())
    for row in zip(*table.values()):
        writer.writerow(format(v, ".17g") for v in row)
    return buf.getvalue()
