"""Fubini-Study and Bures geometry of quantum state trajectories.

Pure states are complex vectors, density operators and observables are
complex square matrices; all are plain numpy arrays checked by
:mod:`lambda_clock.validation`.  Finite path lengths are built from
gauge-invariant overlaps, so arbitrary per-sample global phases do not matter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import NumericalConfig, PhysicalConstants
from .exceptions import DimensionMismatch, InvalidState, UndersampledTrajectory
from .validation import (
    check_compatible,
    check_density_operator,
    check_hermitian,
    check_labels,
    check_pure_state,
    check_traceless_hermitian,
)

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "StateTrajectory",
    "qubit_clock_hamiltonian",
    "plus_state",
    "projector",
    "fs_line_element",
    "energy_variance",
    "qfi_unitary",
    "qfi_sld",
    "fs_distance",
    "fs_segment_lengths",
    "fs_path_profile",
    "fs_path_length",
    "bures_segment_lengths",
    "bures_path_profile",
    "bures_path_length",
    "encode_array",
    "decode_state",
    "decode_operator",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# consecutive samples must overlap at least this much for chords to track the arc
MIN_STEP_OVERLAP = 0.9


def qubit_clock_hamiltonian(omega: float = 1.0,
                            constants: PhysicalConstants | None = None) -> np.ndarray:
    hbar = (constants or PhysicalConstants()).hbar
    return 0.5 * hbar * omega * SIGMA_Z


def plus_state() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def projector(psi) -> np.ndarray:
    psi = check_pure_state(psi)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Strictly ordered samples of a quantum state path.

    ``states`` has shape ``(K, n)`` for pure states or ``(K, n, n)`` for density
    operators.  ``label`` names the ordering parameter (``"t"`` for external
    time, anything else for a generic path label).
    """

    times: np.ndarray
    states: np.ndarray
    label: str = "t"
    validate: bool = True

    def __post_init__(self):
        times = check_labels(self.times, name="trajectory times")
        states = np.asarray(self.states, dtype=complex)
        if states.ndim not in (2, 3) or states.shape[0] != times.size:
            raise DimensionMismatch(
                f"expected one state per time sample, got states of shape {states.shape}")
        if states.ndim == 3 and states.shape[1] != states.shape[2]:
            raise DimensionMismatch("density operators must be square")
        if self.validate:
            check = check_pure_state if states.ndim == 2 else check_density_operator
            for s in states:
                check(s)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def kind(self) -> str:
        return "pure" if self.states.ndim == 2 else "mixed"

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return self.times.size

    def to_density(self) -> "StateTrajectory":
        """Embed a pure-state trajectory as rank-one density operators."""
        if self.kind == "mixed":
            return self
        rhos = np.einsum("ki,kj->kij", self.states, self.states.conj())
        return StateTrajectory(self.times, rhos, self.label, validate=False)


def fs_line_element(psi, dpsi) -> float:
    """Fubini-Study length ``2 sqrt(<dpsi|dpsi> - |<psi|dpsi>|^2)``.

    Unchanged when ``dpsi`` picks up a component along ``psi`` with imaginary
    coefficient, i.e. under local phase changes.
    """
    psi = check_pure_state(psi)
    dpsi = np.asarray(dpsi, dtype=complex)
    if dpsi.shape != psi.shape:
        raise DimensionMismatch(f"dpsi has shape {dpsi.shape}, psi has {psi.shape}")
    value = float(np.vdot(dpsi, dpsi).real) - abs(np.vdot(psi, dpsi)) ** 2
    return 2.0 * float(np.sqrt(max(value, 0.0)))


def energy_variance(psi, H) -> float:
    """Energy spread ``Delta H = sqrt(<H^2> - <H>^2)`` (a standard deviation,
    despite the conventional name)."""
    psi = check_pure_state(psi)
    H = check_hermitian(H, "Hamiltonian")
    check_compatible(H, psi, "Hamiltonian and state")
    h_psi = H @ psi
    mean = np.vdot(psi, h_psi).real
    # norm of the centred vector avoids cancellation in <H^2> - <H>^2
    return float(np.linalg.norm(h_psi - mean * psi))


def qfi_unitary(psi, H, constants: PhysicalConstants | None = None) -> float:
    """Quantum Fisher information ``4 (Delta H)^2 / hbar^2`` for time encoding."""
    hbar = (constants or PhysicalConstants()).hbar
    return 4.0 * energy_variance(psi, H) ** 2 / hbar**2


def qfi_sld(rho, drho, cfg: NumericalConfig | None = None) -> float:
    """Quantum Fisher information of ``rho`` along the tangent ``drho``.

    Uses the spectral form of the symmetric logarithmic derivative,
    ``F = 2 sum_{ij} |<i|drho|j>|^2 / (l_i + l_j)``, dropping eigenvalue pairs
    with ``l_i + l_j <= eig_cutoff * tr(rho)``.
    """
    cfg = cfg or NumericalConfig()
    rho = check_density_operator(rho)
    drho = check_traceless_hermitian(drho, rho.shape[0])
    return _qfi_sld(rho, drho, cfg.eig_cutoff)


def _qfi_sld(rho, drho, eig_cutoff):
    evals, evecs = np.linalg.eigh(rho)
    d = evecs.conj().T @ drho @ evecs
    pair = evals[:, None] + evals[None, :]
    keep = pair > eig_cutoff * float(np.trace(rho).real)
    return float(2.0 * np.sum(np.abs(d[keep]) ** 2 / pair[keep]))


def _chords(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``2 arccos |<a|b>|``, evaluated as ``2 atan2(|b_perp|, |<a|b>|)``.

    The arccos form loses half the digits near overlap 1; the component of
    ``b`` orthogonal to ``a`` keeps full precision for short steps.
    """
    ov = np.einsum("ki,ki->k", a.conj(), b)
    perp = np.linalg.norm(b - ov[:, None] * a, axis=1)
    return 2.0 * np.arctan2(perp, np.abs(ov))


def fs_distance(psi, phi) -> float:
    """Fubini-Study geodesic distance ``2 arccos |<psi|phi>|``."""
    psi = np.asarray(psi, dtype=complex)[None, :]
    phi = np.asarray(phi, dtype=complex)[None, :]
    return float(_chords(psi, phi)[0])


def _pair_richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """Correct per-segment lengths using merged-pair estimates.

    ``fine`` holds K segment estimates and ``coarse`` the estimate over each
    pair ``(2j, 2j+1)``.  Both carry a leading local error ``c s^3``, with ``s``
    the segment's own length, so the pair mismatch fixes ``c`` locally.  An odd
    trailing segment borrows the constant of its neighbouring pair.
    """
    out = fine.copy()
    n_pairs = coarse.size
    c = np.zeros(n_pairs)
    a, b = fine[0:2 * n_pairs:2], fine[1:2 * n_pairs:2]
    denom = 3.0 * a * b * (a + b)
    ok = denom > 1e-300
    c[ok] = (a[ok] + b[ok] - coarse[ok]) / denom[ok]
    out[0:2 * n_pairs:2] += c * a**3
    out[1:2 * n_pairs:2] += c * b**3
    if fine.size % 2 and n_pairs:
        out[-1] += c[-1] * fine[-1] ** 3
    return out


def _require_kind(traj: StateTrajectory, kind: str):
    if traj.kind != kind:
        raise InvalidState(f"expected a {kind}-state trajectory, got {traj.kind}")


def fs_segment_lengths(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Fubini-Study length of each segment between consecutive samples."""
    _require_kind(traj, "pure")
    psi = traj.states
    overlaps = np.abs(np.einsum("ki,ki->k", psi[:-1].conj(), psi[1:]))
    if np.any(overlaps <= MIN_STEP_OVERLAP):
        k = int(np.argmax(overlaps <= MIN_STEP_OVERLAP))
        raise UndersampledTrajectory(
            f"overlap {overlaps[k]:.4f} between samples {k} and {k + 1} is too small; "
            "sample the trajectory more finely")
    fine = _chords(psi[:-1], psi[1:])
    n_pairs = (len(traj) - 1) // 2
    coarse = _chords(psi[0:2 * n_pairs:2], psi[2:2 * n_pairs + 1:2])
    return _pair_richardson(fine, coarse)


def fs_path_profile(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Cumulative Fubini-Study length at each sample, starting from 0."""
    return np.concatenate([[0.0], np.cumsum(fs_segment_lengths(traj, cfg))])


def fs_path_length(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> float:
    """Accumulated quantum distinguishability of a pure-state trajectory.

    Each step contributes the gauge-invariant chord ``2 arccos|<psi_k|psi_k+1>|``;
    chords are then Richardson-corrected against chords over sample pairs, which
    removes the leading curvature error.  Geodesic segments are exact.
    """
    return float(fs_path_profile(traj, cfg)[-1])


def _bures_midpoint(rho_a, rho_b, eig_cutoff) -> float:
    return 0.5 * np.sqrt(max(_qfi_sld(0.5 * (rho_a + rho_b), rho_b - rho_a, eig_cutoff), 0.0))


def bures_segment_lengths(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Bures length of each segment, ``(1/2) sqrt(F_Q) dtheta`` at the midpoint."""
    cfg = cfg or NumericalConfig()
    rho = traj.to_density().states
    for r in (rho[0], rho[-1]):
        check_density_operator(r)
    fine = np.array([_bures_midpoint(rho[k], rho[k + 1], cfg.eig_cutoff)
                     for k in range(len(traj) - 1)])
    max_step = np.arccos(MIN_STEP_OVERLAP)
    if np.any(fine > max_step):
        k = int(np.argmax(fine > max_step))
        raise UndersampledTrajectory(
            f"Bures step {fine[k]:.4f} between samples {k} and {k + 1} is too large")
    n_pairs = (len(traj) - 1) // 2
    coarse = np.array([_bures_midpoint(rho[2 * j], rho[2 * j + 2], cfg.eig_cutoff)
                       for j in range(n_pairs)])
    return _pair_richardson(fine, coarse)


def bures_path_profile(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(bures_segment_lengths(traj, cfg))])


def bures_path_length(traj: StateTrajectory, cfg: NumericalConfig | None = None) -> float:
    """Bures length of a density-operator trajectory.

    Pure-state trajectories are embedded as projectors; their Bures length is
    half their Fubini-Study length.
    """
    return float(bures_path_profile(traj, cfg)[-1])


# -- JSON encoding ----------------------------------------------------------

def encode_array(a) -> list:
    """Nested lists with complex entries written as ``[re, im]`` pairs (row-major)."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def decode_state(data: Sequence) -> np.ndarray:
    psi = _decode(data)
    if psi.ndim != 1:
        raise DimensionMismatch("a state must be a flat list of [re, im] pairs")
    return psi


def decode_operator(data: Sequence) -> np.ndarray:
    """Decode a matrix given either as nested rows or as a flat row-major list."""
    m = _decode(data)
    if m.ndim == 1:
        n = int(round(np.sqrt(m.size)))
        if n * n != m.size:
            raise DimensionMismatch(f"flat operator of length {m.size} is not square")
        m = m.reshape(n, n)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
    return m
