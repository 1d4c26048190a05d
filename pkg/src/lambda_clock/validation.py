"""Input validation helpers.

Each ``check_*`` function returns a normalized numpy array (correct dtype and
shape) or raises one of the errors in :mod:`lambda_clock.exceptions`.  They are
deliberately strict: states are never silently renormalized and derivative
operators are never silently symmetrized.
"""

from __future__ import annotations

import numpy as np

from .exceptions import (
    DimensionMismatch,
    InvalidState,
    NonMonotoneSamples,
    NotHermitian,
    TooFewSamples,
    TraceNotPreserved,
)

STATE_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10


def check_labels(labels, *, min_samples: int = 2, name: str = "labels") -> np.ndarray:
    """Return ``labels`` as a float vector, requiring strict increase.

    Strict increase is how causal ordering of trajectory samples is enforced.
    """
    labels = np.asarray(labels, dtype=float)
    if labels.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {labels.shape}")
    if labels.size < min_samples:
        raise TooFewSamples(f"{name} needs at least {min_samples} entries, got {labels.size}")
    if not np.all(np.isfinite(labels)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(np.diff(labels) <= 0):
        raise NonMonotoneSamples(f"{name} must be strictly increasing")
    return labels


def check_parameter(theta, dim: int | None = None) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1:
        raise DimensionMismatch(f"parameter must be a vector, got shape {theta.shape}")
    if dim is not None and theta.size != dim:
        raise DimensionMismatch(f"expected {dim} parameter components, got {theta.size}")
    return theta


def check_square(matrix, name: str = "matrix") -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {matrix.shape}")
    return matrix


def check_hermitian(matrix, name: str = "operator", tol: float = HERMITIAN_TOL) -> np.ndarray:
    matrix = check_square(matrix, name)
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > tol * scale:
        raise NotHermitian(f"{name} is not Hermitian")
    return matrix


def check_pure_state(psi, dim: int | None = None, tol: float = STATE_NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionMismatch(f"state vector must be one-dimensional, got shape {psi.shape}")
    if dim is not None and psi.size != dim:
        raise DimensionMismatch(f"state has dimension {psi.size}, expected {dim}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise InvalidState(f"state is not normalized (|psi|^2 = {norm2!r})")
    return psi


def check_density_operator(rho, dim: int | None = None) -> np.ndarray:
    rho = check_hermitian(rho, "density operator")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionMismatch(f"density operator has dimension {rho.shape[0]}, expected {dim}")
    trace = np.trace(rho)
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvalidState(f"density operator trace is {trace!r}, expected 1")
    eigenvalues = np.linalg.eigvalsh(rho)
    if eigenvalues.size and eigenvalues[0] < -NEGATIVE_EIG_TOL:
        raise InvalidState(f"density operator has negative eigenvalue {eigenvalues[0]!r}")
    return rho


def check_traceless_hermitian(drho, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Validate a tangent vector to the space of density operators."""
    drho = check_hermitian(drho, "density derivative")
    if drho.shape[0] != dim:
        raise DimensionMismatch(f"derivative has dimension {drho.shape[0]}, expected {dim}")
    trace = np.trace(drho)
    if abs(trace) > tol:
        raise TraceNotPreserved(f"density derivative has trace {trace!r}, expected 0")
    return drho


def check_compatible(a: np.ndarray, b: np.ndarray, what: str = "operands") -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"{what} have dimensions {a.shape[0]} and {b.shape[0]}")
