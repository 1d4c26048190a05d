"""Seeded random states and operators for scenarios and property checks.

All draws come from a caller-supplied ``numpy.random.Generator``; scenarios
build it as ``numpy.random.default_rng(seed)`` (PCG64).
"""

from __future__ import annotations

import numpy as np


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = _ginibre(rng, dim, 1)[:, 0]
    return psi / np.linalg.norm(psi)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    g = _ginibre(rng, dim, dim)
    return 0.5 * scale * (g + g.conj().T)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary (QR with the phase convention fixed)."""
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_operator(rng: np.random.Generator, dim: int,
                            rank: int | None = None) -> np.ndarray:
    """Random state ``G G^dagger / tr`` with ``G`` of shape ``(dim, rank)``."""
    g = _ginibre(rng, dim, rank or dim)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
