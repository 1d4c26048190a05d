"""Physical constants and numerical tolerances.

Every tolerance used by the toolkit lives on :class:`NumericalConfig`; no other
module hard-codes an epsilon.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Mapping

__all__ = [
    "PhysicalConstants",
    "NumericalConfig",
    "default_config",
    "default_constants",
    "resolve",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants in natural units (``hbar = 1`` by default)."""

    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")

    def replace(self, **changes: Any) -> "PhysicalConstants":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, overrides: Mapping[str, Any] | None) -> "PhysicalConstants":
        return _from_mapping(cls, overrides)


@dataclass(frozen=True)
class NumericalConfig:
    """Numerical tolerances shared by all operations.

    Attributes:
        fd_step: relative central finite-difference step for numerical scores.
        eig_cutoff: eigenvalue floor, relative to the trace, below which
            spectral components are treated as outside the support.
        degeneracy_eps: energy spread below which a trajectory accumulates no
            quantum distinguishability.
        quad_points: number of Gauss-Legendre nodes for continuous sample
            spaces.
        integ_refine_tol: relative convergence target for path-length
            refinement.
        norm_tol: allowed deviation of a probability model from unit mass.
        orthogonality_tol: squared overlap below which two states count as
            orthogonal.
        perfect_variance: tick-rate variance below which a clock is flagged
            perfect.
        max_refine_levels: cap on interval halvings during refinement.
    """

    fd_step: float = 1e-6
    eig_cutoff: float = 1e-12
    degeneracy_eps: float = 1e-10
    quad_points: int = 257
    integ_refine_tol: float = 1e-9
    norm_tol: float = 1e-8
    orthogonality_tol: float = 1e-10
    perfect_variance: float = 1e-15
    max_refine_levels: int = 14

    def __post_init__(self):
        for name in ("fd_step", "eig_cutoff", "degeneracy_eps", "integ_refine_tol",
                     "norm_tol", "orthogonality_tol", "perfect_variance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.fd_step >= 1e-2:
            raise ValueError("fd_step must be below 1e-2")
        if self.eig_cutoff >= 1e-6:
            raise ValueError("eig_cutoff must be below 1e-6")
        if self.quad_points < 2 or self.max_refine_levels < 1:
            raise ValueError("quad_points must be >= 2 and max_refine_levels >= 1")

    def replace(self, **changes: Any) -> "NumericalConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, overrides: Mapping[str, Any] | None) -> "NumericalConfig":
        return _from_mapping(cls, overrides)


def _from_mapping(cls, overrides):
    overrides = dict(overrides or {})
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(overrides) - set(known)
    if unknown:
        raise KeyError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    coerced = {}
    for key, value in overrides.items():
        coerced[key] = int(value) if known[key].type in ("int", int) else float(value)
    return cls(**coerced)


def default_config() -> NumericalConfig:
    return NumericalConfig()


def default_constants() -> PhysicalConstants:
    return PhysicalConstants()


def resolve(cfg: NumericalConfig | None = None,
            constants: PhysicalConstants | None = None):
    """Fill in defaults for optional ``cfg`` / ``constants`` arguments."""
    return (cfg if cfg is not None else NumericalConfig(),
            constants if constants is not None else PhysicalConstants())
