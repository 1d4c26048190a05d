"""Clock-time reconstruction from accumulated distinguishability.

:class:`CalibrationMap` is a scikit-learn regressor mapping a path length
``Lambda`` to clock time ``t``; the rest of the module covers the phase-clock
and decay examples and Fisher-based clock-quality scores.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .classical import ParametricModel, ParamTrajectory, path_length
from .config import NumericalConfig
from .exceptions import (
    DimensionMismatch,
    InvalidPopulation,
    NonMonotoneSamples,
    NonNormalizedDensity,
    OutOfCalibrationRange,
    TooFewSamples,
    TooFewTicks,
)

__all__ = [
    "CalibrationMap",
    "build_calibration",
    "reconstruct_time",
    "phase_clock_time",
    "oscillator_position",
    "decay_lambda",
    "decay_time",
    "decay_population",
    "TickSeries",
    "qubit_clock_ticks",
    "bhattacharyya_distance",
    "tick_distinguishability",
    "StabilityReport",
    "stability_functional",
]


def _as_vector(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


class CalibrationMap(RegressorMixin, BaseEstimator):
    """Strictly monotone piecewise-linear map from path length to clock time.

    ``fit(X, y)`` takes path lengths ``X`` (shape ``(n,)`` or ``(n, 1)``) and the
    matching clock times ``y``; both must be strictly increasing.  ``predict``
    interpolates between the knots and refuses to extrapolate; ``inverse`` maps
    times back to path lengths.

    Examples
    --------
    >>> cal = CalibrationMap().fit([0.0, 1.0, 2.0], [0.0, 0.5, 1.0])
    >>> float(cal.predict([1.5])[0])
    0.75
    """

    def fit(self, X, y):
        lam = _as_vector(X, "Lambda samples")
        t = _as_vector(y, "time samples")
        if lam.size != t.size:
            raise DimensionMismatch("need one time sample per Lambda sample")
        if lam.size < 2:
            raise TooFewSamples("a calibration needs at least two knots")
        if np.any(np.diff(lam) <= 0) or np.any(np.diff(t) <= 0):
            raise NonMonotoneSamples(
                "calibration samples must be strictly increasing in both Lambda and time; "
                "this clock's readings are not monotone in accumulated distinguishability")
        self.lambda_knots_ = lam
        self.time_knots_ = t
        self.n_features_in_ = 1
        return self

    @property
    def knots(self):
        check_is_fitted(self)
        return list(zip(self.lambda_knots_.tolist(), self.time_knots_.tolist()))

    @staticmethod
    def _interp(x, xp, fp, what):
        if np.any(x < xp[0]) or np.any(x > xp[-1]):
            bad = x[(x < xp[0]) | (x > xp[-1])][0]
            raise OutOfCalibrationRange(
                f"{what} {bad!r} outside calibrated range [{xp[0]!r}, {xp[-1]!r}]")
        return np.interp(x, xp, fp)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return self._interp(_as_vector(np.atleast_1d(X), "Lambda"),
                            self.lambda_knots_, self.time_knots_, "Lambda")

    def inverse(self, t) -> np.ndarray:
        check_is_fitted(self)
        return self._interp(_as_vector(np.atleast_1d(t), "time"),
                            self.time_knots_, self.lambda_knots_, "time")


def build_calibration(lambda_samples, time_samples) -> CalibrationMap:
    return CalibrationMap().fit(lambda_samples, time_samples)


def reconstruct_time(calibration: CalibrationMap, lam):
    """Clock time for a path length (scalar in, scalar out)."""
    out = calibration.predict(lam)
    return float(out[0]) if np.ndim(lam) == 0 else out


def phase_clock_time(phi, phi0, omega):
    """Time read from an oscillator phase, ``(phi - phi0) / omega``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return (np.asarray(phi, dtype=float) - phi0) / omega


def oscillator_position(amplitude, phi):
    return amplitude * np.cos(phi)


def decay_lambda(n, n0):
    """Internal decay parameter ``-ln(n / n0)`` for surviving population ``n``."""
    n = np.asarray(n, dtype=float)
    if not n0 > 0 or np.any(n <= 0) or np.any(n > n0):
        raise InvalidPopulation(f"populations must satisfy 0 < n <= n0 (n0={n0!r})")
    out = -np.log(n / n0)
    return float(out) if out.ndim == 0 else out


def decay_time(lambda_d, gamma):
    """Elapsed time ``Lambda_D / gamma`` of a decay clock."""
    if not np.all(np.asarray(gamma) > 0):
        raise ValueError("decay rate must be positive")
    return lambda_d / gamma


def decay_population(n0, gamma, t):
    return n0 * np.exp(-gamma * np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class TickSeries:
    """Outcome distributions recorded at successive clock ticks.

    Either ``distributions`` (shape ``(K, m)``, one probability vector per tick)
    or a ``model`` with one parameter vector per tick in ``thetas``.
    """

    indices: np.ndarray
    distributions: Optional[np.ndarray] = None
    model: Optional[ParametricModel] = None
    thetas: Optional[np.ndarray] = None

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or not np.all(np.equal(np.mod(idx, 1), 0)):
            raise ValueError("tick indices must be a vector of integers")
        idx = idx.astype(int)
        if np.any(np.diff(idx) <= 0):
            raise NonMonotoneSamples("tick indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        if (self.distributions is None) == (self.model is None):
            raise ValueError("give exactly one of distributions or model")
        if self.distributions is not None:
            p = np.asarray(self.distributions, dtype=float)
            if p.ndim != 2 or p.shape[0] != idx.size:
                raise DimensionMismatch("need one distribution per tick")
            tol = NumericalConfig().norm_tol
            if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > tol):
                raise NonNormalizedDensity("tick distributions must be probability vectors")
            object.__setattr__(self, "distributions", p)
        else:
            thetas = np.asarray(self.thetas, dtype=float)
            if thetas.ndim == 1:
                thetas = thetas[:, None]
            if thetas.shape != (idx.size, self.model.param_dim):
                raise DimensionMismatch("need one parameter vector per tick")
            object.__setattr__(self, "thetas", thetas)

    def __len__(self):
        return self.indices.size

    @classmethod
    def from_csv(cls, source) -> "TickSeries":
        """Read ``N, p_0, p_1, ...`` rows from a path or CSV text."""
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, newline="") as fh:
                text = fh.read()
        else:
            text = str(source)
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        data = np.array([[float(v) for v in r] for r in rows])
        return cls(indices=data[:, 0], distributions=data[:, 1:])


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def qubit_clock_ticks(omega: float = 1.0, dt: float = 0.1, n_ticks: int = 32) -> TickSeries:
    """Ideal qubit clock read out in the sigma_x basis once per tick.

    The ``+`` outcome has probability ``cos^2(omega t / 2)``.  Keep
    ``omega * dt * (n_ticks - 1) <= pi`` so the readout stays single-valued.
    """
    t = dt * np.arange(n_ticks)
    p_plus = np.cos(0.5 * omega * t) ** 2
    return TickSeries(np.arange(n_ticks), np.stack([p_plus, 1.0 - p_plus], axis=1))


def bhattacharyya_distance(p, q) -> float:
    """Fisher-Rao geodesic distance ``2 arccos(sum sqrt(p q))`` on the simplex."""
    bc = float(np.sum(np.sqrt(np.asarray(p) * np.asarray(q))))
    return 2.0 * float(np.arccos(min(bc, 1.0)))


def tick_distinguishability(series: TickSeries, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Fisher distance accumulated over each tick, one value per consecutive pair."""
    cfg = cfg or NumericalConfig()
    if len(series) < 2:
        raise TooFewTicks("need at least two ticks")
    if series.distributions is not None:
        p = series.distributions
        return np.array([bhattacharyya_distance(p[k], p[k + 1]) for k in range(len(series) - 1)])
    etas = []
    for a, b in zip(series.thetas[:-1], series.thetas[1:]):
        if np.array_equal(a, b):
            etas.append(0.0)
            continue
        segment = ParamTrajectory(np.array([0.0, 1.0]), np.stack([a, b]))
        etas.append(path_length(series.model, segment, cfg))
    return np.array(etas)


@dataclass(frozen=True)
class StabilityReport:
    variance: float
    s_c: Optional[float]
    perfect: bool

    def as_dict(self) -> dict:
        return {"variance": self.variance, "s_c": self.s_c, "perfect": self.perfect}


def stability_functional(etas, cfg: NumericalConfig | None = None) -> StabilityReport:
    """Inverse sample variance (divisor ``n - 1``) of per-tick distinguishability.

    A variance below ``cfg.perfect_variance`` is reported as ``perfect=True`` with
    ``s_c=None`` instead of an infinite score.
    """
    cfg = cfg or NumericalConfig()
    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 1 or etas.size < 2:
        raise TooFewTicks("stability needs at least two per-tick values")
    variance = float(np.var(etas, ddof=1))
    if variance < cfg.perfect_variance:
        return StabilityReport(variance, None, True)
    return StabilityReport(variance, 1.0 / variance, False)
