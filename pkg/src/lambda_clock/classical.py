"""Classical Fisher information, Cramér-Rao bounds and Fisher path lengths.

A :class:`ParametricModel` bundles a sample space with a vectorized
log-density ``log_density(x, theta)``.  The Fisher metric is the expected
outer product of scores, evaluated by an exact sum over outcomes for discrete
models and by Gauss-Legendre quadrature on a declared interval for continuous
ones.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .config import NumericalConfig
from .exceptions import (
    DegenerateSupport,
    DimensionMismatch,
    LambdaClockError,
    NonNormalizedDensity,
    SingularMetric,
)
from .validation import check_labels, check_parameter

__all__ = [
    "DiscreteOutcomes",
    "ContinuousInterval",
    "ParametricModel",
    "FisherMetricTensor",
    "ParamTrajectory",
    "CramerRaoReport",
    "fisher_metric",
    "score_matrix",
    "check_score",
    "line_element",
    "path_length",
    "path_length_profile",
    "cramer_rao_bound",
    "verify_cramer_rao_mc",
    "bernoulli",
    "gaussian_mean",
    "exponential_rate",
    "gaussian_likelihood",
    "MODEL_REGISTRY",
    "get_model",
]


@dataclass(frozen=True)
class DiscreteOutcomes:
    outcomes: tuple

    def __init__(self, outcomes: Sequence[float]):
        object.__setattr__(self, "outcomes", tuple(float(o) for o in outcomes))
        if not self.outcomes:
            raise ValueError("a discrete sample space needs at least one outcome")


@dataclass(frozen=True)
class ContinuousInterval:
    """Finite integration window ``[lo, hi]``.

    Infinite supports must be truncated by the model author so that the mass
    outside the window stays below ``1e-10`` over the admissible parameters.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("interval requires hi > lo")


SampleSpace = Union[DiscreteOutcomes, ContinuousInterval]


@lru_cache(maxsize=32)
def _gauss_legendre(lo: float, hi: float, n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return half * nodes + 0.5 * (hi + lo), half * weights


@dataclass(frozen=True, eq=False)
class ParametricModel:
    """A family of distributions ``p(x|theta)``.

    ``log_density(x, theta)`` and the optional analytic ``score(x, theta)`` must
    accept a vector of sample points ``x``; ``score`` returns an array of shape
    ``(len(x), param_dim)``.  ``sampler(rng, theta, size)`` is optional and only
    used by Monte-Carlo checks.
    """

    param_dim: int
    sample_space: SampleSpace
    log_density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    score: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    sampler: Optional[Callable] = None
    name: str = "custom"

    def nodes(self, cfg: NumericalConfig):
        """Sample points and integration weights for expectations."""
        space = self.sample_space
        if isinstance(space, DiscreteOutcomes):
            x = np.asarray(space.outcomes, dtype=float)
            return x, np.ones_like(x)
        return _gauss_legendre(float(space.lo), float(space.hi), int(cfg.quad_points))

    def density(self, x, theta) -> np.ndarray:
        theta = check_parameter(theta, self.param_dim)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.exp(self.log_density(np.asarray(x, dtype=float), theta))

    def sample(self, rng: np.random.Generator, theta, size, cfg: NumericalConfig | None = None):
        cfg = cfg or NumericalConfig()
        theta = check_parameter(theta, self.param_dim)
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, theta, size), dtype=float)
        if isinstance(self.sample_space, DiscreteOutcomes):
            x, _ = self.nodes(cfg)
            p = self.density(x, theta)
            return rng.choice(x, size=size, p=p / p.sum())
        # inverse-CDF on a fine trapezoid grid
        grid = np.linspace(self.sample_space.lo, self.sample_space.hi, 20001)
        pdf = self.density(grid, theta)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
        return np.interp(rng.random(size) * cdf[-1], cdf, grid)


@dataclass(frozen=True)
class FisherMetricTensor:
    theta: np.ndarray
    g: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def _log_density_checked(model: ParametricModel, x, theta) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.asarray(model.log_density(x, theta), dtype=float)
    if logp.shape != x.shape:
        raise DimensionMismatch(f"log_density returned shape {logp.shape}, expected {x.shape}")
    if not np.all(np.isfinite(logp)):
        raise DegenerateSupport(
            f"p(x|theta) vanishes or is undefined on the sample space at theta={theta.tolist()}")
    return logp


def score_matrix(model: ParametricModel, x, theta, cfg: NumericalConfig | None = None,
                 *, numerical: bool = False) -> np.ndarray:
    """Scores ``d ln p(x|theta) / d theta_i`` as an array of shape ``(len(x), d)``.

    Uses the model's analytic score unless ``numerical`` is set or none is
    supplied, in which case central differences with step
    ``fd_step * max(1, |theta_i|)`` are used.
    """
    cfg = cfg or NumericalConfig()
    theta = check_parameter(theta, model.param_dim)
    x = np.asarray(x, dtype=float)
    if model.score is not None and not numerical:
        s = np.asarray(model.score(x, theta), dtype=float).reshape(x.size, model.param_dim)
        if not np.all(np.isfinite(s)):
            raise DegenerateSupport("analytic score is not finite on the sample space")
        return s
    s = np.empty((x.size, model.param_dim))
    for i in range(model.param_dim):
        h = cfg.fd_step * max(1.0, abs(theta[i]))
        step = np.zeros_like(theta)
        step[i] = h
        up = _log_density_checked(model, x, theta + step)
        down = _log_density_checked(model, x, theta - step)
        s[:, i] = (up - down) / (2.0 * h)
    return s


def check_score(model: ParametricModel, theta, cfg: NumericalConfig | None = None,
                rtol: float = 1e-5) -> float:
    """Largest relative gap between analytic and finite-difference scores.

    Raises ``LambdaClockError`` when the gap exceeds ``rtol``.
    """
    if model.score is None:
        return 0.0
    cfg = cfg or NumericalConfig()
    x, _ = model.nodes(cfg)
    analytic = score_matrix(model, x, theta, cfg)
    numeric = score_matrix(model, x, theta, cfg, numerical=True)
    scale = np.maximum(np.abs(analytic), 1.0)
    gap = float(np.max(np.abs(analytic - numeric) / scale))
    if gap > rtol:
        raise LambdaClockError(f"analytic score disagrees with finite differences ({gap:.3g})")
    return gap


def fisher_metric(model: ParametricModel, theta, cfg: NumericalConfig | None = None
                  ) -> FisherMetricTensor:
    """Fisher information metric ``g_ij = E[d_i ln p * d_j ln p]`` at ``theta``."""
    cfg = cfg or NumericalConfig()
    theta = check_parameter(theta, model.param_dim)
    x, w = model.nodes(cfg)
    logp = _log_density_checked(model, x, theta)
    p = np.exp(logp)
    mass = float(np.dot(w, p))
    if abs(mass - 1.0) > cfg.norm_tol:
        raise NonNormalizedDensity(
            f"{model.name}: total probability {mass!r} at theta={theta.tolist()}")
    if isinstance(model.sample_space, DiscreteOutcomes) and np.any(p <= 0):
        raise DegenerateSupport(f"{model.name}: an outcome has zero probability")
    s = score_matrix(model, x, theta, cfg)
    g = s.T @ (s * (w * p)[:, None])
    g = 0.5 * (g + g.T)
    return FisherMetricTensor(theta=theta, g=g)


def line_element(metric: FisherMetricTensor, dtheta) -> float:
    """Informational length ``sqrt(dtheta^T g dtheta)`` of a small displacement."""
    dtheta = np.atleast_1d(np.asarray(dtheta, dtype=float))
    if dtheta.shape != (metric.dim,):
        raise DimensionMismatch(f"displacement has shape {dtheta.shape}, metric is {metric.dim}-dim")
    return float(np.sqrt(max(float(dtheta @ metric.g @ dtheta), 0.0)))


@dataclass(frozen=True, eq=False)
class ParamTrajectory:
    """Ordered samples ``(lambda_k, theta_k)`` of a path in parameter space.

    If ``curve`` is given (a callable ``lambda -> theta``) path-length refinement
    samples the curve itself; otherwise the samples are joined by straight
    segments.
    """

    labels: np.ndarray
    thetas: np.ndarray
    curve: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        labels = check_labels(self.labels, name="trajectory labels")
        thetas = np.asarray(self.thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas[:, None]
        if thetas.ndim != 2 or thetas.shape[0] != labels.size:
            raise DimensionMismatch("need one parameter vector per label")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "thetas", thetas)

    @classmethod
    def from_function(cls, curve: Callable, labels) -> "ParamTrajectory":
        labels = np.asarray(labels, dtype=float)
        thetas = np.array([np.atleast_1d(curve(lam)) for lam in labels], dtype=float)
        return cls(labels, thetas, curve)

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]

    def __len__(self):
        return self.labels.size

    def _subdivide(self, m: int) -> np.ndarray:
        """Points with ``m`` sub-steps per original segment, shape ``(K-1, m+1, d)``."""
        frac = np.linspace(0.0, 1.0, m + 1)
        if self.curve is None:
            a, b = self.thetas[:-1], self.thetas[1:]
            return a[:, None, :] + frac[None, :, None] * (b - a)[:, None, :]
        lam = self.labels[:-1, None] + frac[None, :] * np.diff(self.labels)[:, None]
        pts = np.array([np.atleast_1d(self.curve(v)) for v in lam.ravel()], dtype=float)
        pts = pts.reshape(lam.shape + (self.dim,))
        # keep the supplied samples bit-exact at segment ends
        pts[:, 0, :] = self.thetas[:-1]
        pts[:, -1, :] = self.thetas[1:]
        return pts


def _polyline_speeds(model, pts, cfg) -> np.ndarray:
    """Midpoint-metric lengths of each sub-step of a subdivided path."""
    steps = np.diff(pts, axis=1)
    mids = 0.5 * (pts[:, 1:, :] + pts[:, :-1, :])
    out = np.empty(steps.shape[:2])
    for idx in np.ndindex(*out.shape):
        step = steps[idx]
        if not np.any(step):
            out[idx] = 0.0
            continue
        g = fisher_metric(model, mids[idx], cfg).g
        out[idx] = np.sqrt(max(float(step @ g @ step), 0.0))
    return out


def _segment_lengths(model: ParametricModel, traj: ParamTrajectory,
                     cfg: NumericalConfig) -> np.ndarray:
    if traj.dim != model.param_dim:
        raise DimensionMismatch(f"trajectory is {traj.dim}-dim, model has {model.param_dim} parameters")
    m = 1
    coarse = _polyline_speeds(model, traj._subdivide(m), cfg).sum(axis=1)
    previous = None
    for _ in range(cfg.max_refine_levels):
        m *= 2
        fine = _polyline_speeds(model, traj._subdivide(m), cfg).sum(axis=1)
        # midpoint rule is second order in the sub-step
        extrapolated = (4.0 * fine - coarse) / 3.0
        if previous is not None:
            total = float(extrapolated.sum())
            if abs(total - float(previous.sum())) <= cfg.integ_refine_tol * abs(total):
                return extrapolated
        previous, coarse = extrapolated, fine
    warnings.warn("path length refinement hit max_refine_levels before converging",
                  RuntimeWarning, stacklevel=3)
    return previous


def path_length_profile(model: ParametricModel, traj: ParamTrajectory,
                        cfg: NumericalConfig | None = None) -> np.ndarray:
    """Cumulative Fisher length at every trajectory sample (starts at 0)."""
    cfg = cfg or NumericalConfig()
    return np.concatenate([[0.0], np.cumsum(_segment_lengths(model, traj, cfg))])


def path_length(model: ParametricModel, traj: ParamTrajectory,
                cfg: NumericalConfig | None = None) -> float:
    """Accumulated Fisher distance along ``traj``.

    The speed ``sqrt(theta'^T g theta')`` is integrated with a composite midpoint
    rule that is refined by sample doubling plus Richardson extrapolation until
    successive totals agree to ``cfg.integ_refine_tol``.  The result does not
    depend on how the trajectory is labelled.
    """
    return float(path_length_profile(model, traj, cfg)[-1])


def cramer_rao_bound(metric: FisherMetricTensor, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Covariance lower bound ``g^{-1}`` for a single observation."""
    cfg = cfg or NumericalConfig()
    g = metric.g
    eig = np.linalg.eigvalsh(g)
    norm = float(np.max(np.abs(eig))) if eig.size else 0.0
    if norm == 0.0 or eig[0] <= cfg.eig_cutoff * norm:
        raise SingularMetric(
            f"Fisher metric at theta={metric.theta.tolist()} is singular "
            f"(eigenvalues {eig.tolist()}): a parameter is not identifiable")
    return np.linalg.inv(g)


@dataclass(frozen=True)
class CramerRaoReport:
    empirical_var: Union[float, np.ndarray]
    bound: Union[float, np.ndarray]
    satisfied: bool
    n_trials: int
    n_samples: int

    def as_dict(self) -> dict:
        def plain(v):
            return v.tolist() if isinstance(v, np.ndarray) else v
        return {"empirical_var": plain(self.empirical_var), "bound": plain(self.bound),
                "satisfied": self.satisfied, "n_trials": self.n_trials,
                "n_samples": self.n_samples}


def verify_cramer_rao_mc(model: ParametricModel, theta, estimator: Callable, n_trials: int,
                         seed: int, n_samples: int = 1,
                         cfg: NumericalConfig | None = None) -> CramerRaoReport:
    """Monte-Carlo check of the Cramér-Rao inequality.

    ``n_trials`` datasets of ``n_samples`` i.i.d. draws are generated with
    ``numpy.random.default_rng(seed)`` (PCG64).  ``estimator`` maps one dataset
    to an estimate of ``theta`` and must be unbiased at ``theta``; this is the
    caller's responsibility.  The bound for ``n_samples`` draws is
    ``g^{-1} / n_samples`` and the check passes when every component's empirical
    variance is at least ``bound_ii * (1 - 3 / sqrt(n_trials))``.
    """
    cfg = cfg or NumericalConfig()
    theta = check_parameter(theta, model.param_dim)
    bound = cramer_rao_bound(fisher_metric(model, theta, cfg), cfg) / n_samples
    rng = np.random.default_rng(seed)
    data = model.sample(rng, theta, (n_trials, n_samples), cfg)
    estimates = np.array([np.atleast_1d(estimator(row)) for row in data], dtype=float)
    if estimates.shape[1] != model.param_dim:
        raise DimensionMismatch("estimator output does not match the parameter dimension")
    empirical = np.var(estimates, axis=0, ddof=1)
    slack = 1.0 - 3.0 / np.sqrt(n_trials)
    satisfied = bool(np.all(empirical >= np.diag(bound) * slack))
    if model.param_dim == 1:
        return CramerRaoReport(float(empirical[0]), float(bound[0, 0]), satisfied,
                               n_trials, n_samples)
    return CramerRaoReport(empirical, bound, satisfied, n_trials, n_samples)


# -- built-in models --------------------------------------------------------

def bernoulli() -> ParametricModel:
    """Single coin flip, ``theta = P(x = 1)`` on the open interval (0, 1)."""

    def log_density(x, theta):
        p = theta[0]
        return x * np.log(p) + (1.0 - x) * np.log1p(-p)

    def score(x, theta):
        p = theta[0]
        return (x / p - (1.0 - x) / (1.0 - p))[:, None]

    def sampler(rng, theta, size):
        return (rng.random(size) < theta[0]).astype(float)

    return ParametricModel(1, DiscreteOutcomes((0.0, 1.0)), log_density, score, sampler,
                           name="bernoulli")


_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def gaussian_mean(sigma: float = 1.0, center: float = 0.0,
                  half_width: float | None = None) -> ParametricModel:
    """Normal distribution with unknown mean and known ``sigma``.

    The window is ``center +/- half_width`` (default ``24 sigma``); keep the mean
    at least ``7 sigma`` inside it.
    """
    sigma = float(sigma)
    half_width = 24.0 * sigma if half_width is None else float(half_width)

    def log_density(x, theta):
        return -0.5 * ((x - theta[0]) / sigma) ** 2 - np.log(sigma) - _LOG_SQRT_2PI

    def score(x, theta):
        return ((x - theta[0]) / sigma**2)[:, None]

    def sampler(rng, theta, size):
        return rng.normal(theta[0], sigma, size)

    return ParametricModel(1, ContinuousInterval(center - half_width, center + half_width),
                           log_density, score, sampler, name="gaussian_mean")


def exponential_rate(upper: float = 60.0) -> ParametricModel:
    """Exponential waiting times with unknown rate, truncated at ``upper``.

    Rates must satisfy ``rate * upper >= 30`` so the truncated tail is negligible
    for both the mass and the Fisher information.
    """

    def log_density(x, theta):
        rate = theta[0]
        return np.log(rate) - rate * x

    def score(x, theta):
        return (1.0 / theta[0] - x)[:, None]

    def sampler(rng, theta, size):
        return rng.exponential(1.0 / theta[0], size)

    return ParametricModel(1, ContinuousInterval(0.0, float(upper)), log_density, score,
                           sampler, name="exponential_rate")


def gaussian_likelihood(center: float = 0.0, half_width: float = 30.0) -> ParametricModel:
    """Gaussian likelihood in ``theta = (mean, std)``; the Fisher matrix is
    ``diag(1/std^2, 2/std^2)``.

    Intended range: ``|mean - center| <= half_width / 3`` and
    ``0.5 <= std <= half_width / 10``.
    """

    def log_density(x, theta):
        mu, sd = theta
        return -0.5 * ((x - mu) / sd) ** 2 - np.log(sd) - _LOG_SQRT_2PI

    def score(x, theta):
        mu, sd = theta
        z = (x - mu) / sd
        return np.stack([z / sd, (z**2 - 1.0) / sd], axis=1)

    def sampler(rng, theta, size):
        return rng.normal(theta[0], theta[1], size)

    return ParametricModel(2, ContinuousInterval(center - half_width, center + half_width),
                           log_density, score, sampler, name="gaussian_likelihood")


MODEL_REGISTRY: dict[str, Callable[..., ParametricModel]] = {
    "bernoulli": bernoulli,
    "gaussian_mean": gaussian_mean,
    "exponential_rate": exponential_rate,
    "gaussian_likelihood": gaussian_likelihood,
}


def get_model(name: str, **kwargs) -> ParametricModel:
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODEL_REGISTRY)}") from None
    return factory(**kwargs)
