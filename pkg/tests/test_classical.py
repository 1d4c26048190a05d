import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_clock import (
    ContinuousInterval,
    DiscreteOutcomes,
    FisherMetricTensor,
    ParametricModel,
    ParamTrajectory,
    bernoulli,
    check_score,
    cramer_rao_bound,
    exponential_rate,
    fisher_metric,
    gaussian_likelihood,
    gaussian_mean,
    get_model,
    line_element,
    path_length,
    path_length_profile,
    score_matrix,
    verify_cramer_rao_mc,
)
from lambda_clock.exceptions import (
    DegenerateSupport,
    DimensionMismatch,
    NonMonotoneSamples,
    NonNormalizedDensity,
    SingularMetric,
    TooFewSamples,
)


def arcsine_length(a, b):
    return 2.0 * (math.asin(math.sqrt(b)) - math.asin(math.sqrt(a)))


# random admissible parameters for each built-in model
ADMISSIBLE = {
    "bernoulli": (bernoulli(), lambda rng: [rng.uniform(0.02, 0.98)]),
    "gaussian_mean": (gaussian_mean(), lambda rng: [rng.uniform(-10.0, 10.0)]),
    "exponential_rate": (exponential_rate(), lambda rng: [rng.uniform(0.5, 20.0)]),
    "gaussian_likelihood": (gaussian_likelihood(),
                            lambda rng: [rng.uniform(-10.0, 10.0), rng.uniform(0.5, 3.0)]),
}


def test_bernoulli_half():
    assert fisher_metric(bernoulli(), [0.5]).g == pytest.approx(np.array([[4.0]]), abs=1e-12)


def test_gaussian_mean_unit():
    for mu in (-3.0, 0.0, 2.5):
        assert fisher_metric(gaussian_mean(), [mu]).g[0, 0] == pytest.approx(1.0, abs=1e-8)


def test_gaussian_mean_sigma_scaling():
    g = fisher_metric(gaussian_mean(sigma=2.0), [0.3]).g[0, 0]
    assert g == pytest.approx(0.25, rel=1e-8)


def test_exponential_rate():
    for rate in (0.5, 2.0, 10.0):
        g = fisher_metric(exponential_rate(), [rate]).g[0, 0]
        assert g == pytest.approx(1.0 / rate**2, rel=1e-8)


def test_gaussian_likelihood_matrix():
    g = fisher_metric(gaussian_likelihood(), [1.0, 2.0]).g
    np.testing.assert_allclose(g, np.diag([0.25, 0.5]), atol=1e-10)


def test_theta_independent_model_has_zero_metric():
    flat = ParametricModel(1, DiscreteOutcomes([0, 1, 2, 3]),
                           lambda x, th: np.full(x.shape, -math.log(4.0)))
    metric = fisher_metric(flat, [0.7])
    assert metric.g == pytest.approx(np.array([[0.0]]), abs=1e-12)
    with pytest.raises(SingularMetric):
        cramer_rao_bound(metric)


def test_numerical_score_used_without_analytic():
    b = bernoulli()
    model = ParametricModel(1, b.sample_space, b.log_density)
    assert fisher_metric(model, [0.3]).g[0, 0] == pytest.approx(1 / 0.21, rel=1e-7)


def test_unnormalized_model_rejected():
    model = ParametricModel(1, DiscreteOutcomes([0, 1]), lambda x, th: np.log(np.full(x.shape, 0.6)))
    with pytest.raises(NonNormalizedDensity):
        fisher_metric(model, [0.1])


def test_zero_probability_outcome_rejected():
    with pytest.raises(DegenerateSupport):
        fisher_metric(bernoulli(), [1.0])


def test_parameter_dimension_checked():
    with pytest.raises(DimensionMismatch):
        fisher_metric(bernoulli(), [0.2, 0.3])


def test_interval_validation():
    with pytest.raises(ValueError):
        ContinuousInterval(1.0, 1.0)


@pytest.mark.parametrize("name", sorted(ADMISSIBLE))
def test_metric_symmetric_psd_random(name):
    model, draw = ADMISSIBLE[name]
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = fisher_metric(model, draw(rng)).g
        assert np.max(np.abs(g - g.T)) <= 1e-12
        norm = np.linalg.norm(g, 2)
        assert np.linalg.eigvalsh(g).min() >= -1e-10 * norm


@pytest.mark.parametrize("name", sorted(ADMISSIBLE))
def test_analytic_score_matches_finite_differences(name):
    model, draw = ADMISSIBLE[name]
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert check_score(model, draw(rng)) <= 1e-5


def test_check_score_flags_wrong_score():
    b = bernoulli()
    wrong = ParametricModel(1, b.sample_space, b.log_density,
                            score=lambda x, th: 2.0 * b.score(x, th))
    with pytest.raises(ValueError):
        check_score(wrong, [0.4])


def test_score_matrix_shape():
    s = score_matrix(gaussian_likelihood(), np.linspace(-1, 1, 7), [0.0, 1.0])
    assert s.shape == (7, 2)


def test_line_element_examples():
    assert line_element(FisherMetricTensor(np.array([0.5]), np.array([[4.0]])), [0.1]) == pytest.approx(0.2)
    assert line_element(FisherMetricTensor(np.zeros(2), np.eye(2)), [3e-3, 4e-3]) == pytest.approx(5e-3)
    assert line_element(FisherMetricTensor(np.zeros(2), np.eye(2)), [0.0, 0.0]) == 0.0


def test_bernoulli_path_closed_form():
    traj = ParamTrajectory(np.array([0.0, 1.0]), np.array([0.25, 0.75]))
    assert path_length(bernoulli(), traj) == pytest.approx(arcsine_length(0.25, 0.75), rel=1e-6)


def test_constant_trajectory_has_zero_length():
    traj = ParamTrajectory(np.linspace(0, 1, 5), np.full(5, 0.4))
    assert path_length(bernoulli(), traj) == 0.0


@pytest.mark.parametrize("relabel", [lambda s: s**3, lambda s: (math.exp(s) - 1) / (math.e - 1)])
def test_reparameterization_invariance(relabel):
    cfg_tol = 1e-9
    lam = np.linspace(0.0, 1.0, 17)
    straight = ParamTrajectory.from_function(lambda s: 0.25 + 0.5 * s, lam)
    relabeled = ParamTrajectory.from_function(lambda s: 0.25 + 0.5 * relabel(s), lam)
    a = path_length(bernoulli(), straight)
    b = path_length(bernoulli(), relabeled)
    assert abs(a - b) <= 10 * cfg_tol * a


def test_reparameterization_invariance_two_parameters():
    lam = np.linspace(0.0, 1.0, 9)
    curve = lambda s: [np.sin(s), 1.0 + s**2]  # noqa: E731
    base = ParamTrajectory.from_function(curve, lam)
    cubed = ParamTrajectory.from_function(lambda s: curve(s**3), lam)
    a = path_length(gaussian_likelihood(), base)
    b = path_length(gaussian_likelihood(), cubed)
    assert abs(a - b) <= 1e-8 * a


def test_additivity():
    model = bernoulli()
    whole = ParamTrajectory(np.linspace(0, 1, 3), np.array([0.1, 0.5, 0.9]))
    left = ParamTrajectory(np.array([0.0, 0.5]), np.array([0.1, 0.5]))
    right = ParamTrajectory(np.array([0.5, 1.0]), np.array([0.5, 0.9]))
    total = path_length(model, whole)
    assert abs(total - path_length(model, left) - path_length(model, right)) <= 2e-9 * total


def test_profile_is_cumulative_and_monotone():
    lam = np.linspace(0.0, 1.0, 11)
    traj = ParamTrajectory.from_function(lambda s: 0.1 + 0.8 * s, lam)
    profile = path_length_profile(bernoulli(), traj)
    assert profile[0] == 0.0
    assert np.all(np.diff(profile) > 0)
    expected = [arcsine_length(0.1, 0.1 + 0.8 * s) for s in lam]
    np.testing.assert_allclose(profile, expected, rtol=1e-8, atol=1e-12)


def test_trajectory_validation():
    with pytest.raises(NonMonotoneSamples):
        ParamTrajectory(np.array([0.0, 0.0]), np.array([0.1, 0.2]))
    with pytest.raises(TooFewSamples):
        ParamTrajectory(np.array([0.0]), np.array([0.1]))
    with pytest.raises(DimensionMismatch):
        path_length(bernoulli(), ParamTrajectory(np.array([0.0, 1.0]), np.zeros((2, 2))))


def test_cramer_rao_scalar():
    bound = cramer_rao_bound(FisherMetricTensor(np.array([0.5]), np.array([[4.0]])))
    assert bound == pytest.approx(np.array([[0.25]]))


def test_cramer_rao_inverse_identity():
    rng = np.random.default_rng(5)
    model, draw = ADMISSIBLE["gaussian_likelihood"]
    for _ in range(10):
        metric = fisher_metric(model, draw(rng))
        np.testing.assert_allclose(cramer_rao_bound(metric) @ metric.g, np.eye(2), atol=1e-10)


def test_cramer_rao_singular():
    with pytest.raises(SingularMetric):
        cramer_rao_bound(FisherMetricTensor(np.zeros(2), np.diag([1.0, 0.0])))


def test_cramer_rao_mc_bernoulli():
    report = verify_cramer_rao_mc(bernoulli(), [0.5], np.mean, n_trials=10_000, seed=0,
                                  n_samples=100)
    assert report.bound == pytest.approx(0.0025)
    assert report.satisfied
    assert report.empirical_var == pytest.approx(0.0025, rel=0.05)


def test_cramer_rao_mc_gaussian_saturates():
    report = verify_cramer_rao_mc(gaussian_mean(), [0.0], np.mean, n_trials=10_000, seed=1)
    assert report.bound == pytest.approx(1.0, rel=1e-8)
    assert report.satisfied
    assert report.empirical_var == pytest.approx(1.0, rel=0.05)


def test_cramer_rao_mc_is_seeded():
    a = verify_cramer_rao_mc(bernoulli(), [0.3], np.mean, n_trials=500, seed=9, n_samples=10)
    b = verify_cramer_rao_mc(bernoulli(), [0.3], np.mean, n_trials=500, seed=9, n_samples=10)
    assert a == b
    assert set(a.as_dict()) == {"empirical_var", "bound", "satisfied", "n_trials", "n_samples"}


def test_cramer_rao_mc_singular_model():
    flat = ParametricModel(1, DiscreteOutcomes([0, 1]), lambda x, th: np.full(x.shape, math.log(0.5)))
    with pytest.raises(SingularMetric):
        verify_cramer_rao_mc(flat, [0.0], np.mean, n_trials=10, seed=0)


def test_inverse_cdf_sampler_fallback():
    g = gaussian_mean()
    model = ParametricModel(1, g.sample_space, g.log_density, g.score)
    x = model.sample(np.random.default_rng(0), [1.0], 20_000)
    assert np.mean(x) == pytest.approx(1.0, abs=0.05)
    assert np.var(x) == pytest.approx(1.0, rel=0.05)


def test_registry():
    assert get_model("bernoulli").name == "bernoulli"
    with pytest.raises(KeyError):
        get_model("cauchy")


@settings(max_examples=50, deadline=None)
@given(p=st.floats(0.01, 0.99))
def test_bernoulli_metric_property(p):
    assert fisher_metric(bernoulli(), [p]).g[0, 0] == pytest.approx(1 / (p * (1 - p)), rel=1e-10)
