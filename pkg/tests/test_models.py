import numpy as np
import pytest
from scipy import stats

from abcprior import (
    ConfigError,
    NormalKnownVar,
    PoissonGamma,
    PoissonRegression,
    load_synthetic_regression,
    normal_truth,
    poisson_class_E,
    poisson_regression_class,
    posterior_robustness,
)
from abcprior.models import make_synthetic_regression, read_regression_csv


class TestNormal:
    def test_truth_worked_numbers(self, normal_model):
        post = normal_truth(normal_model)
        assert post.w1 == pytest.approx(0.5) and post.w2 == pytest.approx(0.5)
        assert post.mean == pytest.approx(9.9875)
        assert post.var == pytest.approx(0.01)

    def test_observed_data_mean(self, normal_model):
        x = normal_model.observed_data()
        assert x.size == 100
        assert x.mean() == pytest.approx(9.975, abs=1e-12)

    def test_class_E_spans_weighted_interval(self, normal_model):
        post = normal_truth(normal_model)
        cls = normal_model.class_E(0.1)
        lo = cls.member([-0.1]).as_density()
        hi = cls.member([0.1]).as_density()
        # prior mean moves by (w2/w1) * t with w2 = w1
        assert hi.mean[0] - lo.mean[0] == pytest.approx(2 * 0.1 * post.w2 / post.w1, rel=1e-6)

    def test_evidence_matches_prior_predictive(self, normal_model):
        assert normal_model.log_evidence(9.975) == pytest.approx(stats.norm.logpdf(9.975, 10, np.sqrt(0.04)))

    def test_acceptance_probability_limits(self, normal_model):
        assert normal_model.acceptance_probability(1e-9) < 1e-8
        assert normal_model.acceptance_probability(100.0) == pytest.approx(1.0)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            NormalKnownVar(sigma2=-1.0)


class TestPoisson:
    def test_posterior_gamma(self, poisson_model):
        assert poisson_model.posterior_params() == (32.0, 11.0)
        assert poisson_model.posterior_params(t=1.0) == (33.0, 11.0)
        d = poisson_model.posterior_density(30.0)
        assert d.mean[0] == pytest.approx(32.0 / 11.0)

    def test_observed_counts(self, poisson_model):
        x = poisson_model.observed_data()
        assert x.size == 10 and x.sum() == 30

    def test_class_E_shape_limit(self, poisson_model):
        with pytest.raises(ConfigError, match="r - epsilon"):
            poisson_class_E(poisson_model, 2.0)
        assert poisson_class_E(poisson_model, 1.5).epsilon[0] == 1.5

    def test_evidence_is_negative_binomial(self, poisson_model):
        p = 1.0 / 11.0
        expect = stats.nbinom.logpmf(30, 2, p)
        assert poisson_model.log_evidence(30.0) == pytest.approx(expect, rel=1e-10)

    def test_evidence_sums_to_one(self):
        m = PoissonGamma()
        assert np.exp(m.log_evidence(np.arange(2000.0))).sum() == pytest.approx(1.0, abs=1e-10)


class TestRegression:
    def test_synthetic_csv_matches_generator(self):
        X, y = make_synthetic_regression()
        model = load_synthetic_regression()
        np.testing.assert_allclose(model.X, X)
        np.testing.assert_array_equal(model.y0, y)

    def test_rejects_bad_counts(self):
        with pytest.raises(ConfigError):
            PoissonRegression(np.ones((2, 1)), [1.5, 2.0], [1.0, 1.0])
        with pytest.raises(ConfigError):
            PoissonRegression(np.ones((3, 1)), [1.0, 2.0], [1.0, 1.0])

    def test_empty_csv(self):
        with pytest.raises(ConfigError):
            read_regression_csv(["x1,y"])

    def test_intercept_only_reduces_to_poisson_rate_tilt(self):
        # With X = 1 the tilt is beta * sum(t_i), i.e. log(lambda) times a scalar.
        model = PoissonRegression(np.ones((5, 1)), [1, 2, 0, 3, 1], [0.5] * 5)
        beta = np.array([[-1.0], [0.0], [0.7]])
        t = np.array([0.1, -0.2, 0.3, 0.05, 0.2])
        np.testing.assert_allclose(model.tilt()(beta) @ t, beta[:, 0] * t.sum())

    def test_class_dimensions(self):
        model = load_synthetic_regression(0.25)
        cls = poisson_regression_class(model)
        assert cls.m == 20 and cls.base.dim == 2

    def test_robustness_reproducible_and_widening(self):
        model = load_synthetic_regression(0.1)
        a = posterior_robustness(model, 20, 20000, seed=3)
        b = posterior_robustness(model, 20, 20000, seed=3)
        np.testing.assert_array_equal(a.posterior_means, b.posterior_means)
        c = posterior_robustness(model, 20, 20000, seed=3, epsilon=np.full(20, 0.2))
        assert np.all(c.widths > a.widths)
        assert np.all(a.lower <= a.base_mean) and np.all(a.base_mean <= a.upper)
