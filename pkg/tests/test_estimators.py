import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from abcprior import ABCClassPosterior, RejectionABC


class TestRejectionABC:
    def test_params_roundtrip(self, normal_model):
        est = RejectionABC(normal_model.prior(), normal_model.simulate_stat, np.mean, epsilon=0.5, simulates="stat")
        params = est.get_params()
        assert params["epsilon"] == 0.5 and params["simulates"] == "stat"
        twin = clone(est).set_params(epsilon=0.25)
        assert twin.epsilon == 0.25 and est.epsilon == 0.5

    def test_fit(self, normal_model):
        est = RejectionABC(normal_model.prior(), normal_model.simulate_stat, np.mean, epsilon=0.25,
                           n_samples=2000, simulates="stat", random_state=4)
        est.fit(normal_model.observed_data())
        assert len(est.sample_) == 2000
        assert 0 < est.acceptance_rate_ <= 1
        assert est.posterior_mean()[0] == pytest.approx(10.0, abs=0.05)

    def test_unfitted(self):
        with pytest.raises(NotFittedError):
            RejectionABC().posterior_mean()


class TestABCClassPosterior:
    def test_fit_matches_function(self, normal_model):
        from abcprior import sample_posterior_x0

        cls = normal_model.taylor_class(1.0)
        sm = normal_model.suffstat_model()
        x0 = normal_model.observed_data()
        est = ABCClassPosterior(cls, sm, n_t=5000, m=4, random_state=3).fit(x0)
        ref = sample_posterior_x0(cls, sm, x0, 5000, 4, 3)
        np.testing.assert_array_equal(est.sample_.points, ref.points)
        assert est.ess_ > 100
        assert est.posterior_sd()[0] > 0.1

    def test_clone_keeps_class(self, poisson_model):
        est = ABCClassPosterior(poisson_model.class_E(1.0), poisson_model.expfam_spec(), route="direct")
        twin = clone(est)
        assert twin.prior_class.kind == "ABC-E"
        np.testing.assert_array_equal(twin.prior_class.epsilon, est.prior_class.epsilon)
        assert twin.route == "direct"
