"""Estimator-style wrappers around the samplers.

Both classes follow the scikit-learn convention: hyperparameters go to
``__init__`` untouched, ``fit(x0)`` runs the sampler on observed data and
stores results in trailing-underscore attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import ess
from .samplers import AbcConfig, rejection_abc, sample_posterior_x0
from .validation import check_data


class RejectionABC(BaseEstimator):
    """Rejection ABC on sufficient statistics.

    Parameters
    ----------
    prior : Density
        Sampleable prior.
    simulator : callable
        ``simulator(thetas, rng)``; see :func:`~abcprior.samplers.rejection_abc`.
    suff_stat : callable
        Statistic of one dataset.
    epsilon : float or array_like
        Per-statistic tolerance.
    n_samples : int
        Acceptances to collect.
    max_attempts : int, optional
        Defaults to ``1000 * n_samples``.
    simulates : {"data", "stat"}
    random_state : int
    n_jobs : int

    Attributes
    ----------
    sample_ : AbcSample
    acceptance_rate_ : float
    n_attempts_ : int
    """

    def __init__(
        self,
        prior=None,
        simulator=None,
        suff_stat=None,
        epsilon=1.0,
        n_samples=10_000,
        max_attempts=None,
        simulates="data",
        random_state=0,
        n_jobs=1,
    ):
        self.prior = prior
        self.simulator = simulator
        self.suff_stat = suff_stat
        self.epsilon = epsilon
        self.n_samples = n_samples
        self.max_attempts = max_attempts
        self.simulates = simulates
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, x0, y=None):
        x0 = check_data(x0, "x0")
        cfg = AbcConfig(self.n_samples, self.epsilon, self.max_attempts)
        self.sample_ = rejection_abc(
            self.prior,
            self.simulator,
            self.suff_stat,
            x0,
            cfg,
            self.random_state,
            simulates=self.simulates,
            n_jobs=self.n_jobs,
        )
        self.acceptance_rate_ = self.sample_.acceptance_rate
        self.n_attempts_ = self.sample_.n_attempts
        return self

    def posterior_mean(self):
        check_is_fitted(self, "sample_")
        return self.sample_.mean()


class ABCClassPosterior(BaseEstimator):
    """ABC posterior obtained by pooling posteriors over a tilted prior class.

    Parameters
    ----------
    prior_class : PriorClass
    model : SuffStatModel or ExpFamSpec
    n_t : int
        Number of tilts drawn from the epsilon box.
    m : int
        Particles per tilt.
    route : {"importance", "direct"}
    pooling : {"evidence", "equal"}
    random_state : int
    n_jobs : int

    Attributes
    ----------
    sample_ : PooledSample
    ess_ : float
    """

    def __init__(
        self,
        prior_class=None,
        model=None,
        n_t=1000,
        m=10,
        route="importance",
        pooling="evidence",
        random_state=0,
        n_jobs=1,
    ):
        self.prior_class = prior_class
        self.model = model
        self.n_t = n_t
        self.m = m
        self.route = route
        self.pooling = pooling
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, x0, y=None):
        x0 = check_data(x0, "x0")
        self.sample_ = sample_posterior_x0(
            self.prior_class,
            self.model,
            x0,
            self.n_t,
            self.m,
            self.random_state,
            pooling=self.pooling,
            route=self.route,
            n_jobs=self.n_jobs,
        )
        self.ess_ = ess(self.sample_)
        return self

    def posterior_mean(self):
        check_is_fitted(self, "sample_")
        return self.sample_.mean()

    def posterior_sd(self):
        check_is_fitted(self, "sample_")
        return np.sqrt(self.sample_.var())
