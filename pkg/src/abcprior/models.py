"""Worked models with closed-form answers.

``NormalKnownVar`` and ``PoissonGamma`` are conjugate, so every class
member, posterior and prior-predictive probability is available exactly
and serves as an oracle for the generic machinery. ``StudentTLocation``
is deliberately not an exponential family: its first-order tilt is only
approximate. ``PoissonRegression`` carries the count-regression robustness
workflow.
"""

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np
from scipy import stats
from scipy.special import digamma, gammaln

from .classes import (
    ExpFamSpec,
    SuffStatModel,
    TiltFn,
    abc_class,
    abc_e_class,
    tilt_from_suffstat,
)
from .core import Density, RngSeed, as_rng_seed, log_sum_exp
from .densities import gamma_density, independent_normal_density, normal_density
from .exceptions import ConfigError
from .validation import check_positive_int, check_vector


@dataclass(frozen=True)
class NormalPosterior:
    mean: float
    var: float
    w1: float
    w2: float


@dataclass(frozen=True)
class NormalKnownVar:
    """``X_1..X_n ~ N(mu, sigma2)`` with prior ``mu ~ N(m, s2)``.

    Defaults are the worked numbers: ``n = 100``, ``sigma2 = 2``, ``m = 10``,
    ``xbar0 = 9.975`` and ``s2 = sigma2 / n = 0.02``.
    """

    n: int = 100
    sigma2: float = 2.0
    m: float = 10.0
    s2: float = 0.02
    xbar0: float = 9.975

    def __post_init__(self):
        check_positive_int(self.n, "n")
        if not (self.sigma2 > 0 and self.s2 > 0):
            raise ConfigError("sigma2 and s2 must be positive")

    @property
    def tau2(self):
        """Sampling variance of the sample mean."""
        return self.sigma2 / self.n

    def prior(self):
        return normal_density(self.m, self.s2)

    def observed_data(self, seed=0):
        """A synthetic dataset of size ``n`` whose mean is exactly ``xbar0``."""
        rng = as_rng_seed(seed).generator()
        x = rng.normal(self.xbar0, np.sqrt(self.sigma2), size=self.n)
        return x - x.mean() + self.xbar0

    def suffstat_model(self):
        tau2 = self.tau2

        def log_g(s, pts):
            return stats.norm.logpdf(s[0], loc=pts[:, 0], scale=np.sqrt(tau2))

        def dlogg_ds(s, pts):
            return ((pts[:, 0] - s[0]) / tau2)[:, None]

        return SuffStatModel(log_g, np.mean, dlogg_ds, name="normal mean")

    def expfam_spec(self):
        n, sigma2 = self.n, self.sigma2

        def log_A(pts):
            return -n * pts[:, 0] ** 2 / (2 * sigma2)

        def log_B0(s):
            return -n * s[0] ** 2 / (2 * sigma2) - 0.5 * np.log(2 * np.pi * sigma2 / n)

        def dlogB0_ds(s):
            return np.array([-n * s[0] / sigma2])

        def C(pts):
            return (n * pts[:, 0] / sigma2)[:, None]

        def conjugate_prior(k, l):
            # kernel exp(-n k mu^2 / (2 sigma2) + n l mu / sigma2) -> N(l / k, sigma2 / (n k))
            return normal_density(l[0] / k, sigma2 / (n * k))

        def log_normalizer(k, L):
            l = np.asarray(L, dtype=np.float64)[:, 0]
            return 0.5 * np.log(2 * np.pi * sigma2 / (n * k)) + n * l**2 / (2 * sigma2 * k)

        def sample(k, L, rng):
            l = np.asarray(L, dtype=np.float64)[:, 0]
            return rng.normal(l / k, np.sqrt(sigma2 / (n * k)))[:, None]

        k = sigma2 / (n * self.s2)
        return ExpFamSpec(
            log_A,
            log_B0,
            C,
            np.mean,
            (k, [self.m * k]),
            dlogB0_ds=dlogB0_ds,
            hyper_valid=lambda k, l: k > 0,
            conjugate_prior=conjugate_prior,
            conjugate_log_normalizer=log_normalizer,
            conjugate_sample=sample,
            name="normal mean",
        )

    def truth(self, s=None):
        return normal_truth(self, s)

    def posterior_density(self, s):
        post = normal_truth(self, float(np.atleast_1d(s)[0]))
        return normal_density(post.mean, post.var)

    def log_evidence(self, s):
        """Prior-predictive log-density of the sample mean, ``N(m, s2 + sigma2/n)``."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        return stats.norm.logpdf(s[..., 0] if s.ndim > 1 else s, self.m, np.sqrt(self.s2 + self.tau2))

    def simulate_stat(self, thetas, rng):
        """Draw the sample mean of a fresh dataset for each parameter row."""
        mu = np.asarray(thetas, dtype=np.float64).reshape(-1)
        return rng.normal(mu, np.sqrt(self.tau2))[:, None]

    def simulate_data(self, thetas, rng):
        mu = np.asarray(thetas, dtype=np.float64).reshape(-1, 1)
        return rng.normal(mu, np.sqrt(self.sigma2), size=(mu.shape[0], self.n))

    def taylor_class(self, epsilon):
        model = self.suffstat_model()
        return abc_class(self.prior(), tilt_from_suffstat(model, [self.xbar0]), epsilon)

    def class_E(self, epsilon):
        return normal_class_E(self, epsilon)

    def acceptance_probability(self, epsilon):
        """P(|xbar' - xbar0| <= epsilon) under the prior predictive."""
        sd = np.sqrt(self.s2 + self.tau2)
        return float(
            stats.norm.cdf(self.xbar0 + epsilon, self.m, sd) - stats.norm.cdf(self.xbar0 - epsilon, self.m, sd)
        )


def normal_truth(model, xbar=None):
    """Conjugate posterior ``N(m', s'^2)`` and the weights ``w1``, ``w2``."""
    xbar = model.xbar0 if xbar is None else xbar
    post_var = 1.0 / (1.0 / model.s2 + model.n / model.sigma2)
    w1 = post_var / model.s2
    w2 = model.n * post_var / model.sigma2
    return NormalPosterior(w1 * model.m + w2 * xbar, post_var, w1, w2)


def normal_class_E(model, epsilon):
    """ABC-E class ``{N(m'', s2): |m'' - m| <= (w2/w1) epsilon}``."""
    return abc_e_class(model.expfam_spec(), epsilon)


@dataclass(frozen=True)
class PoissonGamma:
    """``X_1..X_n ~ Poisson(lambda)`` with prior ``lambda ~ Gamma(r, v)`` (rate ``v``)."""

    n: int = 10
    r: float = 2.0
    v: float = 1.0
    sum_x0: float = 30.0

    def __post_init__(self):
        check_positive_int(self.n, "n")
        if not (self.r > 0 and self.v > 0):
            raise ConfigError("r and v must be positive")
        if self.sum_x0 < 0:
            raise ConfigError("sum_x0 must be non-negative")

    def prior(self):
        return gamma_density(self.r, self.v)

    def observed_data(self):
        """Counts of length ``n`` summing to ``sum_x0`` (spread as evenly as possible)."""
        total = int(round(self.sum_x0))
        base, extra = divmod(total, self.n)
        return np.array([base + (i < extra) for i in range(self.n)], dtype=np.float64)

    def suffstat_model(self):
        """``g(S|lambda) = exp(-n lambda) lambda^S``, so the tilt is ``log lambda``."""
        n = self.n

        def log_g(s, pts):
            lam = pts[:, 0]
            with np.errstate(divide="ignore"):
                return -n * lam + s[0] * np.log(lam)

        def dlogg_ds(s, pts):
            with np.errstate(divide="ignore"):
                return np.log(pts[:, 0])[:, None]

        return SuffStatModel(log_g, np.sum, dlogg_ds, name="poisson rate")

    def expfam_spec(self):
        n = self.n

        def log_A(pts):
            return -n * pts[:, 0]

        def log_B0(s):
            # S ~ Poisson(n lambda): B0(S) = n^S / Gamma(S + 1)
            return s[0] * np.log(n) - gammaln(s[0] + 1)

        def dlogB0_ds(s):
            return np.array([np.log(n) - digamma(s[0] + 1)])

        def C(pts):
            with np.errstate(divide="ignore"):
                return np.log(pts[:, 0])[:, None]

        def conjugate_prior(k, l):
            return gamma_density(l[0] + 1.0, n * k)

        def log_normalizer(k, L):
            shape = np.asarray(L, dtype=np.float64)[:, 0] + 1.0
            return gammaln(shape) - shape * np.log(n * k)

        def sample(k, L, rng):
            shape = np.asarray(L, dtype=np.float64)[:, 0] + 1.0
            return rng.gamma(shape, 1.0 / (n * k))[:, None]

        return ExpFamSpec(
            log_A,
            log_B0,
            C,
            np.sum,
            (self.v / n, [self.r - 1.0]),
            dlogB0_ds=dlogB0_ds,
            hyper_valid=lambda k, l: k > 0 and l[0] + 1.0 > 0,
            conjugate_prior=conjugate_prior,
            conjugate_log_normalizer=log_normalizer,
            conjugate_sample=sample,
            name="poisson rate",
        )

    def posterior_params(self, s=None, t=0.0):
        """Shape and rate of the posterior under prior ``Gamma(r + t, v)``."""
        s = self.sum_x0 if s is None else float(np.atleast_1d(s)[0])
        return self.r + t + s, self.v + self.n

    def posterior_density(self, s):
        shape, rate = self.posterior_params(s)
        return gamma_density(shape, rate)

    def log_evidence(self, s):
        """Prior-predictive log-density of ``S`` (negative binomial, continuous in ``S``)."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        s = s[..., 0] if s.ndim > 1 else s
        r, v, n = self.r, self.v, self.n
        return (
            gammaln(r + s) - gammaln(r) - gammaln(s + 1)
            + r * np.log(v / (v + n)) + s * np.log(n / (v + n))
        )

    def simulate_stat(self, thetas, rng):
        lam = np.asarray(thetas, dtype=np.float64).reshape(-1)
        return rng.poisson(self.n * lam).astype(np.float64)[:, None]

    def simulate_data(self, thetas, rng):
        lam = np.asarray(thetas, dtype=np.float64).reshape(-1, 1)
        return rng.poisson(lam, size=(lam.shape[0], self.n)).astype(np.float64)

    def taylor_class(self, epsilon):
        model = self.suffstat_model()
        return abc_class(self.prior(), tilt_from_suffstat(model, self.observed_data()), epsilon)

    def class_E(self, epsilon):
        return poisson_class_E(self, epsilon)


def poisson_class_E(model, epsilon):
    """ABC-E class ``{Gamma(r'', v): |r'' - r| <= epsilon}``; needs ``r > epsilon``."""
    eps = float(np.max(check_vector(epsilon, name="epsilon", positive=True)))
    if model.r - eps <= 0:
        raise ConfigError(f"epsilon = {eps:g} would push the gamma shape r - epsilon to <= 0 (r = {model.r:g})")
    return abc_e_class(model.expfam_spec(), epsilon)


@dataclass(frozen=True)
class StudentTLocation:
    """One observation ``s ~ t_df(theta, scale)`` with prior ``theta ~ N(0, prior_var)``.

    Not an exponential family, so ``log g`` is not linear in ``s`` and the
    first-order tilt leaves a theta-dependent remainder of order ``t**2``.
    """

    df: float = 5.0
    scale: float = 1.0
    s0: float = 0.3
    prior_var: float = 1.0

    def prior(self):
        return normal_density(0.0, self.prior_var)

    def suffstat_model(self):
        df, scale = self.df, self.scale

        def log_g(s, pts):
            return stats.t.logpdf(s[0], df, loc=pts[:, 0], scale=scale)

        def dlogg_ds(s, pts):
            d = s[0] - pts[:, 0]
            return (-(df + 1) * d / (df * scale**2 + d**2))[:, None]

        return SuffStatModel(log_g, lambda x: np.atleast_1d(x)[:1], dlogg_ds, name="t location")

    def taylor_class(self, epsilon):
        return abc_class(self.prior(), tilt_from_suffstat(self.suffstat_model(), [self.s0]), epsilon)


# ---------------------------------------------------------------------------
# Poisson regression


@dataclass(frozen=True)
class RobustnessResult:
    ts: np.ndarray
    posterior_means: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    base_mean: np.ndarray

    @property
    def widths(self):
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class PoissonRegression:
    """``log E[Y_i] = beta' X_i`` with counts ``y0`` and per-observation ``epsilon``."""

    X: np.ndarray
    y0: np.ndarray
    epsilon: np.ndarray
    prior: Optional[Density] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        y0 = np.asarray(self.y0, dtype=np.float64).reshape(-1)
        if X.shape[0] != y0.size:
            raise ConfigError(f"design has {X.shape[0]} rows but there are {y0.size} counts")
        if np.any(y0 < 0) or np.any(y0 != np.round(y0)):
            raise ConfigError("counts must be non-negative integers")
        eps = check_vector(self.epsilon, length=y0.size, name="epsilon", positive=True)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "epsilon", eps)
        if self.prior is None:
            object.__setattr__(self, "prior", independent_normal_density(X.shape[1]))
        elif self.prior.dim != X.shape[1]:
            raise ConfigError("prior dimension must equal the number of design columns")

    @property
    def p(self):
        return self.X.shape[1]

    def tilt(self):
        X = self.X
        return TiltFn(lambda pts: pts @ X.T, X.shape[0], "likelihood-general", X.shape[1])

    def loglik(self, pts):
        eta = np.asarray(pts, dtype=np.float64) @ self.X.T
        return eta @ self.y0 - np.exp(eta).sum(axis=1) - gammaln(self.y0 + 1).sum()


def poisson_regression_class(model, epsilon=None):
    """Tilted-prior class ``pi(beta) exp(sum_i beta' X_i t_i)``, ``|t_i| <= eps_i``."""
    eps = model.epsilon if epsilon is None else check_vector(epsilon, length=model.y0.size, positive=True)
    return abc_class(model.prior, model.tilt(), eps)


def posterior_robustness(model, n_members=50, n_draws=100_000, seed=0, epsilon=None):
    """Range of posterior means of ``beta`` over sampled members of the class.

    Members are drawn as ``t = u * epsilon`` with ``u`` uniform on the unit
    box; every member reuses the same prior draws, so results at different
    ``epsilon`` are directly comparable and bit-reproducible for a seed.
    """
    seed = as_rng_seed(seed)
    eps = model.epsilon if epsilon is None else check_vector(epsilon, length=model.y0.size, positive=True)
    n_members = check_positive_int(n_members, "n_members")
    beta = model.prior.sample(seed.generator(0), n_draws)
    u = seed.generator(1).uniform(-1.0, 1.0, size=(n_members, model.y0.size))
    ts = u * eps
    loglik = model.loglik(beta)
    tilt = beta @ model.X.T
    base_lw = loglik - log_sum_exp(loglik)
    base_mean = np.exp(base_lw) @ beta
    means = np.empty((n_members, model.p))
    for j, t in enumerate(ts):
        lw = loglik + tilt @ t
        w = np.exp(lw - log_sum_exp(lw))
        means[j] = w @ beta
    return RobustnessResult(ts, means, means.min(axis=0), means.max(axis=0), base_mean)


SYNTHETIC_BETA = (0.5, -0.25)
SYNTHETIC_SEED = 20240601


def make_synthetic_regression(n=20, beta=SYNTHETIC_BETA, seed=SYNTHETIC_SEED):
    """Intercept plus an equispaced covariate on [-1, 1]; counts drawn with a fixed seed."""
    X = np.column_stack([np.ones(n), np.linspace(-1.0, 1.0, n)])
    rng = RngSeed(seed).generator()
    y = rng.poisson(np.exp(X @ np.asarray(beta)))
    return X, y


def load_synthetic_regression(epsilon=1.0, prior=None):
    """The shipped synthetic dataset (columns ``x1, x2, y``)."""
    text = resources.files("abcprior").joinpath("data/poisson_regression_synthetic.csv").read_text()
    return read_regression_csv(text.splitlines(), epsilon, prior)


def read_regression_csv(lines, epsilon=1.0, prior=None):
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ConfigError("regression CSV has no data rows")
    xcols = [c for c in rows[0] if c != "y"]
    X = np.array([[float(r[c]) for c in xcols] for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    return PoissonRegression(X, y, np.broadcast_to(np.asarray(epsilon, dtype=np.float64), y.shape).copy(), prior)
