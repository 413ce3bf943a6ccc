"""Tilted prior classes.

A member of any class is the base prior reweighted by
``exp(sign * sum_k h_k(theta) * t_k)`` and renormalized. The classes differ
in where the tilt ``h`` comes from:

========  ==========================================  =====
kind      tilt                                        sign
========  ==========================================  =====
ABC       d log g / d s at the observed statistic     +1
ABC-E     C(theta) of an exponential family           +1
ABC-G     d log f / d x_i at the observed data        -1
AB        log f(x0|theta) - log f~(x0|theta), t = 1   +1
========  ==========================================  =====
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import (
    MAX_QUADRATURE_DIM,
    Density,
    RngSeed,
    covering_grid,
    log_quadrature,
    log_sum_exp,
)
from .exceptions import (
    ConfigError,
    MembershipError,
    NotComparableError,
    NumericalError,
)
from .validation import check_data, check_points, check_vector

KINDS = ("ABC", "ABC-E", "ABC-G", "AB")
PROVENANCES = ("suffstat-derivative", "expfam", "likelihood-general", "likelihood-ratio", "custom")

#: Draws used by the Monte Carlo normalizer for parameters of dimension > 3.
MC_NORMALIZER_DRAWS = 200_000


def _fd_step(v):
    return 1e-5 * np.maximum(1.0, np.abs(v))


def _central_gradient(f, s):
    """Central differences of ``f(s) -> (k,)`` along each coordinate of ``s``."""
    s = np.asarray(s, dtype=np.float64)
    cols = []
    for k in range(s.size):
        step = _fd_step(s[k])
        up, down = s.copy(), s.copy()
        up[k] += step
        down[k] -= step
        cols.append((np.asarray(f(up), dtype=np.float64) - np.asarray(f(down), dtype=np.float64)) / (2 * step))
    return np.stack(cols, axis=-1)


def _gradients_agree(analytic, numeric, rtol):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = max(1.0, float(np.max(np.abs(analytic))))
    return bool(np.all(np.abs(analytic - numeric) <= rtol * np.maximum(np.abs(analytic), scale)))


@dataclass(frozen=True)
class SuffStatModel:
    """Likelihood of a sufficient statistic, ``g(s | theta)``.

    ``log_g(s, theta)`` takes an ``(m,)`` statistic and ``(k, n)`` points and
    returns ``(k,)``; ``dlogg_ds`` has the same inputs and returns ``(k, m)``.
    When ``dlogg_ds`` is omitted it is replaced by central differences.
    """

    log_g: Callable
    suff_stat: Callable
    dlogg_ds: Optional[Callable] = None
    dim: int = 1
    name: str = ""

    def stat(self, x):
        return check_vector(self.suff_stat(check_data(x)), name="sufficient statistic")

    def loglik_stat(self, s, theta):
        pts = check_points(theta, self.dim)
        return np.asarray(self.log_g(np.atleast_1d(np.asarray(s, dtype=np.float64)), pts), dtype=np.float64).reshape(-1)

    def grad_s(self, s, theta):
        pts = check_points(theta, self.dim)
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if self.dlogg_ds is not None:
            return np.asarray(self.dlogg_ds(s, pts), dtype=np.float64).reshape(len(pts), s.size)
        return _central_gradient(lambda v: self.log_g(v, pts), s)

    def check_derivative(self, s, theta, rtol=1e-5):
        """True when ``dlogg_ds`` matches central differences of ``log_g``."""
        pts = check_points(theta, self.dim)
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        numeric = _central_gradient(lambda v: self.log_g(v, pts), s)
        return _gradients_agree(self.grad_s(s, pts), numeric, rtol)


@dataclass(frozen=True)
class ExpFamSpec:
    """``f(x|theta) = A(theta) B(x) exp(C(theta) . S(x))`` with a conjugate prior.

    The conjugate prior kernel is ``A(theta)**k * exp(C(theta) . l)`` with
    ``conj_hyper = (k, l)``. ``conjugate_prior(k, l)``, when given, returns
    the normalized closed-form :class:`Density` for those hyperparameters,
    and ``hyper_valid(k, l)`` says whether they define a proper prior.
    """

    log_A: Callable
    log_B0: Callable
    C: Callable
    suff_stat: Callable
    conj_hyper: tuple
    dlogB0_ds: Optional[Callable] = None
    hyper_valid: Optional[Callable] = None
    conjugate_prior: Optional[Callable] = None
    conjugate_log_normalizer: Optional[Callable] = None
    conjugate_sample: Optional[Callable] = None
    dim: int = 1
    name: str = ""

    def __post_init__(self):
        k, l = self.conj_hyper
        object.__setattr__(self, "conj_hyper", (float(k), check_vector(l, name="conjugate l").copy()))

    @property
    def m(self):
        return self.conj_hyper[1].size

    def stat(self, x):
        return check_vector(self.suff_stat(check_data(x)), length=self.m, name="sufficient statistic")

    def natural(self, theta):
        pts = check_points(theta, self.dim)
        return np.asarray(self.C(pts), dtype=np.float64).reshape(len(pts), self.m)

    def grad_log_B0(self, s):
        s = check_vector(s, length=self.m, name="sufficient statistic")
        if self.dlogB0_ds is not None:
            return check_vector(self.dlogB0_ds(s), length=self.m, name="dlogB0_ds")
        return _central_gradient(lambda v: np.atleast_1d(self.log_B0(v)), s).reshape(self.m)

    def loglik_stat(self, s, theta):
        """``log g(s | theta) = log A + log B0(s) + C . s``."""
        pts = check_points(theta, self.dim)
        s = check_vector(s, length=self.m, name="sufficient statistic")
        return np.asarray(self.log_A(pts), dtype=np.float64).reshape(-1) + float(self.log_B0(s)) + self.natural(pts) @ s

    def prior_log_kernel(self, theta):
        k, l = self.conj_hyper
        pts = check_points(theta, self.dim)
        return k * np.asarray(self.log_A(pts), dtype=np.float64).reshape(-1) + self.natural(pts) @ l

    def prior(self):
        """The conjugate prior for the current hyperparameters."""
        if self.conjugate_prior is not None:
            return self.conjugate_prior(*self.conj_hyper)
        return Density(self.prior_log_kernel, self.dim, normalized=False, name="conjugate kernel")

    def as_suffstat_model(self):
        """The same likelihood seen as ``g(s | theta)``."""

        def log_g(s, pts):
            return self.loglik_stat(s, pts)

        def dlogg_ds(s, pts):
            return self.grad_log_B0(s)[None, :] + self.natural(pts)

        return SuffStatModel(log_g, self.suff_stat, dlogg_ds, dim=self.dim, name=self.name)

    def check_derivative(self, s, rtol=1e-5):
        s = check_vector(s, length=self.m)
        numeric = _central_gradient(lambda v: np.atleast_1d(self.log_B0(v)), s).reshape(self.m)
        return _gradients_agree(self.grad_log_B0(s), numeric, rtol)


@dataclass(frozen=True)
class TiltFn:
    """A tilt ``h(theta)`` with ``m`` components, evaluated on ``(k, n)`` points."""

    h: Callable
    m: int = 1
    provenance: str = "custom"
    dim: int = 1

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ConfigError(f"unknown tilt provenance {self.provenance!r}")

    def __call__(self, theta):
        pts = check_points(theta, self.dim)
        out = np.asarray(self.h(pts), dtype=np.float64)
        return out.reshape(len(pts), self.m)


@dataclass(frozen=True, eq=False)
class TiltedPrior:
    """One member ``pi(theta) exp(sign * h(theta) . t) / normalizer``.

    The log-normalizer is computed on first use and cached; concurrent first
    uses compute the same value and the first stored one wins.
    """

    base: Density
    tilt: TiltFn
    t: np.ndarray
    sign: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        t = check_vector(self.t, length=self.tilt.m, name="t").copy()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        if self.tilt.dim != self.base.dim:
            raise ConfigError("tilt and base prior dimensions differ")

    @property
    def dim(self):
        return self.base.dim

    @property
    def is_identity(self):
        return not np.any(self.t)

    def log_weight(self, theta):
        """``sign * sum_k h_k(theta) t_k``."""
        if self.is_identity:
            return np.zeros(len(check_points(theta, self.dim)))
        return self.sign * (self.tilt(theta) @ self.t)

    def log_pdf_unnormalized(self, theta):
        lp = self.base.logpdf(theta)
        out = np.full_like(lp, -np.inf)
        ok = np.isfinite(lp)
        if np.any(ok):
            pts = check_points(theta, self.dim)[ok]
            out[ok] = lp[ok] + self.log_weight(pts)
        return np.where(np.isnan(out), -np.inf, out)

    def grid(self, num=4001):
        """A univariate grid covering both the base prior and this member."""
        if self.dim != 1:
            raise ConfigError("member grids are univariate; pass an explicit GridSpec")
        support = (self.base.lower[0], self.base.upper[0])
        return covering_grid([self.base.logpdf, self.log_pdf_unnormalized], self.base.default_grid(), support, num)

    def log_normalizer(self, grid=None):
        """``log E_pi[exp(sign * h . t)]`` (times the base's own normalizer).

        Only the default-grid value is cached; an explicit ``grid`` always
        recomputes.
        """
        if grid is None:
            cached = self._cache.get("log_normalizer")
            if cached is not None:
                return cached
        if self.is_identity and self.base.normalized:
            value = 0.0
        elif self.dim <= MAX_QUADRATURE_DIM:
            quad_grid = grid
            if quad_grid is None:
                quad_grid = self.grid() if self.dim == 1 else self.base.default_grid()
            value = log_quadrature(self.log_pdf_unnormalized, quad_grid)
        else:
            value = self._monte_carlo_log_normalizer()
        if not np.isfinite(value):
            raise NumericalError(
                f"non-finite normalizer for tilt magnitude |t| = {np.abs(self.t).max():g}"
            )
        if grid is None:
            value = self._cache.setdefault("log_normalizer", value)
        return value

    def _monte_carlo_log_normalizer(self):
        if not self.base.normalized:
            raise NumericalError("Monte Carlo normalizer needs a normalized, sampleable base prior")
        draws = self.base.sample(RngSeed(0).generator(), MC_NORMALIZER_DRAWS)
        return log_sum_exp(self.log_weight(draws)) - np.log(MC_NORMALIZER_DRAWS)

    def log_pdf(self, theta, normalized=True):
        lp = self.log_pdf_unnormalized(theta)
        return lp - self.log_normalizer() if normalized else lp

    def as_density(self):
        """This member as a normalized :class:`Density` (same support as the base)."""
        lz = self.log_normalizer()
        hint, mean, sd = None, None, None
        if self.dim == 1:
            g = self.grid()
            hint = (g.lower, g.upper, g.log_scale)
            x = g.points()[:, 0]
            w = g.weights() * np.exp(self.log_pdf_unnormalized(g.points()) - lz)
            mu = float(w @ x)
            mean, sd = (mu,), (float(np.sqrt(max(w @ (x - mu) ** 2, 0.0))),)
        return Density(
            lambda pts: self.log_pdf_unnormalized(pts) - lz,
            self.dim,
            lower=self.base.lower,
            upper=self.base.upper,
            normalized=True,
            grid_hint=hint,
            mean=mean,
            sd=sd,
            name=f"{self.base.name} tilted by t={self.t.tolist()}",
        )


@dataclass(frozen=True, eq=False)
class PriorClass:
    """A class of tilted priors around ``base``; ``epsilon`` is absent for AB."""

    kind: str
    base: Density
    tilt: TiltFn
    epsilon: Optional[np.ndarray] = None
    expfam: Optional[ExpFamSpec] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown class kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "AB":
            if self.epsilon is not None:
                raise ConfigError("the AB class carries no epsilon")
        else:
            if self.epsilon is None:
                raise ConfigError(f"{self.kind} class needs epsilon")
            eps = check_vector(self.epsilon, length=self.tilt.m, name="epsilon", positive=True).copy()
            eps.setflags(write=False)
            object.__setattr__(self, "epsilon", eps)
        if self.tilt.dim != self.base.dim:
            raise ConfigError("tilt and base prior dimensions differ")

    @property
    def sign(self):
        return -1 if self.kind == "ABC-G" else 1

    @property
    def m(self):
        return self.tilt.m

    def member(self, t=None):
        return make_member(self, t)

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)

    def bounds(self):
        """Members at ``t = -eps`` and ``t = +eps``."""
        if self.kind == "AB":
            raise ConfigError("the AB class has a single member and no bounds")
        return self.member(-self.epsilon), self.member(self.epsilon)


# ---------------------------------------------------------------------------
# Tilt constructors


def tilt_from_suffstat(model, x0, probe=None):
    """``h_k(theta) = d log g(s, theta) / d s_k`` at ``s = s(x0)``.

    ``probe`` points, when given, are used to fail early on a non-finite
    derivative.
    """
    s0 = model.stat(x0)

    def h(pts):
        return model.grad_s(s0, pts)

    tilt = TiltFn(h, s0.size, "suffstat-derivative", model.dim)
    if probe is not None:
        vals = tilt(probe)
        bad = ~np.all(np.isfinite(vals), axis=0)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NumericalError(f"d log g / d s_{k} is not finite at s(x0) = {s0[k]:g}")
    return tilt


def tilt_from_expfam(spec, x0):
    """``h(theta) = B0'(S(x0)) / B0(S(x0)) + C(theta)``.

    The theta-free first term is kept so this route can be compared with
    :func:`tilt_from_suffstat`; it cancels once a member is normalized.
    """
    s0 = spec.stat(x0)
    offset = spec.grad_log_B0(s0)
    if not np.all(np.isfinite(offset)):
        k = int(np.argmax(~np.isfinite(offset)))
        raise NumericalError(f"d log B0 / d S_{k} is not finite at S(x0) = {s0[k]:g}")

    def h(pts):
        return offset[None, :] + spec.natural(pts)

    return TiltFn(h, spec.m, "expfam", spec.dim)


def natural_tilt(spec):
    """The ABC-E tilt ``C(theta)``."""
    return TiltFn(spec.natural, spec.m, "expfam", spec.dim)


def tilt_from_likelihood(loglik, x0, dim=1, dloglik_dx=None, discrete=False, probe=None):
    """Per-observation tilt ``k_i(theta) = d log f(x|theta) / d x_i`` at ``x0``.

    ``loglik(x, theta)`` takes an ``(N,)`` dataset and ``(k, n)`` points.
    Members of the resulting class use sign ``-1``. Discrete data have no
    derivative in ``x``; build those classes from a sufficient-statistic
    model instead.
    """
    x0 = check_data(x0, "x0")
    if discrete:
        raise ConfigError(
            "discrete data: d log f / d x is meaningless; use tilt_from_suffstat "
            "with a sufficient-statistic model"
        )

    if dloglik_dx is not None:

        def h(pts):
            return np.asarray(dloglik_dx(x0, pts), dtype=np.float64).reshape(len(pts), x0.size)

    else:

        def h(pts):
            return _central_gradient(lambda v: loglik(v, pts), x0)

    tilt = TiltFn(h, x0.size, "likelihood-general", dim)
    if probe is not None:
        pts = check_points(probe, dim)
        vals = tilt(pts)
        if not np.all(np.isfinite(vals)):
            raise ConfigError(
                "log-likelihood is not differentiable in x at x0; for discrete data "
                "use tilt_from_suffstat"
            )
        coarse = np.stack(
            [
                (loglik(x0 + 4 * _fd_step(x0) * e, pts) - loglik(x0 - 4 * _fd_step(x0) * e, pts))
                / (8 * _fd_step(x0) @ e)
                for e in np.eye(x0.size)
            ],
            axis=-1,
        )
        if not _gradients_agree(vals, coarse, 1e-4):
            raise ConfigError("finite differences of the log-likelihood in x are unstable at x0")
    return tilt


def tilt_from_likelihood_ratio(log_f, log_f_tilde, x0, dim=1):
    """AB tilt ``h(theta) = log f(x0|theta) - log f~(x0|theta)``."""
    x0 = check_data(x0, "x0")

    def h(pts):
        lf = np.asarray(log_f(x0, pts), dtype=np.float64).reshape(-1)
        lft = np.asarray(log_f_tilde(x0, pts), dtype=np.float64).reshape(-1)
        undefined = np.isneginf(lft) & np.isfinite(lf)
        if np.any(undefined):
            i = int(np.argmax(undefined))
            raise NumericalError(f"ratio undefined: f~(x0|theta) = 0 where f > 0, at theta = {pts[i].tolist()}")
        with np.errstate(invalid="ignore"):
            out = lf - lft
        return np.where(np.isnan(out), -np.inf, out)[:, None]

    return TiltFn(h, 1, "likelihood-ratio", dim)


# ---------------------------------------------------------------------------
# Class operations


def make_member(prior_class, t=None):
    """The class member at tilt ``t`` (``t`` must lie in the epsilon box)."""
    if prior_class.kind == "AB":
        if t is not None and not np.allclose(check_vector(t, length=1), 1.0):
            raise MembershipError("AB members have t fixed at 1")
        return TiltedPrior(prior_class.base, prior_class.tilt, np.ones(1), 1)
    t = check_vector(t, length=prior_class.m, name="t")
    over = np.abs(t) > prior_class.epsilon
    if np.any(over):
        k = int(np.argmax(over))
        raise MembershipError(
            f"|t_{k}| = {abs(t[k]):g} exceeds epsilon_{k} = {prior_class.epsilon[k]:g}"
        )
    return TiltedPrior(prior_class.base, prior_class.tilt, t, prior_class.sign)


def member_log_pdf(member, theta, normalized=True):
    return member.log_pdf(theta, normalized=normalized)


def class_contains(prior_class, member):
    """Whether ``member`` lies in ``prior_class`` (``|t_k| <= eps_k`` for all k)."""
    if member.base is not prior_class.base or member.tilt is not prior_class.tilt:
        raise NotComparableError("member was built over a different base prior or tilt")
    if member.sign != prior_class.sign:
        raise NotComparableError("member uses a different tilt sign convention")
    if prior_class.kind == "AB":
        return bool(np.all(member.t == 1.0))
    return bool(np.all(np.abs(member.t) <= prior_class.epsilon))


def conjugate_shift(spec, t):
    """Shift the conjugate hyperparameters ``(k, l) -> (k, l + t)``."""
    k, l = spec.conj_hyper
    new_l = l + check_vector(t, length=spec.m, name="t")
    if spec.hyper_valid is not None and not spec.hyper_valid(k, new_l):
        raise ConfigError(
            f"shifted hyperparameters (k={k:g}, l={new_l.tolist()}) leave the conjugate family's valid region"
        )
    return replace(spec, conj_hyper=(k, new_l))


def abc_class(base, tilt, epsilon):
    return PriorClass("ABC", base, tilt, epsilon)


def abc_e_class(spec, epsilon):
    """ABC-E class: conjugate priors with ``l`` shifted by at most ``epsilon``."""
    return PriorClass("ABC-E", spec.prior(), natural_tilt(spec), epsilon, expfam=spec)


def abc_g_class(base, tilt, epsilon):
    return PriorClass("ABC-G", base, tilt, epsilon)


def ab_class(base, tilt):
    return PriorClass("AB", base, tilt)


# ---------------------------------------------------------------------------
# Duality diagnostics


def taylor_duality_log_ratio(model, tilt, s0, t, theta):
    """``log[g(s0 + t|theta)] - log[exp(h(theta) . t) g(s0|theta)]`` on ``theta``.

    The prior cancels, so this is the Taylor remainder of the first-order
    construction. It is constant in theta exactly when the construction is
    exact (up to a theta-free factor).
    """
    s0 = np.atleast_1d(np.asarray(s0, dtype=np.float64))
    t = check_vector(t, length=s0.size, name="t")
    pts = check_points(theta, model.dim)
    return model.loglik_stat(s0 + t, pts) - tilt(pts) @ t - model.loglik_stat(s0, pts)


def conjugate_duality_log_ratio(spec, s0, t, theta):
    """``log[pi_gamma f(x'|theta)] - log[pi_gamma' f(x0|theta)]`` with ``S(x') = s0 + t``.

    Uses the closed-form normalized conjugate priors, so the result should be
    constant in theta to rounding error.
    """
    s0 = check_vector(s0, length=spec.m)
    t = check_vector(t, length=spec.m, name="t")
    pts = check_points(theta, spec.dim)
    shifted = conjugate_shift(spec, t)
    lhs = spec.prior().logpdf(pts) + spec.loglik_stat(s0 + t, pts)
    rhs = shifted.prior().logpdf(pts) + spec.loglik_stat(s0, pts)
    return lhs - rhs
