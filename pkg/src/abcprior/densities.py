"""Ready-made :class:`~abcprior.core.Density` instances.

Log-densities come straight from :mod:`scipy.stats`; the factories add
samplers and truncation hints so the rest of the package can build grids.
"""

import numpy as np
from scipy import stats

from .core import Density
from .exceptions import ConfigError

_TAIL = 1e-30


def normal_density(mean, var):
    """Univariate ``N(mean, var)`` (``var`` is a variance)."""
    if not var > 0:
        raise ConfigError("normal variance must be positive")
    mean, sd = float(mean), float(np.sqrt(var))

    def log_pdf(pts):
        return stats.norm.logpdf(pts[:, 0], loc=mean, scale=sd)

    def sampler(rng, size):
        return rng.normal(mean, sd, size=size)

    return Density(log_pdf, 1, sampler=sampler, mean=mean, sd=sd, name=f"N({mean:g}, {var:g})")


def gamma_density(shape, rate):
    """``Gamma(shape, rate)`` on ``(0, inf)`` with a log-spaced default grid."""
    if not (shape > 0 and rate > 0):
        raise ConfigError(f"gamma needs shape > 0 and rate > 0, got ({shape}, {rate})")
    shape, rate = float(shape), float(rate)
    scale = 1.0 / rate

    def log_pdf(pts):
        return stats.gamma.logpdf(pts[:, 0], shape, scale=scale)

    def sampler(rng, size):
        return rng.gamma(shape, scale, size=size)

    lo = max(stats.gamma.ppf(_TAIL, shape, scale=scale), 1e-300)
    hi = stats.gamma.isf(_TAIL, shape, scale=scale)
    return Density(
        log_pdf,
        1,
        lower=0.0,
        upper=np.inf,
        sampler=sampler,
        mean=shape * scale,
        sd=np.sqrt(shape) * scale,
        grid_hint=((lo,), (hi,), (True,)),
        name=f"Gamma({shape:g}, {rate:g})",
    )


def mvnormal_density(mean, cov):
    """Multivariate normal with full covariance."""
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.shape != (mean.size, mean.size):
        raise ConfigError("covariance shape does not match the mean")
    dist = stats.multivariate_normal(mean=mean, cov=cov)

    def log_pdf(pts):
        return np.atleast_1d(dist.logpdf(pts))

    def sampler(rng, size):
        return rng.multivariate_normal(mean, cov, size=size)

    return Density(
        log_pdf,
        mean.size,
        sampler=sampler,
        mean=tuple(mean),
        sd=tuple(np.sqrt(np.diag(cov))),
        name=f"MVN(dim={mean.size})",
    )


def bivariate_normal_density(rho, sd=(1.0, 1.0), mean=(0.0, 0.0)):
    """Bivariate normal with correlation ``rho`` (the MTP2 fixtures)."""
    if not -1 < rho < 1:
        raise ConfigError("correlation must lie in (-1, 1)")
    s1, s2 = sd
    cov = [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]]
    return mvnormal_density(mean, cov)


def independent_normal_density(dim, mean=0.0, sd=1.0):
    mean = np.broadcast_to(np.asarray(mean, dtype=np.float64), (dim,))
    sd = np.broadcast_to(np.asarray(sd, dtype=np.float64), (dim,))
    return mvnormal_density(mean, np.diag(sd**2))


def student_t_density(df, loc=0.0, scale=1.0):
    df, loc, scale = float(df), float(loc), float(scale)

    def log_pdf(pts):
        return stats.t.logpdf(pts[:, 0], df, loc=loc, scale=scale)

    def sampler(rng, size):
        return loc + scale * rng.standard_t(df, size=size)

    lo = stats.t.ppf(1e-12, df, loc=loc, scale=scale)
    hi = stats.t.isf(1e-12, df, loc=loc, scale=scale)
    return Density(log_pdf, 1, sampler=sampler, grid_hint=((lo,), (hi,), (False,)), name=f"t{df:g}")
