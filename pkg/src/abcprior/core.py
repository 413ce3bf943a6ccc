"""Numeric plumbing shared by every other module.

Everything density-like is carried in log space. Points are always handled
as ``(k, n)`` float64 arrays internally; the public helpers accept ``(k,)``
for univariate parameters.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .exceptions import ConfigError, EmptyMassError, NumericalError
from .validation import check_points, check_positive_int, check_seed

#: Number of standard deviations kept on each side when an unbounded prior
#: has to be truncated for quadrature or sup-norm computations.
DEFAULT_SD_MULT = 12.0

#: Log-density drop, relative to the mode, beyond which grid points carry
#: less than ~1e-32 relative mass and can be cut.
NEGLIGIBLE_LOG_MASS = 75.0

MAX_QUADRATURE_DIM = 3


def log_sum_exp(values):
    """Stable ``log(sum(exp(values)))``.

    Raises
    ------
    EmptyMassError
        If every entry is ``-inf`` (or the input is empty).
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0 or not np.any(np.isfinite(v)):
        raise EmptyMassError("empty mass: no finite log-values to sum")
    if np.any(np.isnan(v)) or np.any(v == np.inf):
        raise NumericalError("log_sum_exp received NaN or +inf")
    return float(logsumexp(v))


# ---------------------------------------------------------------------------
# Random streams


@dataclass(frozen=True)
class RngSeed:
    """A reproducible random stream.

    ``(seed, stream_id)`` fully determines the generator. Parallel work is
    split into chunks and chunk ``c`` always draws from the substream keyed
    ``(stream_id, c)``, so results do not depend on how many threads ran
    the chunks.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        check_seed(self.seed)
        if self.stream_id < 0:
            raise ConfigError("stream_id must be non-negative")

    def generator(self, chunk=0):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, int(chunk)))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id):
        """Derive an independent stream for a sub-task."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, 2**31 + int(stream_id)))
        return RngSeed(int(ss.generate_state(2, np.uint64)[0]), 0)


def as_rng_seed(seed):
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(check_seed(seed))


# ---------------------------------------------------------------------------
# Weighted samples


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WeightedSample:
    """Particles ``points`` (shape ``(N, n)``) with log-weights.

    ``flags`` carries non-fatal diagnostics such as severe weight
    degeneracy.
    """

    points: np.ndarray
    log_weights: np.ndarray
    normalized: bool = False
    seed: int = 0
    flags: tuple = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        lw = np.asarray(self.log_weights, dtype=np.float64).ravel()
        if pts.shape[0] != lw.shape[0]:
            raise ConfigError(
                f"points ({pts.shape[0]}) and log_weights ({lw.shape[0]}) differ in length"
            )
        if np.any(np.isnan(lw)) or np.any(lw == np.inf):
            raise NumericalError("log-weights must be finite or -inf")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "log_weights", _frozen(lw))
        object.__setattr__(self, "seed", check_seed(self.seed))
        object.__setattr__(self, "flags", tuple(self.flags))

    def __len__(self):
        return self.log_weights.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def weights(self):
        """Normalized weights (computed on the fly if needed)."""
        lw = self.log_weights if self.normalized else normalize(self).log_weights
        return np.exp(lw)

    @property
    def values(self):
        """The points of a univariate sample as a flat vector."""
        if self.dim != 1:
            raise ConfigError("values is only defined for univariate samples")
        return self.points[:, 0]

    def mean(self):
        return self.weights @ self.points

    def var(self):
        w = self.weights
        centred = self.points - w @ self.points
        return w @ centred**2

    def std(self):
        return np.sqrt(self.var())


def normalize(sample):
    """Return a copy of ``sample`` whose weights sum to one."""
    lw = sample.log_weights
    total = log_sum_exp(lw)
    new = lw - total
    # a second pass removes the rounding left by the first shift
    new = new - logsumexp(new)
    return WeightedSample(sample.points, new, normalized=True, seed=sample.seed, flags=sample.flags)


def ess(sample):
    """Effective sample size ``1 / sum(w_i**2)`` of a normalized sample."""
    if not sample.normalized:
        raise ConfigError("ess requires a normalized sample; call normalize() first")
    w = np.exp(sample.log_weights)
    value = 1.0 / np.sum(w * w)
    return float(np.clip(value, 1.0, len(sample)))


# ---------------------------------------------------------------------------
# Grids and quadrature


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid with per-axis bounds and point counts.

    Axes flagged ``log_scale`` are equispaced in ``log(theta)``; their
    quadrature weights include the Jacobian, which keeps trapezoid
    integration accurate for densities on ``(0, inf)`` that pile up near
    zero.
    """

    lower: tuple
    upper: tuple
    num: tuple
    log_scale: tuple = None

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        num = tuple(int(v) for v in np.atleast_1d(self.num))
        if len(num) == 1 and len(lo) > 1:
            num = num * len(lo)
        ls = self.log_scale
        ls = (False,) * len(lo) if ls is None else tuple(bool(v) for v in np.atleast_1d(ls))
        if not len(lo) == len(hi) == len(num) == len(ls):
            raise ConfigError("grid bounds, counts and scales must have equal length")
        for a, b, k, lg in zip(lo, hi, num, ls):
            if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
                raise ConfigError(f"grid needs finite lower < upper, got [{a}, {b}]")
            if k < 2:
                raise ConfigError(f"grid needs at least 2 points per axis, got {k}")
            if lg and a <= 0:
                raise ConfigError("log-scale grid axes need a positive lower bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "log_scale", ls)

    @classmethod
    def line(cls, lower, upper, num=2001, log_scale=False):
        return cls((lower,), (upper,), (num,), (log_scale,))

    @property
    def dim(self):
        return len(self.lower)

    @property
    def size(self):
        return int(np.prod(self.num))

    def axes(self):
        out = []
        for a, b, k, lg in zip(self.lower, self.upper, self.num, self.log_scale):
            if lg:
                out.append(np.exp(np.linspace(np.log(a), np.log(b), k)))
            else:
                out.append(np.linspace(a, b, k))
        return out

    def axis_weights(self):
        out = []
        for axis, lg in zip(self.axes(), self.log_scale):
            coord = np.log(axis) if lg else axis
            d = np.diff(coord)
            w = np.zeros_like(axis)
            w[:-1] += d / 2
            w[1:] += d / 2
            out.append(w * axis if lg else w)
        return out

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def weights(self):
        ws = self.axis_weights()
        total = ws[0]
        for w in ws[1:]:
            total = np.multiply.outer(total, w)
        return np.asarray(total).ravel()

    def refine(self):
        """Same bounds with the spacing halved."""
        return GridSpec(self.lower, self.upper, tuple(2 * (k - 1) + 1 for k in self.num), self.log_scale)


@dataclass(frozen=True)
class Density:
    """A (possibly unnormalized) log-density on a hyper-rectangle.

    ``log_pdf`` maps a ``(k, dim)`` array to ``(k,)`` log-densities.
    ``sampler(rng, size)`` is optional and returns ``(size, dim)`` draws.
    ``mean``/``sd`` are hints used for default truncation of unbounded
    supports; ``grid_hint`` overrides them with explicit ``(lower, upper,
    log_scale)`` tuples.
    """

    log_pdf: Callable
    dim: int = 1
    lower: tuple = None
    upper: tuple = None
    normalized: bool = True
    sampler: Optional[Callable] = None
    mean: Optional[tuple] = None
    sd: Optional[tuple] = None
    grid_hint: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        dim = check_positive_int(self.dim, "dim")
        lo = (-np.inf,) * dim if self.lower is None else tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = (np.inf,) * dim if self.upper is None else tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != dim or len(hi) != dim:
            raise ConfigError("support bounds must match the density dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        for attr in ("mean", "sd"):
            val = getattr(self, attr)
            if val is not None:
                object.__setattr__(self, attr, tuple(float(v) for v in np.atleast_1d(val)))

    def logpdf(self, theta):
        """Evaluate on points, returning ``-inf`` outside the support."""
        pts = check_points(theta, self.dim)
        out = np.asarray(self.log_pdf(pts), dtype=np.float64).reshape(-1)
        inside = np.all((pts >= np.asarray(self.lower)) & (pts <= np.asarray(self.upper)), axis=1)
        out = np.where(inside, out, -np.inf)
        return np.where(np.isnan(out), -np.inf, out)

    def sample(self, rng, size):
        if self.sampler is None:
            raise ConfigError(f"density {self.name or '<anonymous>'} cannot be sampled directly")
        draws = np.asarray(self.sampler(rng, size), dtype=np.float64)
        return draws.reshape(size, self.dim)

    def default_grid(self, num=None, sd_mult=DEFAULT_SD_MULT):
        """Bounded grid for quadrature: the support, or mean +/- ``sd_mult`` sd."""
        if num is None:
            num = 4001 if self.dim == 1 else (201 if self.dim == 2 else 81)
        if self.grid_hint is not None:
            lo, hi, ls = self.grid_hint
            return GridSpec(lo, hi, (num,) * self.dim, ls)
        lo, hi = [], []
        for k in range(self.dim):
            a, b = self.lower[k], self.upper[k]
            if self.mean is not None and self.sd is not None:
                a = max(a, self.mean[k] - sd_mult * self.sd[k])
                b = min(b, self.mean[k] + sd_mult * self.sd[k])
            if not (np.isfinite(a) and np.isfinite(b)):
                raise ConfigError(
                    "unbounded density needs mean/sd hints or an explicit grid"
                )
            lo.append(a)
            hi.append(b)
        return GridSpec(tuple(lo), tuple(hi), (num,) * self.dim)

    def check_normalized(self, grid=None, tol=1e-6):
        """Quadrature check that ``exp(log_pdf)`` integrates to one."""
        grid = grid or self.default_grid()
        mass = quadrature_expectation(self, lambda pts: np.ones(len(pts)), grid)
        return abs(mass - 1.0) <= tol


def _check_quadrature_dim(dim):
    if dim > MAX_QUADRATURE_DIM:
        raise ConfigError(
            f"tensor quadrature supports at most {MAX_QUADRATURE_DIM} dimensions "
            f"(got {dim}); use a Monte Carlo normalizer instead"
        )


def quadrature_expectation(density, integrand, grid):
    """Trapezoid estimate of ``integral integrand(theta) * exp(log_pdf(theta))``.

    Tensor-product trapezoid on ``grid``, up to three dimensions.
    ``integrand`` receives the ``(k, n)`` grid points.
    """
    _check_quadrature_dim(grid.dim)
    if grid.dim != density.dim:
        raise ConfigError("grid and density dimensions differ")
    pts = grid.points()
    lp = density.logpdf(pts)
    vals = np.asarray(integrand(pts), dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand is not finite on the grid")
    finite = np.isfinite(lp)
    if not np.any(finite):
        raise EmptyMassError("density has no mass on the grid")
    shift = np.max(lp[finite])
    w = grid.weights()
    return float(np.sum(w[finite] * vals[finite] * np.exp(lp[finite] - shift)) * np.exp(shift))


def log_quadrature(log_f, grid):
    """``log integral exp(log_f(theta)) dtheta`` on a tensor trapezoid grid."""
    _check_quadrature_dim(grid.dim)
    pts = grid.points()
    lf = np.asarray(log_f(pts), dtype=np.float64).reshape(-1)
    lf = np.where(np.isnan(lf), -np.inf, lf)
    if np.any(lf == np.inf):
        raise NumericalError("log-integrand is +inf on the grid")
    return log_sum_exp(lf + np.log(grid.weights()))


def covering_grid(log_pdfs: Sequence[Callable], start, support=(-np.inf, np.inf), num=4001, pilot=8001):
    """A 1-D grid holding the non-negligible mass of every given log-density.

    Starts from ``start`` (usually the base prior's default grid), scans a
    pilot grid three widths further out on each side and keeps the region
    within ``NEGLIGIBLE_LOG_MASS`` of each density's maximum. The pilot is
    widened again while a density still has mass at its edge.
    """
    if start.dim != 1:
        raise ConfigError("covering_grid is univariate")
    log_scale = start.log_scale[0]
    lo_sup, hi_sup = support
    if log_scale:
        a_min = np.log(lo_sup) if lo_sup > 0 else np.log(1e-300)
        b_max = np.log(hi_sup) if np.isfinite(hi_sup) else np.log(1e300)
        lo, hi = np.log(start.lower[0]), np.log(start.upper[0])
    else:
        a_min, b_max = lo_sup, hi_sup
        lo, hi = start.lower[0], start.upper[0]
    for _ in range(6):
        width = hi - lo
        a, b = max(lo - 3 * width, a_min), min(hi + 3 * width, b_max)
        u = np.linspace(a, b, pilot)
        theta = (np.exp(u) if log_scale else u).reshape(-1, 1)
        keep_lo, keep_hi = np.inf, -np.inf
        edge_hit = False
        for log_pdf in log_pdfs:
            lp = np.asarray(log_pdf(theta), dtype=np.float64).reshape(-1)
            lp = np.where(np.isnan(lp), -np.inf, lp)
            if log_scale:
                lp = lp + u  # mass per unit of log(theta)
            if not np.any(np.isfinite(lp)):
                raise EmptyMassError("density has no finite mass on the pilot grid")
            idx = np.nonzero(lp >= np.max(lp) - NEGLIGIBLE_LOG_MASS)[0]
            i0, i1 = max(idx[0] - 1, 0), min(idx[-1] + 1, pilot - 1)
            keep_lo, keep_hi = min(keep_lo, u[i0]), max(keep_hi, u[i1])
            if (idx[0] == 0 and a > a_min) or (idx[-1] == pilot - 1 and b < b_max):
                edge_hit = True
        if not edge_hit:
            if log_scale:
                return GridSpec.line(np.exp(keep_lo), np.exp(keep_hi), num, True)
            return GridSpec.line(keep_lo, keep_hi, num)
        lo, hi = a, b
    raise NumericalError("could not localize density mass; tilt magnitude is likely too large")


def points_1d(theta):
    """Flatten univariate points to a vector."""
    return check_points(theta, 1)[:, 0]


__all__ = [
    "Density",
    "GridSpec",
    "RngSeed",
    "WeightedSample",
    "as_rng_seed",
    "covering_grid",
    "ess",
    "log_quadrature",
    "log_sum_exp",
    "normalize",
    "quadrature_expectation",
]
