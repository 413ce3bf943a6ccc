"""Likelihood-ratio ordering, MTP2 and tilt-band checks.

All checks are numerical: monotonicity is tested on a finite grid with an
absolute slack ``tol`` on successive differences of the log-ratio.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classes import PriorClass, TiltedPrior, TiltFn
from .core import Density, GridSpec, as_rng_seed, covering_grid
from .exceptions import ConfigError, GridTooNarrowError, PropertyViolation
from .validation import check_points, check_positive_int

RELATIONS = ("leq_lr", "geq_lr", "equal", "incomparable")

#: Probability mass a grid may miss before lr checks refuse to run.
MISSING_MASS_TOL = 1e-6


@dataclass(frozen=True)
class OrderingVerdict:
    """Outcome of comparing two densities in likelihood-ratio order.

    ``max_ratio_slope_violation`` is the largest fall of the log-ratio below
    an earlier value (for ``leq_lr``) or climb above one (for ``geq_lr``);
    for ``incomparable`` it is the smaller of the two, i.e. how far the pair
    is from being ordered either way.
    """

    relation: str
    witness: Optional[tuple] = None
    max_ratio_slope_violation: float = 0.0

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ConfigError(f"unknown relation {self.relation!r}")
        if (self.witness is not None) != (self.relation == "incomparable"):
            raise ConfigError("a witness is present exactly when the relation is incomparable")


def _as_log_pdf(d):
    if isinstance(d, TiltedPrior):
        return d.log_pdf, d.base
    return d.logpdf, d


def _grid_mass(log_pdf, grid):
    lp = log_pdf(grid.points())
    ok = np.isfinite(lp)
    return float(np.sum(grid.weights()[ok] * np.exp(lp[ok])))


def lr_order(d1, d2, grid, tol=1e-9):
    """Compare ``d1`` and ``d2`` in likelihood-ratio order on ``grid``.

    ``d2 >=_lr d1`` (reported as ``leq_lr``) when ``log d2 - log d1`` is
    nondecreasing.

    Parameters
    ----------
    d1, d2 : Density or TiltedPrior
        Univariate, normalized densities.
    grid : GridSpec
        Must hold all but ``1e-6`` of each density's mass.
    tol : float
        Absolute slack on how far the log-ratio may fall below (or climb
        above) an earlier value.

    Returns
    -------
    OrderingVerdict
    """
    if grid.dim != 1:
        raise ConfigError("lr_order is univariate; use mtp2_check for joint densities")
    lp1, base1 = _as_log_pdf(d1)
    lp2, base2 = _as_log_pdf(d2)
    for name, lp in (("first", lp1), ("second", lp2)):
        missing = 1.0 - _grid_mass(lp, grid)
        if missing >= MISSING_MASS_TOL:
            raise GridTooNarrowError(f"grid too narrow: misses {missing:.3g} of the {name} density's mass")
    theta = grid.axes()[0]
    a, b = lp1(theta), lp2(theta)
    both = np.isfinite(a) & np.isfinite(b)
    if np.count_nonzero(both) < 2:
        raise GridTooNarrowError("grid too narrow: fewer than two points where both densities are positive")
    theta, r = theta[both], b[both] - a[both]
    if np.ptp(r) <= tol:
        return OrderingVerdict("equal", None, 0.0)
    # largest fall below an earlier value and largest climb above one
    drop = float(np.max(np.maximum.accumulate(r) - r))
    rise = float(np.max(r - np.minimum.accumulate(r)))
    if drop <= tol:
        return OrderingVerdict("leq_lr", None, drop)
    if rise <= tol:
        return OrderingVerdict("geq_lr", None, rise)
    d = np.diff(r)
    # start of the steepest drop and end of the steepest rise bracket the turn
    i, j = int(np.argmin(d)), int(np.argmax(d))
    pair = tuple(sorted((float(theta[i]), float(theta[j + 1]))))
    return OrderingVerdict("incomparable", pair, min(drop, rise))


@dataclass(frozen=True)
class ChainReport:
    ts: np.ndarray
    verdicts: list
    lower: TiltedPrior
    upper: TiltedPrior
    direction: Optional[str]
    grid: GridSpec

    @property
    def relations(self):
        return [v.relation for v in self.verdicts]


def chain_grid(prior_class, ts, num=4001):
    """A grid covering the base prior and the members at the extreme ``ts``."""
    lo, hi = prior_class.member([min(ts)]), prior_class.member([max(ts)])
    base = prior_class.base
    support = (base.lower[0], base.upper[0])
    return covering_grid(
        [base.logpdf, lo.log_pdf_unnormalized, hi.log_pdf_unnormalized], base.default_grid(), support, num
    )


def class_order_chain(prior_class: PriorClass, ts, grid=None, tol=1e-9):
    """lr verdicts for consecutive members along sorted ``ts``.

    With an increasing tilt every verdict is ``leq_lr`` and the member at
    ``+eps`` is the upper bound; a decreasing tilt reverses both.
    """
    if prior_class.base.dim != 1 or prior_class.m != 1:
        raise ConfigError("class_order_chain needs a univariate parameter and a scalar tilt")
    ts = np.asarray(ts, dtype=np.float64).reshape(-1)
    if ts.size < 2:
        raise ConfigError("need at least two t values")
    if np.any(np.diff(ts) <= 0):
        raise ConfigError("ts must be strictly increasing")
    members = [prior_class.member([t]) for t in ts]
    grid = grid or chain_grid(prior_class, ts)
    verdicts = [lr_order(a, b, grid, tol) for a, b in zip(members, members[1:])]
    rel = {v.relation for v in verdicts}
    lower, upper = prior_class.bounds()
    if rel == {"leq_lr"}:
        direction = "increasing"
    elif rel == {"geq_lr"}:
        direction = "decreasing"
        lower, upper = upper, lower
    else:
        direction = None
    return ChainReport(ts, verdicts, lower, upper, direction, grid)


@dataclass(frozen=True)
class MTP2Report:
    holds: bool
    worst_margin: float
    witness: Optional[tuple]
    n_pairs: int

    def __bool__(self):
        return self.holds


def mtp2_check(d: Density, pairs=None, n_pairs=1000, seed=0, tol=1e-9):
    """Check ``log d(x) + log d(y) <= log d(x v y) + log d(x ^ y) + tol``.

    ``v`` and ``^`` are the component-wise max and min. Without explicit
    ``pairs``, ``n_pairs`` pairs are drawn from ``d`` (or uniformly over its
    default grid box when ``d`` cannot be sampled).

    Returns
    -------
    MTP2Report
        ``worst_margin`` is the smallest ``rhs - lhs`` seen; ``witness`` is
        the pair attaining it when the check fails.
    """
    if d.dim < 2:
        raise ConfigError("MTP2 is trivial for a univariate density; use lr_order")
    if pairs is None:
        n_pairs = check_positive_int(n_pairs, "n_pairs")
        rng = as_rng_seed(seed).generator()
        if d.sampler is not None:
            x, y = d.sample(rng, n_pairs), d.sample(rng, n_pairs)
        else:
            g = d.default_grid()
            lo, hi = np.asarray(g.lower), np.asarray(g.upper)
            x = rng.uniform(lo, hi, size=(n_pairs, d.dim))
            y = rng.uniform(lo, hi, size=(n_pairs, d.dim))
    else:
        pairs = list(pairs)
        if not pairs:
            raise ConfigError("no pairs to check")
        x = check_points([p[0] for p in pairs], d.dim)
        y = check_points([p[1] for p in pairs], d.dim)
    lhs = d.logpdf(x) + d.logpdf(y)
    rhs = d.logpdf(np.maximum(x, y)) + d.logpdf(np.minimum(x, y))
    with np.errstate(invalid="ignore"):
        margin = rhs - lhs
    margin = np.where(np.isnan(margin), np.inf, margin)  # both sides -inf: nothing to check
    worst = int(np.argmin(margin))
    holds = bool(margin[worst] >= -tol)
    witness = None if holds else (tuple(x[worst]), tuple(y[worst]))
    return MTP2Report(holds, float(margin[worst]), witness, len(x))


@dataclass(frozen=True)
class BandTable:
    theta: np.ndarray
    ts: np.ndarray
    values: np.ndarray
    h: np.ndarray


def _tilt_values(h, theta):
    if isinstance(h, TiltFn):
        if h.m != 1 or h.dim != 1:
            raise ConfigError("tilt bands need a scalar tilt of a univariate parameter")
        return h(theta)[:, 0]
    return np.asarray(h(theta.reshape(-1, 1)), dtype=np.float64).reshape(-1)


def tilt_band(h, eps, grid, ts=None):
    """``exp(h(theta) * t)`` for ``t`` in ``{-eps, -eps/2, 0, eps/2, eps}``.

    ``h`` is evaluated afresh for each ``t`` column, then every row is
    checked to move monotonically in ``t`` in the direction set by the sign
    of ``h(theta)`` (flat at 1 where ``h = 0``).

    Raises
    ------
    PropertyViolation
        With the offending theta as witness.
    """
    if grid.dim != 1:
        raise ConfigError("tilt bands are univariate")
    if not eps >= 0:
        raise ConfigError("eps must be non-negative")
    ts = np.array([-eps, -eps / 2, 0.0, eps / 2, eps]) if ts is None else np.sort(np.asarray(ts, dtype=np.float64))
    theta = grid.axes()[0]
    hv = _tilt_values(h, theta)
    values = np.column_stack([np.exp(_tilt_values(h, theta) * t) for t in ts])
    d = np.diff(values, axis=1)
    sign = np.sign(hv)[:, None]
    bad = np.any(d * sign < 0, axis=1) | ((hv == 0) & np.any(values != 1.0, axis=1))
    bad |= ~np.all(np.isfinite(values), axis=1)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PropertyViolation(
            f"tilt band is not monotone in t at theta = {theta[i]:.17g}", witness=float(theta[i])
        )
    return BandTable(theta, ts, values, hv)


def tilt_monotonicity(tilt: TiltFn, grid: GridSpec, tol=1e-12):
    """Direction of each tilt component along each axis of ``grid``.

    Returns an ``(m, n)`` array of strings, ``"increasing"``,
    ``"decreasing"``, ``"constant"`` or ``"mixed"``, from finite differences
    along axis sections through the grid centre.
    """
    axes = grid.axes()
    centre = np.array([a[len(a) // 2] for a in axes])
    out = np.empty((tilt.m, grid.dim), dtype=object)
    for j, axis in enumerate(axes):
        pts = np.repeat(centre[None, :], len(axis), axis=0)
        pts[:, j] = axis
        d = np.diff(tilt(pts), axis=0)
        for k in range(tilt.m):
            dk = d[:, k]
            if np.all(np.abs(dk) <= tol):
                out[k, j] = "constant"
            elif np.all(dk >= -tol):
                out[k, j] = "increasing"
            elif np.all(dk <= tol):
                out[k, j] = "decreasing"
            else:
                out[k, j] = "mixed"
    return out
