"""Importance samplers for class members and posteriors, plus rejection ABC.

Every sampler draws in fixed-size chunks; chunk ``c`` of a stream always
uses the substream ``(stream_id, c)``. Chunks may run on several threads
but are stitched back in chunk order, so output is bit-identical for any
thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .classes import ExpFamSpec, PriorClass, TiltedPrior
from .core import WeightedSample, as_rng_seed, ess, normalize
from .exceptions import ConfigError, NoAcceptanceError
from .validation import check_positive_int, check_vector

CHUNK_SIZE = 65536
DEGENERACY_FRACTION = 0.01
DEGENERACY_FLAG = "severe weight degeneracy"

# substream ids
_T_STREAM = 1
_PARTICLE_STREAM = 2


def _map_chunks(fn, n_chunks, n_jobs=1):
    """``[fn(c) for c in range(n_chunks)]``, optionally on a thread pool."""
    if n_jobs is None or n_jobs <= 1 or n_chunks <= 1:
        return [fn(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, range(n_chunks)))


def draw_base(density, N, seed, n_jobs=1, chunk_size=CHUNK_SIZE):
    """``N`` draws from ``density`` as ``(N, dim)``, chunked for determinism."""
    N = check_positive_int(N, "N")
    seed = as_rng_seed(seed)
    n_chunks = -(-N // chunk_size)

    def one(c):
        size = min(chunk_size, N - c * chunk_size)
        return density.sample(seed.generator(c), size)

    return np.concatenate(_map_chunks(one, n_chunks, n_jobs), axis=0)


def _finish(points, log_weights, seed, flags=()):
    sample = normalize(WeightedSample(points, log_weights, seed=seed.seed, flags=flags))
    if ess(sample) < DEGENERACY_FRACTION * len(sample):
        sample = WeightedSample(
            sample.points, sample.log_weights, True, sample.seed, sample.flags + (DEGENERACY_FLAG,)
        )
    return sample


# ---------------------------------------------------------------------------
# A.I and A.II


def sample_prior_member(member: TiltedPrior, N, seed=0, n_jobs=1):
    """Importance sample of a class member with the base prior as proposal.

    Weights are ``exp(sign * h(theta) . t)``, self-normalized. A flag is set
    (not raised) when the ESS falls below ``N / 100``.
    """
    seed = as_rng_seed(seed)
    theta = draw_base(member.base, N, seed, n_jobs)
    return _finish(theta, member.log_weight(theta), seed)


def _observed_stat(model, x0, s0=None):
    if s0 is not None:
        return np.atleast_1d(np.asarray(s0, dtype=np.float64))
    return model.stat(x0)


def sample_posterior_xprime(prior_class: PriorClass, model, x0, t, N, seed=0, n_jobs=1, s0=None):
    """Posterior under the member at ``t`` given the observed data.

    Weights are ``exp(sign * h(theta) . t) * g(s(x0) | theta)``. By the
    duality this targets the posterior given pseudo-data whose statistic is
    shifted by ``t``; no data are simulated.
    """
    seed = as_rng_seed(seed)
    member = prior_class.member(t)
    s0 = _observed_stat(model, x0, s0)
    theta = draw_base(prior_class.base, N, seed, n_jobs)
    return _finish(theta, member.log_weight(theta) + model.loglik_stat(s0, theta), seed)


# ---------------------------------------------------------------------------
# A.III


def _reference_point(base, theta):
    if base.mean is not None:
        return np.asarray(base.mean, dtype=np.float64).reshape(1, -1)
    return np.median(theta, axis=0, keepdims=True)


def _loglik_rows(model, S, ref):
    """``log g(S_i | ref)`` for every row of ``S``.

    Tries one broadcast call to the model's log-density (statistic passed
    as ``(m, K)``), checks it against a scalar call and falls back to a
    loop when the model does not broadcast.
    """
    K = len(S)
    if isinstance(model, ExpFamSpec):
        fast = lambda: model.log_A(ref)[0] + np.asarray(model.log_B0(S.T)) + S @ model.natural(ref)[0]
    else:
        fast = lambda: np.asarray(model.log_g(S.T, np.repeat(ref, K, axis=0)))
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(fast(), dtype=np.float64).reshape(-1)
        if out.shape == (K,) and np.allclose(out[[0, -1]], [model.loglik_stat(S[0], ref)[0], model.loglik_stat(S[-1], ref)[0]], rtol=1e-12, atol=1e-12):
            return out
    except (TypeError, ValueError, IndexError):
        pass
    return np.array([model.loglik_stat(s, ref)[0] for s in S])


def taylor_remainder(prior_class, model, s0, ts, theta_ref):
    """``log g(s0 + sign t | ref) - log g(s0 | ref) - sign h(ref) . t`` per row of ``ts``.

    Added to each block's log-weights, it turns the first-order tilt back
    into the likelihood of the shifted statistic; it is theta-free, hence
    exact, for exponential families.
    """
    sign = prior_class.sign
    h_ref = prior_class.tilt(theta_ref)[0]
    base = model.loglik_stat(s0, theta_ref)[0]
    shifted = _loglik_rows(model, s0[None, :] + sign * ts, theta_ref)
    return shifted - base - sign * (ts @ h_ref)


def draw_tilts(epsilon, N_t, seed):
    """``N_t`` tilt vectors, each coordinate uniform on ``[-eps_k, eps_k]``."""
    eps = np.asarray(epsilon, dtype=np.float64)
    rng = as_rng_seed(seed).generator(0)
    return rng.uniform(-1.0, 1.0, size=(N_t, eps.size)) * eps


@dataclass(frozen=True)
class PooledSample(WeightedSample):
    """A.III output: the pooled sample plus the tilt used by each block."""

    ts: Optional[np.ndarray] = None
    block_size: int = 0


def sample_posterior_x0(
    prior_class: PriorClass,
    model,
    x0,
    N_t,
    m,
    seed=0,
    pooling="evidence",
    route="importance",
    n_jobs=1,
    s0=None,
):
    """Pooled A.III sample approximating the ABC posterior at the observed data.

    Draws ``t_i`` uniformly in the epsilon box, builds a weighted block of
    ``m`` particles for each, and pools all ``N_t * m`` particles.

    Parameters
    ----------
    prior_class : PriorClass
        ABC, ABC-G or ABC-E class (``route="direct"`` needs ABC-E with a
        closed-form conjugate prior).
    model : SuffStatModel or ExpFamSpec
        Supplies ``log g(s | theta)``.
    N_t, m : int
        Number of tilts and particles per tilt.
    pooling : {"evidence", "equal"}
        ``"evidence"`` normalizes all particles jointly with each block
        carrying the likelihood of its shifted statistic, which targets the
        rejection-ABC posterior. ``"equal"`` self-normalizes each block and
        gives blocks equal mass.
    route : {"importance", "direct"}
        ``"direct"`` draws each block from the closed-form conjugate
        posterior instead of importance sampling from the base prior.

    Returns
    -------
    PooledSample
    """
    if prior_class.kind == "AB":
        raise ConfigError("the AB class has no epsilon box to sample tilts from")
    if pooling not in ("evidence", "equal"):
        raise ConfigError(f"pooling must be 'evidence' or 'equal', got {pooling!r}")
    if route not in ("importance", "direct"):
        raise ConfigError(f"route must be 'importance' or 'direct', got {route!r}")
    N_t, m = check_positive_int(N_t, "N_t"), check_positive_int(m, "m")
    seed = as_rng_seed(seed)
    s0 = _observed_stat(model, x0, s0)
    ts = draw_tilts(prior_class.epsilon, N_t, seed.substream(_T_STREAM))
    if route == "direct":
        theta, lw = _direct_blocks(prior_class, s0, ts, m, seed.substream(_PARTICLE_STREAM), pooling, n_jobs)
    else:
        theta = draw_base(prior_class.base, N_t * m, seed.substream(_PARTICLE_STREAM), n_jobs)
        H = prior_class.sign * prior_class.tilt(theta)
        lw = np.einsum("ij,ij->i", H, np.repeat(ts, m, axis=0)) + model.loglik_stat(s0, theta)
        if pooling == "evidence":
            kappa = taylor_remainder(prior_class, model, s0, ts, _reference_point(prior_class.base, theta))
            lw += np.repeat(kappa, m)
        else:
            lw = _equal_blocks(lw, N_t, m)
    out = _finish(theta, lw, seed)
    return PooledSample(out.points, out.log_weights, True, out.seed, out.flags, ts=ts, block_size=m)


def _equal_blocks(lw, N_t, m):
    blocks = lw.reshape(N_t, m)
    return (blocks - logsumexp(blocks, axis=1, keepdims=True)).ravel() - np.log(N_t)


def conjugate_log_evidence(spec, S):
    """Prior-predictive ``log p(s)`` of each row of ``S`` under the conjugate prior.

    Uses ``log B0(s) + log Z(k + 1, l + s) - log Z(k, l)`` when the
    vectorized normalizer is available, else Bayes' rule at the posterior
    mean with closed-form densities.
    """
    k, l = spec.conj_hyper
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if spec.conjugate_log_normalizer is not None:
        log_b0 = np.array([float(spec.log_B0(s)) for s in S]) if len(S) < 2 else _log_b0_rows(spec, S)
        z_post = spec.conjugate_log_normalizer(k + 1.0, l[None, :] + S)
        z_prior = spec.conjugate_log_normalizer(k, l[None, :])[0]
        return log_b0 + z_post - z_prior
    prior = spec.prior()
    out = np.empty(len(S))
    for i, s in enumerate(S):
        post = spec.conjugate_prior(k + 1.0, l + s)
        ref = np.asarray(post.mean if post.mean is not None else prior.mean, dtype=np.float64).reshape(1, -1)
        out[i] = spec.loglik_stat(s, ref)[0] + prior.logpdf(ref)[0] - post.logpdf(ref)[0]
    return out


def _log_b0_rows(spec, S):
    try:
        out = np.asarray(spec.log_B0(S.T), dtype=np.float64).reshape(-1)
        if out.shape == (len(S),) and np.isclose(out[0], float(spec.log_B0(S[0])), rtol=1e-12, atol=1e-12):
            return out
    except (TypeError, ValueError, IndexError):
        pass
    return np.array([float(spec.log_B0(s)) for s in S])


def _direct_blocks(prior_class, s0, ts, m, seed, pooling, n_jobs):
    spec = prior_class.expfam
    if prior_class.kind != "ABC-E" or spec is None or spec.conjugate_prior is None:
        raise ConfigError("the direct route needs an ABC-E class with a closed-form conjugate prior")
    k, l = spec.conj_hyper
    L = np.repeat(l[None, :] + s0[None, :] + ts, m, axis=0)
    if spec.conjugate_sample is not None:
        n = len(L)
        n_chunks = -(-n // CHUNK_SIZE)

        def chunk(c):
            rows = L[c * CHUNK_SIZE : (c + 1) * CHUNK_SIZE]
            return np.asarray(spec.conjugate_sample(k + 1.0, rows, seed.generator(c)), dtype=np.float64).reshape(len(rows), -1)

        theta = np.concatenate(_map_chunks(chunk, n_chunks, n_jobs), axis=0)
    else:

        def block(i):
            return spec.conjugate_prior(k + 1.0, l + s0 + ts[i]).sample(seed.generator(i), m)

        theta = np.concatenate(_map_chunks(block, len(ts), n_jobs), axis=0)
    if pooling == "evidence":
        block_lw = conjugate_log_evidence(spec, s0[None, :] + ts)
    else:
        block_lw = np.zeros(len(ts))
    return theta, np.repeat(block_lw, m)


# ---------------------------------------------------------------------------
# Rejection ABC


@dataclass(frozen=True)
class AbcConfig:
    """Rejection-ABC settings.

    Acceptance uses the component-wise absolute difference of sufficient
    statistics: accept iff ``|s_k(x') - s_k(x0)| <= epsilon_k`` for all k.
    """

    N: int
    epsilon: np.ndarray
    max_attempts: Optional[int] = None
    distance: str = "abs-diff"
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self):
        N = check_positive_int(self.N, "N")
        eps = check_vector(self.epsilon, name="epsilon", positive=True).copy()
        eps.setflags(write=False)
        max_attempts = 1000 * N if self.max_attempts is None else self.max_attempts
        max_attempts = check_positive_int(max_attempts, "max_attempts")
        if max_attempts < N:
            raise ConfigError(f"max_attempts ({max_attempts}) must be >= N ({N})")
        if self.distance != "abs-diff":
            raise ConfigError("only the component-wise absolute-difference distance is supported")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "max_attempts", max_attempts)
        object.__setattr__(self, "chunk_size", check_positive_int(self.chunk_size, "chunk_size"))


@dataclass(frozen=True)
class AbcSample(WeightedSample):
    """Accepted rejection-ABC draws (uniform weights) with run statistics."""

    acceptance_rate: float = float("nan")
    n_attempts: int = 0


def rejection_abc(prior, simulator, suff_stat, x0, cfg: AbcConfig, seed=0, simulates="data", n_jobs=1):
    """Standard rejection ABC.

    Parameters
    ----------
    prior : Density
        Must be sampleable.
    simulator : callable
        ``simulator(thetas, rng)`` for a ``(k, n)`` batch. Returns ``(k,
        N_obs)`` datasets when ``simulates="data"`` or ``(k, m)``
        sufficient statistics when ``simulates="stat"``.
    suff_stat : callable
        Maps one dataset to its statistic; applied to ``x0`` and, in
        ``"data"`` mode, to each simulated row.
    x0 : array_like
        Observed data.
    cfg : AbcConfig
    seed : int or RngSeed

    Returns
    -------
    AbcSample
        The first ``N`` acceptances in draw order.

    Raises
    ------
    NoAcceptanceError
        Nothing accepted within ``cfg.max_attempts``; carries the smallest
        distance seen.
    """
    if simulates not in ("data", "stat"):
        raise ConfigError("simulates must be 'data' or 'stat'")
    seed = as_rng_seed(seed)
    s0 = np.atleast_1d(np.asarray(suff_stat(np.asarray(x0, dtype=np.float64)), dtype=np.float64))
    eps = cfg.epsilon if cfg.epsilon.size == s0.size else np.full(s0.size, cfg.epsilon[0])
    if eps.size != s0.size:
        raise ConfigError("epsilon length must match the sufficient statistic")
    cs = cfg.chunk_size
    total_chunks = -(-cfg.max_attempts // cs)

    def one(c):
        size = min(cs, cfg.max_attempts - c * cs)
        rng = seed.generator(c)
        theta = prior.sample(rng, size)
        sim = np.asarray(simulator(theta, rng), dtype=np.float64)
        if simulates == "data":
            s = np.array([np.atleast_1d(suff_stat(row)) for row in sim], dtype=np.float64)
        else:
            s = sim.reshape(size, -1)
        dist = np.abs(s - s0)
        accept = np.all(dist <= eps, axis=1)
        return theta[accept], np.nonzero(accept)[0] + c * cs, float(np.min(np.max(dist / eps, axis=1)))

    wave = max(1, n_jobs or 1) * 2
    kept, idx, n_acc, min_dist = [], [], 0, np.inf
    c = 0
    while c < total_chunks and n_acc < cfg.N:
        batch = range(c, min(c + wave, total_chunks))
        results = _map_chunks(lambda j: one(batch[j]), len(batch), n_jobs)
        for theta, i, md in results:
            kept.append(theta)
            idx.append(i)
            n_acc += len(i)
            min_dist = min(min_dist, md)
        c = batch[-1] + 1
    if n_acc == 0:
        raise NoAcceptanceError(
            f"no acceptances in {cfg.max_attempts} attempts; smallest distance seen was "
            f"{min_dist:.6g} x epsilon",
            min_distance=min_dist,
        )
    theta = np.concatenate(kept, axis=0)[: cfg.N]
    idx = np.concatenate(idx)[: cfg.N]
    n_attempts = int(idx[-1]) + 1 if len(idx) == cfg.N else cfg.max_attempts
    return AbcSample(
        theta,
        np.full(len(theta), -np.log(len(theta))),
        True,
        seed.seed,
        (),
        acceptance_rate=len(theta) / n_attempts,
        n_attempts=n_attempts,
    )


# ---------------------------------------------------------------------------
# Resampling and two-sample tests


def systematic_resample(sample: WeightedSample, M, seed=0):
    """``M`` equally weighted points; point ``i`` is copied ``M w_i`` times in expectation."""
    M = check_positive_int(M, "M")
    if not sample.normalized:
        raise ConfigError("systematic_resample needs a normalized sample")
    rng = as_rng_seed(seed).generator()
    u = (rng.uniform() + np.arange(M)) / M
    cdf = np.cumsum(sample.weights)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(sample) - 1)
    return WeightedSample(sample.points[idx], np.full(M, -np.log(M)), True, sample.seed)


def ecdf_effective_size(sample: WeightedSample):
    """Size of an iid sample whose empirical CDF is as noisy as the weighted one.

    The weighted empirical CDF at ``a`` has variance
    ``sum_i w_i**2 (1{x_i <= a} - F(a))**2``. Matching its peak to the
    Brownian-bridge peak ``max F (1 - F) / M`` gives ``M``. Weights that
    move with ``x`` make this smaller than the Kish ESS.
    """
    sample = sample if sample.normalized else normalize(sample)
    order = np.argsort(sample.values, kind="stable")
    w = sample.weights[order]
    F = np.cumsum(w)
    W2 = np.cumsum(w**2)
    var = (1.0 - F) ** 2 * W2 + F**2 * (W2[-1] - W2)
    return float(np.max(F * (1.0 - F)) / np.max(var))


def equal_weight_values(sample, M=None, seed=0):
    """Univariate values of an equally weighted version of ``sample``.

    Uniformly weighted input is returned as is; otherwise it is resampled
    systematically to ``M`` points (default: the ECDF effective size, so
    that two-sample tests see the right amount of noise).
    """
    if not isinstance(sample, WeightedSample):
        return np.asarray(sample, dtype=np.float64).reshape(-1)
    if M is None and np.all(sample.log_weights == sample.log_weights[0]):
        return sample.values
    sample = sample if sample.normalized else normalize(sample)
    M = int(np.floor(ecdf_effective_size(sample))) if M is None else M
    return systematic_resample(sample, M, seed).values


def ks_critical_1pct(na, nb):
    """Asymptotic two-sample KS critical value at the 1% level."""
    return 1.628 * np.sqrt((na + nb) / (na * nb))


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical_1pct: float
    na: int
    nb: int

    @property
    def passes(self):
        return self.statistic < self.critical_1pct


def ks_two_sample(a, b):
    """Two-sample KS statistic and its 1% critical value (sizes >= 25)."""
    a = equal_weight_values(a)
    b = equal_weight_values(b)
    if a.size < 25 or b.size < 25:
        raise ConfigError(f"KS needs at least 25 points per sample, got {a.size} and {b.size}")
    stat = float(stats.ks_2samp(a, b).statistic)
    return KSResult(stat, float(ks_critical_1pct(a.size, b.size)), a.size, b.size)


def weighted_mean_se(sample: WeightedSample):
    """Self-normalized mean of the first coordinate and its delta-method SE.

    The SE is ``sqrt(sum_i w_i**2 (x_i - mean)**2)``; unlike ``sd / sqrt(ESS)``
    it accounts for weights that correlate with ``x``.
    """
    sample = sample if sample.normalized else normalize(sample)
    x, w = sample.points[:, 0], sample.weights
    mean = float(w @ x)
    return mean, float(np.sqrt(np.sum(w**2 * (x - mean) ** 2)))
