"""Acceptance criteria 1-10.

Each test prints one ``PASS``/``FAIL`` line and the lines are repeated in
the pytest terminal summary. Runtime budgets are part of each criterion.
"""

import json
import time

import numpy as np
from scipy import stats

from abcprior import (
    AbcConfig,
    RngSeed,
    StudentTLocation,
    TiltFn,
    abc_class,
    bivariate_normal_density,
    class_order_chain,
    conjugate_duality_log_ratio,
    elicit_epsilon,
    kolmogorov_distance,
    ks_two_sample,
    mtp2_check,
    normal_density,
    normal_truth,
    rejection_abc,
    sample_posterior_xprime,
    sample_prior_member,
    taylor_duality_log_ratio,
    tilt_from_suffstat,
)
from abcprior import cli
from abcprior.samplers import weighted_mean_se

RESULTS = []


def report(k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_criterion_1_duality(normal_model, poisson_model):
    with Timer() as tm:
        worst = 0.0
        for model, s0, grid in (
            (normal_model, [9.975], np.linspace(9.0, 11.0, 1001)),
            (poisson_model, [30.0], np.linspace(0.5, 8.0, 1001)),
        ):
            for t in (-1.0, -0.5, 0.5, 1.0):
                r = conjugate_duality_log_ratio(model.expfam_spec(), s0, [t], grid)
                worst = max(worst, float(np.ptp(r)))
    ok = worst <= 1e-10 and tm.seconds < 1.0
    report(1, ok, f"max log-ratio spread {worst:.3g} (<= 1e-10), {tm.seconds:.2f}s (< 1s)")


def test_criterion_2_taylor_scaling():
    with Timer() as tm:
        model = StudentTLocation()
        sm = model.suffstat_model()
        tilt = tilt_from_suffstat(sm, [model.s0])
        theta = np.linspace(-4.0, 4.0, 1001)
        dev = [float(np.ptp(taylor_duality_log_ratio(sm, tilt, [model.s0], [t], theta))) for t in (0.01, 0.02, 0.04)]
        ratios = [dev[1] / dev[0], dev[2] / dev[1]]
    ok = all(3.5 <= r <= 4.5 for r in ratios) and tm.seconds < 1.0
    report(2, ok, f"deviation ratios per doubling {ratios[0]:.4f}, {ratios[1]:.4f} (in [3.5, 4.5]), {tm.seconds:.2f}s")


def test_criterion_3_normal_replication(normal_model):
    with Timer() as tm:
        taylor = normal_model.taylor_class(1.0)
        cls_e = normal_model.class_E(1.0)
        mu = np.linspace(8.5, 11.5, 3001)
        gap = max(
            float(np.max(np.abs(np.exp(taylor.member([t]).log_pdf(mu)) - np.exp(cls_e.member([t]).log_pdf(mu)))))
            for t in (-1.0, 0.0, 1.0)
        )
        post = normal_truth(normal_model)
    ok = gap < 1e-6 and abs(post.mean - 9.9875) < 1e-12 and abs(post.var - 0.01) < 1e-12 and tm.seconds < 1.0
    report(3, ok, f"route gap {gap:.3g} (< 1e-6), posterior N({post.mean:.6g}, {post.var:.6g}), {tm.seconds:.2f}s")


def _compare(tmp_path, name, *args):
    out = tmp_path / name
    code = cli.main(["compare-posteriors", "--out", str(out), "--threads", "1", *args])
    assert code == 0
    return json.loads((out / "summary.json").read_text())


APPROX = ("rejection_abc", "abc_class", "abc_e_direct")


def test_criterion_4_four_posteriors(tmp_path):
    margins, details, ok = [], [], True
    for seed in (0, 1, 2):
        with Timer() as tm:
            s = _compare(tmp_path, f"s{seed}", "--epsilon", "1", "--seed", str(seed))
        posts = s["posteriors"]
        sizes = [posts[m]["n"] for m in ("true",) + APPROX]
        ks_ok = all(r["passes"] for r in s["ks"] if r["a"] in APPROX and r["b"] in APPROX)
        true_sd = np.sqrt(s["true_posterior"]["var"])
        m = min(posts[k]["sd"] - true_sd for k in APPROX)
        # sd of a normal sample has SE sd / sqrt(2 n)
        se = max(posts[k]["sd"] / np.sqrt(2 * posts[k]["n"]) for k in APPROX)
        margins.append(m)
        ok &= ks_ok and min(sizes) >= 50_000 and m > 5 * se and tm.seconds < 60
        details.append(f"seed {seed}: KS {'ok' if ks_ok else 'fail'}, n>={min(sizes)}, sd margin {m:.4f}, {tm.seconds:.1f}s")
    report(4, ok, "; ".join(details) + f" (min margin {min(margins):.4f} > 0)")


def test_criterion_5_collapse(tmp_path):
    with Timer() as tm:
        s = _compare(tmp_path, "eps0", "--epsilon", "1e-4")
    fails = [f"{r['a']}/{r['b']}" for r in s["ks"] if not r["passes"]]
    worst = max(r["statistic"] / r["critical_1pct"] for r in s["ks"])
    ok = not fails and tm.seconds < 60
    report(5, ok, f"all 6 KS pairs below the 1% critical value (worst ratio {worst:.3f}), failures {fails}, {tm.seconds:.1f}s")


def test_criterion_6_ordering(normal_model, poisson_model):
    with Timer() as tm:
        ts = [-1.0, -0.5, 0.0, 0.5, 1.0]
        chains = [class_order_chain(m.taylor_class(1.0), ts).relations for m in (normal_model, poisson_model)]
        neg = abc_class(normal_density(0.0, 1.0), TiltFn(lambda p: -p[:, 0], 1), 1.0)
        rev = class_order_chain(neg, ts)
        pos = mtp2_check(bivariate_normal_density(0.5), n_pairs=200)
        negc = mtp2_check(bivariate_normal_density(-0.8))
    ok = (
        all(set(c) == {"leq_lr"} for c in chains)
        and set(rev.relations) == {"geq_lr"}
        and rev.upper.t[0] == -1.0
        and pos.holds
        and not negc.holds
        and negc.witness is not None
        and tm.seconds < 5
    )
    report(6, ok, f"chains {chains[0][0]}x4 both oracles, negated tilt {rev.relations[0]}x4, "
                  f"MTP2 rho=0.5 {pos.holds}, rho=-0.8 {negc.holds} witness {negc.witness is not None}, {tm.seconds:.2f}s")


def test_criterion_7_kolmogorov(normal_model, poisson_model):
    with Timer() as tm:
        cls = normal_model.taylor_class(1.0)
        s = np.sqrt(0.02)
        err = max(
            abs(kolmogorov_distance(cls.base, cls.member([t])) - (2 * stats.norm.cdf(t / (2 * s)) - 1))
            for t in (0.1, 0.5, 1.0)
        )
        eps = elicit_epsilon(cls.base, cls.tilt, 0.1).epsilon
        decreasing = True
        for model in (normal_model, poisson_model):
            c = model.taylor_class(1.0)
            ks = [kolmogorov_distance(c.base, c.member([10.0**-k])) for k in range(1, 7)]
            decreasing &= bool(np.all(np.diff(ks) < 0))
    ok = err <= 1e-6 and abs(eps - 0.03554) <= 1e-4 and decreasing and tm.seconds < 5
    report(7, ok, f"closed-form error {err:.2g} (<= 1e-6), elicited {eps:.6f} (0.03554 +- 1e-4), "
                  f"K(10^-k) strictly decreasing {decreasing}, {tm.seconds:.2f}s")


def _oracles(normal_model, poisson_model):
    ncls, pcls = normal_model.taylor_class(1.0), poisson_model.taylor_class(1.0)
    nx, px = normal_model.observed_data(), poisson_model.observed_data()
    shape, rate = poisson_model.posterior_params(t=1.0)
    return {
        "A.I normal t=0.1": (
            lambda seed: sample_prior_member(ncls.member([0.1]), 100_000, seed),
            lambda rng: rng.normal(10.1, np.sqrt(0.02), 100_000), 10.1),
        "A.I gamma t=1": (
            lambda seed: sample_prior_member(pcls.member([1.0]), 100_000, seed),
            lambda rng: rng.gamma(3.0, 1.0, 100_000), 3.0),
        "A.II normal t=0.1": (
            lambda seed: sample_posterior_xprime(ncls, normal_model.suffstat_model(), nx, [0.1], 100_000, seed),
            lambda rng: rng.normal(10.0375, 0.1, 100_000), 10.0375),
        "A.II gamma t=1": (
            lambda seed: sample_posterior_xprime(pcls, poisson_model.suffstat_model(), px, [1.0], 100_000, seed),
            lambda rng: rng.gamma(shape, 1.0 / rate, 100_000), shape / rate),
    }


def test_criterion_8_importance_samplers(normal_model, poisson_model):
    passes = {}
    with Timer() as tm:
        for name, (draw, exact, mean) in _oracles(normal_model, poisson_model).items():
            n = 0
            for seed in range(20):
                sample = draw(seed)
                m, se = weighted_mean_se(sample)
                ref = exact(RngSeed(seed).substream(1000).generator())
                n += abs(m - mean) <= 3 * se and ks_two_sample(sample, ref).passes
            passes[name] = n
    ok = all(v >= 19 for v in passes.values()) and tm.seconds < 120
    report(8, ok, ", ".join(f"{k} {v}/20" for k, v in passes.items()) + f" (>= 19/20), {tm.seconds:.1f}s")


def test_criterion_9_determinism(tmp_path):
    commands = {
        "bands": [],
        "classes": [],
        "compare-posteriors": [],
        "elicit": ["--kappa", "0.1"],
        "diagnostics": [],
    }
    same = {}
    with Timer() as tm:
        for cmd, extra in commands.items():
            digests = []
            for tag, threads in (("a", 1), ("b", 1), ("c", 8), ("d", 8)):
                out = tmp_path / f"{cmd}-{tag}"
                assert cli.main([cmd, *extra, "--out", str(out), "--threads", str(threads)]) == 0
                manifest = json.loads((out / "manifest.json").read_text())
                digests.append({o["file"]: o["sha256"] for o in manifest["outputs"]})
            same[cmd] = all(d == digests[0] for d in digests)
    ok = all(same.values()) and tm.seconds < 60
    report(9, ok, ", ".join(f"{k} {'identical' if v else 'DIFFER'}" for k, v in same.items())
           + f" at 1 and 8 threads, {tm.seconds:.1f}s")


def test_criterion_10_acceptance_rate(normal_model):
    with Timer() as tm:
        cfg = AbcConfig(100_000, 0.25)
        s = rejection_abc(normal_model.prior(), normal_model.simulate_stat, np.mean,
                          normal_model.observed_data(), cfg, seed=0, simulates="stat")
        p = normal_model.acceptance_probability(0.25)
        se = np.sqrt(p * (1 - p) / s.n_attempts)
        z = (s.acceptance_rate - p) / se
    ok = abs(z) <= 3 and tm.seconds < 30
    report(10, ok, f"rate {s.acceptance_rate:.5f} vs {p:.5f} ({z:+.2f} binomial SE, |z| <= 3), {tm.seconds:.2f}s")
