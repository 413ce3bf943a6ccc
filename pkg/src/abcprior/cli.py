"""Command-line experiments.

Each subcommand reads a YAML config (merged over built-in defaults, then
over ``--set key.path=value`` and the dedicated flags), writes CSV tables
plus ``summary.json`` and ``manifest.json`` into the output directory.

Exit codes: 0 success, 1 configuration error, 2 property violation,
3 numerical failure.
"""

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from dataclasses import fields
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .classes import class_contains
from .core import GridSpec, RngSeed, ess
from .densities import bivariate_normal_density, independent_normal_density
from .exceptions import (
    AbcPriorError,
    ConfigError,
    NonMonotoneError,
    NumericalError,
    PropertyViolation,
)
from .kolmogorov import distance_curve, elicit_epsilon, elicit_epsilon_vector, union_grid
from .models import (
    NormalKnownVar,
    PoissonGamma,
    PoissonRegression,
    load_synthetic_regression,
    posterior_robustness,
    read_regression_csv,
)
from .ordering import class_order_chain, mtp2_check, tilt_band, tilt_monotonicity
from .samplers import (
    AbcConfig,
    equal_weight_values,
    ks_two_sample,
    rejection_abc,
    sample_posterior_x0,
)

log = logging.getLogger("abcprior")

ENV_OUT = "ABCPRIOR_OUT"
DEFAULT_OUT = "abcprior-out"

EXIT_OK, EXIT_CONFIG, EXIT_PROPERTY, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULTS = {
    "model": {"name": "normal"},
    "epsilon": 1.0,
    "kappa": None,
    "seed": 0,
    "threads": 1,
    "out": None,
    "grid": {"num": 2001},
    "sampler": {"N": 100_000, "N_t": 200_000, "m": 2, "pooling": "evidence", "max_attempts": None},
    "bands": {"eps": [1.8, 3.0], "theta": [-3.0, 3.0], "num": 121},
    "classes": {"t_internal": None},
    "elicit": {"bracket": None, "num_t": 21, "tol": 1e-8},
    "diagnostics": {"ts": None, "n_pairs": 1000, "robustness_members": 50, "robustness_draws": 20_000},
}

MODEL_NAMES = ("normal", "poisson", "poisson-regression", "bivariate-normal")


def _h_increasing(theta):
    return theta


def _h_decreasing(theta):
    return -theta


def _h_nonmonotone(theta):
    return -(theta**2)


#: Tilt presets for ``bands``, keyed by shape.
BAND_PRESETS = {
    "increasing": _h_increasing,
    "decreasing": _h_decreasing,
    "non-monotonic": _h_nonmonotone,
}


# ---------------------------------------------------------------------------
# Configuration


def _deep_merge(base, update, path=""):
    out = copy.deepcopy(base)
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in out and path != "model.":
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(out.get(key), dict) and key != "model":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a mapping")
            out[key] = _deep_merge(out[key], value, where + ".")
        elif key == "model":
            if not isinstance(value, dict):
                raise ConfigError("config key 'model' must be a mapping")
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def _apply_override(cfg, item):
    if "=" not in item:
        raise ConfigError(f"--set expects key.path=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value for {key}: {exc}") from exc
    update = value
    for part in reversed(key.split(".")):
        update = {part: update}
    return _deep_merge(cfg, update)


def load_config(args):
    """Defaults, then the config file, then ``--set``, then dedicated flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                user = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a mapping")
        cfg = _deep_merge(cfg, user)
    for item in args.set or []:
        cfg = _apply_override(cfg, item)
    if args.epsilon is not None:
        cfg["epsilon"], cfg["kappa"] = args.epsilon, None
    if args.kappa is not None:
        cfg["kappa"], cfg["epsilon"] = args.kappa, None
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.out is not None:
        cfg["out"] = args.out
    if cfg["out"] is None:
        cfg["out"] = os.environ.get(ENV_OUT) or DEFAULT_OUT
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if (cfg["epsilon"] is None) == (cfg["kappa"] is None):
        raise ConfigError("set exactly one of epsilon and kappa")
    if cfg["kappa"] is not None and not 0 < float(cfg["kappa"]) < 1:
        raise ConfigError("kappa must lie in (0, 1)")
    if cfg["epsilon"] is not None and np.any(np.asarray(cfg["epsilon"], dtype=float) < 0):
        raise ConfigError("epsilon must be non-negative")
    if cfg["model"].get("name") not in MODEL_NAMES:
        raise ConfigError(f"model.name must be one of {MODEL_NAMES}")
    seed = cfg["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if not isinstance(cfg["threads"], int) or cfg["threads"] < 1:
        raise ConfigError("threads must be a positive integer")
    for key in ("N", "N_t", "m"):
        val = cfg["sampler"][key]
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ConfigError(f"sampler.{key} must be a positive integer")


def build_model(cfg):
    spec = dict(cfg["model"])
    name = spec.pop("name")
    if name == "poisson-regression":
        eps = cfg["epsilon"] if cfg["epsilon"] is not None else 1.0
        path = spec.pop("data", None)
        prior_sd = spec.pop("prior_sd", 1.0)
        if spec:
            raise ConfigError(f"unknown poisson-regression parameters {sorted(spec)}")
        if path:
            with open(path) as fh:
                model = read_regression_csv(fh.read().splitlines(), eps)
        else:
            model = load_synthetic_regression(eps)
        return PoissonRegression(model.X, model.y0, model.epsilon, independent_normal_density(model.p, 0.0, prior_sd))
    if name == "bivariate-normal":
        rho = spec.pop("rho", 0.5)
        if spec:
            raise ConfigError(f"unknown bivariate-normal parameters {sorted(spec)}")
        return bivariate_normal_density(float(rho))
    cls = NormalKnownVar if name == "normal" else PoissonGamma
    allowed = {f.name for f in fields(cls)}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown {name} parameters {sorted(unknown)}; allowed: {sorted(allowed)}")
    try:
        return cls(**spec)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _require(cfg, *names):
    if cfg["model"]["name"] not in names:
        raise ConfigError(f"this command needs model.name in {names}, got {cfg['model']['name']!r}")


def _epsilon(cfg):
    if cfg["epsilon"] is None:
        raise ConfigError("this command needs epsilon (kappa is only used by elicit)")
    eps = float(np.max(cfg["epsilon"]))
    if eps <= 0:
        raise ConfigError("epsilon must be strictly positive for this command")
    return eps


# ---------------------------------------------------------------------------
# Output


class Run:
    """Collects outputs, stage timings and the manifest of one command."""

    def __init__(self, command, cfg):
        self.command, self.cfg = command, cfg
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.stages = {}
        self.summary = {"command": command}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        yield
        self.stages[name] = round(time.perf_counter() - t0, 6)
        log.info("stage %s done in %.3f s", name, self.stages[name])

    def write_csv(self, name, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self.files.append(name)
        return path

    def write_columns(self, name, columns):
        header = list(columns)
        data = [np.asarray(v) for v in columns.values()]
        self.write_csv(name, header, zip(*data))

    def finish(self):
        path = self.out / "summary.json"
        path.write_text(json.dumps(_jsonable(self.summary), indent=2, sort_keys=True) + "\n")
        self.files.append("summary.json")
        manifest = {
            "command": self.command,
            "version": __version__,
            "seed": self.cfg["seed"],
            "config": _jsonable(self.cfg),
            "stages_seconds": self.stages,
            "outputs": [{"file": f, "sha256": _sha256(self.out / f)} for f in self.files],
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Commands


def _band_label(t):
    return "t=%.17g" % t


def cmd_bands(cfg, run):
    bcfg = cfg["bands"]
    lo, hi = bcfg["theta"]
    grid = GridSpec.line(float(lo), float(hi), int(bcfg["num"]))
    eps_list = [float(e) for e in bcfg["eps"]]
    if any(e < 0 for e in eps_list):
        raise ConfigError("bands.eps values must be non-negative")
    ts = sorted({0.0} | {s * e for e in eps_list for s in (-1, 1)})
    with run.stage("presets"):
        for name, h in BAND_PRESETS.items():
            table = tilt_band(h, max(eps_list), grid, ts=ts)
            # exp(h) itself is the reference curve (t = 1)
            cols = {"theta": table.theta, "h": table.h, "exp_h": np.exp(table.h)}
            cols.update({_band_label(t): table.values[:, j] for j, t in enumerate(table.ts)})
            run.write_columns(f"bands_{name}.csv", cols)
    if cfg["model"]["name"] in ("normal", "poisson") and cfg["epsilon"] is not None:
        with run.stage("model"):
            model = build_model(cfg)
            eps = float(np.max(cfg["epsilon"]))
            tilt = model.taylor_class(1.0).tilt
            base = model.prior()
            g = base.default_grid(int(bcfg["num"]), sd_mult=4.0)
            table = tilt_band(tilt, eps, g)
            cols = {"theta": table.theta, "h": table.h}
            cols.update({_band_label(t): table.values[:, j] for j, t in enumerate(table.ts)})
            run.write_columns("bands_model.csv", cols)
    run.summary.update({"presets": list(BAND_PRESETS), "ts": ts, "monotone": True})


def cmd_classes(cfg, run):
    _require(cfg, "normal", "poisson")
    model = build_model(cfg)
    eps = _epsilon(cfg)
    t_int = cfg["classes"]["t_internal"]
    t_int = eps / 2 if t_int is None else float(t_int)
    ts = [-eps, t_int, eps]
    with run.stage("members"):
        taylor = model.taylor_class(eps)
        cls_e = model.class_E(eps)
        members = {route: [c.member([t]) for t in ts] for route, c in (("abc", taylor), ("abc_e", cls_e))}
        grid = union_grid(taylor.base, members["abc"] + members["abc_e"], int(cfg["grid"]["num"]))
        theta = grid.axes()[0]
        cols = {"theta": theta, "base": np.exp(taylor.base.logpdf(theta))}
        labels = ("lower", "internal", "upper")
        for route, ms in members.items():
            for label, mem in zip(labels, ms):
                cols[f"{route}_{label}"] = np.exp(mem.log_pdf(theta))
        run.write_columns("classes.csv", cols)
    gap = max(float(np.max(np.abs(cols[f"abc_{l}"] - cols[f"abc_e_{l}"]))) for l in labels)
    run.summary.update({"epsilon": eps, "ts": ts, "max_route_gap": gap, "grid_points": len(theta)})


METHODS = ("true", "rejection_abc", "abc_class", "abc_e_direct")


def cmd_compare_posteriors(cfg, run):
    _require(cfg, "normal")
    model = build_model(cfg)
    eps = _epsilon(cfg)
    sc = cfg["sampler"]
    seed = RngSeed(cfg["seed"])
    threads = cfg["threads"]
    x0 = model.observed_data()
    samples = {}
    with run.stage("true"):
        truth = model.truth()
        rng = seed.substream(10).generator()
        samples["true"] = rng.normal(truth.mean, np.sqrt(truth.var), size=sc["N"])
    with run.stage("rejection_abc"):
        abc_cfg = AbcConfig(sc["N"], [eps], sc["max_attempts"] or 10_000 * sc["N"])
        rej = rejection_abc(
            model.prior(), model.simulate_stat, np.mean, x0, abc_cfg, seed.substream(11), "stat", threads
        )
        samples["rejection_abc"] = rej.values
    with run.stage("abc_class"):
        pooled = sample_posterior_x0(
            model.taylor_class(eps), model.suffstat_model(), x0, sc["N_t"], sc["m"],
            seed.substream(12), pooling=sc["pooling"], n_jobs=threads,
        )
        samples["abc_class"] = equal_weight_values(pooled, seed=seed.substream(13))
    with run.stage("abc_e_direct"):
        direct = sample_posterior_x0(
            model.class_E(eps), model.expfam_spec(), x0, sc["N_t"], sc["m"],
            seed.substream(14), pooling=sc["pooling"], route="direct", n_jobs=threads,
        )
        samples["abc_e_direct"] = equal_weight_values(direct, seed=seed.substream(15))
    with run.stage("ks"):
        rows = []
        for i, a in enumerate(METHODS):
            for b in METHODS[i + 1 :]:
                r = ks_two_sample(samples[a], samples[b])
                rows.append((a, b, r.statistic, r.critical_1pct, r.passes))
        run.write_csv("ks.csv", ["method_a", "method_b", "statistic", "critical_1pct", "passes"], rows)
    for name in METHODS:
        run.write_columns(f"samples_{name}.csv", {"theta": samples[name]})
    summary_rows = [(n, len(samples[n]), float(np.mean(samples[n])), float(np.std(samples[n], ddof=1))) for n in METHODS]
    run.write_csv("posteriors.csv", ["method", "n", "mean", "sd"], summary_rows)
    run.summary.update(
        {
            "epsilon": eps,
            "acceptance_rate": rej.acceptance_rate,
            "n_attempts": rej.n_attempts,
            "ess": {"abc_class": ess(pooled), "abc_e_direct": ess(direct)},
            "posteriors": {n: {"n": k, "mean": m, "sd": s} for n, k, m, s in summary_rows},
            "ks": [{"a": a, "b": b, "statistic": s, "critical_1pct": c, "passes": p} for a, b, s, c, p in rows],
            "true_posterior": {"mean": truth.mean, "var": truth.var},
        }
    )


def _dump_curve(run, exc):
    if exc.curve is not None:
        run.write_columns("curve.csv", {"t": exc.curve[:, 0], "distance": exc.curve[:, 1]})
        run.finish()


def cmd_elicit(cfg, run):
    if cfg["kappa"] is None:
        raise ConfigError("elicit needs kappa (use --kappa)")
    kappa = float(cfg["kappa"])
    ecfg = cfg["elicit"]
    name = cfg["model"]["name"]
    if name == "bivariate-normal":
        raise ConfigError("elicit needs a model with a tilt")
    model = build_model(cfg)
    if name == "poisson-regression":
        with run.stage("elicit"):
            res = elicit_epsilon_vector(model.prior, model.tilt(), kappa, tol=1e-6, brackets=ecfg["bracket"])
        run.write_csv(
            "epsilon.csv",
            ["observation", "epsilon", "binding_coordinate", "at_bracket_top"],
            zip(range(len(res.epsilon)), res.epsilon, res.binding_coordinate, res.at_bracket_top),
        )
        run.summary.update(
            {"kappa": kappa, "epsilon": res.epsilon, "per_marginal": True, "at_bracket_top": bool(res.at_bracket_top.any())}
        )
        return
    cls = model.taylor_class(1.0)
    with run.stage("elicit"):
        try:
            res = elicit_epsilon(cls.base, cls.tilt, kappa, tol=float(ecfg["tol"]), bracket=ecfg["bracket"])
        except NonMonotoneError as exc:
            _dump_curve(run, exc)
            raise
    with run.stage("curve"):
        elicited = cls.with_epsilon(res.epsilon)
        curve = distance_curve(elicited, int(ecfg["num_t"]))
        run.write_columns("distance_curve.csv", {"t": curve.ts, "distance": curve.distances})
        lower, upper = elicited.bounds()
        theta = curve.grid.axes()[0]
        run.write_columns(
            "bounds.csv",
            {
                "theta": theta,
                "base": np.exp(cls.base.logpdf(theta)),
                "lower": np.exp(lower.log_pdf(theta)),
                "upper": np.exp(upper.log_pdf(theta)),
            },
        )
    run.summary.update(
        {
            "kappa": kappa,
            "epsilon": res.epsilon,
            "distance_at_epsilon": res.distance,
            "bracket": list(res.bracket),
            "at_bracket_top": res.at_bracket_top,
        }
    )


def cmd_diagnostics(cfg, run):
    name = cfg["model"]["name"]
    model = build_model(cfg)
    rows = []
    if name == "bivariate-normal":
        with run.stage("mtp2"):
            rep = mtp2_check(model, n_pairs=int(cfg["diagnostics"]["n_pairs"]), seed=cfg["seed"])
        rows.append(("mtp2", "prior", rep.holds, rep.worst_margin, _witness(rep.witness)))
        run.summary.update({"mtp2": rep.holds, "worst_margin": rep.worst_margin, "witness": rep.witness})
    elif name == "poisson-regression":
        with run.stage("mtp2"):
            rep = mtp2_check(model.prior, n_pairs=int(cfg["diagnostics"]["n_pairs"]), seed=cfg["seed"])
        rows.append(("mtp2", "prior", rep.holds, rep.worst_margin, _witness(rep.witness)))
        with run.stage("tilt_monotonicity"):
            dirs = tilt_monotonicity(model.tilt(), model.prior.default_grid(41, sd_mult=4.0))
        for i in range(dirs.shape[0]):
            for j in range(dirs.shape[1]):
                rows.append(("tilt_direction", f"h_{i}/beta_{j}", dirs[i, j], float("nan"), ""))
        with run.stage("robustness"):
            dc = cfg["diagnostics"]
            widths = {}
            for mult in (1.0, 2.0):
                rb = posterior_robustness(
                    model, int(dc["robustness_members"]), int(dc["robustness_draws"]), cfg["seed"], model.epsilon * mult
                )
                widths[mult] = rb.widths
                for j in range(model.p):
                    rows.append(("robustness", f"beta_{j}@{mult:g}eps", True, float(rb.widths[j]), f"{rb.lower[j]:.17g}..{rb.upper[j]:.17g}"))
            nested = bool(np.all(widths[2.0] >= widths[1.0]))
            rows.append(("nesting", "robustness widths", nested, float(np.min(widths[2.0] - widths[1.0])), ""))
        run.summary.update({"mtp2": rep.holds, "robustness_nested": nested})
    else:
        eps = _epsilon(cfg)
        cls = model.taylor_class(eps)
        ts = cfg["diagnostics"]["ts"]
        ts = [eps * f for f in (-1.0, -0.5, 0.0, 0.5, 1.0)] if ts is None else [float(t) for t in ts]
        with run.stage("lr_chain"):
            chain = class_order_chain(cls, ts)
        for (a, b), v in zip(zip(ts, ts[1:]), chain.verdicts):
            rows.append(("lr_order", f"t={a:.17g} vs t={b:.17g}", v.relation, v.max_ratio_slope_violation, _witness(v.witness)))
        with run.stage("nesting"):
            half = cls.with_epsilon(eps / 2)
            nested = all(class_contains(cls, m) for m in half.bounds())
            c_half = distance_curve(half, 5).max_distance
            c_full = distance_curve(cls, 5).max_distance
        rows.append(("nesting", "members of eps/2 class in eps class", nested, float("nan"), ""))
        rows.append(("nesting", "max distance eps/2 <= eps", c_half <= c_full + 1e-12, c_full - c_half, ""))
        run.write_csv("diagnostics.csv", ["check", "subject", "result", "value", "witness"], rows)
        run.summary.update({"relations": chain.relations, "direction": chain.direction, "nested": nested})
        if chain.direction is None:
            bad = next(v for v in chain.verdicts if v.relation != chain.verdicts[0].relation or v.relation == "incomparable")
            raise PropertyViolation(
                f"lr chain is not monotone: {chain.relations}", witness=bad.witness
            )
        if not (nested and c_half <= c_full + 1e-12):
            raise PropertyViolation("class nesting check failed")
        return
    run.write_csv("diagnostics.csv", ["check", "subject", "result", "value", "witness"], rows)


def _witness(w):
    if w is None:
        return ""
    return json.dumps(_jsonable(w))


COMMANDS = {
    "bands": cmd_bands,
    "classes": cmd_classes,
    "compare-posteriors": cmd_compare_posteriors,
    "elicit": cmd_elicit,
    "diagnostics": cmd_diagnostics,
}


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./{DEFAULT_OUT})")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--epsilon", type=float, help="class half-width (clears kappa)")
    common.add_argument("--kappa", type=float, help="Kolmogorov bound for elicitation (clears epsilon)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry, e.g. sampler.N=5000")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = _Parser(prog="abcprior", description="Tilted prior classes for ABC: experiments and diagnostics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    return parser


cmd_bands.__doc__ = "tilt bands exp(h t) for the preset tilts and the model"
cmd_classes.__doc__ = "class bounds and an internal member for both class routes"
cmd_compare_posteriors.__doc__ = "true, rejection-ABC and class-based posteriors with KS comparisons"
cmd_elicit.__doc__ = "elicit epsilon from a Kolmogorov distortion bound kappa"
cmd_diagnostics.__doc__ = "lr-order chain, MTP2 and nesting checks"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        run = Run(args.command, cfg)
        COMMANDS[args.command](cfg, run)
        run.finish()
    except PropertyViolation as exc:
        print(f"property violation: {exc}" + (f" (witness: {exc.witness})" if exc.witness is not None else ""), file=sys.stderr)
        return EXIT_PROPERTY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, AbcPriorError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
