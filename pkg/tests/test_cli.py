import csv
import json

import numpy as np
import pytest
from scipy import stats

from abcprior import cli
from abcprior.exceptions import NonMonotoneError


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=object)


def digests(out):
    return {o["file"]: o["sha256"] for o in json.loads((out / "manifest.json").read_text())["outputs"]}


SMALL = ["--set", "sampler.N=3000", "--set", "sampler.N_t=20000", "--set", "sampler.m=2"]


class TestBands:
    def test_presets(self, tmp_path):
        code, out = run(tmp_path, "bands")
        assert code == 0
        header, rows = read_csv(out / "bands_increasing.csv")
        assert sum(h.startswith("t=") for h in header) == 5
        assert (out / "bands_model.csv").exists()
        # t in {+-1.8, +-3, 0} plus the exp(h) reference: six curves
        assert "exp_h" in header

    def test_epsilon_zero_flat(self, tmp_path):
        code, out = run(tmp_path, "bands", "--set", "bands.eps=[0]")
        assert code == 0
        header, rows = read_csv(out / "bands_non-monotonic.csv")
        cols = [i for i, h in enumerate(header) if h.startswith("t=")]
        assert rows[:, cols].astype(float).min() == 1.0 == rows[:, cols].astype(float).max()

    def test_corrupted_tilt_exit_2(self, tmp_path, monkeypatch, capsys):
        calls = {"n": 0}

        def corrupt(theta):
            calls["n"] += 1
            out = np.array(theta, dtype=float)
            if calls["n"] == 5:
                out[3] = -out[3]
            return out

        monkeypatch.setitem(cli.BAND_PRESETS, "increasing", corrupt)
        code, _ = run(tmp_path, "bands")
        assert code == 2
        assert "witness" in capsys.readouterr().err


class TestClasses:
    def test_normal_routes_agree(self, tmp_path):
        code, out = run(tmp_path, "classes", "--set", "classes.t_internal=0.0")
        assert code == 0
        header, rows = read_csv(out / "classes.csv")
        data = rows.astype(float)
        col = {h: data[:, i] for i, h in enumerate(header)}
        np.testing.assert_allclose(col["abc_internal"], col["base"], atol=1e-12)
        for which in ("lower", "internal", "upper"):
            assert np.max(np.abs(col[f"abc_{which}"] - col[f"abc_e_{which}"])) < 1e-6

    def test_poisson_gamma_columns(self, tmp_path):
        code, out = run(tmp_path, "classes", "--set", "model.name=poisson", "--epsilon", "1.0")
        assert code == 0
        header, rows = read_csv(out / "classes.csv")
        data = rows.astype(float)
        col = {h: data[:, i] for i, h in enumerate(header)}
        lam = col["theta"]
        np.testing.assert_allclose(col["abc_e_upper"], stats.gamma.pdf(lam, 3.0), atol=1e-8)
        np.testing.assert_allclose(col["abc_e_lower"], stats.gamma.pdf(lam, 1.0), atol=1e-8)


class TestElicit:
    def test_normal(self, tmp_path):
        code, out = run(tmp_path, "elicit", "--kappa", "0.1")
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["epsilon"] == pytest.approx(0.03554, abs=1e-4)
        assert (out / "distance_curve.csv").exists() and (out / "bounds.csv").exists()

    def test_bracket_top(self, tmp_path):
        code, out = run(tmp_path, "elicit", "--kappa", "0.999", "--set", "elicit.bracket=0.1")
        assert code == 0
        assert json.loads((out / "summary.json").read_text())["at_bracket_top"] is True

    @pytest.mark.slow
    def test_regression_vector(self, tmp_path):
        code, out = run(tmp_path, "elicit", "--kappa", "0.1", "--set", "model.name=poisson-regression")
        assert code == 0
        header, rows = read_csv(out / "epsilon.csv")
        assert len(rows) == 20 and np.all(rows[:, 1].astype(float) > 0)

    def test_non_monotone_exit_3_with_curve(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise NonMonotoneError("not monotone", curve=np.array([[0.0, 0.0], [1.0, 0.5], [2.0, 0.2]]))

        monkeypatch.setattr(cli, "elicit_epsilon", boom)
        code, out = run(tmp_path, "elicit", "--kappa", "0.1")
        assert code == 3
        assert (out / "curve.csv").exists()

    def test_missing_kappa(self, tmp_path):
        assert run(tmp_path, "elicit")[0] == 1


class TestDiagnostics:
    @pytest.mark.parametrize("model", ["normal", "poisson"])
    def test_chains(self, tmp_path, model):
        code, out = run(tmp_path, "diagnostics", "--set", f"model.name={model}")
        assert code == 0
        assert set(json.loads((out / "summary.json").read_text())["relations"]) == {"leq_lr"}

    def test_negative_correlation_reported(self, tmp_path):
        code, out = run(tmp_path, "diagnostics", "--set", "model.name=bivariate-normal", "--set", "model.rho=-0.8")
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["mtp2"] is False and summary["witness"] is not None

    def test_regression(self, tmp_path):
        code, out = run(tmp_path, "diagnostics", "--set", "model.name=poisson-regression",
                        "--set", "diagnostics.robustness_draws=5000", "--set", "diagnostics.robustness_members=10")
        assert code == 0
        assert json.loads((out / "summary.json").read_text())["robustness_nested"] is True


class TestComparePosteriors:
    def test_outputs(self, tmp_path):
        code, out = run(tmp_path, "compare-posteriors", *SMALL)
        assert code == 0
        for name in ("ks.csv", "posteriors.csv", "samples_true.csv", "samples_abc_class.csv"):
            assert (out / name).exists()


class TestConfigAndExitCodes:
    def test_unknown_key(self, tmp_path):
        assert run(tmp_path, "bands", "--set", "nope=1")[0] == 1

    def test_bad_flag(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            cli.main(["bands", "--no-such-flag"])
        assert err.value.code == 1

    def test_missing_config_file(self, tmp_path):
        assert run(tmp_path, "bands", "--config", str(tmp_path / "missing.yaml"))[0] == 1

    def test_yaml_config_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("seed: 5\nmodel:\n  name: poisson\nepsilon: 0.5\n")
        code, out = run(tmp_path, "classes", "--config", str(cfg), "--seed", "9")
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9 and manifest["config"]["model"]["name"] == "poisson"
        assert manifest["config"]["epsilon"] == 0.5

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ABCPRIOR_OUT", str(tmp_path / "env"))
        assert cli.main(["bands"]) == 0
        assert (tmp_path / "env" / "manifest.json").exists()

    def test_poisson_epsilon_too_big(self, tmp_path):
        assert run(tmp_path, "classes", "--set", "model.name=poisson", "--epsilon", "2.5")[0] == 1

    def test_lr_violation_exit_2(self, tmp_path, monkeypatch):
        from abcprior.ordering import OrderingVerdict

        real = cli.class_order_chain

        def broken(cls, ts, *a, **k):
            rep = real(cls, ts, *a, **k)
            bad = [OrderingVerdict("incomparable", (0.0, 1.0), 0.5)] + rep.verdicts[1:]
            return type(rep)(rep.ts, bad, rep.lower, rep.upper, None, rep.grid)

        monkeypatch.setattr(cli, "class_order_chain", broken)
        assert run(tmp_path, "diagnostics")[0] == 2


class TestDeterminism:
    @pytest.mark.parametrize("cmd", [["bands"], ["classes"], ["elicit", "--kappa", "0.1"], ["compare-posteriors", *SMALL]])
    def test_rerun_and_threads(self, tmp_path, cmd):
        _, a = run(tmp_path, *cmd, "--threads", "1", name="a")
        _, b = run(tmp_path, *cmd, "--threads", "1", name="b")
        _, c = run(tmp_path, *cmd, "--threads", "8", name="c")
        assert digests(a) == digests(b) == digests(c)


@pytest.mark.parametrize("name", ["normal", "poisson", "regression", "bivariate"])
def test_shipped_configs_load(tmp_path, name):
    from importlib import resources

    path = resources.files("abcprior").joinpath(f"configs/{name}.yaml")
    assert run(tmp_path, "bands", "--config", str(path))[0] == 0
