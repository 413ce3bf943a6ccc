import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abcprior import (
    ConfigError,
    GridSpec,
    GridTooNarrowError,
    PropertyViolation,
    TiltFn,
    abc_class,
    bivariate_normal_density,
    class_order_chain,
    independent_normal_density,
    lr_order,
    mtp2_check,
    normal_density,
    tilt_band,
)
from abcprior.ordering import OrderingVerdict, tilt_monotonicity
from abcprior.kolmogorov import grid_cdf

WIDE = GridSpec.line(-12.0, 12.0, 4001)


class TestLrOrder:
    def test_shifted_normals(self):
        v = lr_order(normal_density(0, 1), normal_density(1, 1), WIDE)
        assert v.relation == "leq_lr" and v.witness is None
        assert lr_order(normal_density(1, 1), normal_density(0, 1), WIDE).relation == "geq_lr"

    def test_equal(self):
        assert lr_order(normal_density(0, 1), normal_density(0, 1), WIDE).relation == "equal"

    def test_scale_family_incomparable_with_witness_around_vertex(self):
        v = lr_order(normal_density(0, 1), normal_density(0, 4), WIDE)
        assert v.relation == "incomparable"
        a, b = v.witness
        assert a < 0 < b

    def test_grid_too_narrow(self):
        with pytest.raises(GridTooNarrowError, match="grid too narrow"):
            lr_order(normal_density(0, 1), normal_density(1, 1), GridSpec.line(-1, 1, 201))

    def test_verdict_invariant(self):
        with pytest.raises(ConfigError):
            OrderingVerdict("leq_lr", (0.0, 1.0), 0.0)
        with pytest.raises(ConfigError):
            OrderingVerdict("incomparable", None, 0.0)

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_antisymmetric(self, a, b):
        r1 = lr_order(normal_density(a, 1), normal_density(b, 1), WIDE).relation
        r2 = lr_order(normal_density(b, 1), normal_density(a, 1), WIDE).relation
        flip = {"leq_lr": "geq_lr", "geq_lr": "leq_lr", "equal": "equal", "incomparable": "incomparable"}
        assert r2 == flip[r1]

    @given(st.floats(-2, 2), st.floats(0.05, 2))
    def test_lr_implies_cdf_dominance(self, a, d):
        d1, d2 = normal_density(a, 1), normal_density(a + d, 1)
        assert lr_order(d1, d2, WIDE).relation == "leq_lr"
        f1 = grid_cdf(d1.logpdf, WIDE)
        f2 = grid_cdf(d2.logpdf, WIDE)
        assert np.all(f2 <= f1 + 1e-9)


class TestChains:
    def test_normal_chain(self, normal_model):
        rep = class_order_chain(normal_model.taylor_class(1.0), [-1.0, 0.0, 1.0])
        assert rep.relations == ["leq_lr", "leq_lr"]
        assert rep.direction == "increasing"
        assert rep.upper.t[0] == 1.0 and rep.lower.t[0] == -1.0

    def test_poisson_chain(self, poisson_model):
        rep = class_order_chain(poisson_model.taylor_class(1.0), [-1.0, 0.0, 1.0])
        assert rep.relations == ["leq_lr", "leq_lr"]

    def test_decreasing_tilt_reverses(self):
        base = normal_density(0.0, 1.0)
        cls = abc_class(base, TiltFn(lambda p: -p[:, 0], 1, dim=1), 1.0)
        rep = class_order_chain(cls, [-1.0, 0.0, 1.0])
        assert rep.relations == ["geq_lr", "geq_lr"]
        assert rep.direction == "decreasing"
        assert rep.upper.t[0] == -1.0 and rep.lower.t[0] == 1.0

    def test_bad_ts(self, normal_model):
        with pytest.raises(ConfigError):
            class_order_chain(normal_model.taylor_class(1.0), [0.5, 0.1])


class TestMTP2:
    def test_positive_correlation(self):
        assert mtp2_check(bivariate_normal_density(0.5), n_pairs=200).holds

    def test_negative_correlation_has_witness(self):
        rep = mtp2_check(bivariate_normal_density(-0.8))
        assert not rep.holds
        x, y = rep.witness
        d = bivariate_normal_density(-0.8)
        lhs = d.logpdf(np.maximum(x, y)[None]) + d.logpdf(np.minimum(x, y)[None])
        rhs = d.logpdf(np.asarray(x)[None]) + d.logpdf(np.asarray(y)[None])
        assert lhs[0] < rhs[0]

    def test_independent_product_equality(self):
        rep = mtp2_check(independent_normal_density(2))
        assert rep.holds and abs(rep.worst_margin) < 1e-9

    def test_univariate_rejected(self):
        with pytest.raises(ConfigError):
            mtp2_check(normal_density(0, 1))


class TestBands:
    def test_identity_tilt_values(self):
        band = tilt_band(lambda p: p[:, 0], 3.0, GridSpec.line(-1.0, 1.0, 3))
        np.testing.assert_allclose(band.values[2], np.exp([-3, -1.5, 0, 1.5, 3]))
        assert np.all(np.diff(band.values[2]) > 0)

    def test_zero_tilt_flat(self):
        band = tilt_band(lambda p: np.zeros(len(p)), 2.0, GridSpec.line(-1, 1, 5))
        assert np.all(band.values == 1.0)

    def test_non_monotone_tilt_rows_monotone(self):
        band = tilt_band(lambda p: -p[:, 0] ** 2, 1.8, GridSpec.line(-3, 3, 121))
        assert np.all(np.diff(band.values, axis=1) <= 0)

    def test_corrupted_tilt_raises_with_witness(self):
        calls = {"n": 0}

        def flaky(p):
            calls["n"] += 1
            out = p[:, 0].copy()
            if calls["n"] == 5:  # the t = eps/2 column
                out[10] = -out[10]
            return out

        with pytest.raises(PropertyViolation) as err:
            tilt_band(flaky, 1.0, GridSpec.line(-3, 3, 61))
        assert err.value.witness == pytest.approx(-2.0)

    def test_tilt_monotonicity(self, normal_model):
        cls = normal_model.taylor_class(1.0)
        out = tilt_monotonicity(cls.tilt, GridSpec.line(9, 11, 101))
        assert out[0, 0] == "increasing"
        sq = TiltFn(lambda p: p[:, 0] ** 2, 1)
        assert tilt_monotonicity(sq, GridSpec.line(-1, 1, 101))[0, 0] == "mixed"
