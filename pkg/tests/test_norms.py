import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderbvp.errors import OrderError, UsageError
from holderbvp.expressions import parse_expr
from holderbvp.grid import GridFunction, Interval, sample
from holderbvp.norms import HolderParams, holder_norm, holder_seminorm, sup_norm

IV = Interval(0.0, 1.0)

# Ten-function corpus used for refinement monotonicity and product bounds.
CORPUS = ["1", "t", "t^2", "t^3", "sin(t)", "cos(t)", "exp(t)",
          "t*exp(t)", "sin(2*t)", "t^2 + cos(3*t)"]

# Product-norm constants measured once per (l, alpha) on the pair corpus
# below (max of ||g*h|| / (||g|| ||h||)), then asserted for every pair.
PRODUCT_CONSTANTS = {
    (0, 0.0): 1.0000001,
    (1, 0.0): 0.8000,
    (0, 1.0): 0.8000,
    (1, 0.5): 0.8334,
    (2, 0.5): 1.3031,
}
PAIRS = [
    ("t", "sin(t)"), ("exp(t)", "cos(t)"), ("t^2", "exp(t)"),
    ("1 + t", "1 - t"), ("sin(2*t)", "cos(3*t)"), ("t^3", "t"),
    ("exp(t)*sin(t)", "t"), ("2 + cos(t)", "exp(t)"),
    ("t^2 + 0.5", "sin(t) + 2"), ("0.3*exp(t)", "t^2*sin(t)"),
]


class TestSupNorm:
    def test_constant(self):
        g = sample("5", IV, 10, 0)
        assert sup_norm(g, 0) == 5.0

    def test_identity_order_one(self):
        g = sample("t", IV, 100, 1)
        assert sup_norm(g, 1) == 2.0

    def test_sine_on_half_period(self):
        g = sample("sin(t)", Interval(0.0, np.pi), 2000, 2)
        assert abs(sup_norm(g, 2) - 3.0) <= 1e-5

    def test_order_error(self):
        g = sample("t", IV, 10, 0)
        with pytest.raises(OrderError):
            sup_norm(g, 1)


class TestSeminorm:
    def test_constant_is_zero(self):
        g = sample("7", IV, 50, 1)
        assert holder_seminorm(g, 0, 0.5) == 0.0
        assert holder_seminorm(g, 1, 1.0) == 0.0

    def test_identity_lipschitz(self):
        g = sample("t", IV, 100, 0)
        assert holder_seminorm(g, 0, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_square_attains_endpoint_pair(self):
        # sup of |t^2 - s^2|/|t - s| = t + s -> 2; on the grid the best pair
        # is (t_N, t_{N-1}) giving exactly 2 - 1/N
        N = 100
        g = sample("t^2", IV, N, 0)
        value = holder_seminorm(g, 0, 1.0)
        assert value == pytest.approx(2.0 - 1.0 / N, rel=1e-12)
        assert value >= 2.0 - 2.0 / N

    def test_alpha_zero_rejected(self):
        g = sample("t", IV, 10, 0)
        with pytest.raises(UsageError):
            holder_seminorm(g, 0, 0.0)


class TestHolderNorm:
    def test_alpha_zero_equals_sup_norm(self):
        for text in CORPUS:
            g = sample(text, IV, 200, 1)
            assert holder_norm(g, (1, 0.0)) == sup_norm(g, 1)

    def test_identity_full_norm(self):
        g = sample("t", IV, 100, 0)
        assert holder_norm(g, (0, 1.0)) == pytest.approx(2.0, rel=1e-12)

    def test_exp_against_dense_grid_oracle(self):
        dense = holder_norm(sample("exp(t)", IV, 5000, 1), (1, 0.5))
        value = holder_norm(sample("exp(t)", IV, 1000, 1), (1, 0.5))
        assert abs(value - dense) <= 1e-3 * dense

    def test_params_validation(self):
        with pytest.raises(UsageError):
            HolderParams(-1, 0.5)
        with pytest.raises(UsageError):
            HolderParams(0, 1.5)


class TestRefinementMonotonicity:
    @pytest.mark.parametrize("text", CORPUS)
    def test_seminorm_nondecreasing(self, text):
        for alpha in (0.3, 1.0):
            coarse = holder_seminorm(sample(text, IV, 250, 0), 0, alpha)
            fine = holder_seminorm(sample(text, IV, 500, 0), 0, alpha)
            assert fine >= coarse - 1e-14

    @pytest.mark.parametrize("text", CORPUS)
    def test_sup_norm_nondecreasing(self, text):
        coarse = sup_norm(sample(text, IV, 250, 1), 1)
        fine = sup_norm(sample(text, IV, 500, 1), 1)
        assert fine >= coarse - 1e-14


def _grid_from_array(samples):
    return GridFunction(IV, np.asarray(samples, dtype=complex)[None, :, None, None])


@st.composite
def grid_pairs(draw):
    n = draw(st.integers(min_value=3, max_value=24))
    vals = st.floats(min_value=-50, max_value=50, allow_nan=False)
    g = draw(st.lists(vals, min_size=n, max_size=n))
    h = draw(st.lists(vals, min_size=n, max_size=n))
    return _grid_from_array(g), _grid_from_array(h)


class TestNormAxioms:
    @settings(max_examples=60, deadline=None)
    @given(grid_pairs(), st.floats(min_value=-10, max_value=10, allow_nan=False))
    def test_absolute_homogeneity(self, pair, lam):
        g, _ = pair
        p = (0, 0.5)
        assert holder_norm(lam * g, p) == pytest.approx(abs(lam) * holder_norm(g, p),
                                                        rel=1e-12, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(grid_pairs())
    def test_triangle_inequality(self, pair):
        g, h = pair
        for p in [(0, 0.0), (0, 0.5), (0, 1.0)]:
            assert holder_norm(g + h, p) <= holder_norm(g, p) + holder_norm(h, p) + 1e-9


class TestProductBound:
    @pytest.mark.parametrize("params", sorted(PRODUCT_CONSTANTS))
    def test_measured_constant_holds_across_corpus(self, params):
        l, alpha = params
        c = PRODUCT_CONSTANTS[params]
        for gs, hs in PAIRS:
            g, h = parse_expr(gs), parse_expr(hs)
            norm_g = holder_norm(sample(g, IV, 400, l), params)
            norm_h = holder_norm(sample(h, IV, 400, l), params)
            norm_gh = holder_norm(sample(g * h, IV, 400, l), params)
            assert norm_gh <= c * norm_g * norm_h
