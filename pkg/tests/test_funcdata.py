import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rfpls import (
    DomainError,
    FunctionalSample,
    Grid,
    InvalidArgumentError,
    NumericalError,
    RankError,
    center_functions,
    evaluate_basis,
    gcv_select_nbasis,
    gram_matrix,
    make_bspline_basis,
    riemann_l2_norm,
    smooth_curves,
)
from rfpls.funcdata import BsplineBasis, symmetric_sqrt


class TestGrid:
    def test_rejects_bad_points(self):
        with pytest.raises(InvalidArgumentError):
            Grid([0.0])
        with pytest.raises(InvalidArgumentError):
            Grid([0.0, 0.5, 0.5])
        with pytest.raises(InvalidArgumentError):
            Grid([0.0, np.nan])

    def test_riemann_weights_sum_to_length(self):
        g = Grid([0.0, 0.1, 0.3, 0.35, 1.0])
        assert g.riemann_weights().sum() == pytest.approx(1.0)
        assert g.domain == (0.0, 1.0)

    def test_equality_and_hash(self):
        assert Grid.uniform(0, 1, 5) == Grid(np.linspace(0, 1, 5))
        assert hash(Grid.uniform(0, 1, 5)) == hash(Grid(np.linspace(0, 1, 5)))
        assert Grid.uniform(0, 1, 5) != Grid.uniform(0, 2, 5)


class TestFunctionalSample:
    def test_shape_checks(self):
        g = Grid.uniform(0, 1, 4)
        with pytest.raises(InvalidArgumentError):
            FunctionalSample(g, np.zeros((2, 3)))
        with pytest.raises(InvalidArgumentError):
            FunctionalSample(g, np.array([[0, 1, np.inf, 0]]))
        s = FunctionalSample(g, np.zeros(4))
        assert s.n == 1 and s.ids == ("1",)

    def test_subset_keeps_ids(self):
        g = Grid.uniform(0, 1, 3)
        s = FunctionalSample(g, np.arange(9.0).reshape(3, 3), "Y", ("a", "b", "c"))
        sub = s.subset([2, 0])
        assert sub.ids == ("c", "a")
        assert np.array_equal(sub.values[0], [6, 7, 8])

    def test_values_are_read_only(self):
        s = FunctionalSample(Grid.uniform(0, 1, 3), np.zeros((1, 3)))
        with pytest.raises(ValueError):
            s.values[0, 0] = 1.0


class TestMakeBasis:
    def test_cubic_with_no_interior_knots(self):
        b = make_bspline_basis(4, 4)
        assert b.interior_knots.size == 0
        assert np.allclose(evaluate_basis(b, [0.0]), [[1, 0, 0, 0]])
        assert np.allclose(evaluate_basis(b, [1.0]), [[0, 0, 0, 1]])

    def test_equally_spaced_knots(self):
        b = make_bspline_basis(10, 4)
        assert np.allclose(b.interior_knots, np.arange(1, 7) / 7)

    def test_preconditions(self):
        with pytest.raises(InvalidArgumentError):
            make_bspline_basis(3, 4)
        with pytest.raises(InvalidArgumentError):
            make_bspline_basis(5, 4, (1.0, 1.0))
        with pytest.raises(InvalidArgumentError):
            BsplineBasis(4, 6, (0.0, 1.0), np.array([0.5]))

    def test_dict_round_trip(self):
        b = make_bspline_basis(8, 3, (1.0, 12.0))
        assert BsplineBasis.from_dict(b.to_dict()) == b
        assert b != make_bspline_basis(8, 4, (1.0, 12.0))


class TestEvaluateBasis:
    def test_matches_recursive_oracle(self):
        b = make_bspline_basis(10, 4)
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(evaluate_basis(b, x) - oracles.recursive_design(b.knots, 4, x))) < 1e-10

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
    def test_matches_scipy(self, order):
        b = make_bspline_basis(order + 5, order, (-2.0, 3.0))
        x = np.linspace(-2, 3, 77)
        assert np.allclose(evaluate_basis(b, x), oracles.scipy_design(b.knots, order, x), atol=1e-12)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            evaluate_basis(make_bspline_basis(6), [1.1])

    def test_midpoint_partition(self):
        b = make_bspline_basis(7, 3)
        assert evaluate_basis(b, [0.5]).sum() == pytest.approx(1.0, abs=1e-12)


@given(K=st.integers(1, 25), order=st.integers(1, 6),
       xs=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30))
def test_partition_of_unity_and_nonnegativity(K, order, xs):
    if K < order:
        K = order
    B = evaluate_basis(make_bspline_basis(K, order), np.array(xs))
    assert np.allclose(B.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(B >= -1e-15)


class TestSmoothCurves:
    def test_exact_basis_function(self):
        b = make_bspline_basis(8)
        g = Grid.uniform(0, 1, 50)
        B = evaluate_basis(b, g)
        c = smooth_curves(FunctionalSample(g, B[:, 3]), b).coefs
        assert np.allclose(c, np.eye(8)[3], atol=1e-10)

    def test_constant(self):
        b = make_bspline_basis(6)
        g = Grid.uniform(0, 1, 40)
        c = smooth_curves(FunctionalSample(g, np.full(40, 5.0)), b).coefs
        assert np.allclose(c, 5.0)

    def test_noisy_sine_against_normal_equations(self, rng):
        b = make_bspline_basis(10)
        g = Grid.uniform(0, 1, 100)
        y = np.sin(2 * np.pi * g.points) + 0.1 * rng.standard_normal(100)
        c = smooth_curves(FunctionalSample(g, y), b).coefs[0]
        B = evaluate_basis(b, g)
        assert np.allclose(c, oracles.normal_equations(B, y), atol=1e-8)
        # residual orthogonal to the column space
        assert np.max(np.abs(B.T @ (y - B @ c))) < 1e-8

    def test_idempotent(self, rng):
        b = make_bspline_basis(9)
        g = Grid.uniform(0, 1, 60)
        coefs = rng.standard_normal((3, 9))
        fitted = smooth_curves(FunctionalSample(g, coefs @ evaluate_basis(b, g).T), b)
        assert np.allclose(fitted.coefs, coefs, atol=1e-8)
        assert np.allclose(fitted.evaluate(g), coefs @ evaluate_basis(b, g).T, atol=1e-8)

    def test_too_few_points(self):
        with pytest.raises(RankError):
            smooth_curves(FunctionalSample(Grid.uniform(0, 1, 5), np.zeros(5)), make_bspline_basis(8))

    def test_singular_design(self):
        # every grid point in one knot span leaves most basis functions unsupported
        g = Grid(np.linspace(0.0, 0.05, 30))
        with pytest.raises(NumericalError):
            smooth_curves(FunctionalSample(g, np.zeros(30)), make_bspline_basis(10))


class TestGram:
    def test_single_constant(self):
        G = gram_matrix(make_bspline_basis(1, 1))
        assert np.allclose(G.matrix, [[1.0]]) and np.allclose(G.sqrt, [[1.0]])

    def test_two_boxes(self):
        assert np.allclose(gram_matrix(make_bspline_basis(2, 1)).matrix, np.diag([0.5, 0.5]))

    @pytest.mark.parametrize("K,order", [(10, 4), (20, 4), (7, 3), (12, 2)])
    def test_dense_quadrature_oracle(self, K, order):
        b = make_bspline_basis(K, order)
        G = gram_matrix(b).matrix
        ref = oracles.dense_gram(b.knots, order, 0.0, 1.0)
        assert np.max(np.abs(G - ref)) / np.max(np.abs(ref)) < 1e-6

    def test_square_root_consistency(self):
        G = gram_matrix(make_bspline_basis(15, 4, (2.0, 5.0)))
        M = G.matrix
        assert np.allclose(M, M.T, rtol=1e-10)
        assert np.all(np.linalg.eigvalsh(M) > 0)
        assert np.linalg.norm(G.sqrt @ G.sqrt - M) / np.linalg.norm(M) < 1e-8
        assert np.allclose(G.inv_sqrt @ G.sqrt, np.eye(15), atol=1e-8)

    def test_symmetric_sqrt_rejects_negative(self):
        with pytest.raises(NumericalError):
            symmetric_sqrt(-np.eye(2))


class TestRiemann:
    def test_constant(self):
        g = Grid(np.sort(np.r_[0.0, np.random.default_rng(1).uniform(0, 1, 20), 1.0]))
        assert riemann_l2_norm(np.ones(len(g)), g) == pytest.approx(1.0)

    def test_linear(self):
        g = Grid.uniform(0, 1, 1001)
        assert riemann_l2_norm(g.points, g) == pytest.approx(np.sqrt(1 / 3), abs=1e-3)

    def test_trapezoid_oracle(self, rng):
        g = Grid.uniform(0, 2, 50)
        v = rng.standard_normal(50)
        assert riemann_l2_norm(v, g) == pytest.approx(oracles.trapezoid_norm(v, g.points), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            riemann_l2_norm(np.ones(3), Grid.uniform(0, 1, 4))

    @given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5))
    def test_self_difference_is_zero(self, vals):
        v = np.array(vals)
        assert riemann_l2_norm(v - v, Grid.uniform(0, 1, 5)) == 0.0


class TestCentering:
    def test_single_curve(self):
        s = FunctionalSample(Grid.uniform(0, 1, 4), [1.0, 2.0, 3.0, 4.0])
        c, mean = center_functions(s)
        assert np.all(c.values == 0) and np.array_equal(mean, s.values[0])

    def test_opposite_curves(self):
        f = np.array([1.0, -2.0, 0.5])
        s = FunctionalSample(Grid.uniform(0, 1, 3), np.vstack([f, -f]))
        c, mean = center_functions(s)
        assert np.all(mean == 0) and np.array_equal(c.values, s.values)

    def test_round_trip(self, rng):
        s = FunctionalSample(Grid.uniform(0, 1, 6), rng.standard_normal((5, 6)))
        c, mean = center_functions(s)
        assert np.allclose(c.values.mean(axis=0), 0, atol=1e-12)
        assert np.allclose(c.values + mean, s.values, atol=1e-15)


def test_gcv_prefers_adequate_basis(rng):
    g = Grid.uniform(0, 1, 120)
    truth = np.sin(6 * np.pi * g.points)
    s = FunctionalSample(g, truth + 0.05 * rng.standard_normal((10, 120)))
    best, scores = gcv_select_nbasis(s, [5, 8, 15, 25, 40])
    assert best in (15, 25)
    assert scores[5] > scores[best]
    with pytest.raises(InvalidArgumentError):
        gcv_select_nbasis(s, [200])
