import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rfpls import (
    InvalidArgumentError,
    IrsimplsConfig,
    RankError,
    irsimpls_fit,
    pls_predict,
    simpls_fit,
)


def _centered(rng, n, p, q):
    X = rng.standard_normal((n, p))
    Y = X @ rng.standard_normal((p, q)) + 0.1 * rng.standard_normal((n, q))
    return X - X.mean(0), Y - Y.mean(0)


class TestSimpls:
    def test_orthonormal_single_response(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]) / np.sqrt(2)
        y = np.array([[2.0], [1.0], [-2.0], [-1.0]])
        fit = simpls_fit(X, y, 1)
        r = fit.x_weights[:, 0]
        direction = (X.T @ y)[:, 0]
        assert abs(abs(r @ direction) / (np.linalg.norm(r) * np.linalg.norm(direction)) - 1) < 1e-12

    def test_full_rank_equals_least_squares(self, rng):
        X, Y = _centered(rng, 40, 5, 3)
        fit = simpls_fit(X, Y, 5)
        ls = np.linalg.lstsq(X, Y, rcond=None)[0]
        assert np.allclose(fit.omega_hat, ls, atol=1e-6)

    def test_constrained_eigen_oracle(self, rng):
        X, Y = _centered(rng, 30, 6, 3)
        fit = simpls_fit(X, Y, 2)
        omega, T = oracles.pls_constrained_eig(X, Y, 2)
        assert np.allclose(fit.omega_hat, omega, atol=1e-6)
        G = fit.x_scores.T @ fit.x_scores
        assert np.allclose(G, np.eye(2), atol=1e-10)

    def test_single_response_matches_sklearn(self, rng):
        from sklearn.cross_decomposition import PLSRegression

        X, Y = _centered(rng, 50, 8, 1)
        for h in (1, 2, 4):
            ref = PLSRegression(n_components=h, scale=False).fit(X, Y)
            pred = simpls_fit(X, Y, h).omega_hat
            assert np.allclose(X @ pred, ref.predict(X) - Y.mean(0), atol=1e-8)

    def test_centering_option(self, rng):
        X, Y = _centered(rng, 25, 4, 2)
        a = simpls_fit(X + 3.0, Y - 1.0, 2, center=True)
        b = simpls_fit(X, Y, 2)
        assert np.allclose(a.omega_hat, b.omega_hat, atol=1e-12)
        assert np.allclose(pls_predict(a, X + 3.0), pls_predict(b, X) - 1.0, atol=1e-10)

    def test_residual_sum_of_squares_monotone(self, rng):
        X, Y = _centered(rng, 40, 7, 3)
        rss = [np.sum((Y - X @ simpls_fit(X, Y, h).omega_hat) ** 2) for h in range(1, 8)]
        assert np.all(np.diff(rss) <= 1e-9)

    def test_rank_error_carries_maximum(self, rng):
        X = rng.standard_normal((20, 2)) @ rng.standard_normal((2, 5))
        X -= X.mean(0)
        Y = rng.standard_normal((20, 2))
        with pytest.raises(RankError) as err:
            simpls_fit(X, Y, 3)
        assert err.value.max_rank == 2
        with pytest.raises(RankError):
            simpls_fit(X[:4], Y[:4], 6)

    def test_zero_cross_covariance(self):
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        Y = np.array([[1.0], [1.0], [-1.0], [-1.0]])
        with pytest.raises(RankError):
            simpls_fit(X, Y, 1)

    def test_input_validation(self):
        with pytest.raises(InvalidArgumentError):
            simpls_fit(np.ones((3, 2)), np.ones((4, 1)), 1)
        with pytest.raises(InvalidArgumentError):
            simpls_fit(np.ones((3, 2)), np.ones((3, 1)), 0)
        with pytest.raises(InvalidArgumentError):
            simpls_fit(np.array([[np.nan, 1.0], [0.0, 1.0]]), np.ones((2, 1)), 1)

    @settings(max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1), h=st.integers(1, 4))
    def test_scores_orthonormal(self, seed, h):
        X, Y = _centered(np.random.default_rng(seed), 20, 5, 2)
        T = simpls_fit(X, Y, h).x_scores
        assert np.allclose(T.T @ T, np.eye(h), atol=1e-8)

    @settings(max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_row_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        X, Y = _centered(rng, 15, 4, 2)
        perm = rng.permutation(15)
        assert np.allclose(simpls_fit(X, Y, 2).omega_hat, simpls_fit(X[perm], Y[perm], 2).omega_hat,
                           atol=1e-9)


class TestIrsimplsConfig:
    def test_default_subsample(self):
        assert IrsimplsConfig(n_components=2).resolved_subsample(100) == 25
        assert IrsimplsConfig(n_components=5).resolved_subsample(40) == 24
        assert IrsimplsConfig(n_components=5).resolved_subsample(10) == 10

    @pytest.mark.parametrize("kw", [
        {"n_components": 0}, {"gamma": 0.0}, {"n_starts": 0}, {"convergence_tol": 0.0},
        {"max_reweight_iters": -1}, {"subsample_size": 1}, {"center": "median"},
    ])
    def test_rejects(self, kw):
        with pytest.raises(InvalidArgumentError):
            IrsimplsConfig(**kw)

    def test_oversized_subsample(self):
        with pytest.raises(InvalidArgumentError):
            IrsimplsConfig(subsample_size=50).resolved_subsample(10)


class TestIrsimpls:
    def test_clean_data_close_to_simpls(self, rng):
        X = rng.standard_normal((200, 5))
        Y = X @ rng.standard_normal((5, 3)) + 0.1 * rng.standard_normal((200, 3))
        h = 3
        robust = irsimpls_fit(X, Y, IrsimplsConfig(n_components=h, rng_seed=1))
        plain = simpls_fit(X, Y, h, center=True)
        rel = np.linalg.norm(robust.omega_hat - plain.omega_hat) / np.linalg.norm(plain.omega_hat)
        assert rel < 0.10

    def test_planted_outliers_get_lower_weight(self, rng):
        n = 100
        X = rng.standard_normal((n, 4))
        Y = X @ rng.standard_normal((4, 3)) + 0.2 * rng.standard_normal((n, 3))
        bad = rng.choice(n, 10, replace=False)
        Y[bad] += rng.choice([-1, 1], (10, 3)) * rng.uniform(8, 20, (10, 3))
        fit = irsimpls_fit(X, Y, IrsimplsConfig(n_components=4, rng_seed=3))
        clean = np.setdiff1d(np.arange(n), bad)
        assert fit.obs_weights[bad].mean() < fit.obs_weights[clean].mean()
        assert fit.initial_weights is not None and fit.initial_weights.shape == (n,)

    def test_degenerate_collapse_to_simpls(self, rng):
        X = rng.standard_normal((30, 5))
        Y = rng.standard_normal((30, 2))
        cfg = IrsimplsConfig(n_components=3, center="mean", fixed_weights=True, n_starts=1,
                             subsample_size=30, max_reweight_iters=0, scale_x=False)
        robust = irsimpls_fit(X, Y, cfg)
        plain = simpls_fit(X, Y, 3, center=True)
        assert np.allclose(robust.omega_hat, plain.omega_hat, atol=1e-10)
        assert np.allclose(pls_predict(robust, X), pls_predict(plain, X), atol=1e-10)

    def test_deterministic_for_a_seed(self, rng):
        X, Y = _centered(rng, 60, 4, 2)
        cfg = IrsimplsConfig(n_components=2, rng_seed=11)
        a, b = irsimpls_fit(X, Y, cfg), irsimpls_fit(X, Y, cfg)
        assert np.array_equal(a.omega_hat, b.omega_hat)
        assert np.array_equal(a.obs_weights, b.obs_weights)
        assert len(a.start_objectives) == cfg.n_starts
        assert a.objective == min(a.start_objectives)

    def test_weights_in_unit_interval(self, rng):
        X, Y = _centered(rng, 80, 4, 3)
        w = irsimpls_fit(X, Y, IrsimplsConfig(n_components=2)).obs_weights
        assert np.all((w >= 0) & (w <= 1))

    def test_h_too_large(self, rng):
        with pytest.raises(RankError):
            irsimpls_fit(rng.standard_normal((10, 3)), rng.standard_normal((10, 2)),
                         IrsimplsConfig(n_components=4))


class TestPredict:
    def test_affine_map(self, rng):
        X, Y = _centered(rng, 20, 3, 2)
        fit = simpls_fit(X, Y, 2)
        assert np.allclose(pls_predict(fit, np.zeros((1, 3))), 0.0)
        assert np.allclose(pls_predict(fit, X), X @ fit.omega_hat)

    def test_column_mismatch(self, rng):
        X, Y = _centered(rng, 20, 3, 2)
        with pytest.raises(InvalidArgumentError):
            pls_predict(simpls_fit(X, Y, 1), np.zeros((2, 4)))
