import numpy as np
import pytest

from rfpls import Grid, InvalidArgumentError
from rfpls.simlab import (
    ScenarioConfig,
    contaminated_beta,
    cubic_bump,
    fpc_eigen_x,
    fpc_eigen_y,
    fpc_mean_y,
    gen_fpc_dataset,
    gen_gp,
    gen_predictors,
    gen_response,
    generate_case,
    ou_curve,
    se_covariance,
    true_beta,
)


class TestCovarianceAndGp:
    def test_kernel_values(self):
        C = se_covariance([0.0, 0.1, 0.5])
        assert C[0, 0] == 1.0
        assert C[0, 1] == pytest.approx(np.exp(-1.0))
        assert C[0, 2] == pytest.approx(np.exp(-25.0))
        assert np.allclose(C, C.T)

    def test_marginal_variance(self, rng):
        V = gen_gp(4000, Grid.uniform(0, 1, 30), rng).values
        assert np.allclose(V.var(axis=0), 1.0, atol=0.08)
        lag1 = np.corrcoef(V[:, 10], V[:, 13])[0, 1]
        assert lag1 == pytest.approx(np.exp(-100 * (3 / 29) ** 2), abs=0.05)


class TestPredictors:
    def test_zero_latents_give_ten(self):
        cfg = ScenarioConfig(n=3, n_train=3, grid_size=5)
        X = gen_predictors(cfg, None, latent=np.zeros((5, 3, 5)))
        assert len(X) == 5 and all(np.all(x.values == 10.0) for x in X)

    def test_lag_zero_matches_independent(self):
        lat = np.random.default_rng(0).standard_normal((5, 4, 6))
        a = gen_predictors(ScenarioConfig(n=4, n_train=4, grid_size=6), None, latent=lat)
        b = gen_predictors(ScenarioConfig(n=4, n_train=4, grid_size=6, scenario="lagged", lag=0),
                           None, latent=lat)
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))

    def test_lagged_correlation(self, rng):
        cfg = ScenarioConfig(n=5000, n_train=5000, grid_size=10, scenario="lagged", lag=4)
        X = gen_predictors(cfg, rng)
        assert np.corrcoef(X[0].values[:, 4], X[1].values[:, 4])[0, 1] == pytest.approx(0.8, abs=0.03)
        assert X[0].values[:, 4].var() == pytest.approx(1.0, abs=0.06)


class TestSurfaces:
    def test_values(self):
        assert true_beta(1, 0.0, 0.5) == 0.0
        assert true_beta(1, 0.0, 1.0) == pytest.approx(0.25)
        assert true_beta(2, 1.0, 0.5) == pytest.approx(1.0)
        assert true_beta(4, 1 / 3, 0.5) == pytest.approx(1.0)
        assert true_beta(5, 0.25, 1.0) == pytest.approx(0.5)
        assert contaminated_beta(1, 0.3, 0.2) == true_beta(1, 0.3, 0.2)
        assert contaminated_beta(4, 0.0, 0.0) == pytest.approx(6.0)
        with pytest.raises(InvalidArgumentError):
            true_beta(6, 0.0, 0.0)

    def test_beta5_response_against_closed_form(self):
        g = Grid.uniform(0, 1, 2001)
        ones = gen_predictors(ScenarioConfig(n=1, n_train=1), None, g,
                              latent=np.zeros((5, 1, 2001)))[4].with_values(np.ones((1, 2001)))
        y = gen_response([ones], [lambda s, t: true_beta(5, s, t)], g).values[0]
        assert np.allclose(y, (2 / 3) * np.sqrt(g.points), atol=2e-3)

    def test_noise_requires_rng(self):
        g = Grid.uniform(0, 1, 5)
        X = gen_predictors(ScenarioConfig(n=2, n_train=2, grid_size=5), None, latent=np.zeros((5, 2, 5)))
        with pytest.raises(InvalidArgumentError):
            gen_response(X, [lambda s, t: s * t] * 5, g, noise_sd=1.0)


class TestOu:
    def test_zero_diffusion_decays_to_level(self):
        g = Grid.uniform(0, 1, 11)
        path = ou_curve(g, 3.0, 50.0, 0.0, np.random.default_rng(0), x0=0.0)
        assert path[0] == 0.0
        assert path[-1] == pytest.approx(3.0, abs=1e-10)
        assert np.allclose(path, 3.0 - 3.0 * np.exp(-50.0 * g.points))

    def test_stationary_moments(self, rng):
        g = Grid.uniform(0, 1, 11)
        theta, sigma = 5.0, 2.0
        sd = sigma / np.sqrt(2 * theta)
        paths = np.array([ou_curve(g, 0.0, theta, sigma, rng, x0=rng.normal(0, sd)) for _ in range(4000)])
        assert np.allclose(paths.var(axis=0), sd ** 2, rtol=0.1)
        ac = np.corrcoef(paths[:, 2], paths[:, 7])[0, 1]
        assert ac == pytest.approx(np.exp(-theta * 0.5), abs=0.05)

    def test_parameter_checks(self, rng):
        with pytest.raises(InvalidArgumentError):
            ou_curve(Grid.uniform(0, 1, 3), 0.0, 0.0, 1.0, rng)


class TestGenerateCase:
    def test_contamination_count(self):
        d = generate_case(ScenarioConfig(n=250, n_train=200, grid_size=20, contamination_rate=0.2, seed=1))
        assert d.flags.sum() == 40 and d.flags.shape == (200,)
        assert d.Y_train.n == 200 and d.Y_test.n == 50 and len(d.X_test) == 5

    def test_only_flagged_rows_change(self):
        base = dict(n=120, n_train=100, grid_size=15, noise_sd=0.0, seed=7)
        clean = generate_case(ScenarioConfig(**base))
        dirty = generate_case(ScenarioConfig(**base, contamination_rate=0.1))
        keep = ~dirty.flags
        assert np.array_equal(clean.Y_train.values[keep], dirty.Y_train.values[keep])
        for a, b in zip(clean.X_train, dirty.X_train):
            assert np.array_equal(a.values[keep], b.values[keep])
            assert not np.allclose(a.values[dirty.flags], b.values[dirty.flags])
        assert np.array_equal(clean.Y_test.values, dirty.Y_test.values)

    def test_outliers_stand_out(self):
        d = generate_case(ScenarioConfig(n=200, n_train=200, grid_size=30, contamination_rate=0.2,
                                         noise_sd=0.0, seed=3))
        dev = np.abs(d.Y_train.values - np.median(d.Y_train.values, axis=0)).mean(axis=1)
        assert np.median(dev[d.flags]) > 2 * np.median(dev[~d.flags])

    def test_deterministic(self):
        cfg = ScenarioConfig(n=60, n_train=40, grid_size=12, contamination_rate=0.2, seed=9)
        a, b = generate_case(cfg), generate_case(cfg)
        assert np.array_equal(a.Y_train.values, b.Y_train.values)
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a.X_train, b.X_train))
        assert a.config == cfg.to_dict()

    def test_zero_outlier_warning(self):
        with pytest.warns(RuntimeWarning):
            generate_case(ScenarioConfig(n=10, n_train=4, grid_size=5, contamination_rate=0.1))

    @pytest.mark.parametrize("kw", [{"grid_size": 1}, {"contamination_rate": 0.5}, {"n_train": 0},
                                    {"scenario": "other"}, {"lag": -1}, {"noise_sd": -1.0}])
    def test_config_validation(self, kw):
        with pytest.raises(InvalidArgumentError):
            ScenarioConfig(**kw)


class TestFpcDesign:
    def test_eigenfunction_inner_products(self):
        g = Grid.uniform(0, 1, 2001)
        w = g.riemann_weights()
        E = fpc_eigen_x(g.points)
        assert np.allclose((E * w) @ E.T, np.eye(3), atol=1e-3)
        # the response functions have unit norm, but the
        # second and third overlap
        F = fpc_eigen_y(g.points)
        assert np.allclose(np.diag((F * w) @ F.T), 1.0, atol=1e-3)
        assert ((F * w) @ F.T)[1, 2] == pytest.approx(2 / (7 * np.pi) + 2 / (3 * np.pi), abs=1e-3)

    def test_first_score_variance(self):
        d = gen_fpc_dataset("S1", n=4000, grid_size=400, seed=2, contamination_rate=0.0)
        g = d.X_train[0].grid
        X = d.X_train[0].values
        xi = ((X - X.mean(0)) * g.riemann_weights()) @ fpc_eigen_x(g.points)[0]
        assert xi.var() == pytest.approx(40.0, rel=0.08)

    def test_zero_scores_and_coefficients(self):
        n = 50
        d = gen_fpc_dataset("S1", n=n, grid_size=100, scores=np.zeros((n, 3)), B=np.zeros((3, 3)),
                            contamination_rate=0.0)
        t = d.Y_train.grid.points
        resid = d.Y_train.values - fpc_mean_y(t)
        assert np.abs(resid).mean() < 1.0

    def test_contamination(self):
        for scen in ("S1", "S2"):
            d = gen_fpc_dataset(scen, n=100, grid_size=50, seed=4)
            assert d.flags.sum() == 20 and d.Y_test is None

    def test_bump(self):
        t = np.linspace(0, 1, 1001)
        b = cubic_bump(t, 0.3)
        assert np.all(b[(t < 0.3) | (t > 0.4)] == 0)
        assert b.max() == pytest.approx(1.0, abs=1e-3)
        assert t[np.argmax(b)] == pytest.approx(0.35, abs=1e-3)

    def test_rejects_unknown_scenario(self):
        with pytest.raises(InvalidArgumentError):
            gen_fpc_dataset("S3")
