import numpy as np
import pytest

from fdaclust import InvalidArgument
from fdaclust.simgen import (E_NOISE, EPS_MEAN, GPKernelSpec, KL_TERMS, SCENARIOS, ScenarioSpec,
                             draw_levels_13_21, gen_model, gen_model_1_9, gen_model_10_12,
                             gen_model_13_21, gen_scenario, get_scenario, gp_cholesky, grid_1_9,
                             grid_10_12, grid_13_21, kl_basis, kl_pointwise_variance, kl_rho,
                             kl_theta, mean_e1, mean_e1_alt, model_mean_1_9, model_mean_10_12,
                             model_shape_13_21, normalize_scenario_name, sample_gp)


class TestGP:
    def test_kernel_diagonal(self):
        C = E_NOISE.matrix(grid_1_9().points)
        np.testing.assert_array_equal(np.diag(C), 0.3)
        assert C[0, 1] == pytest.approx(0.3 * np.exp(-(1 / 29) / 0.3))

    def test_marginal_variance(self):
        X = sample_gp(0.0, E_NOISE, grid_1_9(), 10_000, seed=1)
        v = X.var(axis=0, ddof=1)
        assert np.all(np.abs(v - 0.3) <= 0.03)

    def test_zero_mean_clt(self):
        X = sample_gp(0.0, E_NOISE, grid_1_9(), 10_000, seed=2)
        assert np.all(np.abs(X.mean(axis=0)) <= 4 * np.sqrt(0.3 / 10_000))

    def test_degenerate_scale(self):
        mean = np.linspace(0, 1, 30)
        X = sample_gp(mean, GPKernelSpec(1e-12, 0.3), grid_1_9(), 5, seed=0)
        assert np.max(np.abs(X - mean)) <= 1e-5

    def test_cholesky_on_fine_grid(self):
        L = gp_cholesky(GPKernelSpec(0.5, 0.2), np.linspace(0, 1, 2000))
        assert np.all(np.isfinite(L))

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            GPKernelSpec(0.0, 1.0)
        with pytest.raises(InvalidArgument):
            sample_gp(0.0, E_NOISE, grid_1_9(), 0)


class TestModels1To9:
    def test_e1_value(self):
        assert mean_e1(0.5) == pytest.approx(5.3033, abs=1e-4)

    def test_model9_mean(self):
        assert model_mean_1_9(9, 0.5) == pytest.approx(3.75)
        assert mean_e1_alt(0.5) == pytest.approx(3.75)

    @pytest.mark.parametrize("mid, shift", [(2, 0.5), (3, 0.75), (4, 1.0)])
    def test_mean_shifts(self, mid, shift):
        t = grid_1_9().points
        np.testing.assert_allclose(model_mean_1_9(mid, t) - model_mean_1_9(1, t), shift)

    def test_model4_minus_model1_empirical(self):
        a = gen_model_1_9(1, 1000, seed=3).values.mean(axis=0)
        b = gen_model_1_9(4, 1000, seed=4).values.mean(axis=0)
        assert np.all(np.abs(b - a - 1.0) <= 0.1)

    @pytest.mark.parametrize("mid, var", [(5, 4 * 0.3), (6, 0.0625 * 0.3), (7, 0.5)])
    def test_noise_scale(self, mid, var):
        X = gen_model_1_9(mid, 4000, seed=mid).values
        assert np.all(np.abs(X.var(axis=0) / var - 1) <= 0.1)

    def test_grid(self):
        g = gen_model(1, 3, seed=0).grid
        assert g.m == 30 and g.span == (0.0, 1.0)

    def test_bad_id(self):
        with pytest.raises(InvalidArgument):
            gen_model_1_9(10, 3)


class TestModels10To12:
    def test_rho(self):
        assert kl_rho(1) == 0.5 and kl_rho(3) == 0.25 and kl_rho(4) == pytest.approx(1 / 25)

    def test_theta_one(self):
        np.testing.assert_array_equal(kl_theta(1, np.linspace(0, 1, 50)), 1.0)

    def test_theta_branches(self):
        t = np.array([0.1, 0.4])
        np.testing.assert_allclose(kl_theta(2, t), np.sqrt(2) * np.sin(2 * np.pi * t))
        np.testing.assert_allclose(kl_theta(5, t), np.sqrt(2) * np.cos(4 * np.pi * t))

    def test_orthonormality(self):
        t = np.linspace(0, 1, 10_000)
        B = kl_basis(t, 12)
        G = np.trapezoid(B[:, None, :] * B[None, :, :], t, axis=2)
        assert np.max(np.abs(G - np.eye(12))) <= 1e-3
        assert abs(np.trapezoid(kl_theta(2, t) * kl_theta(3, t), t)) <= 1e-3

    def test_pointwise_variance(self):
        X = gen_model_10_12(10, 10_000, seed=5).values
        target = kl_pointwise_variance(grid_10_12().points, KL_TERMS)
        assert np.all(np.abs(X.var(axis=0) / target - 1) <= 0.1)

    def test_means(self):
        t = grid_10_12().points
        theta = kl_basis(t)
        w = np.sqrt(kl_rho(np.arange(1, KL_TERMS + 1)))
        e2 = model_mean_10_12(10, t)
        np.testing.assert_allclose(model_mean_10_12(11, t) - e2, w[:3] @ theta[:3], atol=1e-12)
        np.testing.assert_allclose(model_mean_10_12(12, t) - e2, w[3:] @ theta[3:], atol=1e-12)

    def test_grid(self):
        assert gen_model(11, 2, seed=0).grid.m == 150


class TestModels13To21:
    def test_model13_at_zero(self):
        assert model_shape_13_21(13, 0.0) == pytest.approx(0.3)

    def test_16_vs_17(self):
        t = grid_13_21().points
        d = model_shape_13_21(17, t) - model_shape_13_21(16, t)
        np.testing.assert_allclose(
            d, np.sin(1.7 * np.pi * t) - np.sin(1.5 * np.pi * t) + 0.4, atol=1e-12)

    def test_eps_mean(self):
        _, eps = draw_levels_13_21(13, 10_000, np.random.default_rng(0))
        assert abs(eps.mean() - EPS_MEAN) <= 4 * 0.4 / 100

    @pytest.mark.parametrize("mid, half", [(13, 0.25), (16, 0.5)])
    def test_level_ranges(self, mid, half):
        level, _ = draw_levels_13_21(mid, 5000, np.random.default_rng(1))
        assert level.min() >= -half and level.max() <= half
        assert level.max() - level.min() > 1.9 * half

    def test_per_curve_constant_offset(self):
        s = gen_model_13_21(14, 20, seed=0)
        resid = s.values - model_shape_13_21(14, s.grid.points)
        np.testing.assert_allclose(resid.std(axis=1), 0.0, atol=1e-12)

    def test_per_point_noise(self):
        s = gen_model_13_21(14, 200, seed=0, eps="point")
        resid = s.values - model_shape_13_21(14, s.grid.points)
        assert abs(resid.mean() - EPS_MEAN) < 0.05
        assert abs(resid.std(axis=1).mean() - 0.4) < 0.05

    def test_bad_eps(self):
        with pytest.raises(InvalidArgument):
            gen_model_13_21(13, 2, eps="both")

    def test_grid(self):
        g = grid_13_21()
        assert g.m == 100 and g.span == pytest.approx((0.0, np.pi / 3))


class TestScenarios:
    def test_catalog_names(self):
        assert list(SCENARIOS) == [f"S 1-{i}" for i in range(2, 10)] + [
            "S 10-11", "S 10-12", "S 13-14-15", "S 16-17-18", "S 19-20-21"]

    def test_s14_shape(self):
        s = gen_scenario("S 1-4", seed=0)
        assert s.values.shape == (100, 30)
        assert s.labels.tolist() == [0] * 50 + [1] * 50

    def test_three_groups(self):
        s = gen_scenario("S 13-14-15", seed=0)
        assert s.values.shape == (150, 100) and sorted(set(s.labels)) == [0, 1, 2]

    def test_deterministic(self):
        a, b = gen_scenario("S 10-12", seed=11), gen_scenario("S 10-12", seed=11)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, gen_scenario("S 10-12", seed=12).values)

    def test_seed_sequence_not_mutated(self):
        ss = np.random.SeedSequence(3)
        a = gen_scenario("S 1-2", seed=ss).values
        np.testing.assert_array_equal(a, gen_scenario("S 1-2", seed=ss).values)
        assert ss.n_children_spawned == 0

    def test_groups_independent(self):
        # S 1-5 scales Model 1 noise; independent draws are not proportional
        s = gen_scenario("S 1-5", seed=0)
        r1 = s.values[:50] - mean_e1(s.grid.points)
        r5 = (s.values[50:] - mean_e1(s.grid.points)) / 2
        assert not np.allclose(r1, r5)

    @pytest.mark.parametrize("alias", ["S 1-4", "S1-4", "1-4", "s_1-4"])
    def test_name_aliases(self, alias):
        assert normalize_scenario_name(alias) == "S 1-4"
        assert get_scenario(alias).models == (1, 4)

    def test_unknown(self):
        with pytest.raises(InvalidArgument):
            get_scenario("S 2-3")

    def test_per_group_override(self):
        spec = get_scenario("S 16-17-18", per_group=5)
        assert spec.n == 15 and spec.k == 3 and spec.default_combo == "_d2.MEI"

    def test_mixed_grids_rejected(self):
        with pytest.raises(InvalidArgument):
            ScenarioSpec("bad", (1, 10))
