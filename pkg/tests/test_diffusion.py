import numpy as np
import pytest

from rtgsim.diffusion import NoiseSchedule, forward_noise, loss_target, reconstruct


@pytest.fixture(scope="module")
def sched():
    return NoiseSchedule.linear_beta()


class TestSchedule:
    def test_default_schedule_invariants(self, sched):
        assert sched.T == 1000
        assert np.all(sched.alphas > 0.0) and np.all(sched.alphas < 1.0)
        assert np.all(np.diff(sched.alpha_bars) < 0.0)
        prod = np.cumprod(sched.alphas)
        assert np.max(np.abs(prod - sched.alpha_bars)) <= 1e-12

    def test_terminal_step_noise_dominated(self, sched):
        assert np.sqrt(sched.alpha_bar(sched.T)) < 0.05

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            NoiseSchedule(alphas=[1.2, 0.5], alpha_bars=[1.2, 0.6])

    def test_rejects_inconsistent_product(self):
        with pytest.raises(ValueError):
            NoiseSchedule(alphas=[0.9, 0.9], alpha_bars=[0.9, 0.5])


class TestForwardNoise:
    def test_quarter_alpha_bar_signal_term(self):
        sched = NoiseSchedule(alphas=[0.5, 0.5], alpha_bars=[0.5, 0.25])
        z = forward_noise(np.array([1.0]), 2, np.array([0.0]), sched)
        assert z[0] == pytest.approx(0.5, abs=1e-15)

    def test_quarter_alpha_bar_noise_term(self):
        sched = NoiseSchedule(alphas=[0.5, 0.5], alpha_bars=[0.5, 0.25])
        z = forward_noise(np.array([0.0]), 2, np.array([1.0]), sched)
        assert z[0] == pytest.approx(np.sqrt(0.75), abs=1e-12)

    def test_t_out_of_range(self, sched):
        with pytest.raises(ValueError):
            forward_noise(np.zeros(3), 0, np.zeros(3), sched)
        with pytest.raises(ValueError):
            forward_noise(np.zeros(3), 1001, np.zeros(3), sched)


class TestReconstruct:
    def test_exact_round_trip_every_hundredth_t(self, sched):
        rng = np.random.default_rng(0)
        x = rng.normal(size=256)
        for t in range(1, sched.T + 1, 100):
            eps = rng.normal(size=256)
            back = reconstruct(forward_noise(x, t, eps, sched), t, eps, sched)
            assert np.max(np.abs(back - x)) <= 1e-12

    def test_zero_noise_path(self, sched):
        rng = np.random.default_rng(1)
        z = rng.normal(size=8)
        t = 400
        out = reconstruct(z, t, np.zeros(8), sched)
        assert np.allclose(out, z / np.sqrt(sched.alpha_bar(t)), atol=1e-15)

    def test_degenerate_schedule_rejected(self):
        # 0.5^1000 ~ 9e-302: a legal schedule whose terminal alpha_bar is
        # below the reconstruction floor.
        alphas = np.full(1000, 0.5)
        sched = NoiseSchedule(alphas=alphas, alpha_bars=np.cumprod(alphas))
        with pytest.raises(ValueError):
            reconstruct(np.zeros(2), 1000, np.zeros(2), sched)

    def test_variance_preservation_sampled_t(self, sched):
        # z_t keeps unit variance for x, eps ~ N(0,1); checked directly on
        # 1e6 samples for a spread of steps.
        rng = np.random.default_rng(2)
        n = 1_000_000
        x = rng.normal(size=n)
        eps = rng.normal(size=n)
        for t in (1, 250, 500, 750, 1000):
            z = forward_noise(x, t, eps, sched)
            assert abs(z.var() - 1.0) < 0.01

    def test_variance_preservation_all_t_via_moment_identity(self, sched):
        # Var(a x + b eps) over a fixed sample expands exactly into sample
        # moments of (x, eps), so all 1000 steps can be checked without
        # materializing every z_t.
        rng = np.random.default_rng(3)
        n = 1_000_000
        x = rng.normal(size=n)
        eps = rng.normal(size=n)
        xc = x - x.mean()
        ec = eps - eps.mean()
        var_x = float(xc @ xc) / n
        var_e = float(ec @ ec) / n
        cov = float(xc @ ec) / n
        ab = sched.alpha_bars
        var_z = ab * var_x + (1.0 - ab) * var_e + 2.0 * np.sqrt(ab * (1.0 - ab)) * cov
        assert np.max(np.abs(var_z - 1.0)) < 0.01
        # Spot-validate the identity against a directly computed variance.
        t = 600
        z = forward_noise(x, t, eps, sched)
        assert abs(z.var() - var_z[t - 1]) < 1e-12


class TestLossTarget:
    def test_identical_inputs_zero(self):
        rng = np.random.default_rng(4)
        e = rng.normal(size=32)
        assert loss_target(e, e) == 0.0

    def test_unit_offset(self):
        assert loss_target(np.zeros(4), np.ones(4)) == pytest.approx(1.0, abs=1e-15)

    def test_matches_hand_computed_mean(self):
        rng = np.random.default_rng(5)
        a, b = rng.normal(size=50), rng.normal(size=50)
        by_hand = sum((ai - bi) ** 2 for ai, bi in zip(a, b)) / 50.0
        assert loss_target(a, b) == pytest.approx(by_hand, rel=1e-12)
