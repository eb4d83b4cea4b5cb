import numpy as np
import pytest

from rtgsim.spline import (
    UniformHermite,
    central_tangents,
    hermite_coeffs,
    select_tangents,
    velocity_control_values,
)


class TestHermiteBasics:
    def test_interpolates_knots_exactly(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 3))
        sp = UniformHermite.from_knots(2.0, 0.1, x)
        for k in range(8):
            assert np.allclose(sp.eval(2.0 + 0.1 * k), x[k], atol=1e-12)

    def test_linear_precision(self):
        # Straight-line knots -> exactly linear curve with constant velocity.
        t = np.arange(6) * 0.1
        x = (1.5 * t + 0.3)[:, None]
        sp = UniformHermite.from_knots(0.0, 0.1, x)
        ts = np.linspace(0.0, 0.5, 101)
        assert np.allclose(sp.eval_many(ts)[:, 0], 1.5 * ts + 0.3, atol=1e-12)
        assert np.allclose(sp.deriv_many(ts)[:, 0], 1.5, atol=1e-12)

    def test_c1_continuity_at_knots(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(10, 2))
        sp = UniformHermite.from_knots(0.0, 0.05, x)
        eps = 1e-9
        for k in range(1, 9):
            t = 0.05 * k
            assert np.allclose(sp.eval(t - eps), sp.eval(t + eps), atol=1e-6)
            assert np.allclose(sp.deriv(t - eps), sp.deriv(t + eps), atol=1e-4)

    def test_derivative_matches_finite_difference(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(7, 2))
        sp = UniformHermite.from_knots(0.0, 0.2, x)
        for t in np.linspace(0.01, 1.19, 25):
            fd = (sp.eval(t + 1e-7) - sp.eval(t - 1e-7)) / 2e-7
            assert np.allclose(sp.deriv(t), fd, atol=1e-5)

    def test_eval_many_matches_scalar(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 4))
        sp = UniformHermite.from_knots(1.0, 0.1, x)
        ts = rng.uniform(1.0, 1.5, size=40)
        many = sp.eval_many(ts)
        for i, t in enumerate(ts):
            assert np.allclose(many[i], sp.eval(t), atol=1e-14)


class TestVelocityControlValues:
    def test_hull_bounds_dense_velocity(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(12, 3))
        h = 0.1
        v = central_tangents(x, h)
        ctrl = velocity_control_values(x, v, h)
        bound = np.abs(ctrl).max(axis=(0, 1))
        sp = UniformHermite(0.0, h, hermite_coeffs(x, v, h))
        ts = np.linspace(0.0, sp.t_end, 4001)
        dense = np.abs(sp.deriv_many(ts)).max(axis=0)
        assert np.all(dense <= bound + 1e-9)
        assert np.allclose(sp.max_abs_velocity(), bound, atol=1e-9)


class TestSelectTangents:
    def test_respects_bound_densely(self):
        rng = np.random.default_rng(5)
        h = 0.1
        v_max = 0.5
        # Steps within v_max*h/3 guarantee a feasible tangent assignment.
        steps = rng.uniform(-v_max * h / 3, v_max * h / 3, size=(30, 2))
        x = np.concatenate([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
        v, ok = select_tangents(x, h, np.full(2, v_max))
        assert ok.all()
        sp = UniformHermite(0.0, h, hermite_coeffs(x, v, h))
        ts = np.linspace(0.0, sp.t_end, 30 * 200 + 1)
        assert np.abs(sp.deriv_many(ts)).max() <= v_max + 1e-9

    def test_saturated_ramp_to_plateau_feasible(self):
        # Ramp at exactly the limit, then hold: requires ramp tangents at the
        # bound and is still feasible.
        h, v_max = 0.1, 1.0
        ramp = np.arange(6) * v_max * h
        x = np.concatenate([ramp, np.full(5, ramp[-1])])[:, None]
        v, ok = select_tangents(x, h, np.array([v_max]))
        assert ok.all()
        sp = UniformHermite(0.0, h, hermite_coeffs(x, v, h))
        ts = np.linspace(0.0, sp.t_end, 5001)
        assert np.abs(sp.deriv_many(ts)).max() <= v_max + 1e-9
        # All knots still interpolated exactly.
        for k, xk in enumerate(x[:, 0]):
            assert sp.eval(k * h)[0] == pytest.approx(xk, abs=1e-8)

    def test_zigzag_at_limit_is_infeasible(self):
        # Alternating saturated steps admit no C1 interpolant within bound.
        h, v_max = 0.1, 1.0
        x = np.array([0.0, v_max * h, 0.0, v_max * h, 0.0])[:, None]
        _, ok = select_tangents(x, h, np.array([v_max]))
        assert not ok.all()

    def test_pinned_start_velocity(self):
        rng = np.random.default_rng(6)
        h, v_max = 0.1, 0.8
        steps = rng.uniform(-v_max * h / 3, v_max * h / 3, size=(15, 1))
        steps[0] = 0.6 * v_max * h  # first secant consistent with the pin
        x = np.concatenate([np.zeros((1, 1)), np.cumsum(steps, axis=0)])
        v0 = np.array([0.6 * v_max])
        v, ok = select_tangents(x, h, np.array([v_max]), v0=v0)
        assert ok.all()
        assert v[0, 0] == pytest.approx(0.6 * v_max, abs=1e-9)

    def test_straight_line_keeps_exact_slope(self):
        h, v_max = 0.1, 1.0
        x = (np.arange(10) * 0.8 * v_max * h)[:, None]
        v, ok = select_tangents(x, h, np.array([v_max]))
        assert ok.all()
        assert np.allclose(v[:, 0], 0.8 * v_max, atol=1e-8)
