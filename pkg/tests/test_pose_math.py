import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from rtgsim.pose_math import (
    Pose,
    Twist,
    compose,
    geodesic_angle,
    identity_pose,
    inverse,
    is_rotation,
    project_rotation,
    rotation_defect,
    rotz,
    so3_exp,
    so3_exp_batch,
    so3_log,
    so3_log_batch,
    so3_right_jacobian,
)


def random_rotation(rng):
    w = rng.normal(size=3)
    w = w / np.linalg.norm(w) * rng.uniform(0.0, np.pi - 0.1)
    return so3_exp(w)


def random_pose(rng):
    return Pose(rng.normal(size=3), random_rotation(rng))


def compose_oracle(a: Pose, b: Pose) -> np.ndarray:
    # Independent check: plain 4x4 homogeneous matrix product.
    return a.matrix() @ b.matrix()


class TestCompose:
    def test_inverse_gives_identity(self):
        rng = np.random.default_rng(0)
        t = random_pose(rng)
        out = compose(t, inverse(t))
        assert np.allclose(out.p, 0.0, atol=1e-9)
        assert np.allclose(out.r, np.eye(3), atol=1e-9)

    def test_identity_element(self):
        rng = np.random.default_rng(1)
        t = random_pose(rng)
        out = compose(identity_pose(), t)
        assert np.allclose(out.p, t.p)
        assert np.allclose(out.r, t.r)

    def test_translation_rotates_into_frame(self):
        a = Pose([1.0, 0.0, 0.0], rotz(np.pi / 2))
        b = Pose([1.0, 0.0, 0.0], np.eye(3))
        out = compose(a, b)
        assert np.allclose(out.p, [1.0, 1.0, 0.0], atol=1e-12)
        assert np.allclose(out.r, rotz(np.pi / 2), atol=1e-12)

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b = random_pose(rng), random_pose(rng)
            assert np.allclose(compose(a, b).matrix(), compose_oracle(a, b), atol=1e-12)

    def test_associativity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b, c = (random_pose(rng) for _ in range(3))
            lhs = compose(compose(a, b), c)
            rhs = compose(a, compose(b, c))
            assert np.allclose(lhs.matrix(), rhs.matrix(), atol=1e-9)

    def test_closure(self):
        rng = np.random.default_rng(4)
        t = identity_pose()
        for _ in range(200):
            t = compose(t, random_pose(rng))
        assert rotation_defect(t.r) < 1e-9


class TestInverse:
    def test_identity(self):
        out = inverse(identity_pose())
        assert np.allclose(out.p, 0.0)
        assert np.allclose(out.r, np.eye(3))

    def test_pure_translation(self):
        out = inverse(Pose([1.0, 2.0, 3.0], np.eye(3)))
        assert np.allclose(out.p, [-1.0, -2.0, -3.0])

    def test_double_inverse_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            t = random_pose(rng)
            out = inverse(inverse(t))
            assert np.allclose(out.p, t.p, atol=1e-12)
            assert np.allclose(out.r, t.r, atol=1e-12)


class TestSo3ExpLog:
    def test_zero_maps_to_identity(self):
        assert np.allclose(so3_exp([0.0, 0.0, 0.0]), np.eye(3))
        assert np.allclose(so3_log(np.eye(3)), 0.0)

    def test_quarter_turn_about_z(self):
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(so3_exp([0.0, 0.0, np.pi / 2]), expected, atol=1e-12)
        assert np.allclose(so3_log(rotz(np.pi / 2)), [0.0, 0.0, np.pi / 2], atol=1e-12)

    def test_round_trip_1000_random(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            w = rng.normal(size=3)
            w = w / np.linalg.norm(w) * rng.uniform(0.0, np.pi - 0.1)
            assert np.allclose(so3_log(so3_exp(w)), w, atol=1e-9)

    def test_exp_angle_equals_norm(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            w = rng.normal(size=3)
            w = w / np.linalg.norm(w) * rng.uniform(1e-3, np.pi)
            r = so3_exp(w)
            assert is_rotation(r)
            assert geodesic_angle(np.eye(3), r) == pytest.approx(np.linalg.norm(w), abs=1e-9)

    def test_log_near_pi_matches_quaternion_oracle(self):
        # High-precision oracle: scipy's quaternion-based rotvec.
        angle = np.pi - 1e-6
        r = so3_exp([angle, 0.0, 0.0])
        w = so3_log(r)
        assert np.all(np.isfinite(w))
        assert abs(np.linalg.norm(w) - angle) < 1e-6
        oracle = ScipyRotation.from_matrix(r).as_rotvec()
        assert np.allclose(w, oracle, atol=1e-6)

    def test_log_near_pi_random_axes(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = np.pi - 10 ** rng.uniform(-9, -2)
            r = so3_exp(axis * angle)
            w = so3_log(r)
            assert np.all(np.isfinite(w))
            assert np.linalg.norm(w) <= np.pi + 1e-12
            oracle = ScipyRotation.from_matrix(r).as_rotvec()
            assert np.allclose(w, oracle, atol=1e-6)

    def test_log_at_exactly_pi_is_finite_and_valid(self):
        for axis in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0.6, 0, 0.8])):
            r = so3_exp(axis * np.pi)
            w = so3_log(r)
            assert np.all(np.isfinite(w))
            assert np.allclose(so3_exp(w), r, atol=1e-9)

    def test_batch_variants_match_scalar(self):
        rng = np.random.default_rng(9)
        ws = rng.normal(size=(40, 3))
        ws *= (rng.uniform(0, np.pi - 0.05, size=40) / np.linalg.norm(ws, axis=1))[:, None]
        rs = so3_exp_batch(ws)
        for i in range(40):
            assert np.allclose(rs[i], so3_exp(ws[i]), atol=1e-12)
        back = so3_log_batch(rs)
        assert np.allclose(back, ws, atol=1e-9)


class TestGeodesicAngle:
    def test_zero_iff_equal(self):
        rng = np.random.default_rng(10)
        r = random_rotation(rng)
        assert geodesic_angle(r, r) == 0.0

    def test_quarter_turn(self):
        assert geodesic_angle(np.eye(3), rotz(np.pi / 2)) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            a, b = random_rotation(rng), random_rotation(rng)
            assert geodesic_angle(a, b) == pytest.approx(geodesic_angle(b, a), abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            a, b = random_rotation(rng), random_rotation(rng)
            ang = geodesic_angle(a, b)
            assert 0.0 <= ang <= np.pi + 1e-12


class TestRightJacobian:
    def test_maps_tangent_rate_to_body_rate(self):
        # Finite-difference oracle on R(t) = exp(w + t*dw).
        rng = np.random.default_rng(13)
        for _ in range(20):
            w = rng.normal(size=3) * 0.8
            dw = rng.normal(size=3)
            eps = 1e-7
            r0 = so3_exp(w)
            r1 = so3_exp(w + eps * dw)
            omega_fd = so3_log(r0.T @ r1) / eps
            assert np.allclose(so3_right_jacobian(w) @ dw, omega_fd, atol=1e-5)

    def test_identity_at_zero(self):
        assert np.allclose(so3_right_jacobian([0.0, 0.0, 0.0]), np.eye(3))


class TestValidation:
    def test_project_rotation_restores_orthonormality(self):
        rng = np.random.default_rng(14)
        r = random_rotation(rng) + rng.normal(size=(3, 3)) * 1e-4
        fixed = project_rotation(r)
        assert is_rotation(fixed, tol=1e-12)

    def test_pose_validate_rejects_bad_rotation(self):
        with pytest.raises(ValueError):
            Pose(np.zeros(3), np.eye(3) * 1.5).validate()

    def test_twist_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Twist([np.nan, 0, 0], [0, 0, 0])
