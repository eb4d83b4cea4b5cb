"""SO(3)/SE(3) primitives: composition, inversion, exp/log maps, geodesic angles.

Rotations are plain 3x3 numpy arrays (row-major, world-from-local convention);
rigid transforms are :class:`Pose` values pairing a translation with a rotation.
All operations are pure and allocate fresh arrays, so values can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Orthonormality / determinant tolerance for a matrix to count as a rotation.
ROTATION_TOL = 1e-9

# Angle below which so3_exp/so3_log switch to Taylor series.
_SMALL_ANGLE = 1e-7

# Angle above which so3_log switches to the symmetric-part eigen branch.
_NEAR_PI = np.pi - 1e-4


def so3_hat(w) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector."""
    x, y, z = np.asarray(w, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_vee(m) -> np.ndarray:
    """Inverse of :func:`so3_hat` (averages the off-diagonal pairs)."""
    m = np.asarray(m, dtype=float)
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def so3_exp(w) -> np.ndarray:
    """Rodrigues formula: rotation matrix for rotation vector ``w`` (radians)."""
    w = np.asarray(w, dtype=float)
    th = float(np.linalg.norm(w))
    K = so3_hat(w)
    if th < _SMALL_ANGLE:
        # 2nd-order Taylor keeps orthonormality to machine precision here.
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(th) / th
    b = (1.0 - np.cos(th)) / (th * th)
    return np.eye(3) + a * K + b * (K @ K)


def so3_exp_batch(w: np.ndarray) -> np.ndarray:
    """Vectorized :func:`so3_exp` for an (..., 3) array of rotation vectors."""
    w = np.asarray(w, dtype=float)
    th = np.linalg.norm(w, axis=-1)
    K = np.zeros(w.shape[:-1] + (3, 3))
    K[..., 0, 1] = -w[..., 2]
    K[..., 0, 2] = w[..., 1]
    K[..., 1, 0] = w[..., 2]
    K[..., 1, 2] = -w[..., 0]
    K[..., 2, 0] = -w[..., 1]
    K[..., 2, 1] = w[..., 0]
    small = th < _SMALL_ANGLE
    th_safe = np.where(small, 1.0, th)
    a = np.where(small, 1.0 - th * th / 6.0, np.sin(th_safe) / th_safe)
    b = np.where(small, 0.5 - th * th / 24.0, (1.0 - np.cos(th_safe)) / (th_safe * th_safe))
    K2 = K @ K
    out = np.broadcast_to(np.eye(3), K.shape).copy()
    out += a[..., None, None] * K + b[..., None, None] * K2
    return out


def so3_log(r) -> np.ndarray:
    """Rotation vector of a rotation matrix; norm is the angle in [0, pi].

    Near pi the skew part degenerates, so the axis is recovered from the
    dominant eigenvector of the symmetric part instead; the result is always
    finite.
    """
    r = np.asarray(r, dtype=float)
    s = so3_vee(r)  # sin(theta) * axis
    sin_th = float(np.linalg.norm(s))
    cos_th = 0.5 * (np.trace(r) - 1.0)
    th = float(np.arctan2(sin_th, cos_th))
    if th < _SMALL_ANGLE:
        return s * (1.0 + th * th / 6.0)
    if th > _NEAR_PI:
        # Symmetric part is cos(th) I + (1 - cos(th)) nn^T; its dominant
        # eigenvector is the rotation axis.
        sym = 0.5 * (r + r.T)
        vals, vecs = np.linalg.eigh(sym)
        n = vecs[:, int(np.argmax(vals))]
        n = n / np.linalg.norm(n)
        if sin_th > 1e-12:
            if float(np.dot(n, s)) < 0.0:
                n = -n
        else:
            # At exactly pi both signs are valid; fix a canonical one.
            nz = np.nonzero(np.abs(n) > 1e-8)[0]
            if nz.size and n[nz[0]] < 0.0:
                n = -n
        return th * n
    return s * (th / sin_th)


def so3_log_batch(r: np.ndarray) -> np.ndarray:
    """Vectorized :func:`so3_log` for an (..., 3, 3) array of rotations."""
    r = np.asarray(r, dtype=float)
    s = 0.5 * np.stack(
        [
            r[..., 2, 1] - r[..., 1, 2],
            r[..., 0, 2] - r[..., 2, 0],
            r[..., 1, 0] - r[..., 0, 1],
        ],
        axis=-1,
    )
    sin_th = np.linalg.norm(s, axis=-1)
    cos_th = 0.5 * (np.trace(r, axis1=-2, axis2=-1) - 1.0)
    th = np.arctan2(sin_th, cos_th)
    small = th < _SMALL_ANGLE
    near_pi = th > _NEAR_PI
    sin_safe = np.where(small | near_pi, 1.0, sin_th)
    out = s * np.where(small, 1.0 + th * th / 6.0, th / sin_safe)[..., None]
    if np.any(near_pi):
        idx = np.argwhere(near_pi)
        for ix in idx:
            out[tuple(ix)] = so3_log(r[tuple(ix)])
    return out


def geodesic_angle(a, b) -> float:
    """Angle in [0, pi] of the relative rotation between two matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rel = a.T @ b
    sin_th = float(np.linalg.norm(so3_vee(rel)))
    cos_th = 0.5 * (float(np.trace(rel)) - 1.0)
    return float(np.arctan2(sin_th, cos_th))


def so3_right_jacobian(w) -> np.ndarray:
    """Right Jacobian J_r with exp(w + d) ~ exp(w) exp(J_r(w) d).

    Maps tangent-coordinate rates to body angular velocity for a curve
    R(t) = R_ref exp(w(t)).
    """
    w = np.asarray(w, dtype=float)
    th = float(np.linalg.norm(w))
    K = so3_hat(w)
    if th < _SMALL_ANGLE:
        return np.eye(3) - 0.5 * K + (K @ K) / 6.0
    c1 = (1.0 - np.cos(th)) / (th * th)
    c2 = (th - np.sin(th)) / (th ** 3)
    return np.eye(3) - c1 * K + c2 * (K @ K)


def rotation_defect(m) -> float:
    """Max of the orthonormality residual (Frobenius) and |det - 1|."""
    m = np.asarray(m, dtype=float)
    ortho = float(np.linalg.norm(m.T @ m - np.eye(3)))
    det = abs(float(np.linalg.det(m)) - 1.0)
    return max(ortho, det)


def is_rotation(m, tol: float = ROTATION_TOL) -> bool:
    return rotation_defect(m) <= tol


def project_rotation(m) -> np.ndarray:
    """Nearest rotation matrix (polar decomposition via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u = u.copy()
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def rotx(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def roty(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotz(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: ``p`` translation in meters, ``r`` a 3x3 rotation."""

    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3).copy())
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).reshape(3, 3).copy())

    def validate(self, tol: float = ROTATION_TOL) -> "Pose":
        if not np.all(np.isfinite(self.p)):
            raise ValueError("pose translation has non-finite entries")
        d = rotation_defect(self.r)
        if d > tol:
            raise ValueError(f"rotation defect {d:.3e} exceeds tolerance {tol:.1e}")
        return self

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.r
        m[:3, 3] = self.p
        return m

    @classmethod
    def from_matrix(cls, m) -> "Pose":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, 3], m[:3, :3])


@dataclass(frozen=True)
class Twist:
    """Spatial velocity: ``v`` m/s, ``w`` rad/s."""

    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3).copy())
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float).reshape(3).copy())
        if not (np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.w))):
            raise ValueError("twist entries must be finite")


def identity_pose() -> Pose:
    return Pose()


def compose(a: Pose, b: Pose) -> Pose:
    """a . b : apply b in a's frame (rotation a.r b.r, translation a.r b.p + a.p)."""
    return Pose(a.r @ b.p + a.p, a.r @ b.r)


def inverse(t: Pose) -> Pose:
    rt = t.r.T
    return Pose(-(rt @ t.p), rt)


def renormalize(t: Pose, tol: float = ROTATION_TOL) -> Pose:
    """Re-orthonormalize the rotation if drift from long chains exceeds tol."""
    if rotation_defect(t.r) > tol:
        return Pose(t.p, project_rotation(t.r))
    return t
