"""Whole-body serial kinematics: mobile base, torso, two arms and a head.

The model is a tree with a shared trunk: every end-effector branch runs
base -> torso -> (arm_left | arm_right | head). The planar base is modeled as
two prismatic joints (x, y) plus one yaw revolute at the chain root so the
same FK and noise machinery covers the omnidirectional base.

Joint k contributes origin_k * motion_k(q_k), where origin is a fixed Pose
and motion is a rotation about (or translation along) the joint axis. Each
branch may append a fixed tip offset after its last joint.

Model files are key-value text (configparser syntax): one ``[joint NAME]``
section per joint in chain order with ``segment``, ``type`` (revolute |
prismatic), ``axis`` (3 floats) and ``offset`` (6 floats: translation then
rotation vector), plus optional ``[tip SEGMENT]`` sections.
"""

from __future__ import annotations

import configparser
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .pose_math import Pose, compose, so3_exp, so3_exp_batch, so3_log

SEGMENTS = ("base", "torso", "arm_left", "arm_right", "head")
EE_BRANCH_SEGMENTS = {
    "left": ("base", "torso", "arm_left"),
    "right": ("base", "torso", "arm_right"),
    "head": ("base", "torso", "head"),
}


class JointType(enum.Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


@dataclass(frozen=True)
class Joint:
    name: str
    jtype: JointType
    axis: np.ndarray
    origin: Pose
    segment: str

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        norm = float(np.linalg.norm(axis))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"joint {self.name}: axis must be a unit vector")
        object.__setattr__(self, "axis", axis / norm)
        if self.segment not in SEGMENTS:
            raise ValueError(f"joint {self.name}: unknown segment {self.segment!r}")


@dataclass(frozen=True)
class ChainModel:
    """Immutable joint list in chain order plus per-branch tip offsets."""

    joints: tuple
    tips: dict = field(default_factory=dict)
    name: str = "chain"

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "tips", dict(self.tips))

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def joint_indices(self, segments) -> list[int]:
        wanted = set(segments)
        return [i for i, j in enumerate(self.joints) if j.segment in wanted]

    def branch(self, ee: str) -> list[int]:
        if ee not in EE_BRANCH_SEGMENTS:
            raise ValueError(f"unknown end-effector selector {ee!r}")
        return self.joint_indices(EE_BRANCH_SEGMENTS[ee])

    def tip(self, ee: str) -> Pose:
        seg = EE_BRANCH_SEGMENTS[ee][-1]
        return self.tips.get(seg, Pose())


def _check_q(model: ChainModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).ravel()
    if q.size != model.n_joints:
        raise ValueError(f"expected {model.n_joints} joint values, got {q.size}")
    return q


def _joint_motion(joint: Joint, qv: float) -> Pose:
    if joint.jtype is JointType.PRISMATIC:
        return Pose(joint.axis * qv, np.eye(3))
    return Pose(np.zeros(3), so3_exp(joint.axis * qv))


def fk(model: ChainModel, q, ee: str = "right") -> Pose:
    """World pose of the selected end-effector."""
    q = _check_q(model, q)
    t = Pose()
    for idx in model.branch(ee):
        joint = model.joints[idx]
        t = compose(t, compose(joint.origin, _joint_motion(joint, q[idx])))
    return compose(t, model.tip(ee))


def joint_world_frames(model: ChainModel, q, ee: str = "right") -> list[Pose]:
    """World pose of each branch joint's moving frame, in branch order."""
    q = _check_q(model, q)
    t = Pose()
    out = []
    for idx in model.branch(ee):
        joint = model.joints[idx]
        t = compose(t, compose(joint.origin, _joint_motion(joint, q[idx])))
        out.append(t)
    return out


def fk_batch(model: ChainModel, Q: np.ndarray, ee: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Vectorized FK over a (B, n) batch; returns positions (B, 3) and
    rotations (B, 3, 3)."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[1] != model.n_joints:
        raise ValueError(f"expected {model.n_joints} joint columns, got {Q.shape[1]}")
    b = Q.shape[0]
    rot = np.broadcast_to(np.eye(3), (b, 3, 3)).copy()
    pos = np.zeros((b, 3))
    for idx in model.branch(ee):
        joint = model.joints[idx]
        pos = pos + rot @ joint.origin.p
        rot = rot @ joint.origin.r
        qv = Q[:, idx]
        if joint.jtype is JointType.PRISMATIC:
            pos = pos + np.einsum("bij,j->bi", rot, joint.axis) * qv[:, None]
        else:
            rot = rot @ so3_exp_batch(np.outer(qv, joint.axis))
    tip = model.tip(ee)
    pos = pos + np.einsum("bij,j->bi", rot, tip.p)
    rot = rot @ tip.r
    return pos, rot


def numeric_jacobian(model: ChainModel, q, ee: str = "right", step: float = 1e-6) -> np.ndarray:
    """Central-difference geometric Jacobian, 6 x n over all model joints.

    Rows 0-2: world position. Rows 3-5: rotation log in the local frame,
    d/dq so3_log(R0^T R(q)). Columns of joints outside the branch are zero.
    """
    q = _check_q(model, q).copy()
    base = fk(model, q, ee)
    J = np.zeros((6, model.n_joints))
    for idx in model.branch(ee):
        q[idx] += step
        hi = fk(model, q, ee)
        q[idx] -= 2.0 * step
        lo = fk(model, q, ee)
        q[idx] += step
        J[:3, idx] = (hi.p - lo.p) / (2.0 * step)
        J[3:, idx] = (so3_log(base.r.T @ hi.r) - so3_log(base.r.T @ lo.r)) / (2.0 * step)
    return J


def dls_ik_step(model: ChainModel, q, ee: str, target: Pose, damping: float) -> np.ndarray:
    """One damped-least-squares step toward the target pose.

    q' = q + J^T (J J^T + damping^2 I)^{-1} e with the 6-dim error twist
    e = (p_t - p, so3_log(R^T R_t)); bounded even at singular stretches.
    """
    if damping <= 0.0:
        raise ValueError("damping must be positive")
    q = _check_q(model, q).copy()
    cur = fk(model, q, ee)
    err = np.concatenate([target.p - cur.p, so3_log(cur.r.T @ target.r)])
    J = numeric_jacobian(model, q, ee)
    gram = J @ J.T + (damping ** 2) * np.eye(6)
    return q + J.T @ np.linalg.solve(gram, err)


def error_propagation_experiment(
    model: ChainModel,
    q_traj: np.ndarray,
    sigma: float,
    scope,
    trials: int,
    seed: int,
    ee: str = "right",
) -> float:
    """Monte-Carlo RMS end-effector position error under joint noise.

    Independent zero-mean Gaussian noise (std ``sigma``) is applied to the
    scoped joints at every trajectory waypoint; per-trial noise streams derive
    from (seed, trial index), so scopes compared under one seed are paired.
    An empty scope returns exactly 0.
    """
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    if trials < 1:
        raise ValueError("need at least one trial")
    scope = sorted(set(int(i) for i in scope))
    if not scope:
        return 0.0
    if scope[0] < 0 or scope[-1] >= model.n_joints:
        raise ValueError("scope indices out of range")

    q_traj = np.atleast_2d(np.asarray(q_traj, dtype=float))
    n_way, n_joints = q_traj.shape
    if n_joints != model.n_joints:
        raise ValueError("trajectory width must match the model")

    mask = np.zeros(n_joints)
    mask[scope] = 1.0
    noises = np.stack(
        [
            np.random.default_rng([int(seed), t]).normal(size=(n_way, n_joints))
            for t in range(trials)
        ]
    )
    perturbed = q_traj[None] + sigma * noises * mask
    clean_pos, _ = fk_batch(model, q_traj, ee)
    noisy_pos, _ = fk_batch(model, perturbed.reshape(-1, n_joints), ee)
    diff = noisy_pos.reshape(trials, n_way, 3) - clean_pos[None]
    return float(np.sqrt(np.mean(np.sum(diff ** 2, axis=-1))))


# --------------------------------------------------------------------------
# Model text format


def parse_model_text(text: str, name: str = "chain") -> ChainModel:
    cp = configparser.ConfigParser()
    cp.read_file(io.StringIO(text))
    joints = []
    tips = {}
    for section in cp.sections():
        if section.startswith("joint "):
            jname = section.split(None, 1)[1]
            entry = cp[section]
            for key in ("segment", "type", "axis", "offset"):
                if key not in entry:
                    raise ValueError(f"joint {jname}: missing key {key!r}")
            axis = [float(v) for v in entry["axis"].split()]
            off = [float(v) for v in entry["offset"].split()]
            if len(off) != 6:
                raise ValueError(f"joint {jname}: offset needs 6 values")
            joints.append(
                Joint(
                    name=jname,
                    jtype=JointType(entry["type"].strip()),
                    axis=axis,
                    origin=Pose(off[:3], so3_exp(off[3:])),
                    segment=entry["segment"].strip(),
                )
            )
        elif section.startswith("tip "):
            seg = section.split(None, 1)[1]
            off = [float(v) for v in cp[section]["offset"].split()]
            if len(off) != 6:
                raise ValueError(f"tip {seg}: offset needs 6 values")
            tips[seg] = Pose(off[:3], so3_exp(off[3:]))
        elif section == "chain":
            name = cp[section].get("name", name)
        else:
            raise ValueError(f"unknown section [{section}]")
    if not joints:
        raise ValueError("model defines no joints")
    return ChainModel(joints=joints, tips=tips, name=name)


def load_model(path) -> ChainModel:
    with open(path) as fh:
        return parse_model_text(fh.read())


def format_model(model: ChainModel) -> str:
    def off(p: Pose) -> str:
        vals = list(p.p) + list(so3_log(p.r))
        return " ".join(format(v, ".12g") for v in vals)

    out = [f"[chain]\nname = {model.name}\n"]
    for j in model.joints:
        out.append(
            f"[joint {j.name}]\n"
            f"segment = {j.segment}\n"
            f"type = {j.jtype.value}\n"
            f"axis = {' '.join(format(v, '.12g') for v in j.axis)}\n"
            f"offset = {off(j.origin)}\n"
        )
    for seg, tip in model.tips.items():
        out.append(f"[tip {seg}]\noffset = {off(tip)}\n")
    return "\n".join(out)


# --------------------------------------------------------------------------
# Shipped models


def default_whole_body_model() -> ChainModel:
    """Human-scale dual-arm mobile manipulator: 3 base + 4 torso + 7 per arm
    + 2 head joints. Link lengths are an artifact choice in the 1.7 m class."""
    Z = np.zeros(3)
    joints = [
        Joint("base_x", JointType.PRISMATIC, [1, 0, 0], Pose(), "base"),
        Joint("base_y", JointType.PRISMATIC, [0, 1, 0], Pose(), "base"),
        Joint("base_yaw", JointType.REVOLUTE, [0, 0, 1], Pose(), "base"),
        Joint("torso_yaw", JointType.REVOLUTE, [0, 0, 1], Pose([0, 0, 0.30], np.eye(3)), "torso"),
        Joint("torso_hip", JointType.REVOLUTE, [0, 1, 0], Pose([0, 0, 0.20], np.eye(3)), "torso"),
        Joint("torso_knee", JointType.REVOLUTE, [0, 1, 0], Pose([0, 0, 0.35], np.eye(3)), "torso"),
        Joint("torso_waist", JointType.REVOLUTE, [0, 1, 0], Pose([0, 0, 0.35], np.eye(3)), "torso"),
    ]
    for side, sign in (("l", 1.0), ("r", -1.0)):
        seg = "arm_left" if side == "l" else "arm_right"
        joints += [
            Joint(f"sh{side}_pitch", JointType.REVOLUTE, [0, 1, 0], Pose([0, sign * 0.22, 0.25], np.eye(3)), seg),
            Joint(f"sh{side}_roll", JointType.REVOLUTE, [1, 0, 0], Pose(Z, np.eye(3)), seg),
            Joint(f"sh{side}_yaw", JointType.REVOLUTE, [0, 0, 1], Pose(Z, np.eye(3)), seg),
            Joint(f"el{side}_pitch", JointType.REVOLUTE, [0, 1, 0], Pose([0, 0, -0.28], np.eye(3)), seg),
            Joint(f"wr{side}_yaw", JointType.REVOLUTE, [0, 0, 1], Pose([0, 0, -0.25], np.eye(3)), seg),
            Joint(f"wr{side}_pitch", JointType.REVOLUTE, [0, 1, 0], Pose(Z, np.eye(3)), seg),
            Joint(f"wr{side}_roll", JointType.REVOLUTE, [1, 0, 0], Pose(Z, np.eye(3)), seg),
        ]
    joints += [
        Joint("head_pan", JointType.REVOLUTE, [0, 0, 1], Pose([0, 0, 0.25], np.eye(3)), "head"),
        Joint("head_tilt", JointType.REVOLUTE, [0, 1, 0], Pose(Z, np.eye(3)), "head"),
    ]
    tips = {
        "arm_left": Pose([0, 0, -0.15], np.eye(3)),
        "arm_right": Pose([0, 0, -0.15], np.eye(3)),
        "head": Pose([0.05, 0, 0.10], np.eye(3)),
    }
    return ChainModel(joints=joints, tips=tips, name="whole_body")


def planar_chain_model(link_lengths) -> ChainModel:
    """Planar test chain: revolute z joints with x-offsets, tip after the
    last link; assigned to arm_right so fk(..., ee='right') works."""
    joints = []
    prev = 0.0
    for k, length in enumerate(link_lengths):
        joints.append(
            Joint(
                f"j{k + 1}",
                JointType.REVOLUTE,
                [0, 0, 1],
                Pose([prev, 0, 0], np.eye(3)),
                "arm_right",
            )
        )
        prev = float(length)
    tips = {"arm_right": Pose([prev, 0, 0], np.eye(3))}
    return ChainModel(joints=joints, tips=tips, name=f"planar_{len(joints)}link")


def default_joint_trajectory(model: ChainModel, n_waypoints: int = 20) -> np.ndarray:
    """Deterministic sinusoidal reference sweep used by the propagation study."""
    t = np.linspace(0.0, 2.0 * np.pi, n_waypoints)
    amp = np.empty(model.n_joints)
    phase = np.empty(model.n_joints)
    for i, joint in enumerate(model.joints):
        amp[i] = {"base": 0.25, "torso": 0.35, "arm_left": 0.5, "arm_right": 0.5, "head": 0.2}[
            joint.segment
        ]
        phase[i] = 0.37 * i
    return amp[None, :] * np.sin(t[:, None] + phase[None, :])
