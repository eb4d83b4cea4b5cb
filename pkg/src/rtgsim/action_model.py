"""Whole-body actions, action chunks, trajectory representations and metrics.

The whole-body action concatenates base (x, y, yaw), a 4-joint torso, both
end-effector poses, both grippers and a 2-joint head. Flattened it spans 23
channels, with each end-effector orientation occupying a 3-channel rotation-
log triple.

Three trajectory representations are supported and convert into each other:

* ``absolute_world`` - poses in the world frame;
* ``robot_delta``    - per-step increments expressed in the robot base frame
                       (translation rotated into the base frame, rotation
                       increment conjugated by the base orientation);
* ``egocentric_delta`` - per-step increments in the end-effector's own frame,
                       right-multiplied: T_{k+1} = T_k * delta_k.

Scalar channels (base, torso, grippers, head) use plain differences for both
delta representations; yaw differences are wrapped to (-pi, pi].

The trajectory CSV format (one row per frame) is:
    t, base_x, base_y, base_yaw, torso_1..torso_4,
    eeL_px, eeL_py, eeL_pz, eeL_r11..eeL_r33 (row-major), gripL,
    eeR_px, eeR_py, eeR_pz, eeR_r11..eeR_r33, gripR, head_1, head_2
with a mandatory header row.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .pose_math import (
    Pose,
    compose,
    geodesic_angle,
    inverse,
    project_rotation,
    rotation_defect,
    rotz,
    so3_exp,
    so3_exp_batch,
    so3_log,
    so3_log_batch,
)
from .spline import UniformHermite

N_CHANNELS = 23

CHANNEL_NAMES = (
    "base_x", "base_y", "base_yaw",
    "torso_1", "torso_2", "torso_3", "torso_4",
    "eeL_px", "eeL_py", "eeL_pz", "eeL_rx", "eeL_ry", "eeL_rz", "gripL",
    "eeR_px", "eeR_py", "eeR_pz", "eeR_rx", "eeR_ry", "eeR_rz", "gripR",
    "head_1", "head_2",
)

BASE = slice(0, 3)
TORSO = slice(3, 7)
EEL_POS = slice(7, 10)
EEL_ROT = slice(10, 13)
GRIP_L = 13
EER_POS = slice(14, 17)
EER_ROT = slice(17, 20)
GRIP_R = 20
HEAD = slice(21, 23)

# Orientation triples in the flat layout, and everything else.
ROT_TRIPLES = ((10, 11, 12), (17, 18, 19))
SCALAR_IDXS = tuple(i for i in range(N_CHANNELS) if i not in (10, 11, 12, 17, 18, 19))

CHANNEL_GROUPS = {
    "base": (0, 1, 2),
    "base_xy": (0, 1),
    "torso": (3, 4, 5, 6),
    "ee_pos": (7, 8, 9, 14, 15, 16),
    "ee_rot": (10, 11, 12, 17, 18, 19),
    "grip": (13, 20),
    "head": (21, 22),
}


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    out = np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


class ReprTag(enum.Enum):
    ABSOLUTE_WORLD = "absolute_world"
    ROBOT_DELTA = "robot_delta"
    EGOCENTRIC_DELTA = "egocentric_delta"

    @classmethod
    def parse(cls, text: str) -> "ReprTag":
        for tag in cls:
            if tag.value == text:
                return tag
        raise ValueError(f"unknown representation tag {text!r}")


@dataclass(frozen=True)
class WholeBodyAction:
    """One timestamped command frame. In delta representations the fields hold
    per-step increments, so the gripper range check only applies to absolute
    frames."""

    base: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torso: np.ndarray = field(default_factory=lambda: np.zeros(4))
    ee_left: Pose = field(default_factory=Pose)
    ee_right: Pose = field(default_factory=Pose)
    grip_left: float = 0.0
    grip_right: float = 0.0
    head: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float).reshape(3).copy())
        object.__setattr__(self, "torso", np.asarray(self.torso, dtype=float).reshape(4).copy())
        object.__setattr__(self, "head", np.asarray(self.head, dtype=float).reshape(2).copy())
        object.__setattr__(self, "grip_left", float(self.grip_left))
        object.__setattr__(self, "grip_right", float(self.grip_right))

    def validate(self, absolute: bool = True) -> "WholeBodyAction":
        for name in ("base", "torso", "head"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        self.ee_left.validate()
        self.ee_right.validate()
        if absolute:
            for grip in (self.grip_left, self.grip_right):
                if not 0.0 <= grip <= 1.0:
                    raise ValueError(f"gripper value {grip} outside [0, 1]")
        return self


@dataclass(frozen=True)
class ActionChunk:
    """Uniformly sampled action sequence anchored at observation time t_obs;
    frame i sits at local time i*dt (absolute) or covers the step ending at
    (i+1)*dt (delta representations)."""

    t_obs: float
    dt: float
    frames: tuple
    repr_tag: ReprTag = ReprTag.ABSOLUTE_WORLD

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.dt <= 0.0:
            raise ValueError("chunk dt must be positive")
        if not self.frames:
            raise ValueError("chunk must contain at least one frame")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def duration(self) -> float:
        return (len(self.frames) - 1) * self.dt

    def local_times(self) -> np.ndarray:
        return np.arange(len(self.frames)) * self.dt

    def validate(self) -> "ActionChunk":
        absolute = self.repr_tag is ReprTag.ABSOLUTE_WORLD
        for f in self.frames:
            f.validate(absolute=absolute)
        return self


def encode_action(a: WholeBodyAction) -> np.ndarray:
    """Flatten to the 23-channel vector (orientations as rotation logs)."""
    v = np.empty(N_CHANNELS)
    v[BASE] = a.base
    v[TORSO] = a.torso
    v[EEL_POS] = a.ee_left.p
    v[EEL_ROT] = so3_log(a.ee_left.r)
    v[GRIP_L] = a.grip_left
    v[EER_POS] = a.ee_right.p
    v[EER_ROT] = so3_log(a.ee_right.r)
    v[GRIP_R] = a.grip_right
    v[HEAD] = a.head
    return v


def decode_action(v) -> WholeBodyAction:
    v = np.asarray(v, dtype=float).reshape(N_CHANNELS)
    return WholeBodyAction(
        base=v[BASE],
        torso=v[TORSO],
        ee_left=Pose(v[EEL_POS], so3_exp(v[EEL_ROT])),
        ee_right=Pose(v[EER_POS], so3_exp(v[EER_ROT])),
        grip_left=v[GRIP_L],
        grip_right=v[GRIP_R],
        head=v[HEAD],
    )


def encode_frames(frames) -> np.ndarray:
    return np.stack([encode_action(f) for f in frames])


def frame_rotations(frames) -> np.ndarray:
    """(T, 2, 3, 3) array of the left/right end-effector rotations."""
    return np.stack([np.stack([f.ee_left.r, f.ee_right.r]) for f in frames])


def base_pose(frame: WholeBodyAction) -> Pose:
    """Planar base pose as a rigid transform (z up)."""
    x, y, yaw = frame.base
    return Pose([x, y, 0.0], rotz(yaw))


# --------------------------------------------------------------------------
# Pose-sequence representation conversions


def to_egocentric_delta(poses) -> list[Pose]:
    """delta_k = T_k^{-1} T_{k+1}, expressed in the end-effector's own frame."""
    poses = list(poses)
    if len(poses) < 2:
        raise ValueError("need at least 2 poses to form deltas")
    return [compose(inverse(poses[k]), poses[k + 1]) for k in range(len(poses) - 1)]


def apply_egocentric_delta(start: Pose, deltas) -> list[Pose]:
    out = [start]
    for d in deltas:
        out.append(compose(out[-1], d))
    return out


def _base_rot(base_poses, k: int, anchor: str) -> np.ndarray:
    idx = 0 if anchor == "initial" else k
    return base_poses[idx].r


def to_robot_delta(poses, base_poses, anchor: str = "instantaneous") -> list[Pose]:
    """Per-step increments relative to the robot base frame.

    Translation: R_b^T (p_{k+1} - p_k). Rotation: R_b^T R_{k+1} R_k^T R_b.
    ``anchor`` picks the instantaneous base (default) or the initial one.
    """
    poses = list(poses)
    base_poses = list(base_poses)
    if len(poses) < 2:
        raise ValueError("need at least 2 poses to form deltas")
    if len(base_poses) != len(poses):
        raise ValueError("base trajectory length must match the EE trajectory")
    out = []
    for k in range(len(poses) - 1):
        rb = _base_rot(base_poses, k, anchor)
        dp = rb.T @ (poses[k + 1].p - poses[k].p)
        dr = rb.T @ poses[k + 1].r @ poses[k].r.T @ rb
        out.append(Pose(dp, dr))
    return out


def apply_robot_delta(start: Pose, deltas, base_poses, anchor: str = "instantaneous") -> list[Pose]:
    deltas = list(deltas)
    base_poses = list(base_poses)
    if len(base_poses) < len(deltas):
        raise ValueError("base trajectory too short for the delta sequence")
    out = [start]
    for k, d in enumerate(deltas):
        rb = _base_rot(base_poses, k, anchor)
        p = out[-1].p + rb @ d.p
        r = rb @ d.r @ rb.T @ out[-1].r
        out.append(Pose(p, r))
    return out


# --------------------------------------------------------------------------
# Whole-body chunk conversions


def absolute_frames_to_repr(frames, tag: ReprTag, anchor: str = "instantaneous"):
    """Convert L+1 absolute frames into L delta frames (or pass through)."""
    frames = list(frames)
    if tag is ReprTag.ABSOLUTE_WORLD:
        return frames
    if len(frames) < 2:
        raise ValueError("need at least 2 absolute frames to form deltas")
    base_poses = [base_pose(f) for f in frames]
    out = []
    for k in range(len(frames) - 1):
        a, b = frames[k], frames[k + 1]
        dbase = b.base - a.base
        dbase[2] = wrap_angle(dbase[2])
        if tag is ReprTag.EGOCENTRIC_DELTA:
            dl = compose(inverse(a.ee_left), b.ee_left)
            dr = compose(inverse(a.ee_right), b.ee_right)
        else:
            rb = _base_rot(base_poses, k, anchor)
            dl = Pose(rb.T @ (b.ee_left.p - a.ee_left.p), rb.T @ b.ee_left.r @ a.ee_left.r.T @ rb)
            dr = Pose(rb.T @ (b.ee_right.p - a.ee_right.p), rb.T @ b.ee_right.r @ a.ee_right.r.T @ rb)
        out.append(
            WholeBodyAction(
                base=dbase,
                torso=b.torso - a.torso,
                ee_left=dl,
                ee_right=dr,
                grip_left=b.grip_left - a.grip_left,
                grip_right=b.grip_right - a.grip_right,
                head=b.head - a.head,
            )
        )
    return out


def repr_frames_to_absolute(anchor_frame: WholeBodyAction, frames, tag: ReprTag, anchor: str = "instantaneous"):
    """Reconstruct L absolute frames following ``anchor_frame`` from L deltas."""
    frames = list(frames)
    if tag is ReprTag.ABSOLUTE_WORLD:
        return frames
    out = []
    cur = anchor_frame
    for d in frames:
        base = cur.base + d.base
        if tag is ReprTag.EGOCENTRIC_DELTA:
            eel = compose(cur.ee_left, d.ee_left)
            eer = compose(cur.ee_right, d.ee_right)
        else:
            rb = base_pose(cur if anchor == "instantaneous" else anchor_frame).r
            eel = Pose(cur.ee_left.p + rb @ d.ee_left.p, rb @ d.ee_left.r @ rb.T @ cur.ee_left.r)
            eer = Pose(cur.ee_right.p + rb @ d.ee_right.p, rb @ d.ee_right.r @ rb.T @ cur.ee_right.r)
        cur = WholeBodyAction(
            base=base,
            torso=cur.torso + d.torso,
            ee_left=eel,
            ee_right=eer,
            grip_left=cur.grip_left + d.grip_left,
            grip_right=cur.grip_right + d.grip_right,
            head=cur.head + d.head,
        )
        out.append(cur)
    return out


# --------------------------------------------------------------------------
# Metrics

STAT_CHANNEL_NAMES = (
    "base_x", "base_y", "base_yaw",
    "torso_1", "torso_2", "torso_3", "torso_4",
    "eeL_px", "eeL_py", "eeL_pz", "eeL_rot", "gripL",
    "eeR_px", "eeR_py", "eeR_pz", "eeR_rot", "gripR",
    "head_1", "head_2",
)


@dataclass
class TrajectoryStats:
    """Per-channel smoothness statistics; orientation channels collapse to one
    geodesic-angle channel per end-effector. ``mean_boundary_change`` is None
    when no boundaries were given (absent, not zero)."""

    channel_names: tuple
    mean_step_change: np.ndarray
    mean_boundary_change: np.ndarray | None
    variance: np.ndarray

    def aggregate(self, weights=None) -> dict:
        w = np.ones(len(self.channel_names)) if weights is None else np.asarray(weights, float)
        w = w / w.sum()
        out = {
            "mean_step_change": float(self.mean_step_change @ w),
            "variance": float(self.variance @ w),
        }
        if self.mean_boundary_change is not None:
            out["mean_boundary_change"] = float(self.mean_boundary_change @ w)
        return out


def _stat_channel_series(frames) -> np.ndarray:
    """Per-frame values on the stat channels; orientation channels hold the
    geodesic angle to the first frame (used for the variance statistic)."""
    flat = encode_frames(frames)
    rots = frame_rotations(frames)
    cols = []
    for name in STAT_CHANNEL_NAMES:
        if name == "eeL_rot":
            cols.append([geodesic_angle(rots[0, 0], r) for r in rots[:, 0]])
        elif name == "eeR_rot":
            cols.append([geodesic_angle(rots[0, 1], r) for r in rots[:, 1]])
        else:
            cols.append(flat[:, CHANNEL_NAMES.index(name)])
    return np.column_stack(cols)


def _stat_steps(frames) -> np.ndarray:
    """(T-1, 19) per-step absolute changes on the stat channels."""
    flat = encode_frames(frames)
    rots = frame_rotations(frames)
    steps = []
    for k in range(len(frames) - 1):
        row = []
        for name in STAT_CHANNEL_NAMES:
            if name == "eeL_rot":
                row.append(geodesic_angle(rots[k, 0], rots[k + 1, 0]))
            elif name == "eeR_rot":
                row.append(geodesic_angle(rots[k, 1], rots[k + 1, 1]))
            elif name == "base_yaw":
                row.append(abs(float(wrap_angle(flat[k + 1, 2] - flat[k, 2]))))
            else:
                idx = CHANNEL_NAMES.index(name)
                row.append(abs(flat[k + 1, idx] - flat[k, idx]))
        steps.append(row)
    return np.asarray(steps)


def trajectory_stats(frames, chunk_boundaries=()) -> TrajectoryStats:
    """Smoothness statistics of a whole-body trajectory.

    ``chunk_boundaries`` holds frame indices that *begin* a new chunk; the
    step between frames b-1 and b is a boundary step.
    """
    frames = list(frames)
    if len(frames) < 2:
        raise ValueError("need at least 2 frames")
    boundaries = sorted(set(int(b) for b in chunk_boundaries))
    if boundaries and (boundaries[0] < 1 or boundaries[-1] > len(frames) - 1):
        raise ValueError("boundary indices must lie in [1, len(frames)-1]")
    steps = _stat_steps(frames)
    series = _stat_channel_series(frames)
    mean_boundary = None
    if boundaries:
        mean_boundary = steps[[b - 1 for b in boundaries]].mean(axis=0)
    return TrajectoryStats(
        channel_names=STAT_CHANNEL_NAMES,
        mean_step_change=steps.mean(axis=0),
        mean_boundary_change=mean_boundary,
        variance=series.var(axis=0),
    )


def step_change_stats(values: np.ndarray, boundaries=()) -> tuple[np.ndarray, np.ndarray | None]:
    """Array-level step statistic: per-channel mean |diff|, plus the same
    restricted to steps that straddle a boundary index."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    steps = np.abs(np.diff(values, axis=0))
    boundaries = sorted(set(int(b) for b in boundaries))
    mean_boundary = None
    if boundaries:
        rows = [b - 1 for b in boundaries if 1 <= b <= steps.shape[0]]
        if rows:
            mean_boundary = steps[rows].mean(axis=0)
    return steps.mean(axis=0), mean_boundary


@dataclass
class CompactnessSummary:
    tag: ReprTag
    per_step_variance: np.ndarray
    mean_variance: float


def resample_poses(poses, n: int) -> list[Pose]:
    """Resample a pose sequence to n samples (linear translation, piecewise
    geodesic rotation on the uniform parameter)."""
    poses = list(poses)
    if n < 2 or len(poses) < 2:
        raise ValueError("need at least 2 samples on both sides")
    src = np.linspace(0.0, 1.0, len(poses))
    dst = np.linspace(0.0, 1.0, n)
    out = []
    for t in dst:
        k = min(int(np.searchsorted(src, t, side="right")) - 1, len(poses) - 2)
        s = (t - src[k]) / (src[k + 1] - src[k])
        p = (1.0 - s) * poses[k].p + s * poses[k + 1].p
        r = poses[k].r @ so3_exp(s * so3_log(poses[k].r.T @ poses[k + 1].r))
        out.append(Pose(p, r))
    return out


def repr_compactness(trajs, tag: ReprTag, base_trajs=None, anchor: str = "instantaneous") -> CompactnessSummary:
    """Cross-trajectory variance of the 6-dim tangent vectors per timestep.

    Trajectories must already share a common length (resample first). For the
    delta representations the per-step 6-vectors are (translation, rotation
    log) of each increment; for absolute they are (p, log R) of each pose.
    """
    trajs = [list(t) for t in trajs]
    if len(trajs) < 2:
        raise ValueError("need at least 2 trajectories")
    length = len(trajs[0])
    if any(len(t) != length for t in trajs):
        raise ValueError("trajectories must share a common length (resample first)")
    if base_trajs is None:
        base_trajs = [[Pose() for _ in range(length)] for _ in trajs]

    vecs = []
    for traj, base in zip(trajs, base_trajs):
        if tag is ReprTag.ABSOLUTE_WORLD:
            rows = [np.concatenate([p.p, so3_log(p.r)]) for p in traj]
        elif tag is ReprTag.EGOCENTRIC_DELTA:
            rows = [np.concatenate([d.p, so3_log(d.r)]) for d in to_egocentric_delta(traj)]
        else:
            deltas = to_robot_delta(traj, base, anchor=anchor)
            rows = [np.concatenate([d.p, so3_log(d.r)]) for d in deltas]
        vecs.append(np.asarray(rows))
    stack = np.stack(vecs)  # (n_traj, S, 6)
    per_step = stack.var(axis=0).sum(axis=1)
    return CompactnessSummary(tag=tag, per_step_variance=per_step, mean_variance=float(per_step.mean()))


# --------------------------------------------------------------------------
# Interpolating reference path


class WholeBodyPath:
    """Continuously sampleable whole-body trajectory built on uniform frames.

    Scalar channels use a C1 cubic Hermite; orientations interpolate along the
    piecewise geodesic between neighboring frames. Sampling outside the domain
    raises.
    """

    def __init__(self, frames, t0: float = 0.0, dt: float = 0.1):
        frames = list(frames)
        if len(frames) < 2:
            raise ValueError("path needs at least 2 frames")
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.frames = tuple(frames)
        flat = encode_frames(frames)
        self._scalars = UniformHermite.from_knots(self.t0, self.dt, flat[:, SCALAR_IDXS])
        self._rots = frame_rotations(frames)  # (T, 2, 3, 3)
        rel = np.einsum("tsji,tsjk->tsik", self._rots[:-1], self._rots[1:])
        self._rel_logs = so3_log_batch(rel)  # (T-1, 2, 3)

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.frames) - 1) * self.dt

    def covers(self, t_start: float, t_stop: float) -> bool:
        return t_start >= self.t0 - 1e-12 and t_stop <= self.t_end + 1e-12

    def _check(self, t: float):
        if t < self.t0 - 1e-9 or t > self.t_end + 1e-9:
            raise ValueError(f"time {t} outside path domain [{self.t0}, {self.t_end}]")

    def sample_values(self, ts) -> tuple[np.ndarray, np.ndarray]:
        """(T, 23) flat values with orientation triples zeroed, plus rotation
        matrices (T, 2, 3, 3)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        for t in (ts.min(), ts.max()):
            self._check(float(t))
        out = np.zeros((ts.size, N_CHANNELS))
        out[:, SCALAR_IDXS] = self._scalars.eval_many(ts)
        s = (ts - self.t0) / self.dt
        idx = np.clip(s.astype(int), 0, len(self.frames) - 2)
        s = (s - idx)[:, None, None]
        rel = so3_exp_batch(self._rel_logs[idx] * s)
        rots = np.einsum("tsij,tsjk->tsik", self._rots[idx], rel)
        return out, rots

    def sample(self, t: float) -> WholeBodyAction:
        vals, rots = self.sample_values([t])
        v, r = vals[0], rots[0]
        return WholeBodyAction(
            base=v[BASE],
            torso=v[TORSO],
            ee_left=Pose(v[EEL_POS], r[0]),
            ee_right=Pose(v[EER_POS], r[1]),
            grip_left=v[GRIP_L],
            grip_right=v[GRIP_R],
            head=v[HEAD],
        )

    def sample_frames(self, ts) -> list[WholeBodyAction]:
        vals, rots = self.sample_values(ts)
        out = []
        for v, r in zip(vals, rots):
            out.append(
                WholeBodyAction(
                    base=v[BASE],
                    torso=v[TORSO],
                    ee_left=Pose(v[EEL_POS], r[0]),
                    ee_right=Pose(v[EER_POS], r[1]),
                    grip_left=v[GRIP_L],
                    grip_right=v[GRIP_R],
                    head=v[HEAD],
                )
            )
        return out


# --------------------------------------------------------------------------
# CSV trajectory format

CSV_HEADER = (
    ["t", "base_x", "base_y", "base_yaw"]
    + [f"torso_{i}" for i in range(1, 5)]
    + ["eeL_px", "eeL_py", "eeL_pz"]
    + [f"eeL_r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + ["gripL"]
    + ["eeR_px", "eeR_py", "eeR_pz"]
    + [f"eeR_r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + ["gripR", "head_1", "head_2"]
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def frame_to_row(t: float, a: WholeBodyAction) -> list[str]:
    vals = (
        [t, *a.base, *a.torso]
        + [*a.ee_left.p, *a.ee_left.r.ravel(), a.grip_left]
        + [*a.ee_right.p, *a.ee_right.r.ravel(), a.grip_right]
        + [*a.head]
    )
    return [_fmt(v) for v in vals]


def write_trajectory_csv(path, frames, times) -> None:
    times = np.asarray(times, dtype=float)
    frames = list(frames)
    if times.size != len(frames):
        raise ValueError("times and frames must have equal length")
    lines = [",".join(CSV_HEADER)]
    for t, f in zip(times, frames):
        lines.append(",".join(frame_to_row(float(t), f)))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> tuple[np.ndarray, list[WholeBodyAction]]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trajectory file")
    header = lines[0].split(",")
    if header != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header (want the documented 36-column format)")
    times = []
    frames = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(CSV_HEADER):
            raise ValueError(f"{path}:{ln_no}: expected {len(CSV_HEADER)} columns, got {len(parts)}")
        v = np.array([float(p) for p in parts])
        times.append(v[0])
        rl = v[11:20].reshape(3, 3)
        rr = v[24:33].reshape(3, 3)
        for r in (rl, rr):
            if rotation_defect(r) > 1e-6:
                raise ValueError(f"{path}:{ln_no}: rotation block is not orthonormal")
        frames.append(
            WholeBodyAction(
                base=v[1:4],
                torso=v[4:8],
                ee_left=Pose(v[8:11], project_rotation(rl)),
                ee_right=Pose(v[21:24], project_rotation(rr)),
                grip_left=v[20],
                grip_right=v[33],
                head=v[34:36],
            )
        )
    return np.asarray(times), frames
