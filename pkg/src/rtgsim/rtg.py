"""Real-time trajectory blending engine for timestamped action chunks.

Timing model (all chunk-local, t = 0 at the chunk's observation stamp): by
the time a chunk reaches the engine, the inference latency t1 has passed;
processing is budgeted at t2. The prefix [0, t1+t2) of the new chunk is
discarded, the executing trajectory keeps running verbatim until the splice
instant t_s = t1 + t2, and on [t_s, t_e] a per-channel QP blends the old
trajectory into the new chunk:

* smoothing: squared second differences of the knots (discrete acceleration
  surrogate that suppresses intra-chunk jitter);
* deviation from the old trajectory weighted by W1(t) = exp(-(t - t_s)/tau)
  up to the blending horizon t_f (W1 = 0 beyond it);
* deviation from the new chunk weighted by W2 = 1 - W1;
* velocity constraint |x_{k+1} - x_k| <= v_max * h per channel;
* equality rows pinning position and velocity at the splice to the old
  trajectory (position and velocity continuity across chunk transitions).

The blending horizon defaults to the splice time plus half the remaining old
trajectory, clamped to its end, and tau defaults to a third of that span.

Solved knots are densified with a cubic Hermite whose tangents come from a
second small QP (:func:`rtgsim.spline.select_tangents`) that certifies the
continuous velocity bound via Bezier control values; the velocity constraint
in the blend QP is tightened by a small margin so the certified bound sits
strictly inside v_max. The first chunk is generated the same way without the
old-trajectory term or splice rows.

Orientation channels are blended in 3-dim tangent coordinates about a
reference rotation fixed per blend window (the old trajectory's orientation
at the splice); windows whose relative rotations approach pi are rejected.

Concurrency: the engine itself never reads a clock; callers pass `now` into
ingest and sample times explicitly, so the whole pipeline is deterministic
under simulated time. Each ingest builds a complete new trajectory object
and publishes it with a single reference assignment, so a concurrent sampler
sees either the old or the new trajectory, never a partial blend.
"""

from __future__ import annotations

import time
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .action_model import (
    BASE,
    EEL_POS,
    EER_POS,
    GRIP_L,
    GRIP_R,
    HEAD,
    N_CHANNELS,
    ROT_TRIPLES,
    SCALAR_IDXS,
    TORSO,
    ActionChunk,
    CHANNEL_NAMES,
    ReprTag,
    WholeBodyAction,
    encode_frames,
    frame_rotations,
)
from .pose_math import (
    Pose,
    geodesic_angle,
    so3_exp,
    so3_exp_batch,
    so3_log,
    so3_log_batch,
    so3_right_jacobian,
)
from .qp_solver import AdmmWorkspace, QpProblem
from .spline import UniformHermite, hermite_coeffs, select_tangents

BLEND_TOL = 1e-9
MARGIN_REL = 1e-6
ORIENTATION_SWING_LIMIT = np.pi - 1e-3


class RtgError(Exception):
    pass


class StaleChunkError(RtgError):
    """The chunk's usable window [t1+t2, t_e] is empty; it was rejected."""


class InfeasibleBlendError(RtgError):
    """The blend QP (or the tangent certification) has no solution."""


class OrientationSwingError(InfeasibleBlendError):
    """A blend window saw relative rotations too close to pi."""


@dataclass(frozen=True)
class ChannelLayout:
    """Flat channel layout; rot_triples lists index triples blended as
    rotation-log coordinates."""

    n_channels: int
    rot_triples: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rot_triples", tuple(tuple(t) for t in self.rot_triples))
        flat = [i for t in self.rot_triples for i in t]
        if len(set(flat)) != len(flat) or any(not 0 <= i < self.n_channels for i in flat):
            raise ValueError("rotation triples must be disjoint, in-range index triples")


WHOLE_BODY_LAYOUT = ChannelLayout(
    n_channels=N_CHANNELS, rot_triples=ROT_TRIPLES, names=CHANNEL_NAMES
)


@dataclass
class RtgConfig:
    """Engine parameters. ``v_max`` is per channel (scalar broadcasts);
    ``dt_opt`` defaults to the chunk dt; ``tau`` defaults to a third of the
    blending window; ``control_rate``/``ingest_rate`` document the two-rate
    contract used by telemetry and the simulator."""

    v_max: np.ndarray | float
    layout: ChannelLayout = WHOLE_BODY_LAYOUT
    dt_opt: float | None = None
    w_acc: float = 1e-2
    tau: float | None = None
    t_f_fraction: float = 0.5
    t2_budget: float = 0.01
    control_rate: float = 250.0
    ingest_rate: float = 20.0
    max_iters: int = 4000

    def __post_init__(self):
        v = np.broadcast_to(np.asarray(self.v_max, dtype=float), (self.layout.n_channels,)).copy()
        if np.any(v <= 0.0):
            raise ValueError("v_max must be positive per channel")
        self.v_max = v
        if self.w_acc < 0.0:
            raise ValueError("w_acc must be nonnegative")
        if self.tau is not None and self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if not 0.0 < self.t_f_fraction <= 1.0:
            raise ValueError("t_f_fraction must lie in (0, 1]")
        if self.t2_budget < 0.0:
            raise ValueError("t2_budget must be nonnegative")


@dataclass(frozen=True)
class ChunkTiming:
    t1: float
    t2: float
    t_e: float
    t_f: float


@dataclass
class TelemetryRecord:
    """One row per ingest. ``wall_t2`` is the measured processing time and is
    excluded from the CSV schema to keep scenario outputs deterministic; the
    budgeted t2 that the splice math used is what the CSV carries."""

    t_obs: float
    t1: float
    t2_budget: float
    accepted: bool
    reason: str = ""
    t_splice: float = float("nan")
    t_f: float = float("nan")
    max_blend_velocity: float = float("nan")
    splice_pos_jump: float = float("nan")
    splice_vel_jump: float = float("nan")
    qp_iterations: int = 0
    wall_t2: float = float("nan")

    CSV_FIELDS = (
        "t_obs",
        "t1",
        "t2_budget",
        "accepted",
        "reason",
        "t_splice",
        "t_f",
        "max_blend_velocity",
        "splice_pos_jump",
        "splice_vel_jump",
        "qp_iterations",
    )

    def csv_row(self) -> str:
        parts = []
        for name in self.CSV_FIELDS:
            v = getattr(self, name)
            if isinstance(v, bool):
                parts.append("1" if v else "0")
            elif isinstance(v, float):
                parts.append(format(v, ".17g"))
            else:
                parts.append(str(v))
        return ",".join(parts)


@dataclass(frozen=True)
class ArrayChunk:
    """Layout-agnostic chunk: values (L, C); rotation-triple channels must
    hold rotation logs consistent with ``rots`` when a layout uses triples."""

    t_obs: float
    dt: float
    values: np.ndarray
    rots: np.ndarray | None = None  # (L, n_triples, 3, 3)

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=float)).copy())
        if self.dt <= 0.0:
            raise ValueError("chunk dt must be positive")
        if len(self.values) < 2:
            raise ValueError("chunk must contain at least 2 frames")
        if self.rots is not None:
            object.__setattr__(self, "rots", np.asarray(self.rots, dtype=float).copy())

    @property
    def duration(self) -> float:
        return (len(self.values) - 1) * self.dt


def chunk_to_arrays(chunk: ActionChunk) -> ArrayChunk:
    """Normalize an absolute whole-body chunk for the engine."""
    if chunk.repr_tag is not ReprTag.ABSOLUTE_WORLD:
        raise ValueError("decode delta chunks to absolute before ingesting")
    values = encode_frames(chunk.frames)
    rots = frame_rotations(chunk.frames)
    return ArrayChunk(t_obs=chunk.t_obs, dt=chunk.dt, values=values, rots=rots)


class _Piece:
    """One blend window: a Hermite spline in window-local coordinates plus
    the reference rotations its tangent triples are expressed about."""

    __slots__ = ("t_start", "spline", "rot_refs")

    def __init__(self, t_start: float, spline: UniformHermite, rot_refs: np.ndarray | None):
        self.t_start = float(t_start)
        self.spline = spline
        self.rot_refs = rot_refs  # (n_triples, 3, 3) or None

    @property
    def t_end(self) -> float:
        return self.spline.t_end


class ExecutingTrajectory:
    """Piecewise C1 trajectory served to the controller.

    Sampling before the domain raises; sampling beyond the end holds the
    final frame and reports exhaustion.
    """

    def __init__(self, layout: ChannelLayout, pieces: list[_Piece]):
        if not pieces:
            raise ValueError("trajectory needs at least one piece")
        self.layout = layout
        self.pieces = pieces
        self._starts = [p.t_start for p in pieces]
        self._triples = [np.array(t) for t in layout.rot_triples]

    @property
    def t_start(self) -> float:
        return self.pieces[0].t_start

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t_end

    def _piece_at(self, t: float) -> _Piece:
        idx = bisect_right(self._starts, t) - 1
        if idx < 0:
            idx = 0
        return self.pieces[idx]

    def sample(self, t: float):
        """(values, rots, exhausted): window-local tangent coords sit on the
        rotation-triple channels; ``rots`` holds the decoded matrices."""
        if t < self.t_start - 1e-9:
            raise ValueError(f"sample time {t} precedes trajectory start {self.t_start}")
        exhausted = t > self.t_end + 1e-12
        tq = self.t_end if exhausted else t
        piece = self._piece_at(tq)
        vals = piece.spline.eval(tq)
        rots = None
        if self._triples:
            tangents = np.stack([vals[tr] for tr in self._triples])
            rots = piece.rot_refs @ so3_exp_batch(tangents)
        return vals, rots, exhausted

    def velocity(self, t: float):
        """(rates, omegas, exhausted): channel rates plus per-triple body
        angular velocities; zero once exhausted."""
        if t < self.t_start - 1e-9:
            raise ValueError(f"sample time {t} precedes trajectory start {self.t_start}")
        exhausted = t > self.t_end + 1e-12
        if exhausted:
            omegas = np.zeros((len(self._triples), 3)) if self._triples else None
            return np.zeros(self.layout.n_channels), omegas, True
        piece = self._piece_at(t)
        rates = piece.spline.deriv(t)
        omegas = None
        if self._triples:
            vals = piece.spline.eval(t)
            omegas = np.stack(
                [so3_right_jacobian(vals[tr]) @ rates[tr] for tr in self._triples]
            )
        return rates, omegas, exhausted

    def sample_raw(self, ts: np.ndarray):
        """Vectorized (values, rots) for target building; clamps beyond the
        end (hold) and before the start."""
        ts = np.asarray(ts, dtype=float)
        tq = np.clip(ts, self.t_start, self.t_end)
        vals = np.empty((ts.size, self.layout.n_channels))
        rots = (
            np.empty((ts.size, len(self._triples), 3, 3)) if self._triples else None
        )
        piece_idx = np.clip(
            np.searchsorted(self._starts, tq, side="right") - 1, 0, len(self.pieces) - 1
        )
        for pi in np.unique(piece_idx):
            mask = piece_idx == pi
            piece = self.pieces[pi]
            v = piece.spline.eval_many(tq[mask])
            vals[mask] = v
            if self._triples:
                tang = np.stack([v[:, tr] for tr in self._triples], axis=1)
                rots[mask] = piece.rot_refs[None] @ so3_exp_batch(tang)
        return vals, rots


def _second_difference(n: int) -> np.ndarray:
    d2 = np.zeros((max(n - 2, 0), n))
    for i in range(n - 2):
        d2[i, i : i + 3] = (1.0, -2.0, 1.0)
    return d2


def _first_difference(n: int) -> np.ndarray:
    d1 = np.zeros((n - 1, n))
    for i in range(n - 1):
        d1[i, i : i + 2] = (-1.0, 1.0)
    return d1


def build_blend_matrices(n_knots: int, h: float, w_acc: float, splice: bool):
    """(H, A, equality row count) shared across channels for one window.

    The smoothing term penalizes raw second differences of the knots,
    H = 2 (w_acc D2'D2 + I) with bandwidth 2. Raw differences (rather than
    1/h^2-scaled discrete accelerations) keep the default weight consistent
    with the blend's documented approach tolerances; the weight is therefore
    tied to the optimization grid step.
    """
    d2 = _second_difference(n_knots)
    H = 2.0 * (w_acc * (d2.T @ d2) + np.eye(n_knots))
    rows = []
    n_eq = 0
    if splice:
        e0 = np.zeros(n_knots)
        e0[0] = 1.0
        ev = np.zeros(n_knots)
        ev[0], ev[1] = -1.0, 1.0
        rows += [e0, ev]
        n_eq = 2
    A = np.vstack(rows + [_first_difference(n_knots)]) if rows else _first_difference(n_knots)
    return H, A, n_eq


def blend_window_qp(
    old_targets,
    new_targets,
    w1,
    h: float,
    w_acc: float,
    v_max: float,
    splice: tuple[float, float] | None = None,
    tol_primal: float = BLEND_TOL,
) -> QpProblem:
    """Exact single-channel QP for one blend window.

    ``old_targets``/``new_targets`` are values on the optimization grid, and
    ``w1`` the old-trajectory weight there (W2 = 1 - w1). ``splice`` pins
    (position, velocity) at the first knot. The velocity rows are tightened
    by the certification margin used throughout the engine.
    """
    old_targets = np.asarray(old_targets, dtype=float).ravel()
    new_targets = np.asarray(new_targets, dtype=float).ravel()
    w1 = np.asarray(w1, dtype=float).ravel()
    n = old_targets.size
    if new_targets.size != n or w1.size != n:
        raise ValueError("old/new targets and weights must share the grid")
    H, A, n_eq = build_blend_matrices(n, h, w_acc, splice is not None)
    g = -2.0 * (w1 * old_targets + (1.0 - w1) * new_targets)
    mu = max(MARGIN_REL * v_max * h, 50.0 * tol_primal)
    bound = v_max * h - mu
    if bound <= 0.0:
        raise ValueError("v_max too small for the grid step and solver tolerance")
    l = np.full(A.shape[0], -bound)
    u = np.full(A.shape[0], bound)
    if splice is not None:
        p0, v0 = splice
        l[0] = u[0] = p0
        l[1] = u[1] = h * v0
    return QpProblem(H, g, A, l, u, bandwidth=2)


class RtgEngine:
    """Ingests timestamped chunks at the policy rate and serves dense samples
    at the control rate; see the module docstring for the algorithm."""

    def __init__(self, cfg: RtgConfig):
        self.cfg = cfg
        self._current: ExecutingTrajectory | None = None
        self.telemetry: list[TelemetryRecord] = []
        self.stale_count = 0
        self.rejected_count = 0
        self._workspaces: dict = {}
        self._warm: dict = {}
        self._tangent_cache: dict = {}

    # -- public surface ----------------------------------------------------

    @property
    def trajectory(self) -> ExecutingTrajectory | None:
        return self._current

    def ingest(self, chunk, now: float) -> TelemetryRecord:
        if self._current is None:
            return self.ingest_initial_chunk(chunk, now)
        return self.ingest_chunk(chunk, now)

    def ingest_initial_chunk(self, chunk, now: float | None = None) -> TelemetryRecord:
        """First chunk: optimize against the chunk itself (unit deviation
        weight), no old-trajectory term, domain [t1+t2, t_e] chunk-local."""
        if self._current is not None:
            raise RtgError("a trajectory is already executing; use ingest_chunk")
        data = self._normalize(chunk)
        t1 = max(0.0, (now - data.t_obs)) if now is not None else 0.0
        return self._ingest_common(data, t1, initial=True)

    def ingest_chunk(self, chunk, now: float) -> TelemetryRecord:
        if self._current is None:
            raise RtgError("no executing trajectory; use ingest_initial_chunk")
        data = self._normalize(chunk)
        t1 = max(0.0, now - data.t_obs)
        return self._ingest_common(data, t1, initial=False)

    def sample(self, t: float):
        """(values, rots, exhausted) from the current trajectory."""
        traj = self._current
        if traj is None:
            raise RtgError("no executing trajectory")
        return traj.sample(t)

    def sample_action(self, t: float) -> tuple[WholeBodyAction, bool]:
        """Whole-body layout convenience: decode a sample into an action."""
        if self.cfg.layout is not WHOLE_BODY_LAYOUT:
            raise RtgError("sample_action requires the whole-body layout")
        vals, rots, exhausted = self.sample(t)
        action = WholeBodyAction(
            base=vals[BASE],
            torso=vals[TORSO],
            ee_left=Pose(vals[EEL_POS], rots[0]),
            ee_right=Pose(vals[EER_POS], rots[1]),
            grip_left=float(np.clip(vals[GRIP_L], 0.0, 1.0)),
            grip_right=float(np.clip(vals[GRIP_R], 0.0, 1.0)),
            head=vals[HEAD],
        )
        return action, exhausted

    def write_telemetry_csv(self, path) -> None:
        lines = [",".join(TelemetryRecord.CSV_FIELDS)]
        lines += [rec.csv_row() for rec in self.telemetry]
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")

    # -- internals ----------------------------------------------------------

    def _normalize(self, chunk) -> ArrayChunk:
        if isinstance(chunk, ActionChunk):
            data = chunk_to_arrays(chunk)
        elif isinstance(chunk, ArrayChunk):
            data = chunk
        else:
            raise TypeError("chunk must be an ActionChunk or ArrayChunk")
        if data.values.shape[1] != self.cfg.layout.n_channels:
            raise ValueError(
                f"chunk has {data.values.shape[1]} channels, layout expects "
                f"{self.cfg.layout.n_channels}"
            )
        if self.cfg.layout.rot_triples and data.rots is None:
            raise ValueError("layout declares rotation triples but chunk has no rotations")
        return data

    def _reject(self, rec: TelemetryRecord, exc: RtgError) -> TelemetryRecord:
        self.rejected_count += 1
        self.telemetry.append(rec)
        raise exc

    def _ingest_common(self, data: ArrayChunk, t1: float, initial: bool) -> TelemetryRecord:
        wall_start = time.perf_counter()
        cfg = self.cfg
        t2 = cfg.t2_budget
        t_e = data.duration
        t_s = t1 + t2
        rec = TelemetryRecord(t_obs=data.t_obs, t1=t1, t2_budget=t2, accepted=False)

        if t_s >= t_e:
            self.stale_count += 1
            rec.reason = "stale"
            self._reject(rec, StaleChunkError(f"t1+t2 = {t_s:.4f} >= chunk duration {t_e:.4f}"))

        old = self._current
        splice_global = data.t_obs + t_s
        if initial:
            t_f = t_s
        else:
            old_end_local = old.t_end - data.t_obs
            t_f = t_s + cfg.t_f_fraction * max(0.0, old_end_local - t_s)
            t_f = min(t_f, old_end_local)
        rec.t_splice = splice_global
        rec.t_f = data.t_obs + t_f

        # Optimization grid over [t_s, t_e].
        dt_opt = cfg.dt_opt if cfg.dt_opt is not None else data.dt
        n_seg = max(2, int(round((t_e - t_s) / dt_opt)))
        h = (t_e - t_s) / n_seg
        ts_local = t_s + np.arange(n_seg + 1) * h

        new_targets, new_rots = self._chunk_targets(data, ts_local)
        if initial:
            rot_refs = new_rots[0].copy() if new_rots is not None else None
            w1 = np.zeros(n_seg + 1)
            old_targets = np.zeros_like(new_targets)
            splice_vals = None
        else:
            vals, rot_refs, _ = old.sample(splice_global)
            rates, omegas, _ = old.velocity(splice_global)
            p0 = vals.copy()
            for tr in cfg.layout.rot_triples:
                # Window tangents are zero at the splice by construction of
                # the new reference rotations.
                p0[list(tr)] = 0.0
            r0 = self._tangent_rate_encode(rates, omegas)
            splice_vals = (p0, r0)
            old_vals, old_rots = old.sample_raw(data.t_obs + ts_local)
            tau = cfg.tau if cfg.tau is not None else max((t_f - t_s) / 3.0, 1e-6)
            w1 = np.exp(-(ts_local - t_s) / tau)
            w1[ts_local > t_f + 1e-12] = 0.0
            old_targets = self._tangent_encode(old_vals, old_rots, rot_refs)

        new_targets = self._tangent_encode(new_targets, new_rots, rot_refs)
        swing = self._max_tangent_norm(new_targets if initial else np.vstack([new_targets, old_targets]))
        if swing >= ORIENTATION_SWING_LIMIT:
            rec.reason = "orientation_swing"
            self._reject(
                rec,
                OrientationSwingError(
                    f"relative rotation {swing:.3f} rad too close to pi for tangent blending"
                ),
            )

        try:
            knots, iters = self._solve_blend(
                n_seg + 1, h, w1, old_targets, new_targets, splice_vals
            )
        except InfeasibleBlendError as exc:
            rec.reason = "infeasible_blend"
            self._reject(rec, exc)

        v_bound = cfg.v_max - np.maximum(MARGIN_REL * cfg.v_max * h, 50.0 * BLEND_TOL) / (2.0 * h)
        v0 = splice_vals[1] if splice_vals is not None else None
        tangents, ok = select_tangents(knots, h, v_bound, v0=v0, cache=self._tangent_cache)
        if not ok.all():
            rec.reason = "infeasible_tangents"
            self._reject(
                rec,
                InfeasibleBlendError(
                    "no C1 tangent assignment satisfies the velocity bound"
                ),
            )

        spline = UniformHermite(splice_global, h, hermite_coeffs(knots, tangents, h))
        piece = _Piece(splice_global, spline, rot_refs)
        if initial or old is None:
            pieces = [piece]
        else:
            pieces = [p for p in old.pieces if p.t_start < splice_global - 1e-12] + [piece]
        new_traj = ExecutingTrajectory(cfg.layout, pieces)

        rec.qp_iterations = iters
        rec.max_blend_velocity = float(spline.max_abs_velocity().max())
        if not initial:
            rec.splice_pos_jump, rec.splice_vel_jump = self._splice_jumps(
                old, new_traj, splice_global
            )
        rec.accepted = True
        rec.wall_t2 = time.perf_counter() - wall_start
        self.telemetry.append(rec)
        self._current = new_traj  # atomic publish
        return rec

    def _chunk_targets(self, data: ArrayChunk, ts_local):
        """Linear interpolation of chunk values on the grid; rotations follow
        the piecewise geodesic between frames."""
        frame_t = np.arange(len(data.values)) * data.dt
        pos = np.clip(ts_local / data.dt, 0.0, len(data.values) - 1 - 1e-12)
        idx = pos.astype(int)
        frac = (pos - idx)[:, None]
        vals = data.values[idx] * (1.0 - frac) + data.values[idx + 1] * frac
        rots = None
        if self.cfg.layout.rot_triples:
            r0 = data.rots[idx]
            rel = np.einsum("tsji,tsjk->tsik", r0, data.rots[idx + 1])
            logs = so3_log_batch(rel) * frac[..., None]
            rots = r0 @ so3_exp_batch(logs)
        return vals, rots

    def _tangent_encode(self, vals, rots, rot_refs):
        """Replace rotation-triple channels with tangent coords about refs."""
        out = vals.copy()
        if rots is not None and rot_refs is not None:
            rel = np.einsum("sji,tsjk->tsik", rot_refs, rots)
            logs = so3_log_batch(rel)
            for k, tr in enumerate(self.cfg.layout.rot_triples):
                out[:, list(tr)] = logs[:, k]
        return out

    def _tangent_rate_encode(self, rates, omegas):
        """At the splice the window tangent is zero, so tangent rates equal
        body angular velocities on the triples."""
        out = rates.copy()
        if omegas is not None:
            for k, tr in enumerate(self.cfg.layout.rot_triples):
                out[list(tr)] = omegas[k]
        return out

    def _max_tangent_norm(self, targets) -> float:
        worst = 0.0
        for tr in self.cfg.layout.rot_triples:
            worst = max(worst, float(np.linalg.norm(targets[:, list(tr)], axis=1).max()))
        return worst

    def _solve_blend(self, n_knots, h, w1, old_targets, new_targets, splice_vals):
        cfg = self.cfg
        key = (n_knots, round(h, 12), splice_vals is not None)
        ws = self._workspaces.get(key)
        if ws is None:
            H, A, n_eq = build_blend_matrices(n_knots, h, cfg.w_acc, splice_vals is not None)
            eq = np.zeros(A.shape[0], dtype=bool)
            eq[:n_eq] = True
            ws = AdmmWorkspace(H, A, bandwidth=2, equality_mask=eq)
            self._workspaces[key] = ws

        n_ch = cfg.layout.n_channels
        w2 = 1.0 - w1
        G = -2.0 * (w1[:, None] * old_targets + w2[:, None] * new_targets)
        mu = np.maximum(MARGIN_REL * cfg.v_max * h, 50.0 * BLEND_TOL)
        bound = cfg.v_max * h - mu
        if np.any(bound <= 0.0):
            raise InfeasibleBlendError("v_max too small for grid step and solver tolerance")
        m = ws.A.shape[0]
        L = np.empty((m, n_ch))
        U = np.empty((m, n_ch))
        n_eq = 2 if splice_vals is not None else 0
        L[n_eq:] = -bound[None, :]
        U[n_eq:] = bound[None, :]
        if splice_vals is not None:
            p0, r0 = splice_vals
            L[0] = U[0] = p0
            L[1] = U[1] = h * r0
        warm = self._warm.get(key)
        X, Y, status, iters, _, _, _ = ws.solve_batch(
            G,
            L,
            U,
            tol_primal=BLEND_TOL,
            tol_dual=BLEND_TOL,
            max_iters=cfg.max_iters,
            warm_x=warm[0] if warm is not None else None,
            warm_y=warm[1] if warm is not None else None,
        )
        if not all(s == "solved" for s in status):
            raise InfeasibleBlendError(f"blend QP statuses: {sorted(set(status))}")
        self._warm[key] = (X.copy(), Y.copy())
        return X, int(iters)

    def _splice_jumps(self, old, new, t: float):
        ov, orot, _ = old.sample(t)
        nv, nrot, _ = new.sample(t)
        flat = [i for tr in self.cfg.layout.rot_triples for i in tr]
        scal = [i for i in range(self.cfg.layout.n_channels) if i not in flat]
        pos = float(np.max(np.abs(ov[scal] - nv[scal]), initial=0.0))
        if orot is not None:
            for a, b in zip(orot, nrot):
                pos = max(pos, geodesic_angle(a, b))
        orate, oom, _ = old.velocity(t)
        nrate, nom, _ = new.velocity(t)
        vel = float(np.max(np.abs(orate[scal] - nrate[scal]), initial=0.0))
        if oom is not None:
            vel = max(vel, float(np.max(np.abs(oom - nom), initial=0.0)))
        return pos, vel
