"""Cubic Hermite splines on uniform knot grids, with certified velocity bounds.

A segment between knots (x_k, x_{k+1}) with endpoint velocities (v_k, v_{k+1})
has a *quadratic* velocity whose Bezier control values are

    (v_k,  3*(x_{k+1}-x_k)/h - v_k - v_{k+1},  v_{k+1})

and since a Bezier curve stays inside the convex hull of its control values,
bounding those three numbers bounds the continuous velocity everywhere on the
segment. :func:`select_tangents` picks knot velocities closest to the
central-difference ones subject to exactly those bounds (a small banded QP),
which is how the trajectory blender guarantees its densified output respects
per-channel velocity limits, not just the knot-to-knot differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qp_solver import AdmmWorkspace


def hermite_coeffs(x: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """Polynomial coefficients (N, 4, C) in local s = (t - t_k)/h, degree order."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    d = np.diff(x, axis=0)
    a = x[:-1]
    b = h * v[:-1]
    c = 3.0 * d - h * (2.0 * v[:-1] + v[1:])
    e = -2.0 * d + h * (v[:-1] + v[1:])
    return np.stack([a, b, c, e], axis=1)


def central_tangents(x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference knot velocities, one-sided at the ends."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.empty_like(x)
    if x.shape[0] == 1:
        v[:] = 0.0
        return v
    v[1:-1] = (x[2:] - x[:-2]) / (2.0 * h)
    v[0] = (x[1] - x[0]) / h
    v[-1] = (x[-1] - x[-2]) / h
    return v


def velocity_control_values(x: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """Bezier control values (N, 3, C) of each segment's velocity quadratic."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    mid = 3.0 * np.diff(x, axis=0) / h - v[:-1] - v[1:]
    return np.stack([v[:-1], mid, v[1:]], axis=1)


def select_tangents(
    x: np.ndarray,
    h: float,
    v_bound: np.ndarray,
    v0: np.ndarray | None = None,
    tol: float = 1e-9,
    max_iters: int = 20000,
    cache: dict | None = None,
):
    """Choose knot velocities with a certified continuous bound per channel.

    Minimizes the squared distance to the central-difference velocities
    subject to |control values| <= v_bound. When ``v0`` is given, the first
    knot velocity is pinned to it (splice continuity) and the first segment's
    mid-control bound is relaxed by a hair so a v0 sitting exactly on the
    bound stays feasible.

    ``cache``, when given, holds (workspace, warm start) per problem shape so
    a caller solving a stream of same-sized windows skips refactorization.

    Returns (v, ok_mask); channels whose QP did not solve get ok False.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_knots, n_ch = x.shape
    n_seg = n_knots - 1
    v_bound = np.broadcast_to(np.asarray(v_bound, dtype=float), (n_ch,))

    c = central_tangents(x, h)
    np.clip(c, -v_bound, v_bound, out=c)

    delta3 = 3.0 * np.diff(x, axis=0) / h
    L = np.empty((n_knots + n_seg, n_ch))
    U = np.empty_like(L)
    L[:n_knots] = -v_bound
    U[:n_knots] = v_bound
    L[n_knots:] = delta3 - v_bound
    U[n_knots:] = delta3 + v_bound
    if v0 is not None:
        v0 = np.broadcast_to(np.asarray(v0, dtype=float), (n_ch,))
        L[0] = v0
        U[0] = v0
        if n_seg:
            L[n_knots] -= 1e-8
            U[n_knots] += 1e-8
        c[0] = v0

    key = (n_knots, n_ch, v0 is not None)
    ws = warm = None
    if cache is not None:
        ws, warm = cache.get(key, (None, None))
    if ws is None:
        # Rows: one box row per knot velocity, one row per segment mid-control.
        A = np.zeros((n_knots + n_seg, n_knots))
        A[:n_knots] = np.eye(n_knots)
        for k in range(n_seg):
            A[n_knots + k, k] = 1.0
            A[n_knots + k, k + 1] = 1.0
        eq_mask = np.zeros(n_knots + n_seg, dtype=bool)
        eq_mask[0] = v0 is not None
        ws = AdmmWorkspace(np.eye(n_knots), A, bandwidth=1, equality_mask=eq_mask)

    V, Y, status, _, _, _, _ = ws.solve_batch(
        -c,
        L,
        U,
        tol_primal=tol,
        tol_dual=tol,
        max_iters=max_iters,
        warm_x=warm[0] if warm is not None else None,
        warm_y=warm[1] if warm is not None else None,
    )
    ok = np.array([s == "solved" for s in status])
    if cache is not None and ok.all():
        cache[key] = (ws, (V.copy(), Y.copy()))
    return V, ok


@dataclass
class UniformHermite:
    """C1 piecewise-cubic curve over uniformly spaced knots.

    coeffs has shape (N, 4, C); evaluation clamps to the domain ends, so
    callers own any out-of-domain policy.
    """

    t0: float
    h: float
    coeffs: np.ndarray

    @classmethod
    def from_knots(cls, t0: float, h: float, x: np.ndarray, v: np.ndarray | None = None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if v is None:
            v = central_tangents(x, h)
        return cls(float(t0), float(h), hermite_coeffs(x, v, h))

    @property
    def n_segments(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_channels(self) -> int:
        return self.coeffs.shape[2]

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * self.n_segments

    def _locate(self, t: float) -> tuple[int, float]:
        s = (t - self.t0) / self.h
        idx = int(s)
        if idx < 0:
            idx = 0
        elif idx >= self.n_segments:
            idx = self.n_segments - 1
        return idx, s - idx

    def eval(self, t: float) -> np.ndarray:
        idx, s = self._locate(t)
        row = self.coeffs[idx]
        return ((row[3] * s + row[2]) * s + row[1]) * s + row[0]

    def deriv(self, t: float) -> np.ndarray:
        idx, s = self._locate(t)
        row = self.coeffs[idx]
        return ((3.0 * row[3] * s + 2.0 * row[2]) * s + row[1]) / self.h

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        s = (ts - self.t0) / self.h
        idx = np.clip(s.astype(int), 0, self.n_segments - 1)
        s = s - idx
        row = self.coeffs[idx]  # (T, 4, C)
        s = s[:, None]
        return ((row[:, 3] * s + row[:, 2]) * s + row[:, 1]) * s + row[:, 0]

    def deriv_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        s = (ts - self.t0) / self.h
        idx = np.clip(s.astype(int), 0, self.n_segments - 1)
        s = (s - idx)[:, None]
        row = self.coeffs[idx]
        return ((3.0 * row[:, 3] * s + 2.0 * row[:, 2]) * s + row[:, 1]) / self.h

    def max_abs_velocity(self) -> np.ndarray:
        """Per-channel certified bound on |velocity| over the whole domain."""
        v0 = self.coeffs[:, 1] / self.h
        v1 = (self.coeffs[:, 1] + 2.0 * self.coeffs[:, 2] + 3.0 * self.coeffs[:, 3]) / self.h
        # Segment displacement is b + c + d, so the mid control value is
        # 3*delta/h - v0 - v1.
        mid = 3.0 * (
            self.coeffs[:, 1] + self.coeffs[:, 2] + self.coeffs[:, 3]
        ) / self.h - v0 - v1
        ctrl = np.abs(np.stack([v0, mid, v1], axis=1))
        return ctrl.max(axis=(0, 1))
