"""Dense convex QP solver: minimize 0.5 x'Hx + g'x subject to l <= Ax <= u.

The algorithm is operator splitting (ADMM) with over-relaxation and a single
factorization of the condensed matrix K = H + sigma*I + A' diag(rho) A reused
across all iterations. Equality rows (l_i == u_i) get a 1e3-times larger
penalty, following standard operator-splitting practice; without it the
splice equality constraints used by the trajectory blender converge far too
slowly at the fixed base penalty.

Problems may declare a (half-)bandwidth covering both H and A'A, in which
case K is factored and solved in banded form. A workspace can solve many
problems sharing the same (H, A) but different (g, l, u) in one vectorized
run, which is how the blender handles its per-channel QPs.

Everything is deterministic: fixed penalty, fixed iteration schedule, no
randomized pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cho_solve_banded, cholesky_banded

DEFAULT_RHO = 0.1
DEFAULT_SIGMA = 1e-6
DEFAULT_ALPHA = 1.6
EQUALITY_RHO_SCALE = 1e3
DIVERGE_NORM = 1e10
INFEAS_TOL = 1e-6
COMP_SLACK_TOL = 1e-6
_CHECK_EVERY = 5
# Infeasibility certificates cost several array ops; they only matter for
# hopeless problems, so they run at a coarser cadence than the residual check.
_CERT_EVERY = 25
# Residual balancing: at this cadence, if primal and dual residuals are badly
# imbalanced, rescale rho and refactor. Base penalty stays 0.1; this is a
# convergence safeguard for poorly scaled problems, bounded to a few events.
_RHO_UPDATE_EVERY = 100
_RHO_UPDATE_RATIO = 5.0
_RHO_MAX_UPDATES = 20


@dataclass(frozen=True)
class QpProblem:
    """Dense QP data. ``bandwidth``, when set, bounds the half-bandwidth of
    both H and A'A and enables the banded factorization path."""

    H: np.ndarray
    g: np.ndarray
    A: np.ndarray
    l: np.ndarray
    u: np.ndarray
    bandwidth: int | None = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        g = np.asarray(self.g, dtype=float).ravel()
        n = g.size
        if H.shape != (n, n):
            raise ValueError(f"H shape {H.shape} incompatible with g size {n}")
        A = np.asarray(self.A, dtype=float).reshape(-1, n)
        l = np.asarray(self.l, dtype=float).ravel()
        u = np.asarray(self.u, dtype=float).ravel()
        if l.size != A.shape[0] or u.size != A.shape[0]:
            raise ValueError("l/u length must match the number of constraint rows")
        if np.max(np.abs(H - H.T), initial=0.0) > 1e-12:
            raise ValueError("H must be symmetric to 1e-12")
        if np.any(l > u):
            raise ValueError("constraint bounds require l <= u")
        object.__setattr__(self, "H", H.copy())
        object.__setattr__(self, "g", g.copy())
        object.__setattr__(self, "A", A.copy())
        object.__setattr__(self, "l", l.copy())
        object.__setattr__(self, "u", u.copy())

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass
class QpSolution:
    x: np.ndarray
    y: np.ndarray
    status: str  # "solved" | "max_iters" | "infeasible"
    iterations: int
    primal_residual: float
    dual_residual: float
    comp_residual: float = 0.0


def objective(p: QpProblem, x) -> float:
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ (p.H @ x)) + float(p.g @ x)


def _check_psd(H: np.ndarray) -> None:
    for reg in (0.0, 1e-12, 1e-10, 1e-8):
        try:
            np.linalg.cholesky(H + reg * np.eye(H.shape[0]))
            return
        except np.linalg.LinAlgError:
            continue
    raise ValueError("H is not positive semidefinite (Cholesky failed at all regularizations)")


def kkt_residuals(p: QpProblem, x, y) -> tuple[float, float, float]:
    """(primal feasibility, stationarity, complementary slackness) residuals."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != p.n or y.size != p.m:
        raise ValueError("x/y dimensions do not match the problem")
    ax = p.A @ x if p.m else np.zeros(0)
    primal = max(
        0.0,
        float(np.max(ax - p.u, initial=-np.inf)),
        float(np.max(p.l - ax, initial=-np.inf)),
    )
    primal = max(primal, 0.0)
    dual = float(np.max(np.abs(p.H @ x + p.g + (p.A.T @ y if p.m else 0.0)), initial=0.0))
    comp = _comp_slack(ax, y, p.l, p.u)
    return primal, dual, comp


def _comp_slack(ax, y, l, u) -> float:
    if y.size == 0:
        return 0.0
    pos = np.maximum(y, 0.0)
    neg = np.maximum(-y, 0.0)
    fin_u, fin_l = np.isfinite(u), np.isfinite(l)
    u_s = np.where(fin_u, u, 0.0)
    l_s = np.where(fin_l, l, 0.0)
    up = np.where(fin_u, np.abs(pos * (u_s - ax)), np.where(pos > 1e-12, np.inf, 0.0))
    lo = np.where(fin_l, np.abs(neg * (ax - l_s)), np.where(neg > 1e-12, np.inf, 0.0))
    return float(max(up.max(), lo.max()))


class AdmmWorkspace:
    """Factorization and iteration state for a fixed (H, A) pair.

    Reusable across solves whose g/l/u differ; holds the single Cholesky
    factor of K = H + sigma*I + A' diag(rho) A.
    """

    def __init__(
        self,
        H: np.ndarray,
        A: np.ndarray,
        bandwidth: int | None = None,
        rho: float = DEFAULT_RHO,
        sigma: float = DEFAULT_SIGMA,
        alpha: float = DEFAULT_ALPHA,
        equality_mask: np.ndarray | None = None,
    ):
        self.H = np.asarray(H, dtype=float)
        self.A = np.asarray(A, dtype=float)
        self.n = self.H.shape[0]
        self.m = self.A.shape[0]
        self.alpha = float(alpha)
        self.sigma = float(sigma)
        _check_psd(self.H)

        self._rho_base = float(rho)
        self._eq_mask = (
            np.asarray(equality_mask, dtype=bool)
            if (equality_mask is not None and self.m)
            else np.zeros(self.m, dtype=bool)
        )
        self._bandwidth = int(bandwidth) if bandwidth is not None else None
        self._banded = bandwidth is not None
        self._refactor()

    def _refactor(self) -> None:
        rho_vec = np.full(self.m, self._rho_base)
        rho_vec[self._eq_mask] = self._rho_base * EQUALITY_RHO_SCALE
        self.rho_vec = rho_vec

        K = self.H + self.sigma * np.eye(self.n)
        if self.m:
            K = K + (self.A.T * rho_vec) @ self.A

        if self._banded:
            bw = self._bandwidth
            off = np.abs(np.subtract.outer(np.arange(self.n), np.arange(self.n)))
            if np.max(np.abs(K[off > bw]), initial=0.0) > 1e-12:
                raise ValueError("declared bandwidth does not cover H + A' diag(rho) A")
            ab = np.zeros((bw + 1, self.n))
            for d in range(bw + 1):
                ab[d, : self.n - d] = np.diagonal(K, -d)
            self._factor = cholesky_banded(ab, lower=True, check_finite=False)
        else:
            self._factor = cho_factor(K, lower=True, check_finite=False)

    def _solve_K(self, rhs: np.ndarray) -> np.ndarray:
        if self._banded:
            return cho_solve_banded((self._factor, True), rhs, check_finite=False)
        return cho_solve(self._factor, rhs, check_finite=False)

    def solve_batch(
        self,
        G: np.ndarray,
        L: np.ndarray,
        U: np.ndarray,
        tol_primal: float = 1e-8,
        tol_dual: float = 1e-8,
        max_iters: int = 4000,
        warm_x: np.ndarray | None = None,
        warm_y: np.ndarray | None = None,
    ):
        """Solve k problems sharing (H, A): G is (n, k), L/U are (m, k).

        Returns (X, Y, status, iterations, primal, dual, comp); per-column
        arrays except iterations, which is the shared count at which all
        columns met the tolerances.
        """
        G = np.asarray(G, dtype=float).reshape(self.n, -1)
        k = G.shape[1]
        L = np.asarray(L, dtype=float).reshape(self.m, k)
        U = np.asarray(U, dtype=float).reshape(self.m, k)
        if np.any(L > U):
            raise ValueError("constraint bounds require l <= u")

        x = np.zeros((self.n, k)) if warm_x is None else np.array(warm_x, dtype=float).reshape(self.n, k)
        y = np.zeros((self.m, k)) if warm_y is None else np.array(warm_y, dtype=float).reshape(self.m, k)
        if warm_y is not None and self.m:
            # Dual warm starting is restricted to equality rows: inequality
            # duals from a neighboring problem encode a possibly stale active
            # set and measurably slow convergence when carried over.
            y = np.where(L == U, y, 0.0)
        if self.m:
            z = np.clip(self.A @ x, L, U)
        else:
            z = np.zeros((0, k))

        rho = self.rho_vec[:, None]
        alpha = self.alpha
        status = np.full(k, "max_iters", dtype=object)
        prim = np.zeros(k)
        dual = np.zeros(k)
        comp = np.zeros(k)
        iterations = max_iters
        y_prev = y.copy()
        x_prev = x.copy()
        rho_updates_left = _RHO_MAX_UPDATES

        for it in range(1, max_iters + 1):
            rhs = self.sigma * x - G
            if self.m:
                rhs += self.A.T @ (rho * z - y)
            x_t = self._solve_K(rhs)
            x = alpha * x_t + (1.0 - alpha) * x
            if self.m:
                z_t = self.A @ x_t
                zr = alpha * z_t + (1.0 - alpha) * z
                z = np.clip(zr + y / rho, L, U)
                y = y + rho * (zr - z)

            if it % _CHECK_EVERY == 0 or it == max_iters:
                ax = self.A @ x if self.m else np.zeros((0, k))
                if self.m:
                    prim = np.maximum(
                        np.max(np.maximum(ax - U, L - ax), axis=0, initial=0.0), 0.0
                    )
                else:
                    prim = np.zeros(k)
                grad = self.H @ x + G
                if self.m:
                    grad += self.A.T @ y
                dual = np.max(np.abs(grad), axis=0, initial=0.0)
                comp = self._comp_batch(ax, y, L, U)
                done = (prim <= tol_primal) & (dual <= tol_dual) & (comp <= COMP_SLACK_TOL)
                if bool(np.all(done)):
                    status[:] = "solved"
                    iterations = it
                    break

                if (
                    np.max(np.abs(x), initial=0.0) > DIVERGE_NORM
                    or np.max(np.abs(y), initial=0.0) > DIVERGE_NORM
                ):
                    bad = (
                        np.max(np.abs(x), axis=0, initial=0.0) > DIVERGE_NORM
                    ) | (np.max(np.abs(y), axis=0, initial=0.0) > DIVERGE_NORM)
                    status[bad] = "infeasible"
                    iterations = it
                    break
                if it % _CERT_EVERY == 0 or it == max_iters:
                    infeas = self._certificates(x - x_prev, y - y_prev, G, L, U)
                    if np.any(infeas):
                        status[infeas] = "infeasible"
                        status[~infeas & done] = "solved"
                        iterations = it
                        break
                    x_prev = x.copy()
                    y_prev = y.copy()

                if (
                    self.m
                    and rho_updates_left > 0
                    and it % _RHO_UPDATE_EVERY == 0
                ):
                    worst = ~done
                    pmax = float(np.max(prim[worst], initial=0.0))
                    dmax = float(np.max(dual[worst], initial=0.0))
                    # Only adapt while genuinely unconverged; near the optimum
                    # the residual ratio is noise and adapting would spoil
                    # warm-started endgames.
                    far = pmax > 100.0 * tol_primal or dmax > 100.0 * tol_dual
                    if far and pmax > 0.0 and dmax > 0.0:
                        ratio = np.sqrt(pmax / dmax)
                        if ratio > _RHO_UPDATE_RATIO or ratio < 1.0 / _RHO_UPDATE_RATIO:
                            self._rho_base = float(
                                np.clip(self._rho_base * ratio, 1e-6, 1e6)
                            )
                            self._refactor()
                            rho = self.rho_vec[:, None]
                            rho_updates_left -= 1

        return x, y, status, iterations, prim, dual, comp

    def _comp_batch(self, ax, y, L, U):
        if self.m == 0:
            return np.zeros(ax.shape[1] if ax.ndim == 2 else 1)
        pos = np.maximum(y, 0.0)
        neg = np.maximum(-y, 0.0)
        fin_u, fin_l = np.isfinite(U), np.isfinite(L)
        u_s = np.where(fin_u, U, 0.0)
        l_s = np.where(fin_l, L, 0.0)
        up = np.where(fin_u, np.abs(pos * (u_s - ax)), np.where(pos > 1e-12, np.inf, 0.0))
        lo = np.where(fin_l, np.abs(neg * (ax - l_s)), np.where(neg > 1e-12, np.inf, 0.0))
        return np.maximum(up.max(axis=0, initial=0.0), lo.max(axis=0, initial=0.0))

    def _certificates(self, dx, dy, G, L, U):
        """Per-column primal/dual infeasibility certificates (operator-splitting
        style): a nonzero dy with A'dy ~ 0 and u'(dy)+ + l'(dy)- < 0 certifies
        primal infeasibility; a dx along which the objective is unbounded and
        constraints stay slack certifies dual infeasibility."""
        k = G.shape[1]
        out = np.zeros(k, dtype=bool)
        if self.m:
            ndy = np.max(np.abs(dy), axis=0, initial=0.0)
            mask = ndy > 1e-14
            if np.any(mask):
                aty = np.max(np.abs(self.A.T @ dy), axis=0, initial=0.0)
                dyp = np.maximum(dy, 0.0)
                dyn = np.minimum(dy, 0.0)
                fin_u, fin_l = np.isfinite(U), np.isfinite(L)
                u_s = np.where(fin_u, U, 0.0)
                l_s = np.where(fin_l, L, 0.0)
                sup = np.where(fin_u, u_s * dyp, np.where(dyp > 1e-14 * ndy, np.inf, 0.0))
                slo = np.where(fin_l, l_s * dyn, np.where(-dyn > 1e-14 * ndy, -np.inf, 0.0))
                gap = sup.sum(axis=0) + slo.sum(axis=0)
                out |= mask & (aty <= INFEAS_TOL * ndy) & (gap <= -INFEAS_TOL * ndy)
        ndx = np.max(np.abs(dx), axis=0, initial=0.0)
        mask = ndx > 1e-14
        if np.any(mask):
            hdx = np.max(np.abs(self.H @ dx), axis=0, initial=0.0)
            gdx = np.einsum("ij,ij->j", G, dx)
            cond = mask & (hdx <= INFEAS_TOL * ndx) & (gdx <= -INFEAS_TOL * ndx)
            if self.m and np.any(cond):
                adx = self.A @ dx
                ok_up = np.all(np.where(np.isfinite(U), adx <= INFEAS_TOL * ndx, True), axis=0)
                ok_lo = np.all(np.where(np.isfinite(L), adx >= -INFEAS_TOL * ndx, True), axis=0)
                cond &= ok_up & ok_lo
            out |= cond
        return out


def solve(
    p: QpProblem,
    tol_primal: float = 1e-8,
    tol_dual: float = 1e-8,
    max_iters: int = 4000,
    warm_start: tuple[np.ndarray, np.ndarray] | None = None,
    rho: float = DEFAULT_RHO,
    sigma: float = DEFAULT_SIGMA,
    alpha: float = DEFAULT_ALPHA,
) -> QpSolution:
    """Solve a QpProblem; see module docstring for the algorithm."""
    eq = (p.l == p.u) if p.m else None
    ws = AdmmWorkspace(p.H, p.A, p.bandwidth, rho=rho, sigma=sigma, alpha=alpha, equality_mask=eq)
    warm_x = warm_y = None
    if warm_start is not None:
        warm_x = np.asarray(warm_start[0], dtype=float).reshape(p.n, 1)
        warm_y = np.asarray(warm_start[1], dtype=float).reshape(p.m, 1)
    X, Y, status, iters, prim, dual, comp = ws.solve_batch(
        p.g[:, None],
        p.l[:, None] if p.m else np.zeros((0, 1)),
        p.u[:, None] if p.m else np.zeros((0, 1)),
        tol_primal=tol_primal,
        tol_dual=tol_dual,
        max_iters=max_iters,
        warm_x=warm_x,
        warm_y=warm_y,
    )
    return QpSolution(
        x=X[:, 0].copy(),
        y=Y[:, 0].copy(),
        status=str(status[0]),
        iterations=int(iters),
        primal_residual=float(prim[0]),
        dual_residual=float(dual[0]),
        comp_residual=float(comp[0]),
    )
