"""Independent test oracles, written before the implementations they check.

Each oracle deliberately uses a different algorithm and linear-algebra path
than the production code: the QP oracle is projected gradient on the split
nonnegative dual (vs. operator splitting in the solver), and the Jacobian
oracle is the analytic screw-axis formula (vs. finite differences).
"""

from __future__ import annotations

import numpy as np


def qp_projected_gradient(H, g, A, l, u, max_iters=400_000, tol=1e-10):
    """Brute-force QP oracle: FISTA-accelerated projected gradient on the dual.

    Solves min 0.5 x'Hx + g'x  s.t.  l <= Ax <= u  for strictly convex H by
    maximizing the dual over split multipliers (a, b) >= 0 with y = a - b,
    projecting onto the nonnegative orthant after each gradient step. Stops when
    the recovered primal point is feasible and complementary to ~``tol``.

    Returns (x, y). Stationarity holds exactly by construction since
    x = -H^{-1}(g + A'y).
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, H.shape[0])
    m = A.shape[0]
    l = np.asarray(l, dtype=float).reshape(m)
    u = np.asarray(u, dtype=float).reshape(m)

    Hinv = np.linalg.inv(H)
    if m == 0:
        x = -Hinv @ g
        return x, np.zeros(0)

    Q = A @ Hinv @ A.T
    c = A @ (Hinv @ g)
    # Lipschitz constant of the split-dual gradient.
    L = 2.0 * float(np.linalg.eigvalsh(Q).max()) + 1e-12
    step = 1.0 / L

    fin_u = np.isfinite(u)
    fin_l = np.isfinite(l)
    u_t = np.where(fin_u, u, 0.0)
    l_t = np.where(fin_l, l, 0.0)

    def objective(a, b):
        v = a - b
        return 0.5 * v @ (Q @ v) + c @ v + a @ u_t - b @ l_t

    def primal(a, b):
        y = a - b
        x = -Hinv @ (g + A.T @ y)
        return x, y

    a = np.zeros(m)
    b = np.zeros(m)
    ta, tb = a.copy(), b.copy()
    t_mom = 1.0
    f_prev = objective(a, b)

    for k in range(max_iters):
        v = ta - tb
        grad_common = Q @ v + c
        a_new = ta - step * (grad_common + u_t)
        b_new = tb - step * (-grad_common - l_t)
        np.maximum(a_new, 0.0, out=a_new)
        np.maximum(b_new, 0.0, out=b_new)
        a_new[~fin_u] = 0.0
        b_new[~fin_l] = 0.0

        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        beta = (t_mom - 1.0) / t_next
        ta = a_new + beta * (a_new - a)
        tb = b_new + beta * (b_new - b)
        a, b, t_mom = a_new, b_new, t_next

        if (k + 1) % 50 == 0:
            f = objective(a, b)
            if f > f_prev:  # adaptive restart
                ta, tb, t_mom = a.copy(), b.copy(), 1.0
            f_prev = f
            x, y = primal(a, b)
            ax = A @ x
            viol = max(0.0, float(np.max(ax - u, initial=0.0)), float(np.max(l - ax, initial=0.0)))
            comp = _comp_slack(ax, y, l, u)
            if viol <= tol and comp <= max(tol, 1e-9):
                return x, y

    return primal(a, b)


def _comp_slack(ax, y, l, u):
    pos = np.maximum(y, 0.0)
    neg = np.maximum(-y, 0.0)
    fin_u, fin_l = np.isfinite(u), np.isfinite(l)
    u_s = np.where(fin_u, u, 0.0)
    l_s = np.where(fin_l, l, 0.0)
    up = np.where(fin_u, np.abs(pos * (u_s - ax)), np.where(pos > 1e-12, np.inf, 0.0))
    lo = np.where(fin_l, np.abs(neg * (ax - l_s)), np.where(neg > 1e-12, np.inf, 0.0))
    if up.size == 0:
        return 0.0
    return float(max(up.max(), lo.max()))


def screw_axis_jacobian(model, q, ee):
    """Analytic geometric Jacobian for a serial chain of revolute/prismatic joints.

    Columns: revolute -> (w x (p_ee - p_j), R_ee^T w); prismatic -> (w, 0),
    matching the (world position, body-frame orientation-log) convention.
    """
    from rtgsim.kinematics import JointType, fk, joint_world_frames

    q = np.asarray(q, dtype=float)
    frames = joint_world_frames(model, q, ee)
    ee_pose = fk(model, q, ee)
    n = len(q)
    J = np.zeros((6, n))
    for col, jidx in enumerate(model.branch(ee)):
        joint = model.joints[jidx]
        origin = frames[col]  # world pose of the joint frame (after its motion)
        axis_world = origin.r @ joint.axis
        if joint.jtype is JointType.PRISMATIC:
            J[:3, jidx] = axis_world
        else:
            J[:3, jidx] = np.cross(axis_world, ee_pose.p - origin.p)
            J[3:, jidx] = ee_pose.r.T @ axis_world
    return J
