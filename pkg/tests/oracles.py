"""Independent reference computations the test suite checks against.

Everything in this module is deliberately written from first principles
(fine-step integration, dense grids, convex hulls of point clouds, a
projected-gradient QP solver) and never calls the code paths it is used to
verify.
"""

from __future__ import annotations

import numpy as np


def rk4_integrate(A, B, G, x0, u, T, h=1e-5):
    """Integrate x' = A x + B u + G with constant u by fixed-step RK4.

    Supports batched states: x0 with shape (n,) or (n, batch).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    G = np.asarray(G, dtype=float).reshape(-1)
    x = np.array(x0, dtype=float)
    batched = x.ndim == 2
    drive = B @ np.asarray(u, dtype=float) + (G[:, None] if batched else G)

    def f(state):
        return A @ state + drive

    steps = int(round(T / h))
    if abs(steps * h - T) > 1e-12:
        steps += 1
        h = T / steps
    for _ in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


# ---------------------------------------------------------------------------
# sector geometry, reimplemented from the definition


def sector_inside(center, radius, theta_lo, theta_hi, pts, tol=1e-12):
    """Membership of points in sector-union geometry, written independently:
    polar test for the pie part, barycentric test for the closing triangle."""
    pts = np.atleast_2d(pts)
    d = pts - np.asarray(center, dtype=float)
    r = np.hypot(d[:, 0], d[:, 1])
    ang = np.arctan2(d[:, 1], d[:, 0])
    in_disk = r <= radius + tol
    in_span = np.zeros(len(pts), dtype=bool)
    for shift in (-2 * np.pi, 0.0, 2 * np.pi):
        in_span |= (theta_lo - tol <= ang + shift) & (ang + shift <= theta_hi + tol)
    in_span |= r <= tol

    p1 = np.asarray(center) + radius * np.array([np.cos(theta_lo), np.sin(theta_lo)])
    p2 = np.asarray(center) + radius * np.array([np.cos(theta_hi), np.sin(theta_hi)])
    a = np.asarray(center, dtype=float)

    def cross(o, q, r_):
        return (q[0] - o[0]) * (r_[:, 1] - o[1]) - (q[1] - o[1]) * (r_[:, 0] - o[0])

    d1 = cross(a, p1, pts)
    d2 = np.array([(p2[0] - p1[0]) * (pts[:, 1] - p1[1])
                   - (p2[1] - p1[1]) * (pts[:, 0] - p1[0])])
    d2 = d2.reshape(-1)
    d3 = (a[0] - p2[0]) * (pts[:, 1] - p2[1]) - (a[1] - p2[1]) * (pts[:, 0] - p2[0])
    neg = (d1 < -tol) | (d2 < -tol) | (d3 < -tol)
    pos = (d1 > tol) | (d2 > tol) | (d3 > tol)
    in_tri = ~(neg & pos)

    return in_disk & (in_span | in_tri)


def _dist_to_segment(pts, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-18:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])


def sector_boundary_distance(center, radius, theta_lo, theta_hi, pts):
    """Exact distance from points to the sector boundary curve."""
    pts = np.atleast_2d(pts)
    center = np.asarray(center, dtype=float)
    d = pts - center
    r = np.hypot(d[:, 0], d[:, 1])
    ang = np.arctan2(d[:, 1], d[:, 0])

    # distance to the arc segment of the boundary
    in_span = np.zeros(len(pts), dtype=bool)
    for shift in (-2 * np.pi, 0.0, 2 * np.pi):
        in_span |= (theta_lo <= ang + shift) & (ang + shift <= theta_hi)
    p_lo = center + radius * np.array([np.cos(theta_lo), np.sin(theta_lo)])
    p_hi = center + radius * np.array([np.cos(theta_hi), np.sin(theta_hi)])
    arc_dist = np.where(in_span, np.abs(r - radius),
                        np.minimum(np.hypot(pts[:, 0] - p_lo[0], pts[:, 1] - p_lo[1]),
                                   np.hypot(pts[:, 0] - p_hi[0], pts[:, 1] - p_hi[1])))

    width = theta_hi - theta_lo
    if width <= np.pi:
        e1 = _dist_to_segment(pts, center, p_lo)
        e2 = _dist_to_segment(pts, center, p_hi)
        edge_dist = np.minimum(e1, e2)
    else:
        edge_dist = _dist_to_segment(pts, p_lo, p_hi)
    return np.minimum(arc_dist, edge_dist)


def grid_inradius(center, radius, theta_lo, theta_hi, n=500):
    """Max over a dense grid of the min distance to the sector boundary."""
    center = np.asarray(center, dtype=float)
    lo = center - radius
    hi = center + radius
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = sector_inside(center, radius, theta_lo, theta_hi, pts)
    if not np.any(inside):
        return 0.0, center
    pin = pts[inside]
    dist = sector_boundary_distance(center, radius, theta_lo, theta_hi, pin)
    k = int(np.argmax(dist))
    return float(dist[k]), pin[k]


# ---------------------------------------------------------------------------
# projected-gradient QP reference solver


def solve_qp_fista(H, f, A, b, iters=20000, tol=1e-12):
    """Reference solve of min 1/2 z'Hz + f'z s.t. A z <= b, H positive definite.

    Accelerated projected gradient on the dual: the dual objective is smooth
    with a simple nonnegativity constraint, so FISTA applies directly. The
    primal iterate is recovered from the dual at the end.
    """
    H = np.asarray(H, dtype=float)
    f = np.asarray(f, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    Hinv = np.linalg.inv(H)
    M = A @ Hinv @ A.T
    c = A @ Hinv @ f + b
    L = float(np.max(np.linalg.eigvalsh(M))) if M.size else 0.0
    if L <= 0:
        z = -Hinv @ f
        return z, 0.5 * z @ H @ z + f @ z

    lam = np.zeros(len(b))
    mom = lam.copy()
    t_k = 1.0
    for _ in range(iters):
        grad = M @ mom + c
        new = np.maximum(mom - grad / L, 0.0)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        mom = new + ((t_k - 1.0) / t_next) * (new - lam)
        if np.max(np.abs(new - lam)) < tol:
            lam = new
            break
        lam = new
        t_k = t_next
    z = -Hinv @ (f + A.T @ lam)
    return z, float(0.5 * z @ H @ z + f @ z)


# ---------------------------------------------------------------------------
# brute-force one-step backward reachability for low-dimensional toys


def grid_pre_membership(x, A, B, G, target_A, target_b, u_lo, u_hi, n_u=2001,
                        tol=1e-9):
    """True when some gridded input maps x into the target set."""
    x = np.asarray(x, dtype=float)
    for u in np.linspace(u_lo, u_hi, n_u):
        nxt = A @ x + B.reshape(-1) * u + np.asarray(G, dtype=float).reshape(-1)
        if np.all(target_A @ nxt <= target_b + tol):
            return True
    return False
