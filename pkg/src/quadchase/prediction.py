"""Future-position prediction set for the evading vehicle.

Two extremal constant-input rollouts (working speed bound paired with the low
and high slip bounds) span a convex region ahead of the vehicle: a disk
sector between the two extremal bearings when they subtend at most pi, and
the circular segment closed by their chord when they subtend more. The
vehicle's future position is estimated as the Chebyshev center of that
region.

Sector points at angle ``t`` are ``center + r * (cos t, sin t)``; extremal
bearings are full-quadrant ``atan2`` angles of the rollout endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .evader import VehicleState, VelocityBounds, ground_velocity

#: chord count used to polygonize the arc for the Chebyshev LP
ARC_CHORDS = 128


@dataclass(frozen=True)
class PredictionSector:
    center: np.ndarray
    radius: float
    theta_lo: float
    theta_hi: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        if self.radius < 0:
            raise ValueError("sector radius must be nonnegative")
        if self.theta_lo > self.theta_hi:
            raise ValueError("sector angles must satisfy theta_lo <= theta_hi")
        if self.theta_hi - self.theta_lo > 2.0 * np.pi + 1e-12:
            raise ValueError("sector width must not exceed 2*pi")

    @property
    def width(self) -> float:
        return self.theta_hi - self.theta_lo

    @property
    def arm_lo(self) -> np.ndarray:
        return self.center + self.radius * np.array(
            [np.cos(self.theta_lo), np.sin(self.theta_lo)])

    @property
    def arm_hi(self) -> np.ndarray:
        return self.center + self.radius * np.array(
            [np.cos(self.theta_hi), np.sin(self.theta_hi)])

    def to_dict(self) -> dict:
        return {
            "center": [float(self.center[0]), float(self.center[1])],
            "radius": float(self.radius),
            "theta_lo": float(self.theta_lo),
            "theta_hi": float(self.theta_hi),
        }


@dataclass(frozen=True)
class PointEstimate:
    point: np.ndarray
    inradius: float

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(2))

    def to_dict(self) -> dict:
        return {"point": [float(self.point[0]), float(self.point[1])],
                "inradius": float(self.inradius)}


def propagate_extremal(start: VehicleState, bounds: VelocityBounds, N: int,
                       dt: float, which: str) -> np.ndarray:
    """Roll the vehicle kinematics N steps under one extremal constant input.

    The input holds the working speed bound and either the low or the high
    slip bound, with the heading frozen at the last measured value. Returns
    the N+1 positions including the start.
    """
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    if which == "lower":
        slip = bounds.delta_lo
    elif which == "upper":
        slip = bounds.delta_hi
    else:
        raise ValueError(f"which must be 'lower' or 'upper', got {which!r}")
    u = ground_velocity(bounds.v_bar, start.heading, slip)
    steps = np.arange(N + 1).reshape(-1, 1)
    return start.position + steps * dt * u


def build_sector(start, lower_end, upper_end, bounds: VelocityBounds, N: int,
                 dt: float) -> PredictionSector:
    """Build the prediction sector from the two extremal rollout endpoints.

    Bearings are full-quadrant angles of (endpoint - start); the radius is
    the distance the vehicle can cover over the horizon at the working speed
    bound. Coincident endpoints and start degenerate to a point sector.
    """
    start = np.asarray(start, dtype=float).reshape(2)
    lower_end = np.asarray(lower_end, dtype=float).reshape(2)
    upper_end = np.asarray(upper_end, dtype=float).reshape(2)
    radius = bounds.v_bar * N * dt

    d_lo = lower_end - start
    d_hi = upper_end - start
    if radius <= 0 or (np.linalg.norm(d_lo) < 1e-12 and np.linalg.norm(d_hi) < 1e-12):
        return PredictionSector(center=start, radius=0.0, theta_lo=0.0, theta_hi=0.0)

    a = float(np.arctan2(d_lo[1], d_lo[0]))
    b = float(np.arctan2(d_hi[1], d_hi[0]))
    return PredictionSector(center=start, radius=radius,
                            theta_lo=min(a, b), theta_hi=max(a, b))


def _polygon(sector: PredictionSector, chords: int = ARC_CHORDS) -> np.ndarray:
    """Counter-clockwise convex polygon inscribed in the sector."""
    ts = np.linspace(sector.theta_lo, sector.theta_hi, chords + 1)
    arc = sector.center + sector.radius * np.column_stack([np.cos(ts), np.sin(ts)])
    if sector.width <= np.pi:
        # pie slice: apex at the center, then along the arc
        return np.vstack([sector.center, arc])
    # circular segment: the chord between the extremal points closes the arc
    return arc


def _halfspaces(poly: np.ndarray):
    """Edges of a CCW convex polygon as A x <= b rows."""
    nxt = np.roll(poly, -1, axis=0)
    edges = nxt - poly
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    lengths = np.linalg.norm(normals, axis=1)
    keep = lengths > 1e-14
    A = normals[keep]
    b = np.einsum("ij,ij->i", A, poly[keep])
    return A, b


def chebyshev_center(sector: PredictionSector) -> PointEstimate:
    """Center of the largest disk inscribed in the sector.

    Solved as an LP over a chordal polygonization of the arc: maximize r
    subject to ``a_i . x + r * ||a_i|| <= b_i``. The polygon is inscribed in
    the sector, so the returned point is an exact member of the true set.
    Degenerate sectors return their midpoint with zero inradius.
    """
    if sector.radius <= 1e-8:
        return PointEstimate(point=sector.center.copy(), inradius=0.0)
    if sector.width <= 1e-9:
        mid = sector.center + 0.5 * sector.radius * np.array(
            [np.cos(sector.theta_lo), np.sin(sector.theta_lo)])
        return PointEstimate(point=mid, inradius=0.0)

    A, b = _halfspaces(_polygon(sector))
    norms = np.linalg.norm(A, axis=1)
    c = np.array([0.0, 0.0, -1.0])
    A_ub = np.column_stack([A, norms])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None), (None, None), (0, None)],
                  method="highs")
    if not res.success:
        raise RuntimeError(f"Chebyshev LP failed: {res.message}")
    point = res.x[:2]
    if not contains(sector, point, tol=1e-7):
        raise RuntimeError("Chebyshev center escaped the sector (geometry bug)")
    return PointEstimate(point=point, inradius=float(res.x[2]))


def _in_triangle(p, a, b, c, tol: float) -> bool:
    def cross(o, q, r):
        return (q[0] - o[0]) * (r[1] - o[1]) - (q[1] - o[1]) * (r[0] - o[0])

    d1 = cross(a, b, p)
    d2 = cross(b, c, p)
    d3 = cross(c, a, p)
    has_neg = (d1 < -tol) or (d2 < -tol) or (d3 < -tol)
    has_pos = (d1 > tol) or (d2 > tol) or (d3 > tol)
    return not (has_neg and has_pos)


def contains(sector: PredictionSector, p, tol: float = 1e-9) -> bool:
    """Exact membership in the sector-union geometry (no polygonization).

    A point belongs if it lies within the radius and inside the angular span
    (the disk-sector part), or inside the triangle spanned by the center and
    the two extremal arm endpoints.
    """
    p = np.asarray(p, dtype=float).reshape(2)
    d = p - sector.center
    r = float(np.hypot(d[0], d[1]))
    if r > sector.radius + tol:
        return False
    if sector.radius <= 1e-12:
        return r <= tol
    if r <= tol:
        return True

    ang = float(np.arctan2(d[1], d[0]))
    ang_tol = tol / max(r, tol)
    in_span = False
    for shift in (-2.0 * np.pi, 0.0, 2.0 * np.pi):
        if sector.theta_lo - ang_tol <= ang + shift <= sector.theta_hi + ang_tol:
            in_span = True
            break
    if in_span:
        return True
    return _in_triangle(p, sector.center, sector.arm_lo, sector.arm_hi, tol)
