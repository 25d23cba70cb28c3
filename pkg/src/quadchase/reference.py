"""Minimum-jerk reference trajectories for the tracking cost.

A quintic polynomial per axis is the unconstrained minimizer of the
integrated squared jerk under endpoint position/velocity/acceleration
constraints, so fitting one reduces to a 6x6 linear solve per axis. Sampled
reference states carry attitude angles derived from the flatness relations
``xdd = g * theta`` and ``ydd = -g * phi`` (switchable to all-zero angles);
the final sample always has zero roll/pitch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import QuadParams, QuadState


@dataclass(frozen=True)
class QuinticSegment:
    coeffs: np.ndarray  # (3, 6) per-axis polynomial coefficients, low order first
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float).reshape(3, 6))
        if self.duration <= 0:
            raise ValueError("segment duration must be positive")

    def _eval(self, tau, deriv: int) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        out = np.zeros(tau.shape + (3,))
        for k in range(deriv, 6):
            fac = np.prod(np.arange(k, k - deriv, -1)) if deriv else 1.0
            out += np.multiply.outer(tau ** (k - deriv), fac * self.coeffs[:, k])
        return out

    def position(self, tau):
        return self._eval(tau, 0)

    def velocity(self, tau):
        return self._eval(tau, 1)

    def acceleration(self, tau):
        return self._eval(tau, 2)

    def jerk(self, tau):
        return self._eval(tau, 3)

    def jerk_cost(self) -> float:
        """Exact integral of the squared jerk norm over the segment."""
        total = 0.0
        for axis in range(3):
            j = np.polynomial.polynomial.polyder(self.coeffs[axis], 3)
            sq = np.polynomial.polynomial.polymul(j, j)
            integ = np.polynomial.polynomial.polyint(sq)
            total += np.polynomial.polynomial.polyval(self.duration, integ)
        return float(total)


@dataclass(frozen=True)
class ReferencePoint:
    state: QuadState

    def to_array(self) -> np.ndarray:
        return self.state.to_array()


def fit_min_jerk(start_pos, start_vel, start_acc, end_pos, end_vel, end_acc,
                 duration: float) -> QuinticSegment:
    """Fit the jerk-minimizing quintic through the six boundary conditions.

    Each axis solves the 6x6 system pinning position, velocity and
    acceleration at both ends.
    """
    if duration <= 0:
        raise ValueError("segment duration must be positive")
    T = float(duration)

    def deriv_row(tau, deriv):
        row = np.zeros(6)
        for k in range(deriv, 6):
            fac = np.prod(np.arange(k, k - deriv, -1)) if deriv else 1.0
            row[k] = fac * tau ** (k - deriv)
        return row

    M = np.array([deriv_row(0.0, d) for d in range(3)]
                 + [deriv_row(T, d) for d in range(3)])
    start = np.column_stack([np.asarray(v, dtype=float).reshape(3)
                             for v in (start_pos, start_vel, start_acc)])
    end = np.column_stack([np.asarray(v, dtype=float).reshape(3)
                           for v in (end_pos, end_vel, end_acc)])
    coeffs = np.linalg.solve(M, np.vstack([start.T, end.T]))
    return QuinticSegment(coeffs=coeffs.T, duration=T)


def sample_reference(seg: QuinticSegment, N: int, dt: float, params: QuadParams,
                     angle_mode: str = "flat") -> list:
    """Sample N+1 reference states along the segment.

    Attitude angles come from the flatness relations (``angle_mode='flat'``)
    or are zeroed (``angle_mode='zero'``); the terminal sample always has
    zero angles and angle rates.
    """
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    if N * dt > seg.duration + 1e-9:
        raise ValueError(f"horizon {N * dt} s exceeds segment duration {seg.duration} s")
    if angle_mode not in ("flat", "zero"):
        raise ValueError(f"unknown angle mode {angle_mode!r}")

    taus = np.arange(N + 1) * dt
    pos = seg.position(taus)
    vel = seg.velocity(taus)
    acc = seg.acceleration(taus)
    jrk = seg.jerk(taus)

    g = params.g
    points = []
    for k in range(N + 1):
        if angle_mode == "flat" and k < N:
            theta = acc[k, 0] / g
            theta_dot = jrk[k, 0] / g
            phi = -acc[k, 1] / g
            phi_dot = -jrk[k, 1] / g
        else:
            theta = theta_dot = phi = phi_dot = 0.0
        points.append(ReferencePoint(QuadState(
            x=pos[k, 0], x_dot=vel[k, 0], theta=theta, theta_dot=theta_dot,
            y=pos[k, 1], y_dot=vel[k, 1], phi=phi, phi_dot=phi_dot,
            z=pos[k, 2], z_dot=vel[k, 2],
        )))
    return points


def make_reference(current: QuadState, estimate_point, capture_height: float,
                   N: int, dt: float, params: QuadParams,
                   end_velocity=None, angle_mode: str = "flat") -> list:
    """Reference from the quadcopter's current state to the capture point.

    The segment starts at the current position/velocity with acceleration
    reconstructed from the current angles via flatness, ends at the
    estimated vehicle position lifted to the capture height, co-moving with
    the vehicle's measured ground velocity, with zero end acceleration, and
    spans exactly the prediction horizon.
    """
    est = np.asarray(estimate_point, dtype=float).reshape(2)
    start_pos = current.position
    start_vel = np.array([current.x_dot, current.y_dot, current.z_dot])
    start_acc = np.array([params.g * current.theta, -params.g * current.phi, 0.0])
    end_vel = np.zeros(3)
    if end_velocity is not None:
        ev = np.asarray(end_velocity, dtype=float).reshape(2)
        end_vel[:2] = ev
    seg = fit_min_jerk(start_pos, start_vel, start_acc,
                       np.array([est[0], est[1], capture_height]),
                       end_vel, np.zeros(3), N * dt)
    return sample_reference(seg, N, dt, params, angle_mode=angle_mode)
