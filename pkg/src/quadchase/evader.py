"""Ground-vehicle kinematics, body-frame velocity recovery, and bound learning.

The vehicle is a planar point mass driven directly by a ground-frame velocity
command. Headings are bearings measured from the +y axis, so a velocity
``(vx, vy)`` has bearing ``atan2(vx, vy)``; the slip angle is the wrapped
difference between that bearing and the measured heading, and the body-frame
velocity is ``speed * (sin(slip), cos(slip))``. With this convention
slip + heading reconstructs the ground velocity exactly in all quadrants.

Speed and slip bounds start from known priors and are pulled toward window
averages of recent measurements with exponential-moving-average weights.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

#: below this ground speed the slip angle is numerically meaningless
SPEED_EPSILON = 1e-3


class EmptyHistoryError(ValueError):
    pass


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    if w == -np.pi:
        w = np.pi
    return float(w)


def bearing(vx: float, vy: float) -> float:
    """Bearing of a ground velocity, measured from the +y axis."""
    return float(np.arctan2(vx, vy))


@dataclass(frozen=True)
class VehicleState:
    x_v: float = 0.0
    y_v: float = 0.0
    v_x: float = 0.0
    v_y: float = 0.0
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x_v, self.y_v])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y])

    @property
    def speed(self) -> float:
        return float(np.hypot(self.v_x, self.v_y))


@dataclass(frozen=True)
class VelocityBounds:
    """Prior and EMA-updated bounds on the vehicle's body-frame velocity.

    ``V_bar`` and ``(Theta_lo, Theta_hi)`` are the fixed priors; ``v_bar``
    and ``(delta_lo, delta_hi)`` are the working bounds, re-initialized to
    the priors and updated from measurement windows.

    beta_v defaults to 1 (pure window mean, still clamped to the prior): any
    prior blend keeps the working speed bound away from zero for a parked
    vehicle, which biases the position prediction ahead of a target that is
    not moving.
    """

    V_bar: float = 1.0
    Theta_lo: float = -0.6
    Theta_hi: float = 0.6
    v_bar: float = 1.0
    delta_lo: float = -0.6
    delta_hi: float = 0.6
    beta_v: float = 1.0
    beta_lo: float = 0.7
    beta_hi: float = 0.7

    def __post_init__(self):
        if self.Theta_lo > self.Theta_hi:
            raise ValueError("Theta_lo must not exceed Theta_hi")
        for b in (self.beta_v, self.beta_lo, self.beta_hi):
            if not 0.0 <= b <= 1.0:
                raise ValueError("EMA weights must lie in [0, 1]")

    @staticmethod
    def from_priors(V_bar: float, Theta_lo: float, Theta_hi: float,
                    beta_v: float = 1.0, beta_lo: float = 0.7,
                    beta_hi: float = 0.7) -> "VelocityBounds":
        return VelocityBounds(V_bar=V_bar, Theta_lo=Theta_lo, Theta_hi=Theta_hi,
                              v_bar=V_bar, delta_lo=Theta_lo, delta_hi=Theta_hi,
                              beta_v=beta_v, beta_lo=beta_lo, beta_hi=beta_hi)

    def admits(self, speed: float, slip: float, tol: float = 1e-9) -> bool:
        """Membership test for the prior bound set (speed within V_bar,
        slip within the prior angle range); stationary samples pass."""
        if speed <= SPEED_EPSILON:
            return True
        return (speed <= self.V_bar + tol
                and self.Theta_lo - tol <= slip <= self.Theta_hi + tol)


class EvaderHistory:
    """Ring buffer of the last L (position, velocity, heading, t) samples.

    Single-writer: the simulation loop pushes, the planner reads snapshots.
    Timestamps must be strictly increasing.
    """

    def __init__(self, window: int = 20):
        if window < 1:
            raise ValueError("window length must be >= 1")
        self.window = window
        self._buf: deque = deque(maxlen=window)

    def __len__(self) -> int:
        return len(self._buf)

    def push(self, sample: VehicleState, t: float) -> None:
        if self._buf and t <= self._buf[-1][1]:
            raise ValueError("history timestamps must be strictly increasing")
        self._buf.append((sample, float(t)))

    def samples(self):
        return [s for s, _ in self._buf]

    def latest(self) -> VehicleState:
        if not self._buf:
            raise EmptyHistoryError("evader history is empty")
        return self._buf[-1][0]

    def clear(self) -> None:
        self._buf.clear()


def vehicle_step(state: VehicleState, u, dt: float) -> VehicleState:
    """Advance the point-mass kinematics one step: position += dt * u.

    The stored velocity is the applied command and the stored heading is the
    command's bearing (a zero-slip vehicle points where it drives); a
    near-zero command keeps the previous heading.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u, dtype=float).reshape(2)
    speed = float(np.hypot(u[0], u[1]))
    heading = bearing(u[0], u[1]) if speed > SPEED_EPSILON else state.heading
    return VehicleState(
        x_v=state.x_v + dt * u[0],
        y_v=state.y_v + dt * u[1],
        v_x=u[0],
        v_y=u[1],
        heading=heading,
    )


def body_frame_velocity(sample: VehicleState):
    """Recover (speed, slip, body-frame velocity) from a measured sample.

    slip = bearing(v) - heading, wrapped; body velocity is
    ``speed * (sin(slip), cos(slip))``. Rotating the body velocity back by
    the heading reproduces the ground velocity. Samples below the speed
    epsilon return the designated stationary result (0 speed, 0 slip).
    """
    speed = sample.speed
    if speed <= SPEED_EPSILON:
        return 0.0, 0.0, np.zeros(2)
    slip = wrap_angle(bearing(sample.v_x, sample.v_y) - sample.heading)
    body = speed * np.array([np.sin(slip), np.cos(slip)])
    return speed, slip, body


def ground_velocity(speed: float, heading: float, slip: float) -> np.ndarray:
    """Inverse of :func:`body_frame_velocity`: ground velocity from
    (speed, heading, slip), i.e. ``speed * (sin(heading+slip), cos(heading+slip))``."""
    a = heading + slip
    return speed * np.array([np.sin(a), np.cos(a)])


def circular_mean(angles) -> float:
    a = np.asarray(angles, dtype=float)
    return float(np.arctan2(np.mean(np.sin(a)), np.mean(np.cos(a))))


def update_bounds(bounds: VelocityBounds, history: EvaderHistory) -> VelocityBounds:
    """EMA update of the working bounds from the measurement window.

    Window means: speed mean (arithmetic) and slip mean (circular; naive
    averaging breaks at the +-pi wrap). Then

        v_bar    = V_bar    * (1 - beta_v)  + beta_v  * speed_mean
        delta_lo = Theta_lo * (1 - beta_lo) + beta_lo * slip_mean
        delta_hi = Theta_hi * (1 - beta_hi) + beta_hi * slip_mean

    The result is clamped to 0 < v_bar <= V_bar (measurement noise can push
    the window mean above the prior, which would break containment of the
    prediction set in the reachable ball) and delta_lo <= delta_hi
    (swap-on-violation; both EMA targets share the same slip mean and can
    cross when the priors are asymmetric).
    """
    samples = history.samples()
    if not samples:
        raise EmptyHistoryError("cannot update bounds from an empty history")

    speeds = []
    slips = []
    for s in samples:
        speed, slip, _ = body_frame_velocity(s)
        speeds.append(speed)
        if speed > SPEED_EPSILON:
            slips.append(slip)
    speed_mean = float(np.mean(speeds))
    slip_mean = circular_mean(slips) if slips else 0.0

    v_bar = bounds.V_bar * (1.0 - bounds.beta_v) + bounds.beta_v * speed_mean
    delta_lo = bounds.Theta_lo * (1.0 - bounds.beta_lo) + bounds.beta_lo * slip_mean
    delta_hi = bounds.Theta_hi * (1.0 - bounds.beta_hi) + bounds.beta_hi * slip_mean

    v_bar = min(max(v_bar, 1e-9), bounds.V_bar)
    if delta_lo > delta_hi:
        delta_lo, delta_hi = delta_hi, delta_lo

    return replace(bounds, v_bar=v_bar, delta_lo=delta_lo, delta_hi=delta_hi)
