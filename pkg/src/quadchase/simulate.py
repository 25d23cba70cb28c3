"""Deterministic closed-loop scenario engine.

One run is a fixed-timestep loop: measure (with seeded noise), plan, queue
the command through the actuation delay, step the LTI plant and the evader.
Identical seed and config give a byte-identical log. The plant here is the
control model itself plus the injected non-idealities; real platforms add
model mismatch on top, which is out of scope and documented as such.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .configio import (input_polytope, load_config, mpc_config, quad_params,
                       state_polytope, terminal_rotational_box,
                       terminal_velocity_box, velocity_bounds)
from .dynamics import DiscreteModel, QuadInput, QuadState, build_continuous, \
    discretize, step as dyn_step
from .evader import (VehicleState, bearing, ground_velocity, vehicle_step,
                     wrap_angle)
from .mpc import MpcController, StepDiagnostics


def tracking_error(quad: QuadState, vehicle: VehicleState) -> float:
    """Horizontal distance between quadcopter and vehicle; altitude is
    regulated to the capture height separately and not part of this metric."""
    return float(np.hypot(quad.x - vehicle.x_v, quad.y - vehicle.y_v))


# ---------------------------------------------------------------------------
# evader policies


class CircularEvader:
    """Drives the exact circle: inputs are chord velocities between analytic
    waypoints, so the path never drifts and the speed stays admissible."""

    def __init__(self, center, radius: float, speed: float, dt: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.speed = float(speed)
        self.dt = dt
        self.omega = self.speed / self.radius

    def start_state(self) -> VehicleState:
        p = self.position(0)
        u = (self.position(1) - p) / self.dt
        return VehicleState(x_v=p[0], y_v=p[1], v_x=u[0], v_y=u[1],
                            heading=bearing(u[0], u[1]))

    def position(self, k: int) -> np.ndarray:
        a = self.omega * k * self.dt
        return self.center + self.radius * np.array([np.cos(a), np.sin(a)])

    def input(self, k: int, state: VehicleState, rng) -> tuple:
        u = (self.position(k + 1) - self.position(k)) / self.dt
        return u, False


class RandomWalkEvader:
    """Bounded random walk in a square arena.

    Speed and heading rate follow clipped autoregressive walks; near a wall
    the heading steers toward the arena center at the rate cap until the
    vehicle points inward again. Wall-steering ticks and hard turns (heading
    rate at 70% of the cap or more) are flagged as heading reversals. All
    draws come from the stream passed in by the engine, so runs are
    reproducible.
    """

    SHARP_TURN_FRACTION = 0.7

    def __init__(self, speed_cap: float, rate_cap: float, arena_half: float,
                 dt: float):
        self.speed_cap = float(speed_cap)
        self.rate_cap = float(rate_cap)
        self.arena_half = float(arena_half)
        self.dt = dt
        self.heading = 0.0
        self.speed = 0.6 * self.speed_cap
        self.rate = 0.0

    def start_state(self) -> VehicleState:
        return VehicleState(heading=self.heading)

    def input(self, k: int, state: VehicleState, rng) -> tuple:
        self.rate = np.clip(0.92 * self.rate + 0.2 * rng.uniform(
            -self.rate_cap, self.rate_cap), -self.rate_cap, self.rate_cap)
        self.speed = float(np.clip(
            self.speed + 0.05 * self.speed_cap * rng.uniform(-1, 1),
            0.3 * self.speed_cap, self.speed_cap))

        margin = 0.3 * self.arena_half
        pos = state.position
        reversal = False
        lookahead = pos + 1.0 * ground_velocity(self.speed, self.heading, 0.0)
        if np.max(np.abs(lookahead)) > self.arena_half - margin:
            to_center = wrap_angle(bearing(-pos[0], -pos[1]) - self.heading)
            if abs(to_center) > 0.2:
                self.rate = np.clip(3.0 * to_center, -self.rate_cap, self.rate_cap)
                reversal = True
        if abs(self.rate) >= self.SHARP_TURN_FRACTION * self.rate_cap:
            reversal = True
        self.heading = wrap_angle(self.heading + self.rate * self.dt)
        return ground_velocity(self.speed, self.heading, 0.0), reversal


class ScriptedEvader:
    """Replays a telemetry trace (velocity columns) as inputs."""

    def __init__(self, velocities: np.ndarray, start=(0.0, 0.0)):
        self.velocities = np.asarray(velocities, dtype=float).reshape(-1, 2)
        self.start = np.asarray(start, dtype=float)

    def start_state(self) -> VehicleState:
        u = self.velocities[0] if len(self.velocities) else np.zeros(2)
        return VehicleState(x_v=self.start[0], y_v=self.start[1],
                            v_x=u[0], v_y=u[1],
                            heading=bearing(u[0], u[1]) if np.hypot(*u) > 1e-3 else 0.0)

    def input(self, k: int, state: VehicleState, rng) -> tuple:
        if k < len(self.velocities):
            return self.velocities[k], False
        return np.zeros(2), False


class StationaryEvader:
    def __init__(self, position=(0.0, 0.0)):
        self.pos = np.asarray(position, dtype=float)

    def start_state(self) -> VehicleState:
        return VehicleState(x_v=self.pos[0], y_v=self.pos[1])

    def input(self, k: int, state: VehicleState, rng) -> tuple:
        return np.zeros(2), False


# ---------------------------------------------------------------------------
# scenario configuration and log


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "circular"
    duration: float = 60.0
    dt: float = 0.05
    seed: int = 0
    noise_pos_std: float = 0.0
    noise_vel_std: float = 0.0
    noise_heading_std: float = 0.0
    delay_steps: int = 0
    quad_start: QuadState = field(default_factory=QuadState)
    vehicle_start: tuple = (2.0, 0.0)
    circle_center: tuple = (0.0, 0.0)
    circle_radius: float = 2.0
    circle_speed: float = 0.5
    random_speed_cap: float = 0.5
    random_rate_cap: float = 1.2
    random_arena_half: float = 2.5
    scripted_velocities: tuple = ()
    convergence_threshold: float = 0.25

    def with_nonidealities(self, sigma: float, delay: int) -> "ScenarioConfig":
        return replace(self, noise_pos_std=sigma, noise_vel_std=0.5 * sigma,
                       noise_heading_std=sigma, delay_steps=delay)


def scenario_from_config(cfg: dict) -> ScenarioConfig:
    qs = cfg["sim.quad_start"]
    return ScenarioConfig(
        kind=cfg["sim.kind"],
        duration=float(cfg["sim.duration"]),
        dt=float(cfg["mpc.dt"]),
        seed=int(cfg["sim.seed"]),
        noise_pos_std=float(cfg["sim.noise_pos"]),
        noise_vel_std=float(cfg["sim.noise_vel"]),
        noise_heading_std=float(cfg["sim.noise_heading"]),
        delay_steps=int(cfg["sim.delay_steps"]),
        quad_start=QuadState.from_array(qs),
        vehicle_start=tuple(cfg["sim.vehicle_start"]),
        circle_center=tuple(cfg["sim.circle_center"]),
        circle_radius=float(cfg["sim.circle_radius"]),
        circle_speed=float(cfg["sim.circle_speed"]),
        random_speed_cap=float(cfg["sim.random_speed_cap"]),
        random_rate_cap=float(cfg["sim.random_rate_cap"]),
        random_arena_half=float(cfg["sim.random_arena_half"]),
        convergence_threshold=float(cfg["sim.convergence_threshold"]),
    )


@dataclass(frozen=True)
class SimRecord:
    t: float
    quad: QuadState
    vehicle: VehicleState
    command: QuadInput
    applied: QuadInput
    error: float
    fault: bool
    reversal: bool
    diagnostics: StepDiagnostics

    CSV_HEADER = (
        "t,x,x_dot,theta,theta_dot,y,y_dot,phi,phi_dot,z,z_dot,"
        "x_v,y_v,v_x,v_y,heading,"
        "cmd_theta,cmd_phi,cmd_thrust,app_theta,app_phi,app_thrust,"
        "error,cost,status,max_slack,est_x,est_y,"
        "sec_cx,sec_cy,sec_radius,sec_theta_lo,sec_theta_hi,v_bar,"
        "fault,reversal"
    )

    def csv_row(self) -> str:
        d = self.diagnostics
        vals = ([self.t] + self.quad.to_array().tolist()
                + [self.vehicle.x_v, self.vehicle.y_v, self.vehicle.v_x,
                   self.vehicle.v_y, self.vehicle.heading]
                + self.command.to_array().tolist()
                + self.applied.to_array().tolist()
                + [self.error, d.cost])
        row = ",".join(repr(float(v)) for v in vals)
        sec = d.sector
        tail = ",".join(repr(float(v)) for v in [
            d.max_slack, d.estimate.point[0], d.estimate.point[1],
            sec.center[0], sec.center[1], sec.radius, sec.theta_lo,
            sec.theta_hi, d.bounds.v_bar])
        return f"{row},{d.status},{tail},{int(self.fault)},{int(self.reversal)}"


@dataclass(frozen=True)
class TrackingMetrics:
    errors: np.ndarray
    dt: float
    threshold: float

    @property
    def steady_state_error(self) -> float:
        tail = self.errors[int(0.75 * len(self.errors)):]
        return float(np.mean(tail))

    @property
    def peak_error(self) -> float:
        return float(np.max(self.errors))

    @property
    def convergence_time(self) -> float:
        below = np.nonzero(self.errors <= self.threshold)[0]
        return float(below[0] * self.dt) if len(below) else float("nan")

    def to_dict(self) -> dict:
        return {
            "steady_state_error": self.steady_state_error,
            "peak_error": self.peak_error,
            "convergence_time": self.convergence_time,
            "threshold": self.threshold,
            "n_steps": len(self.errors),
        }


class SimLog:
    def __init__(self, records, config: ScenarioConfig):
        self.records = list(records)
        self.config = config

    def __len__(self):
        return len(self.records)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.records])

    def metrics(self) -> TrackingMetrics:
        return TrackingMetrics(errors=self.errors, dt=self.config.dt,
                               threshold=self.config.convergence_threshold)

    def reversal_mask(self, window_s: float = 0.5) -> np.ndarray:
        """True on steps within +-window_s of a flagged heading reversal."""
        n = len(self.records)
        mask = np.zeros(n, dtype=bool)
        half = int(round(window_s / self.config.dt))
        for i, r in enumerate(self.records):
            if r.reversal:
                mask[max(0, i - half):min(n, i + half + 1)] = True
        return mask

    def faults(self) -> int:
        return sum(1 for r in self.records if r.fault)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(SimRecord.CSV_HEADER + "\n")
            for r in self.records:
                fh.write(r.csv_row() + "\n")

    def csv_body(self) -> str:
        return "\n".join(r.csv_row() for r in self.records)

    def to_json(self, path) -> None:
        payload = {
            "config": {
                "kind": self.config.kind, "duration": self.config.duration,
                "dt": self.config.dt, "seed": self.config.seed,
                "delay_steps": self.config.delay_steps,
                "noise_pos_std": self.config.noise_pos_std,
            },
            "steps": [r.diagnostics.to_dict() | {"fault": r.fault,
                                                 "reversal": r.reversal}
                      for r in self.records],
            "metrics": self.metrics().to_dict(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)

    def telemetry_csv(self, path) -> None:
        """Evader telemetry in the shared trace format."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,x_v,y_v,v_x,v_y,heading\n")
            for r in self.records:
                v = r.vehicle
                fh.write(",".join(repr(float(x)) for x in
                                  [r.t, v.x_v, v.y_v, v.v_x, v.v_y, v.heading])
                         + "\n")


def load_telemetry_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 3:5]


def telemetry_to_inputs(velocities: np.ndarray) -> np.ndarray:
    """Inputs that reproduce a telemetry trace under the vehicle kinematics.

    Telemetry rows carry the state velocity at each tick; the input applied
    during tick k surfaces as the state velocity of tick k+1, so the input
    sequence is the velocity series shifted by one.
    """
    v = np.asarray(velocities, dtype=float).reshape(-1, 2)
    return v[1:]


# ---------------------------------------------------------------------------
# engine


def _make_policy(config: ScenarioConfig):
    if config.kind == "circular":
        return CircularEvader(config.circle_center, config.circle_radius,
                              config.circle_speed, config.dt)
    if config.kind == "random":
        return RandomWalkEvader(config.random_speed_cap, config.random_rate_cap,
                                config.random_arena_half, config.dt)
    if config.kind == "scripted":
        return ScriptedEvader(np.asarray(config.scripted_velocities),
                              start=config.vehicle_start)
    if config.kind == "stationary":
        return StationaryEvader(config.vehicle_start)
    raise ValueError(f"unknown evader kind {config.kind!r}")


def _noisy_quad(quad: QuadState, rng, config: ScenarioConfig) -> QuadState:
    # draws happen unconditionally so a run's random stream does not depend
    # on the noise amplitudes; paired-seed sweeps then see the same noise
    # shapes scaled by sigma
    n = rng.standard_normal(6)
    arr = quad.to_array().copy()
    arr[[0, 4, 8]] += config.noise_pos_std * n[:3]
    arr[[1, 5, 9]] += config.noise_vel_std * n[3:]
    return QuadState.from_array(arr)


def _noisy_vehicle(vehicle: VehicleState, rng, config: ScenarioConfig) -> VehicleState:
    n = rng.standard_normal(5)
    return VehicleState(
        x_v=vehicle.x_v + config.noise_pos_std * n[0],
        y_v=vehicle.y_v + config.noise_pos_std * n[1],
        v_x=vehicle.v_x + config.noise_vel_std * n[2],
        v_y=vehicle.v_y + config.noise_vel_std * n[3],
        heading=wrap_angle(vehicle.heading + config.noise_heading_std * n[4]),
    )


def run_scenario(config: ScenarioConfig, controller: MpcController,
                 model: DiscreteModel) -> SimLog:
    """Run one closed-loop scenario; same config and seed, same log."""
    if abs(config.dt - controller.config.dt) > 1e-12:
        raise ValueError("scenario dt must match the controller dt")
    if config.kind == "random" and config.random_speed_cap > controller.bounds.V_bar:
        raise ValueError("random evader speed cap exceeds the prior bound")

    seq = np.random.SeedSequence(config.seed)
    evader_rng, noise_rng = [np.random.default_rng(s) for s in seq.spawn(2)]

    policy = _make_policy(config)
    vehicle = policy.start_state()
    if config.kind in ("random", "stationary"):
        # the circle and scripted traces fix their own start positions
        vehicle = replace(vehicle, x_v=float(config.vehicle_start[0]),
                          y_v=float(config.vehicle_start[1]))
    quad = config.quad_start

    controller.reset()
    hover = QuadInput.from_array(model.hover_input)
    queue = [hover] * config.delay_steps
    last_applied = hover

    n_steps = int(round(config.duration / config.dt))
    records = []
    for k in range(n_steps):
        t = k * config.dt
        meas_quad = _noisy_quad(quad, noise_rng, config)
        meas_vehicle = _noisy_vehicle(vehicle, noise_rng, config)

        command, diag, _ = controller.step(meas_quad, meas_vehicle, t)
        fault = diag.status != "optimal"
        if fault:
            command = last_applied  # hold the previous command on a fault

        queue.append(command)
        applied = queue.pop(0)
        last_applied = applied

        u_evader, reversal = policy.input(k, vehicle, evader_rng)

        records.append(SimRecord(
            t=t, quad=quad, vehicle=vehicle, command=command, applied=applied,
            error=tracking_error(quad, vehicle), fault=fault,
            reversal=bool(reversal), diagnostics=diag,
        ))

        quad = dyn_step(model, quad, applied)
        vehicle = vehicle_step(vehicle, u_evader, config.dt)

    return SimLog(records, config)


def build_stack(cfg: dict | None = None, verify_conditions: bool = False):
    """Convenience constructor: (model, controller, scenario) from a config map."""
    cfg = cfg if cfg is not None else load_config(None)
    params = quad_params(cfg)
    model = discretize(build_continuous(params), float(cfg["mpc.dt"]))
    controller = MpcController(
        model=model,
        config=mpc_config(cfg),
        state_polytope=state_polytope(cfg),
        input_polytope=input_polytope(cfg),
        bounds=velocity_bounds(cfg),
        capture_height=float(cfg["capture.height"]),
        history_window=int(cfg["evader.window"]),
        verify_conditions=verify_conditions,
        terminal_velocity_box=terminal_velocity_box(cfg),
        terminal_rotational_box=terminal_rotational_box(cfg),
    )
    scenario = scenario_from_config(cfg)
    return model, controller, scenario
