"""Condensed-QP receding-horizon controller.

The per-step optimal control problem minimizes tracking error against the
minimum-jerk reference plus input effort, subject to the discrete dynamics
(eliminated by substitution), soft per-step state constraints (one
infinity-norm slack per step with quadratic + linear exact-penalty weights),
hard input constraints, and the hard terminal hull around the vehicle's
reachable ball. The QP is strictly convex by construction and solved with
OSQP under fixed deterministic settings.

Across steps only the linear cost term and the constraint right-hand side
change (the state, the reference and the hull center move; the matrices do
not), so the controller condenses once and runs OSQP's in-place update path
with warm starting. ``condense``/``solve_qp`` remain the one-shot forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import osqp
import scipy.sparse as sparse

from .dynamics import NU, NX, DiscreteModel, QuadInput, QuadState, as_state_array
from .evader import EvaderHistory, VehicleState, VelocityBounds, update_bounds
from .polytopes import Polytope
from .prediction import (PointEstimate, PredictionSector, build_sector,
                         chebyshev_center, propagate_extremal)
from .reference import make_reference
from .terminal import TerminalSet, build_terminal_set, check_certificate_conditions

_OSQP_SETTINGS = dict(
    verbose=False,
    eps_abs=1e-10,
    eps_rel=1e-10,
    eps_prim_inf=1e-9,
    eps_dual_inf=1e-9,
    max_iter=50000,
    polish=True,
    polish_refine_iter=10,
    adaptive_rho_interval=25,
    scaled_termination=False,
)

#: residual levels a solve must meet to be reported optimal
RESIDUAL_TOL = 1e-6


def _meets_contract(result: "SolveResult") -> bool:
    r = result.residuals
    return (result.status == "optimal"
            and r["primal"] <= RESIDUAL_TOL
            and r["stationarity"] <= RESIDUAL_TOL
            and r["complementarity"] <= RESIDUAL_TOL)


@dataclass(frozen=True)
class MpcConfig:
    N: int = 20
    dt: float = 0.05
    Q: np.ndarray = field(default_factory=lambda: np.diag(
        [100.0, 10.0, 1.0, 0.1, 100.0, 10.0, 1.0, 0.1, 100.0, 10.0]))
    R: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 0.1]))
    slack_weight_quadratic: float = 1e3
    slack_weight_linear: float = 1e3
    angle_mode: str = "flat"
    # 'trim' penalizes deviation from hover (default: the literal form
    # penalizes gravity compensation and parks the quad with offset);
    # 'literal' keeps the plain input norm for fidelity runs.
    input_cost: str = "trim"

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("horizon must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        Q = np.asarray(self.Q, dtype=float)
        R = np.asarray(self.R, dtype=float)
        if np.min(np.linalg.eigvalsh((Q + Q.T) / 2)) < -1e-12:
            raise ValueError("Q must be positive semidefinite")
        if np.min(np.linalg.eigvalsh((R + R.T) / 2)) <= 0:
            raise ValueError("R must be positive definite")
        if self.slack_weight_quadratic <= 0 or self.slack_weight_linear <= 0:
            raise ValueError("slack weights must be positive")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    def u_trim(self, model: DiscreteModel) -> np.ndarray:
        if self.input_cost == "trim":
            return model.hover_input
        return np.zeros(NU)


def prediction_matrices(A: np.ndarray, B: np.ndarray, G: np.ndarray, N: int):
    """Stacked prediction of x_1..x_N as affine functions of the input stack.

    Returns (F, Su, d) with ``X = F x0 + Su U + d``; works for any state and
    input dimension.
    """
    n, m = B.shape
    G = np.asarray(G, dtype=float).reshape(n)
    powers = [np.eye(n)]
    for _ in range(N):
        powers.append(A @ powers[-1])
    F = np.vstack([powers[k] for k in range(1, N + 1)])
    Su = np.zeros((N * n, N * m))
    d = np.zeros(N * n)
    acc = np.zeros(n)
    for k in range(1, N + 1):
        acc = A @ acc + G if k > 1 else G.copy()
        d[(k - 1) * n:k * n] = acc
        for j in range(k):
            Su[(k - 1) * n:k * n, j * m:(j + 1) * m] = powers[k - 1 - j] @ B
    return F, Su, d


class CondensationTemplate:
    """Everything about the condensed QP that does not change between steps."""

    def __init__(self, model: DiscreteModel, config: MpcConfig,
                 terminal: TerminalSet, state_polytope: Polytope,
                 input_polytope: Polytope):
        if state_polytope.dim != NX or input_polytope.dim != NU:
            raise ValueError("constraint polytope dimension mismatch")
        self.model = model
        self.config = config
        self.state_polytope = state_polytope
        self.input_polytope = input_polytope
        N = config.N

        self.F, self.Su, self.d = prediction_matrices(
            model.A_T, model.B_T, model.G_T, N)
        Qbar = sparse.block_diag([config.Q] * N).toarray()
        Rbar = sparse.block_diag([config.R] * N).toarray()
        self.Qbar = Qbar
        self.Rbar = Rbar
        self.trim = np.tile(config.u_trim(model), N)

        nu_tot = N * NU
        ns = N
        self.n_inputs = nu_tot
        self.n_slacks = ns
        H = np.zeros((nu_tot + ns, nu_tot + ns))
        H[:nu_tot, :nu_tot] = 2.0 * (self.Su.T @ Qbar @ self.Su + Rbar)
        H[nu_tot:, nu_tot:] = 2.0 * config.slack_weight_quadratic * np.eye(ns)
        self.hessian = H
        self._SuTQ = 2.0 * self.Su.T @ Qbar
        self._f_trim = 2.0 * (Rbar @ self.trim)

        rows = []
        self._soft_A = []     # (A_rows, step k) pairs for rhs assembly
        for k in range(1, N + 1):
            rows.append(self._soft_rows(state_polytope.A, k))
            self._soft_A.append((state_polytope.A, state_polytope.b, k))
        extra_A, extra_b = terminal.extra_rows(planning=True)
        rows.append(self._soft_rows(extra_A, N))
        self._soft_A.append((extra_A, extra_b, N))

        hull_A, _ = terminal.hull_rows()
        self._hull_A = hull_A
        self._hull_dirs = terminal.hull.A  # unit normals, (x, y) only
        self._hull_radius = terminal.ball_radius
        hull_block = np.zeros((hull_A.shape[0], nu_tot + ns))
        hull_block[:, :nu_tot] = hull_A @ self.Su[(N - 1) * NX:]
        rows.append(hull_block)

        for k in range(N):
            block = np.zeros((input_polytope.nrows, nu_tot + ns))
            block[:, k * NU:(k + 1) * NU] = input_polytope.A
            rows.append(block)

        sl = np.zeros((ns, nu_tot + ns))
        sl[:, nu_tot:] = -np.eye(ns)
        rows.append(sl)

        self.ineq_A = sparse.csc_matrix(np.vstack(rows))
        self._input_rhs = np.tile(input_polytope.b, N)

    def _soft_rows(self, A_rows: np.ndarray, k: int) -> np.ndarray:
        block = np.zeros((A_rows.shape[0], self.n_inputs + self.n_slacks))
        block[:, :self.n_inputs] = A_rows @ self.Su[(k - 1) * NX:k * NX]
        block[:, self.n_inputs + (k - 1)] = -1.0
        return block

    def linear_and_rhs(self, x0: np.ndarray, refs: np.ndarray, vehicle_position: np.ndarray):
        """Per-step linear cost, constraint rhs and cost offset."""
        N = self.config.N
        base = self.F @ x0 + self.d
        rstack = refs[1:].reshape(-1)
        err0 = base - rstack
        f = np.zeros(self.n_inputs + self.n_slacks)
        f[:self.n_inputs] = self._SuTQ @ err0 - self._f_trim
        f[self.n_inputs:] = self.config.slack_weight_linear
        offset = float(err0 @ self.Qbar @ err0 + self.trim @ self.Rbar @ self.trim
                       + (x0 - refs[0]) @ self.config.Q @ (x0 - refs[0]))

        rhs = []
        for A_rows, b_rows, k in self._soft_A:
            rhs.append(b_rows - A_rows @ base[(k - 1) * NX:k * NX])
        hull_b = self._hull_dirs @ np.asarray(vehicle_position, dtype=float) + self._hull_radius
        rhs.append(hull_b - self._hull_A @ base[(N - 1) * NX:])
        rhs.append(self._input_rhs)
        rhs.append(np.zeros(self.n_slacks))
        return f, np.concatenate(rhs), offset


@dataclass
class CftocProblem:
    hessian: np.ndarray
    linear: np.ndarray
    ineq_A: sparse.csc_matrix
    ineq_b: np.ndarray
    N: int
    n_inputs: int
    n_slacks: int
    model: DiscreteModel
    config: MpcConfig
    x0: np.ndarray
    reference: np.ndarray  # (N+1, NX)
    cost_offset: float

    @property
    def n_vars(self) -> int:
        return self.n_inputs + self.n_slacks


@dataclass(frozen=True)
class SolveResult:
    inputs: np.ndarray            # (N, NU)
    slacks: np.ndarray            # (N,)
    predicted_states: np.ndarray  # (N+1, NX)
    cost: float
    status: str                   # optimal | infeasible | max-iter
    max_slack: float
    residuals: dict

    @property
    def first_input(self) -> QuadInput:
        return QuadInput.from_array(self.inputs[0])


def _stack_reference(reference, N: int) -> np.ndarray:
    refs = np.vstack([as_state_array(r.state if hasattr(r, "state") else r)
                      for r in reference])
    if refs.shape != (N + 1, NX):
        raise ValueError(f"reference must have N+1={N + 1} rows of dim {NX}")
    return refs


def condense(model: DiscreteModel, config: MpcConfig, x0,
             reference, terminal: TerminalSet, state_polytope: Polytope,
             input_polytope: Polytope) -> CftocProblem:
    """Eliminate the dynamics and stack the constraint system.

    Decision vector: ``[u_0 .. u_{N-1}, sigma_1 .. sigma_N]``. State rows at
    steps 1..N and the non-hull terminal rows at step N are softened with
    the per-step slack; input rows and the terminal hull stay hard.
    """
    x0 = as_state_array(x0)
    refs = _stack_reference(reference, config.N)
    tmpl = CondensationTemplate(model, config, terminal, state_polytope,
                                input_polytope)
    f, b, offset = tmpl.linear_and_rhs(x0, refs, terminal.ball_center)
    return CftocProblem(
        hessian=tmpl.hessian, linear=f, ineq_A=tmpl.ineq_A, ineq_b=b,
        N=config.N, n_inputs=tmpl.n_inputs, n_slacks=tmpl.n_slacks,
        model=model, config=config, x0=x0, reference=refs, cost_offset=offset,
    )


def _rollout(model: DiscreteModel, x0: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    out = np.zeros((inputs.shape[0] + 1, NX))
    out[0] = x0
    for k, u in enumerate(inputs):
        out[k + 1] = model.step_array(out[k], u)
    return out


def _result_from_raw(problem_shape, res, model, config, x0, refs,
                     hessian, linear, ineq_A, ineq_b) -> SolveResult:
    N, n_inputs = problem_shape
    status = res.info.status
    if status.startswith("solved"):
        out_status = "optimal"
    elif "infeasible" in status:
        out_status = "infeasible"
    else:
        out_status = "max-iter"

    if out_status == "infeasible" or res.x is None or np.any(~np.isfinite(res.x)):
        return SolveResult(
            inputs=np.full((N, NU), np.nan), slacks=np.full(N, np.nan),
            predicted_states=np.full((N + 1, NX), np.nan),
            cost=float("inf"), status="infeasible", max_slack=float("nan"),
            residuals={"primal": float("nan"), "stationarity": float("nan"),
                       "complementarity": float("nan")})

    z = res.x
    y = np.maximum(res.y, 0.0)
    slack_res = ineq_A @ z - ineq_b
    primal = float(np.max(slack_res, initial=0.0))
    stationarity = float(np.max(np.abs(hessian @ z + linear + ineq_A.T @ y)))
    # complementarity is reported relative to the dual scale; the exact
    # penalty weights put the active duals around 1e3
    y_scale = max(1.0, float(np.max(y, initial=0.0)))
    complementarity = float(np.max(np.abs(y * slack_res), initial=0.0)) / y_scale

    inputs = z[:n_inputs].reshape(N, NU)
    slacks = z[n_inputs:]
    states = _rollout(model, x0, inputs)

    trim = config.u_trim(model)
    cost = 0.0
    for k in range(1, N + 1):
        e = states[k] - refs[k]
        cost += float(e @ config.Q @ e)
    for u in inputs:
        du = u - trim
        cost += float(du @ config.R @ du)
    cost += float(config.slack_weight_quadratic * slacks @ slacks
                  + config.slack_weight_linear * np.sum(slacks))

    return SolveResult(
        inputs=inputs, slacks=slacks, predicted_states=states,
        cost=cost, status=out_status,
        max_slack=float(np.max(slacks, initial=0.0)),
        residuals={"primal": primal, "stationarity": stationarity,
                   "complementarity": complementarity},
    )


def solve_qp(problem: CftocProblem, warm_start=None) -> SolveResult:
    """Solve the condensed QP deterministically.

    Fresh solver instance per call with fixed settings, so identical inputs
    give bit-identical outputs. The reported residuals are the primal
    feasibility, stationarity and complementarity infinity norms of the
    returned iterate.
    """
    H = sparse.csc_matrix(problem.hessian)
    A = problem.ineq_A
    m = A.shape[0]

    def attempt(extra: dict):
        solver = osqp.OSQP()
        solver.setup(H, problem.linear, A, -np.inf * np.ones(m),
                     problem.ineq_b, **{**_OSQP_SETTINGS, **extra})
        if warm_start is not None:
            z0, y0 = warm_start
            if y0 is None:
                solver.warm_start(x=z0)
            else:
                solver.warm_start(x=z0, y=y0)
        res = solver.solve()
        return _result_from_raw((problem.N, problem.n_inputs), res,
                                problem.model, problem.config, problem.x0,
                                problem.reference, problem.hessian,
                                problem.linear, problem.ineq_A, problem.ineq_b)

    # fixed retry ladder: a different rho changes the active-set guess the
    # polish step works from, which recovers the rare polish failures while
    # staying fully deterministic
    result = attempt({})
    if result.status == "optimal" and not _meets_contract(result):
        for rho in (0.5, 5.0):
            retry = attempt({"rho": rho, "adaptive_rho": False})
            if _meets_contract(retry):
                return retry
    return result


@dataclass(frozen=True)
class StepDiagnostics:
    t: float
    cost: float
    status: str
    max_slack: float
    estimate: PointEstimate
    sector: PredictionSector
    command: QuadInput
    bounds: VelocityBounds
    solve_residuals: dict

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "cost": self.cost,
            "status": self.status,
            "max_slack": self.max_slack,
            "estimate": self.estimate.to_dict(),
            "sector": self.sector.to_dict(),
            "command": list(self.command.to_array()),
            "v_bar": self.bounds.v_bar,
            "delta_lo": self.bounds.delta_lo,
            "delta_hi": self.bounds.delta_hi,
            "residuals": self.solve_residuals,
        }


class MpcController:
    """Receding-horizon pursuit controller with online bound learning.

    One instance owns its measurement history, learned bounds and solver
    state, and is single-threaded; run independent instances for concurrent
    sessions. The condensed QP is set up once and updated in place each
    step (only the linear term and right-hand side move), with OSQP warm
    starting across steps.
    """

    def __init__(self, model: DiscreteModel, config: MpcConfig,
                 state_polytope: Polytope, input_polytope: Polytope,
                 bounds: VelocityBounds, capture_height: float,
                 history_window: int = 20, verify_conditions: bool = True,
                 condition_samples: int = 200,
                 terminal_velocity_box: Polytope | None = None,
                 terminal_rotational_box: Polytope | None = None):
        self.model = model
        self.config = config
        self.state_polytope = state_polytope
        self.input_polytope = input_polytope
        self.capture_height = capture_height
        self.initial_bounds = bounds
        self.bounds = bounds
        self.history = EvaderHistory(window=history_window)
        self.terminal_template = build_terminal_set(
            np.zeros(2), bounds.V_bar, state_polytope, config.N, config.dt,
            capture_height, velocity_box=terminal_velocity_box,
            rotational_box=terminal_rotational_box)
        self.template = CondensationTemplate(
            model, config, self.terminal_template, state_polytope,
            input_polytope)
        self._solver = None
        self.condition_report = None
        if verify_conditions:
            self.condition_report = check_certificate_conditions(
                model, state_polytope, input_polytope, bounds.V_bar,
                config.dt, self.terminal_template, n_samples=condition_samples)
            if not self.condition_report.all_true:
                raise ValueError("terminal-controller certificate conditions "
                                 f"failed: {self.condition_report.to_dict()}")

    def reset(self) -> None:
        self.bounds = self.initial_bounds
        self.history.clear()
        self._solver = None

    def terminal_set_at(self, vehicle_position) -> TerminalSet:
        return self.terminal_template.recenter(vehicle_position)

    def _solve(self, x0: np.ndarray, refs: np.ndarray, vehicle_position: np.ndarray):
        f, b, _ = self.template.linear_and_rhs(x0, refs, vehicle_position)
        if self._solver is None:
            self._solver = osqp.OSQP()
            m = self.template.ineq_A.shape[0]
            self._solver.setup(sparse.csc_matrix(self.template.hessian), f,
                               self.template.ineq_A, -np.inf * np.ones(m), b,
                               **_OSQP_SETTINGS)
        else:
            self._solver.update(q=f, u=b)
        res = self._solver.solve()
        result = _result_from_raw(
            (self.config.N, self.template.n_inputs), res, self.model,
            self.config, x0, refs, self.template.hessian, f,
            self.template.ineq_A, b)
        if result.status != "infeasible" and not _meets_contract(result):
            # warm path stalled or polish failed: redo this instance cold
            problem = CftocProblem(
                hessian=self.template.hessian, linear=f,
                ineq_A=self.template.ineq_A, ineq_b=b, N=self.config.N,
                n_inputs=self.template.n_inputs,
                n_slacks=self.template.n_slacks, model=self.model,
                config=self.config, x0=x0, reference=refs, cost_offset=0.0)
            retry = solve_qp(problem)
            if _meets_contract(retry):
                return retry
        return result

    def step(self, quad_state, vehicle_meas: VehicleState, t: float):
        """One receding-horizon update; returns (command, diagnostics, result)."""
        self.history.push(vehicle_meas, t)
        self.bounds = update_bounds(self.bounds, self.history)

        lower = propagate_extremal(vehicle_meas, self.bounds, self.config.N,
                                   self.config.dt, "lower")
        upper = propagate_extremal(vehicle_meas, self.bounds, self.config.N,
                                   self.config.dt, "upper")
        sector = build_sector(vehicle_meas.position, lower[-1], upper[-1],
                              self.bounds, self.config.N, self.config.dt)
        estimate = chebyshev_center(sector)

        quad = quad_state if isinstance(quad_state, QuadState) \
            else QuadState.from_array(quad_state)
        reference = make_reference(quad, estimate.point, self.capture_height,
                                   self.config.N, self.config.dt,
                                   self.model.params,
                                   end_velocity=vehicle_meas.velocity,
                                   angle_mode=self.config.angle_mode)
        refs = _stack_reference(reference, self.config.N)
        result = self._solve(quad.to_array(), refs, vehicle_meas.position)

        if result.status == "optimal":
            command = result.first_input
        else:
            command = QuadInput.from_array(self.model.hover_input)

        diag = StepDiagnostics(
            t=t, cost=result.cost, status=result.status,
            max_slack=result.max_slack, estimate=estimate, sector=sector,
            command=command, bounds=self.bounds,
            solve_residuals=result.residuals,
        )
        return command, diag, result
