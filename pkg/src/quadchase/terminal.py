"""Terminal constraint machinery for the pursuit MPC.

Builds the vehicle-reachable ball, the terminal constraint set around it
(capture corridor in altitude plus the velocity/attitude slices of the state
constraints), the polygon circumscribing the ball so the terminal constraint
stays linear, the greedy terminal controller, the certificate checks that
back it, and the conservative set of feasible initial states via backward
reachability on the decoupled sub-systems.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .dynamics import (ALT_IDX, IPH, IPHD, ITH, ITHD, IX, IXD, IY, IYD, IZ,
                       IZD, NX, XPITCH_IDX, YROLL_IDX, DiscreteModel,
                       as_state_array, QuadInput, subsystem)
from .polytopes import (EmptyPolytopeError, Polytope, backward_reachable,
                        contains_polytope)

HULL_SIDES = 16

VEL_IDX = (IXD, IYD, IZD)
ROT_IDX = (ITH, ITHD, IPH, IPHD)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = np.asarray(p, dtype=float).reshape(2)
        return float(np.hypot(*(p - self.center))) <= self.radius + tol


def build_reachable_ball(vehicle_position, V_bar: float, N: int, dt: float) -> Ball:
    """Ball of radius V_bar * N * dt around the vehicle position: everywhere
    the vehicle can be over the next N steps."""
    if V_bar < 0 or N < 0 or dt <= 0:
        raise ValueError("need V_bar >= 0, N >= 0, dt > 0")
    return Ball(center=np.asarray(vehicle_position, dtype=float).reshape(2), radius=V_bar * N * dt)


def circumscribing_polygon(ball: Ball, sides: int = HULL_SIDES) -> Polytope:
    """Regular polygon of tangent lines containing the ball exactly."""
    ang = 2.0 * np.pi * np.arange(sides) / sides
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    b = A @ ball.center + ball.radius
    return Polytope(A, b)


def _lift_rows(A_sub: np.ndarray, idx) -> np.ndarray:
    out = np.zeros((A_sub.shape[0], NX))
    out[:, list(idx)] = A_sub
    return out


@dataclass(frozen=True)
class TerminalSet:
    ball: Ball
    capture_height: float
    velocity_box: Polytope
    rotational_box: Polytope
    hull: Polytope
    state_polytope: Polytope
    #: attitude-row shrink factor used when the planner targets this set; a
    #: horizon-end state parked at the full attitude-box corner cannot keep
    #: the next attitude inside the box (rate drift beats pullback plus
    #: command authority), so plans aim strictly interior
    planning_margin: float = 0.5

    @property
    def ball_center(self) -> np.ndarray:
        return self.ball.center

    @property
    def ball_radius(self) -> float:
        return self.ball.radius

    def recenter(self, vehicle_position) -> "TerminalSet":
        """Same geometry translated to a new vehicle position."""
        ball = Ball(center=vehicle_position, radius=self.ball.radius)
        return replace(self, ball=ball, hull=circumscribing_polygon(ball, self.hull.nrows))

    def hull_rows(self):
        """Hard terminal rows over the 10-D state: hull of the ball on (x, y)."""
        A = np.zeros((self.hull.nrows, NX))
        A[:, IX] = self.hull.A[:, 0]
        A[:, IY] = self.hull.A[:, 1]
        return A, self.hull.b.copy()

    def extra_rows(self, planning: bool = False):
        """Remaining terminal rows (altitude corridor, velocity and attitude
        slices); enforced softly at the horizon end alongside the state rows.
        With ``planning=True`` the attitude rows shrink by the planning
        margin."""
        rot_scale = self.planning_margin if planning else 1.0
        rows = [np.zeros((2, NX))]
        rows[0][0, IZ] = 1.0
        rows[0][1, IZ] = -1.0
        rhs = [np.array([self.capture_height, 0.0])]
        rows.append(_lift_rows(self.velocity_box.A, VEL_IDX))
        rhs.append(self.velocity_box.b)
        rows.append(_lift_rows(self.rotational_box.A, ROT_IDX))
        rhs.append(rot_scale * self.rotational_box.b)
        return np.vstack(rows), np.concatenate(rhs)

    def as_polytope(self, planning: bool = False) -> Polytope:
        """Full 10-D H-representation with the ball replaced by its hull."""
        A1, b1 = self.hull_rows()
        A2, b2 = self.extra_rows(planning=planning)
        A = np.vstack([A1, A2, self.state_polytope.A])
        b = np.concatenate([b1, b2, self.state_polytope.b])
        return Polytope(A, b)

    def contains(self, x, exact: bool = True, tol: float = 1e-9) -> bool:
        """Terminal-set membership; ``exact`` uses the true ball on (x, y),
        otherwise the circumscribing hull."""
        xa = as_state_array(x)
        pos = xa[[IX, IY]]
        if exact:
            if not self.ball.contains(pos, tol=tol):
                return False
        elif not self.hull.contains(pos, tol=tol):
            return False
        if not (-tol <= xa[IZ] <= self.capture_height + tol):
            return False
        if not self.velocity_box.contains(xa[list(VEL_IDX)], tol=tol):
            return False
        if not self.rotational_box.contains(xa[list(ROT_IDX)], tol=tol):
            return False
        return self.state_polytope.contains(xa, tol=tol)


def build_terminal_set(vehicle_position, V_bar: float, state_polytope: Polytope, N: int,
                       dt: float, H: float, sides: int = HULL_SIDES,
                       velocity_box: Polytope | None = None,
                       rotational_box: Polytope | None = None) -> TerminalSet:
    """Assemble the terminal set at the current vehicle position.

    By default the velocity and attitude parts are the matching slices of
    the state polytope. Passing explicit sub-boxes (the shipped configs do)
    leaves a one-step drift margin between the terminal set and the state
    constraints: with the literal slices, a terminal state on the shared
    boundary escapes the state set in one step no matter the input, and the
    stays-in-state-set certificate can never hold. Explicit boxes must be
    contained in the corresponding slices.

    Raises when the assembled set has no interior inside the state polytope
    (e.g. the capture corridor lies outside the flight volume).
    """
    if H <= 0:
        raise ValueError("capture height H must be positive")
    vel_slice = state_polytope.slice_coords(VEL_IDX)
    rot_slice = state_polytope.slice_coords(ROT_IDX)
    if velocity_box is None:
        velocity_box = vel_slice
    elif not contains_polytope(vel_slice, velocity_box):
        raise ValueError("terminal velocity box exceeds the state polytope slice")
    if rotational_box is None:
        rotational_box = rot_slice
    elif not contains_polytope(rot_slice, rotational_box):
        raise ValueError("terminal attitude box exceeds the state polytope slice")
    ball = build_reachable_ball(vehicle_position, V_bar, N, dt)
    ts = TerminalSet(
        ball=ball,
        capture_height=H,
        velocity_box=velocity_box,
        rotational_box=rotational_box,
        hull=circumscribing_polygon(ball, sides),
        state_polytope=state_polytope,
    )
    if ts.as_polytope().is_empty():
        raise EmptyPolytopeError("terminal set does not intersect the state polytope")
    return ts


@dataclass(frozen=True)
class TerminalControllerResult:
    input: QuadInput
    direction: np.ndarray
    displacement: float
    mode: str  # "ray" | "projection" | "degenerate"


class DegenerateDirectionError(ValueError):
    pass


def _angle_input_bounds(input_polytope: Polytope):
    """Split a decoupled input polytope into angle rows and a thrust interval."""
    A, b = input_polytope.A, input_polytope.b
    ang_mask = (np.abs(A[:, 2]) <= 1e-12)
    thr_mask = ~ang_mask
    if np.any(np.abs(A[thr_mask][:, :2]) > 1e-12):
        raise ValueError("input polytope couples thrust with angle commands; "
                         "the terminal controller requires them decoupled")
    ang_rows = (A[ang_mask][:, :2], b[ang_mask])
    t_lo, t_hi = -np.inf, np.inf
    for row, rhs in zip(A[thr_mask], b[thr_mask]):
        c = row[2]
        if c > 0:
            t_hi = min(t_hi, rhs / c)
        else:
            t_lo = max(t_lo, rhs / c)
    return ang_rows, (t_lo, t_hi)


def _altitude_thrust(model: DiscreteModel, x: np.ndarray, H: float,
                     zd_interval, t_interval) -> float:
    """Thrust keeping the altitude block inside its terminal corridor.

    Prefers the hover trim; constraints are applied in priority order
    (vertical-rate box first, then the 0..H corridor) so the rule stays
    total and deterministic even when the full intersection is empty.
    """
    A_z, B_z, G_z = subsystem(model, ALT_IDX, 2)
    zz = x[list(ALT_IDX)]
    base = A_z @ zz + G_z  # next (z, zd) at zero thrust
    bz, bzd = float(B_z[0, 0]), float(B_z[1, 0])

    def interval_for(target_lo, target_hi, base_val, coef):
        if abs(coef) < 1e-15:
            return (-np.inf, np.inf)
        lo = (target_lo - base_val) / coef
        hi = (target_hi - base_val) / coef
        return (min(lo, hi), max(lo, hi))

    hover = model.params.hover_thrust
    lo, hi = t_interval
    for tgt in (interval_for(zd_interval[0], zd_interval[1], base[1], bzd),
                interval_for(0.0, H, base[0], bz)):
        nlo, nhi = max(lo, tgt[0]), min(hi, tgt[1])
        if nlo <= nhi:
            lo, hi = nlo, nhi
    return float(np.clip(hover, lo, hi))


def terminal_controller(x, vehicle_position, model: DiscreteModel,
                        input_polytope: Polytope,
                        terminal: TerminalSet) -> TerminalControllerResult:
    """Greedy one-step controller driving the quadcopter at the vehicle.

    Among angle commands whose one-step horizontal displacement is parallel
    to the line of sight, picks the displacement-maximizing one: with the
    2x2 command-to-displacement map invertible, commands along the ray are an
    affine family in the step length s, so the supremum reduces to a
    one-dimensional LP over s (solved in closed form) under the input bounds
    and the next-step velocity/attitude slices of the state constraints.
    When no command reaches the ray, falls back to maximizing the
    line-of-sight component of the displacement (projection mode). Thrust is
    chosen separately to hold the altitude block inside its terminal
    corridor; the altitude and lateral channels are decoupled by the block
    structure, so the split is exact.
    """
    xa = as_state_array(x)
    vehicle_position = np.asarray(vehicle_position, dtype=float).reshape(2)
    pos = xa[[IX, IY]]
    los = vehicle_position - pos
    dist = float(np.hypot(*los))

    (ang_A, ang_b), t_interval = _angle_input_bounds(input_polytope)
    zd_iv = terminal.velocity_box.interval(np.array([0.0, 0.0, 1.0]))
    thrust = _altitude_thrust(model, xa, terminal.capture_height, zd_iv, t_interval)

    if dist < 1e-9:
        return TerminalControllerResult(
            input=QuadInput(0.0, 0.0, thrust), direction=np.zeros(2),
            displacement=0.0, mode="degenerate")

    t_hat = los / dist
    Bd = model.B_T[np.ix_([IX, IY], [0, 1])]
    det = float(np.linalg.det(Bd))
    if abs(det) < 1e-18:
        raise DegenerateDirectionError("command-to-displacement map is singular")
    base = (model.A_T - np.eye(NX))[[IX, IY]] @ xa + model.G_T[[IX, IY]]

    Bd_inv = np.linalg.inv(Bd)
    u0 = -Bd_inv @ base          # command putting the displacement at zero
    du = Bd_inv @ t_hat          # command change per unit step length

    # guard rows: next-step lateral velocity / attitude stay inside the state
    # polytope (thrust-free coordinates only, so they are affine in s)
    guard_A = np.vstack([
        _lift_rows(terminal.velocity_box.A[:, :2], (IXD, IYD)),
        _lift_rows(terminal.rotational_box.A, ROT_IDX),
    ])
    guard_b = np.concatenate([terminal.velocity_box.b, terminal.rotational_box.b])
    # drop rows touching altitude coordinates (none by construction) and
    # express a . x_next <= b as an affine constraint in s
    x_next_base = model.A_T @ xa + model.G_T + model.B_T[:, 2] * thrust \
        + model.B_T[:, :2] @ u0
    x_next_slope = model.B_T[:, :2] @ du

    s_lo, s_hi = 0.0, np.inf
    # input rows: ang_A (u0 + s du) <= ang_b
    coefs = np.concatenate([ang_A @ du, guard_A @ x_next_slope])
    consts = np.concatenate([ang_b - ang_A @ u0, guard_b - guard_A @ x_next_base])
    for c, r in zip(coefs, consts):
        if c > 1e-14:
            s_hi = min(s_hi, r / c)
        elif c < -1e-14:
            s_lo = max(s_lo, r / c)
        elif r < -1e-12:
            s_hi = -np.inf  # infeasible at any s

    if s_hi >= s_lo and np.isfinite(s_hi):
        u_ang = u0 + s_hi * du
        return TerminalControllerResult(
            input=QuadInput(float(u_ang[0]), float(u_ang[1]), thrust),
            direction=t_hat, displacement=float(s_hi), mode="ray")

    # projection fallback: maximize t_hat . (base + Bd u) under the same rows
    rows_A = [ang_A]
    rows_b = [ang_b]
    gslope = guard_A @ model.B_T[:, :2]
    gbase = guard_A @ (model.A_T @ xa + model.G_T + model.B_T[:, 2] * thrust)
    rows_A.append(gslope)
    rows_b.append(guard_b - gbase)
    res = linprog(-(Bd.T @ t_hat), A_ub=np.vstack(rows_A),
                  b_ub=np.concatenate(rows_b),
                  bounds=[(None, None)] * 2, method="highs")
    if not res.success:
        raise EmptyPolytopeError("terminal controller: no admissible command")
    u_ang = res.x
    disp = float(t_hat @ (base + Bd @ u_ang))
    return TerminalControllerResult(
        input=QuadInput(float(u_ang[0]), float(u_ang[1]), thrust),
        direction=t_hat, displacement=disp, mode="projection")


@dataclass(frozen=True)
class CertificateReport:
    displacement_cover: bool
    stays_in_state_set: bool
    input_has_interior: bool
    dx_interval: tuple
    dy_interval: tuple
    required_half_width: float
    failed_states: list
    input_radius: float

    @property
    def all_true(self) -> bool:
        return (self.displacement_cover and self.stays_in_state_set
                and self.input_has_interior)

    def to_dict(self) -> dict:
        return {
            "displacement_cover": self.displacement_cover,
            "stays_in_state_set": self.stays_in_state_set,
            "input_has_interior": self.input_has_interior,
            "dx_interval": list(self.dx_interval),
            "dy_interval": list(self.dy_interval),
            "required_half_width": self.required_half_width,
            "n_failed_states": len(self.failed_states),
            "input_radius": self.input_radius,
        }


def check_certificate_conditions(model: DiscreteModel, state_polytope: Polytope,
                            input_polytope: Polytope, V_bar: float, dt: float,
                            terminal: TerminalSet, n_samples: int = 1000,
                            rng: np.random.Generator | None = None) -> CertificateReport:
    """Verify the three certificate conditions behind the terminal controller.

    1. The one-step displacement interval in each horizontal axis, over all
       admissible states and inputs, covers [-V_bar dt, V_bar dt] (support
       LPs on the affine image of the state and input sets).
    2. Sampled terminal-set states admit an input keeping the successor in
       the state polytope (feasibility LP per sample).
    3. The input set has a nonempty interior (positive Chebyshev radius).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    half = V_bar * dt

    AmI = model.A_T - np.eye(NX)
    intervals = []
    for row in (IX, IY):
        e = np.zeros(NX)
        e[row] = 1.0
        lo = -(state_polytope.support(-AmI.T @ e) + input_polytope.support(-model.B_T.T @ e))
        hi = state_polytope.support(AmI.T @ e) + input_polytope.support(model.B_T.T @ e)
        shift = float(model.G_T[row])
        intervals.append((lo + shift, hi + shift))
    cover = all(iv[0] <= -half and iv[1] >= half for iv in intervals)

    failed = []
    samples = terminal.as_polytope().sample(rng, n_samples)
    nu = input_polytope.dim
    for x in samples:
        drift = model.A_T @ x + model.G_T
        A_ub = np.vstack([state_polytope.A @ model.B_T, input_polytope.A])
        b_ub = np.concatenate([state_polytope.b - state_polytope.A @ drift,
                               input_polytope.b])
        res = linprog(np.zeros(nu), A_ub=A_ub, b_ub=b_ub,
                      bounds=[(None, None)] * nu, method="highs")
        if not res.success:
            failed.append(x)
    stays = not failed

    _, u_radius = input_polytope.chebyshev()
    return CertificateReport(
        displacement_cover=cover,
        stays_in_state_set=stays,
        input_has_interior=u_radius > 0,
        dx_interval=intervals[0],
        dy_interval=intervals[1],
        required_half_width=half,
        failed_states=failed,
        input_radius=u_radius,
    )


@dataclass(frozen=True)
class FeasibleStartSet:
    """Product-form conservative set of feasible initial states.

    Backward reachability runs on the three decoupled sub-systems with the
    terminal ball replaced by its inscribed axis box (so the target splits
    across the x/pitch and y/roll groups); the product of the three results
    under-approximates the true feasible set.
    """

    xpitch: Polytope
    yroll: Polytope
    altitude: Polytope

    def as_polytope(self) -> Polytope:
        A = np.vstack([
            _lift_rows(self.xpitch.A, XPITCH_IDX),
            _lift_rows(self.yroll.A, YROLL_IDX),
            _lift_rows(self.altitude.A, ALT_IDX),
        ])
        b = np.concatenate([self.xpitch.b, self.yroll.b, self.altitude.b])
        return Polytope(A, b)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.as_polytope().contains(as_state_array(x), tol=tol)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.zeros((n, NX))
        out[:, list(XPITCH_IDX)] = self.xpitch.sample(rng, n)
        out[:, list(YROLL_IDX)] = self.yroll.sample(rng, n)
        out[:, list(ALT_IDX)] = self.altitude.sample(rng, n)
        return out


def _assert_group_decoupled(P: Polytope, groups) -> None:
    for row in P.A:
        touched = sum(1 for g in groups if np.any(np.abs(row[list(g)]) > 1e-12))
        if touched > 1:
            raise ValueError("state polytope couples decoupled sub-systems; "
                             "backward reachability needs product structure")


def _input_interval(input_polytope: Polytope, col: int):
    lo, hi = -np.inf, np.inf
    for row, rhs in zip(input_polytope.A, input_polytope.b):
        c = row[col]
        if abs(c) <= 1e-12:
            continue
        if np.any(np.abs(np.delete(row, col)) > 1e-12):
            raise ValueError("input polytope couples input channels")
        if c > 0:
            hi = min(hi, rhs / c)
        else:
            lo = max(lo, rhs / c)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"input channel {col} is unbounded")
    return lo, hi


def build_feasible_start_set(model: DiscreteModel, terminal: TerminalSet,
                             state_polytope: Polytope, input_polytope: Polytope,
                             N: int) -> FeasibleStartSet:
    """N-step backward reachable under-approximation of the feasible starts.

    Runs iterated constrained Pre sets on the x/pitch, y/roll and altitude
    sub-systems separately (Fourier-Motzkin over one input each) and returns
    the product. The terminal ball is inner-boxed at radius/sqrt(2) so the
    target decomposes; all constraint sets must carry product structure.

    Exact, and therefore only tractable for modest horizons: reach-set
    facet counts grow superlinearly with N. The long-horizon production
    path is :func:`certified_start_box`.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    groups = [XPITCH_IDX, YROLL_IDX, ALT_IDX]
    _assert_group_decoupled(state_polytope, groups)

    half = terminal.ball_radius / np.sqrt(2.0)
    vel = terminal.velocity_box
    rot = terminal.rotational_box

    subs = []
    margin = terminal.planning_margin
    for axis, (idx, input_col) in enumerate(
            [(XPITCH_IDX, 0), (YROLL_IDX, 1)]):
        c = terminal.ball_center[axis]
        pos_iv = (c - half, c + half)
        vel_iv = vel.interval(np.eye(3)[axis])
        # attitude target uses the planning-tightened rows, matching the
        # terminal rows the planner itself aims for
        ang_iv = tuple(margin * v for v in rot.interval(np.eye(4)[2 * axis]))
        rate_iv = tuple(margin * v for v in rot.interval(np.eye(4)[2 * axis + 1]))
        target = Polytope.box(
            [pos_iv[0], vel_iv[0], ang_iv[0], rate_iv[0]],
            [pos_iv[1], vel_iv[1], ang_iv[1], rate_iv[1]],
        ).intersect(state_polytope.slice_coords(idx)).pruned()
        A_s, B_s, G_s = subsystem(model, idx, input_col)
        u_lo, u_hi = _input_interval(input_polytope, input_col)
        U_s = Polytope.box([u_lo], [u_hi])
        X_s = state_polytope.slice_coords(idx)
        subs.append(backward_reachable(target, A_s, B_s, G_s, U_s, X_s, N))

    zd_iv = vel.interval(np.array([0.0, 0.0, 1.0]))
    target_z = Polytope.box([0.0, zd_iv[0]], [terminal.capture_height, zd_iv[1]]) \
        .intersect(state_polytope.slice_coords(ALT_IDX)).pruned()
    A_z, B_z, G_z = subsystem(model, ALT_IDX, 2)
    t_lo, t_hi = _input_interval(input_polytope, 2)
    alt = backward_reachable(target_z, A_z, B_z, G_z,
                             Polytope.box([t_lo], [t_hi]),
                             state_polytope.slice_coords(ALT_IDX), N)

    return FeasibleStartSet(xpitch=subs[0], yroll=subs[1], altitude=alt)


def _hard_feasibility_lp(model: DiscreteModel, terminal: TerminalSet,
                         state_polytope: Polytope, input_polytope: Polytope,
                         N: int):
    """Constraint system of the hard-constrained horizon problem over the
    input stack: returns (G, h_of_x0) with feasibility iff some input
    sequence keeps every step in the state set, inputs admissible, and the
    final state in the terminal polytope."""
    from .mpc import prediction_matrices

    F, Su, d = prediction_matrices(model.A_T, model.B_T, model.G_T, N)
    term = terminal.as_polytope(planning=True)
    rows = []
    row_state = []
    for k in range(1, N + 1):
        A_rows = state_polytope.A if k < N else term.A
        b_rows = state_polytope.b if k < N else term.b
        rows.append(A_rows @ Su[(k - 1) * NX:k * NX])
        row_state.append((A_rows, b_rows, k))
    rows.append(np.kron(np.eye(N), input_polytope.A))
    G = np.vstack(rows)

    def h_of(x0):
        base = F @ np.asarray(x0, dtype=float) + d
        parts = [b_rows - A_rows @ base[(k - 1) * NX:k * NX]
                 for A_rows, b_rows, k in row_state]
        parts.append(np.tile(input_polytope.b, N))
        return np.concatenate(parts)

    return G, h_of


def feasible_input_sequence_exists(model: DiscreteModel, terminal: TerminalSet,
                                   state_polytope: Polytope,
                                   input_polytope: Polytope, N: int, x0) -> bool:
    """True when the hard-constrained horizon problem is feasible from x0."""
    G, h_of = _hard_feasibility_lp(model, terminal, state_polytope,
                                   input_polytope, N)
    res = linprog(np.zeros(G.shape[1]), A_ub=G, b_ub=h_of(x0),
                  bounds=[(None, None)] * G.shape[1], method="highs")
    return bool(res.success)


def certified_start_box(model: DiscreteModel, terminal: TerminalSet,
                        state_polytope: Polytope, input_polytope: Polytope,
                        N: int, half_widths=None,
                        max_shrink_rounds: int = 6) -> Polytope:
    """A box of certified-feasible initial states around the capture point.

    The set of states from which the hard-constrained horizon problem is
    feasible is convex (it is a linear projection of a polyhedron), so a box
    is certified by checking the feasibility LP at its 2^10 corners. A
    failing certification shrinks the non-position half-widths and retries.
    Returns the box as a 10-D polytope; raises when even the collapsed
    candidate fails.
    """
    from itertools import product

    c = terminal.ball_center
    if half_widths is None:
        r = terminal.ball_radius
        half_widths = np.array([
            0.7 * r, 0.45, 0.1, 0.5,   # x block
            0.7 * r, 0.45, 0.1, 0.5,   # y block
            0.2, 0.12,                 # z block
        ])
    half_widths = np.asarray(half_widths, dtype=float).copy()
    center = np.array([c[0], 0.0, 0.0, 0.0, c[1], 0.0, 0.0, 0.0,
                       0.75 * terminal.capture_height, 0.0])

    G, h_of = _hard_feasibility_lp(model, terminal, state_polytope,
                                   input_polytope, N)
    nv = G.shape[1]
    zero = np.zeros(nv)

    for round_ in range(max_shrink_rounds):
        ok = True
        for corner in product((-1.0, 1.0), repeat=NX):
            x0 = center + np.asarray(corner) * half_widths
            res = linprog(zero, A_ub=G, b_ub=h_of(x0),
                          bounds=[(None, None)] * nv, method="highs")
            if not res.success:
                ok = False
                break
        if ok:
            return Polytope.box(center - half_widths, center + half_widths)
        half_widths *= 0.7
    raise EmptyPolytopeError("could not certify any feasible start box")
