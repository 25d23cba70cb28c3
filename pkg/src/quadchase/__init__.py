"""quadchase: receding-horizon pursuit of a ground vehicle with a quadcopter.

High-level planner stack: linearized quadcopter model with exact ZOH
discretization, online velocity-bound learning for the evader, convex
prediction sets with Chebyshev-center estimates, terminal-set machinery with
feasibility certificates, a condensed-QP MPC, a deterministic closed-loop
simulator, a batch CLI, and a WebSocket bridge for human-driven sessions.
"""

from .dynamics import (ContinuousModel, DiscreteModel, QuadInput, QuadParams,
                       QuadState, build_continuous, discretize, step)
from .evader import (EvaderHistory, VehicleState, VelocityBounds,
                     body_frame_velocity, update_bounds, vehicle_step)
from .mpc import (CftocProblem, MpcConfig, MpcController, SolveResult,
                  condense, solve_qp)
from .polytopes import Polytope
from .prediction import (PointEstimate, PredictionSector, build_sector,
                         chebyshev_center, contains, propagate_extremal)
from .reference import QuinticSegment, ReferencePoint, fit_min_jerk, \
    make_reference, sample_reference
from .terminal import (Ball, TerminalControllerResult, TerminalSet, build_reachable_ball,
                       build_feasible_start_set, build_terminal_set,
                       check_certificate_conditions, terminal_controller)

__version__ = "0.1.0"

__all__ = [
    "QuadParams", "QuadState", "QuadInput", "ContinuousModel", "DiscreteModel",
    "build_continuous", "discretize", "step",
    "VehicleState", "VelocityBounds", "EvaderHistory",
    "vehicle_step", "body_frame_velocity", "update_bounds",
    "PredictionSector", "PointEstimate",
    "propagate_extremal", "build_sector", "chebyshev_center", "contains",
    "Polytope", "Ball", "TerminalSet", "TerminalControllerResult",
    "build_reachable_ball", "build_terminal_set", "terminal_controller",
    "check_certificate_conditions", "build_feasible_start_set",
    "QuinticSegment", "ReferencePoint",
    "fit_min_jerk", "sample_reference", "make_reference",
    "MpcConfig", "CftocProblem", "SolveResult", "MpcController",
    "condense", "solve_qp",
]
