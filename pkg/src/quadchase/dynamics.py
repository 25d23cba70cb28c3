"""Linearized quadcopter model and its exact zero-order-hold discretization.

The closed-loop platform (attitude loops already stabilized by the onboard
controller) is modelled as a 10-state LTI system with an affine gravity term:

    x_dot = A x + B u + G

State ordering is frozen to ``[x, xd, theta, thetad, y, yd, phi, phid, z, zd]``
and inputs are ``[theta_cmd, phi_cmd, T_z]``; several set constructions select
coordinates by index, so the ordering is part of the public contract.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from scipy.linalg import expm

NX = 10
NU = 3

# state indices
IX, IXD, ITH, ITHD, IY, IYD, IPH, IPHD, IZ, IZD = range(10)

#: horizontal-position selector (the e1/e5 pair), shape (2, 10)
POS_XY = np.zeros((2, NX))
POS_XY[0, IX] = 1.0
POS_XY[1, IY] = 1.0

#: index groups of the three decoupled sub-systems
XPITCH_IDX = (IX, IXD, ITH, ITHD)
YROLL_IDX = (IY, IYD, IPH, IPHD)
ALT_IDX = (IZ, IZD)

MAX_DT = 10.0


class InvalidParameterError(ValueError):
    pass


@dataclass(frozen=True)
class QuadParams:
    """Identified closed-loop parameters of the quadcopter platform.

    ``a_r, a_p`` are the attitude-loop input gains, ``b_*1`` the damping and
    ``b_*0`` the stiffness coefficients of the second-order roll/pitch loops.
    The shipped defaults are placeholders for a desk-scale platform, not
    identified values.
    """

    a_r: float = 30.0
    a_p: float = 30.0
    b_r1: float = 7.0
    b_r0: float = 35.0
    b_p1: float = 7.0
    b_p0: float = 35.0
    m: float = 0.5
    g: float = 9.81

    def validate(self) -> "QuadParams":
        if not all(np.isfinite(getattr(self, f.name)) for f in fields(self)):
            raise InvalidParameterError("non-finite quadcopter parameter")
        if self.m <= 0:
            raise InvalidParameterError(f"mass must be positive, got {self.m}")
        if self.g <= 0:
            raise InvalidParameterError(f"gravity must be positive, got {self.g}")
        for name in ("b_r1", "b_r0", "b_p1", "b_p0"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive (stable closed loop)")
        if self.a_r == 0 or self.a_p == 0:
            raise InvalidParameterError("attitude gains a_r, a_p must be nonzero")
        return self

    @property
    def hover_thrust(self) -> float:
        return self.m * self.g


@dataclass(frozen=True)
class QuadState:
    x: float = 0.0
    x_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    y: float = 0.0
    y_dot: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0
    z: float = 0.0
    z_dot: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.x, self.x_dot, self.theta, self.theta_dot, self.y,
             self.y_dot, self.phi, self.phi_dot, self.z, self.z_dot]
        )

    @staticmethod
    def from_array(v) -> "QuadState":
        v = np.asarray(v, dtype=float).reshape(NX)
        return QuadState(*v.tolist())

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def horizontal(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class QuadInput:
    theta_cmd: float = 0.0
    phi_cmd: float = 0.0
    thrust: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.theta_cmd, self.phi_cmd, self.thrust])

    @staticmethod
    def from_array(v) -> "QuadInput":
        v = np.asarray(v, dtype=float).reshape(NU)
        return QuadInput(*v.tolist())


def as_state_array(x) -> np.ndarray:
    if isinstance(x, QuadState):
        return x.to_array()
    return np.asarray(x, dtype=float).reshape(NX)


def as_input_array(u) -> np.ndarray:
    if isinstance(u, QuadInput):
        return u.to_array()
    return np.asarray(u, dtype=float).reshape(NU)


@dataclass(frozen=True)
class ContinuousModel:
    A: np.ndarray
    B: np.ndarray
    G: np.ndarray
    params: QuadParams


@dataclass(frozen=True)
class DiscreteModel:
    A_T: np.ndarray
    B_T: np.ndarray
    G_T: np.ndarray
    dt: float
    params: QuadParams

    def step_array(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A_T @ x + self.B_T @ u + self.G_T

    @property
    def hover_input(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.params.hover_thrust])


def build_continuous(params: QuadParams) -> ContinuousModel:
    """Assemble the continuous-time model matrices from identified parameters.

    The x/pitch, y/roll and altitude blocks are decoupled; the only
    cross-quantity couplings are ``xdd = g * theta`` and ``ydd = -g * phi``.
    The input matrix carries ``-a_p`` / ``-a_r`` on the commanded-angle
    channels and ``1/m`` on thrust; gravity enters as the affine term on zd.
    """
    params.validate()
    A = np.zeros((NX, NX))
    B = np.zeros((NX, NU))
    G = np.zeros(NX)

    A[IX, IXD] = 1.0
    A[IXD, ITH] = params.g
    A[ITH, ITHD] = 1.0
    A[ITHD, ITH] = -params.b_p0
    A[ITHD, ITHD] = -params.b_p1

    A[IY, IYD] = 1.0
    A[IYD, IPH] = -params.g
    A[IPH, IPHD] = 1.0
    A[IPHD, IPH] = -params.b_r0
    A[IPHD, IPHD] = -params.b_r1

    A[IZ, IZD] = 1.0

    B[ITHD, 0] = -params.a_p
    B[IPHD, 1] = -params.a_r
    B[IZD, 2] = 1.0 / params.m

    G[IZD] = -params.g

    return ContinuousModel(A=A, B=B, G=G, params=params)


def discretize(model: ContinuousModel, dt: float) -> DiscreteModel:
    """Exact ZOH discretization via the augmented matrix exponential.

    Stacking ``[B | G]`` next to ``A`` and exponentiating the augmented
    matrix yields A_T together with the convolution integrals for B_T and
    G_T in one call, so no quadrature error is introduced.
    """
    if not (0.0 < dt <= MAX_DT):
        raise InvalidParameterError(f"dt must be in (0, {MAX_DT}] s, got {dt}")
    n = model.A.shape[0]
    nu = model.B.shape[1]
    bg = np.hstack([model.B, model.G.reshape(-1, 1)])
    m = bg.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = model.A
    aug[:n, n:] = bg
    phi = expm(aug * dt)
    A_T = phi[:n, :n]
    B_T = phi[:n, n:n + nu]
    G_T = phi[:n, n + nu]
    return DiscreteModel(A_T=A_T, B_T=B_T, G_T=G_T, dt=dt, params=model.params)


def step(model: DiscreteModel, x, u):
    """One discrete step ``x+ = A_T x + B_T u + G_T``.

    Accepts either the typed records or raw arrays; returns the same kind
    it was given for the state.
    """
    xa = as_state_array(x)
    ua = as_input_array(u)
    out = model.step_array(xa, ua)
    if isinstance(x, QuadState):
        return QuadState.from_array(out)
    return out


def controllability_rank(A: np.ndarray, B: np.ndarray) -> int:
    n = A.shape[0]
    B = B.reshape(n, -1)
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return int(np.linalg.matrix_rank(np.hstack(blocks)))


def subsystem(model: DiscreteModel, idx, input_col: int):
    """Extract one decoupled sub-system (A, B, G) by state indices."""
    ii = np.asarray(idx)
    A = model.A_T[np.ix_(ii, ii)]
    B = model.B_T[ii, input_col].reshape(-1, 1)
    G = model.G_T[ii]
    return A, B, G


def dump_model_csv(model, directory) -> None:
    """Write the model matrices to CSV files for inspection.

    Accepts either a continuous or a discrete model; files are named after
    the matrix fields (A.csv/B.csv/G.csv or A_T.csv/B_T.csv/G_T.csv).
    """
    import os

    os.makedirs(directory, exist_ok=True)
    if isinstance(model, DiscreteModel):
        fields_ = {"A_T": model.A_T, "B_T": model.B_T, "G_T": model.G_T}
    else:
        fields_ = {"A": model.A, "B": model.B, "G": model.G}
    for name, mat in fields_.items():
        np.savetxt(os.path.join(directory, f"{name}.csv"),
                   np.atleast_2d(mat), delimiter=",")


def check_decoupling(model: DiscreteModel, atol: float = 1e-12) -> bool:
    """True when the x/pitch, y/roll and altitude blocks stay decoupled in A_T."""
    groups = [XPITCH_IDX, YROLL_IDX, ALT_IDX]
    for gi, gidx in enumerate(groups):
        for gj, gjdx in enumerate(groups):
            if gi == gj:
                continue
            if np.max(np.abs(model.A_T[np.ix_(gidx, gjdx)])) > atol:
                return False
    return True
