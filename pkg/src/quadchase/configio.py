"""Flat key=value config files and the shipped desk-scale defaults.

Format: one ``key = value`` pair per line, ``#`` comments, dotted keys for
grouping. Values parse as bool, int, float, comma-separated float lists, or
fall back to strings. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import numpy as np

from .dynamics import QuadParams
from .evader import VelocityBounds
from .mpc import MpcConfig
from .polytopes import Polytope

# Placeholder desk-scale values; the platform parameters a_*, b_* come from
# system identification on real hardware and are config inputs here.
DEFAULTS: dict = {
    "quad.a_p": 30.0, "quad.a_r": 30.0,
    "quad.b_p1": 7.0, "quad.b_p0": 35.0,
    "quad.b_r1": 7.0, "quad.b_r0": 35.0,
    "quad.m": 0.5, "quad.g": 9.81,

    "mpc.horizon": 20,
    "mpc.dt": 0.05,
    "mpc.q_diag": [100.0, 10.0, 1.0, 0.1, 100.0, 10.0, 1.0, 0.1, 100.0, 10.0],
    "mpc.r_diag": [1.0, 1.0, 0.1],
    "mpc.slack_quad": 1000.0,
    "mpc.slack_lin": 1000.0,
    "mpc.angle_mode": "flat",
    "mpc.input_cost": "trim",

    "limits.pos_xy": 5.0,
    "limits.z_min": 0.0,
    "limits.z_max": 2.0,
    "limits.vel_xy": 2.0,
    "limits.vel_z": 1.0,
    "limits.angle": 0.5,
    "limits.rate": 4.0,

    "input.angle_cmd": 0.5,
    "input.thrust_min": 0.0,
    "input.thrust_max": 9.81,

    # terminal sub-boxes; one-step drift margins inside the state limits
    "terminal.vel_xy": 1.2,
    "terminal.vel_z": 0.15,
    "terminal.angle": 0.2,
    "terminal.rate": 1.0,

    "evader.v_bar_prior": 1.0,
    "evader.theta_lo_prior": -0.6,
    "evader.theta_hi_prior": 0.6,
    "evader.beta_v": 1.0,
    "evader.beta_lo": 0.85,
    "evader.beta_hi": 0.85,
    "evader.window": 20,

    "capture.height": 0.5,

    "sim.kind": "circular",
    "sim.duration": 60.0,
    "sim.seed": 0,
    "sim.noise_pos": 0.0,
    "sim.noise_vel": 0.0,
    "sim.noise_heading": 0.0,
    "sim.delay_steps": 0,
    "sim.convergence_threshold": 0.25,
    "sim.quad_start": [1.2, 0.0, 0.0, 0.0, -1.2, 0.0, 0.0, 0.0, 0.5, 0.0],
    "sim.vehicle_start": [2.0, 0.0],
    "sim.circle_center": [0.0, 0.0],
    "sim.circle_radius": 2.0,
    "sim.circle_speed": 0.5,
    "sim.random_speed_cap": 0.5,
    "sim.random_rate_cap": 1.0,
    "sim.random_arena_half": 2.5,
    "sim.scripted_path": "",
}


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if "," in raw:
        try:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError:
            pass
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def parse_config(text: str) -> dict:
    cfg = dict(DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        value = _parse_value(raw)
        default = DEFAULTS[key]
        if isinstance(default, list) and not isinstance(value, list):
            value = [float(value)]
        if isinstance(default, float) and isinstance(value, int):
            value = float(value)
        cfg[key] = value
    return cfg


def load_config(path=None) -> dict:
    if path is None:
        return dict(DEFAULTS)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: dict) -> str:
    lines = []
    for key in DEFAULTS:
        value = cfg[key]
        if isinstance(value, list):
            rendered = ", ".join(repr(float(v)) for v in value)
        else:
            rendered = repr(value) if not isinstance(value, str) else value
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def quad_params(cfg: dict) -> QuadParams:
    return QuadParams(
        a_r=cfg["quad.a_r"], a_p=cfg["quad.a_p"],
        b_r1=cfg["quad.b_r1"], b_r0=cfg["quad.b_r0"],
        b_p1=cfg["quad.b_p1"], b_p0=cfg["quad.b_p0"],
        m=cfg["quad.m"], g=cfg["quad.g"],
    ).validate()


def state_polytope(cfg: dict) -> Polytope:
    p = cfg["limits.pos_xy"]
    v = cfg["limits.vel_xy"]
    a = cfg["limits.angle"]
    w = cfg["limits.rate"]
    lo = [-p, -v, -a, -w, -p, -v, -a, -w, cfg["limits.z_min"], -cfg["limits.vel_z"]]
    hi = [p, v, a, w, p, v, a, w, cfg["limits.z_max"], cfg["limits.vel_z"]]
    return Polytope.box(lo, hi)


def input_polytope(cfg: dict) -> Polytope:
    a = cfg["input.angle_cmd"]
    lo = [-a, -a, cfg["input.thrust_min"]]
    hi = [a, a, cfg["input.thrust_max"]]
    return Polytope.box(lo, hi)


def terminal_velocity_box(cfg: dict) -> Polytope:
    v = cfg["terminal.vel_xy"]
    vz = cfg["terminal.vel_z"]
    return Polytope.box([-v, -v, -vz], [v, v, vz])


def terminal_rotational_box(cfg: dict) -> Polytope:
    a = cfg["terminal.angle"]
    w = cfg["terminal.rate"]
    return Polytope.box([-a, -w, -a, -w], [a, w, a, w])


def mpc_config(cfg: dict) -> MpcConfig:
    return MpcConfig(
        N=int(cfg["mpc.horizon"]), dt=float(cfg["mpc.dt"]),
        Q=np.diag(cfg["mpc.q_diag"]), R=np.diag(cfg["mpc.r_diag"]),
        slack_weight_quadratic=cfg["mpc.slack_quad"],
        slack_weight_linear=cfg["mpc.slack_lin"],
        angle_mode=cfg["mpc.angle_mode"],
        input_cost=cfg["mpc.input_cost"],
    )


def velocity_bounds(cfg: dict) -> VelocityBounds:
    return VelocityBounds.from_priors(
        cfg["evader.v_bar_prior"], cfg["evader.theta_lo_prior"],
        cfg["evader.theta_hi_prior"], beta_v=cfg["evader.beta_v"],
        beta_lo=cfg["evader.beta_lo"], beta_hi=cfg["evader.beta_hi"],
    )
