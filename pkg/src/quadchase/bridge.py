"""Real-time session service: a human drives the evader over WebSocket while
the planner chases.

One fixed-timestep tick loop per session is the single writer of that
session's state; network reads only park the latest steering command in a
mailbox the tick loop reads. Physics depends on nothing but the seed and the
(tick, steering) sequence, so a recorded session replays byte-identically
through :func:`replay_session`. Frames fan out through bounded per-client
queues (drop-oldest) so a slow client can never stall the loop.

Wire protocol (JSON text frames):
  client -> server:  {"type": "steer", "speed": float, "heading_rate": float}
                     {"type": "pause"} | {"type": "resume"} | {"type": "reset"}
  server -> client:  {"type": "state", "tick": int, "t": float, "wall": float,
                      "quad": {...}, "vehicle": {...}, "sector": {...},
                      "estimate": {...}, "ball_radius": float, "error": float,
                      "cost": float, "status": str, "fault": bool,
                      "paused": bool}
                     {"type": "ack", "applies_at_tick": int}
                     {"type": "error", "message": str}

HTTP on the same port: GET /health and GET /sessions return JSON; anything
under / serves the cockpit bundle when one is present.
"""

from __future__ import annotations

import asyncio
import http
import json
import mimetypes
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .configio import load_config
from .dynamics import QuadInput, step as dyn_step
from .evader import VehicleState, ground_velocity, vehicle_step, wrap_angle
from .simulate import (ScenarioConfig, SimLog, SimRecord, build_stack,
                       tracking_error)

TICK_RATE_LIMIT = 100  # client messages per second before dropping


@dataclass(frozen=True)
class Steering:
    speed: float
    heading_rate: float


def validate_client_message(raw: str):
    """Parse one client frame; returns (kind, payload) or raises ValueError."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc}") from exc
    if not isinstance(msg, dict) or "type" not in msg:
        raise ValueError("message must be an object with a 'type' field")
    kind = msg["type"]
    if kind == "steer":
        try:
            speed = float(msg["speed"])
            rate = float(msg["heading_rate"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError("steer needs numeric 'speed' and 'heading_rate'") from exc
        if not (np.isfinite(speed) and np.isfinite(rate)):
            raise ValueError("steer fields must be finite")
        return kind, Steering(speed=speed, heading_rate=rate)
    if kind in ("pause", "resume", "reset"):
        return kind, None
    raise ValueError(f"unknown message type {kind!r}")


class Session:
    """Simulation state and tick logic for one live session.

    Synchronous core: the async layer only schedules ticks and moves bytes.
    """

    def __init__(self, session_id: str, cfg: dict | None = None,
                 seed: int = 0):
        self.session_id = session_id
        self.cfg = cfg if cfg is not None else load_config(None)
        self.seed = seed
        self.model, self.controller, scenario = build_stack(
            self.cfg, verify_conditions=False)
        self.dt = self.controller.config.dt
        self.rate_cap = float(self.cfg["sim.random_rate_cap"])
        self.arena_half = float(self.cfg["sim.random_arena_half"])
        self.records: list = []
        self._base_quad = scenario.quad_start
        self.reset()

    def reset(self) -> None:
        self.controller.reset()
        self.tick_index = 0
        self.paused = False
        self.quad = self._base_quad
        self.vehicle = VehicleState()
        self.heading = 0.0
        self.latest_steer = Steering(0.0, 0.0)
        self.last_applied = QuadInput.from_array(self.model.hover_input)
        self.records = []

    def clamp_steer(self, steer: Steering) -> Steering:
        """Project a request into the admissible evader envelope."""
        v_max = self.controller.bounds.V_bar
        return Steering(
            speed=float(np.clip(steer.speed, 0.0, v_max)),
            heading_rate=float(np.clip(steer.heading_rate, -self.rate_cap,
                                       self.rate_cap)),
        )

    def store_steer(self, steer: Steering) -> int:
        """Latest-wins steering mailbox; returns the tick it takes effect."""
        self.latest_steer = self.clamp_steer(steer)
        return self.tick_index + 1

    def tick(self) -> dict:
        """Advance one fixed step and return the broadcast frame."""
        steer = self.latest_steer
        self.heading = wrap_angle(self.heading + steer.heading_rate * self.dt)
        u = ground_velocity(steer.speed, self.heading, 0.0)
        # hold the vehicle inside the arena: driving against the wall slides
        # along it instead of leaving the flight volume
        nxt = self.vehicle.position + self.dt * u
        clamped = np.clip(nxt, -self.arena_half, self.arena_half)
        u = (clamped - self.vehicle.position) / self.dt

        t = self.tick_index * self.dt
        command, diag, _ = self.controller.step(self.quad, self.vehicle, t)
        fault = diag.status != "optimal"
        if fault:
            command = self.last_applied
            self.paused = True
        self.last_applied = command

        self.records.append(SimRecord(
            t=t, quad=self.quad, vehicle=self.vehicle, command=command,
            applied=command, error=tracking_error(self.quad, self.vehicle),
            fault=fault, reversal=False, diagnostics=diag,
        ))

        self.quad = dyn_step(self.model, self.quad, command)
        self.vehicle = vehicle_step(self.vehicle, u, self.dt)
        self.tick_index += 1
        return self.frame(diag, steer, fault)

    def frame(self, diag, steer: Steering, fault: bool) -> dict:
        q = self.quad
        v = self.vehicle
        return {
            "type": "state",
            "tick": self.tick_index,
            "t": self.tick_index * self.dt,
            "wall": time.time(),
            "quad": {"x": q.x, "y": q.y, "z": q.z,
                     "vx": q.x_dot, "vy": q.y_dot},
            "vehicle": {"x": v.x_v, "y": v.y_v, "vx": v.v_x, "vy": v.v_y,
                        "heading": v.heading},
            "steer": {"speed": steer.speed, "heading_rate": steer.heading_rate},
            "sector": diag.sector.to_dict(),
            "estimate": diag.estimate.to_dict(),
            "ball_radius": self.controller.bounds.V_bar
            * self.controller.config.N * self.dt,
            "error": tracking_error(q, v),
            "cost": diag.cost,
            "status": diag.status,
            "fault": fault,
            "paused": self.paused,
        }

    def log(self) -> SimLog:
        config = ScenarioConfig(kind="external", duration=len(self.records) * self.dt,
                                dt=self.dt, seed=self.seed)
        return SimLog(self.records, config)


def replay_session(steering_schedule, n_ticks: int, cfg: dict | None = None,
                   seed: int = 0) -> SimLog:
    """Deterministic offline replay: apply (tick, speed, heading_rate)
    commands at their ticks and run the session loop without a network."""
    session = Session("replay", cfg=cfg, seed=seed)
    schedule = {int(t): Steering(s, r) for t, s, r in steering_schedule}
    for k in range(n_ticks):
        if k in schedule:
            session.store_steer(schedule[k])
        session.tick()
    return session.log()


class BridgeServer:
    """WebSocket + HTTP front for live sessions."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8765,
                 cfg: dict | None = None, static_dir=None,
                 realtime: bool = True):
        self.host = host
        self.port = port
        self.cfg = cfg
        self.static_dir = Path(static_dir) if static_dir else None
        self.realtime = realtime
        self.sessions: dict[str, Session] = {}
        self._clients: dict[str, set] = {}
        self._tasks: dict[str, asyncio.Task] = {}
        self._server = None
        self._shutdown = None

    def get_session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            self.sessions[session_id] = Session(session_id, cfg=self.cfg)
            self._clients[session_id] = set()
            self._tasks[session_id] = asyncio.get_running_loop().create_task(
                self._tick_loop(session_id))
        return self.sessions[session_id]

    async def _tick_loop(self, session_id: str) -> None:
        session = self.sessions[session_id]
        next_deadline = time.monotonic()
        while True:
            next_deadline += session.dt
            if not session.paused:
                frame = session.tick()
                payload = json.dumps(frame)
                for q in list(self._clients.get(session_id, ())):
                    if q.full():
                        q.get_nowait()  # drop oldest for slow clients
                    q.put_nowait(payload)
            if self.realtime:
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_deadline = time.monotonic()  # missed deadline: log, never skip
            else:
                await asyncio.sleep(0)

    async def _handle(self, websocket) -> None:
        path = websocket.request.path
        session_id = "default"
        if "session=" in path:
            session_id = path.split("session=", 1)[1].split("&")[0] or "default"
        session = self.get_session(session_id)
        outbox: asyncio.Queue = asyncio.Queue(maxsize=64)
        self._clients[session_id].add(outbox)

        async def pump():
            while True:
                await websocket.send(await outbox.get())

        pump_task = asyncio.create_task(pump())
        window_start = time.monotonic()
        window_count = 0
        try:
            async for raw in websocket:
                now = time.monotonic()
                if now - window_start >= 1.0:
                    window_start, window_count = now, 0
                window_count += 1
                if window_count > TICK_RATE_LIMIT:
                    await websocket.send(json.dumps(
                        {"type": "error", "message": "rate limit: dropped"}))
                    continue
                try:
                    kind, payload = validate_client_message(raw)
                except ValueError as exc:
                    await websocket.send(json.dumps(
                        {"type": "error", "message": str(exc)}))
                    continue
                if kind == "steer":
                    applies = session.store_steer(payload)
                    await websocket.send(json.dumps(
                        {"type": "ack", "applies_at_tick": applies}))
                elif kind == "pause":
                    session.paused = True
                    await websocket.send(json.dumps(
                        {"type": "ack", "applies_at_tick": session.tick_index}))
                elif kind == "resume":
                    session.paused = False
                    await websocket.send(json.dumps(
                        {"type": "ack", "applies_at_tick": session.tick_index}))
                elif kind == "reset":
                    session.reset()
                    await websocket.send(json.dumps(
                        {"type": "ack", "applies_at_tick": 0}))
        except ConnectionClosed:
            pass
        finally:
            pump_task.cancel()
            self._clients[session_id].discard(outbox)

    def _http_response(self, connection, request):
        path = request.path.split("?")[0]
        if "Upgrade" in request.headers.get("Connection", "") or \
                request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # continue with the WebSocket handshake
        if path == "/health":
            body = json.dumps({"status": "ok", "sessions": len(self.sessions)})
            return connection.respond(http.HTTPStatus.OK, body + "\n")
        if path == "/sessions":
            body = json.dumps({
                sid: {"tick": s.tick_index, "paused": s.paused,
                      "error": tracking_error(s.quad, s.vehicle)}
                for sid, s in self.sessions.items()})
            return connection.respond(http.HTTPStatus.OK, body + "\n")
        if self.static_dir is not None:
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            target = (self.static_dir / rel).resolve()
            if target.is_file() and str(target).startswith(str(self.static_dir.resolve())):
                response = connection.respond(http.HTTPStatus.OK,
                                              target.read_bytes().decode("utf-8"))
                ctype = mimetypes.guess_type(str(target))[0] or "text/plain"
                del response.headers["Content-Type"]
                response.headers["Content-Type"] = ctype
                return response
        return connection.respond(http.HTTPStatus.NOT_FOUND, "not found\n")

    async def serve_forever(self) -> None:
        self._shutdown = asyncio.get_running_loop().create_future()
        async with serve(self._handle, self.host, self.port,
                         process_request=self._http_response) as server:
            self._server = server
            await self._shutdown
            for task in self._tasks.values():
                task.cancel()

    def request_shutdown(self) -> None:
        """Thread-safe shutdown trigger (schedule onto the server loop)."""
        if self._shutdown is not None and not self._shutdown.done():
            self._shutdown.set_result(None)


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="quadchase live-session bridge")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--config", default=None)
    parser.add_argument("--static", default=None,
                        help="directory with the cockpit bundle")
    args = parser.parse_args(argv)
    cfg = load_config(args.config)
    server = BridgeServer(host=args.host, port=args.port, cfg=cfg,
                          static_dir=args.static)
    print(f"bridge listening on ws://{args.host}:{args.port}/session "
          f"(health at http://{args.host}:{args.port}/health)")
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
