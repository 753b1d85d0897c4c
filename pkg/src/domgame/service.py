"""Live session service: create games, stream frames, steer the evader.

Wire protocol (text messages; floats serialized with 17 significant digits so
replays compare bit for bit):

  frame <t> <xp_x> <xp_y> <xe_x> <xe_y> <up_x> <up_y> <ue_x> <ue_y>
        <separation> <phi_cursor> <boundary_version> <status> <flags>
  end <status> <t_final>
  error <token>
  steer <session_id> <ux> <uy> <client_ts> [<cursor_x> <cursor_y>]

Frames are pushed once per engine tick; heading updates are zero-order held
between ticks. The boundary polyline is fetched over HTTP and carries a
version tag; frames repeat the tag instead of re-sending geometry.
"""

from __future__ import annotations

import asyncio
import json
import math
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .engine import Captured, EpisodeRunner, SimConfig, TimedOut, Trajectory
from .geom import CornerWedge, FreePlane, Point2, PolygonWorld, contains_point
from .regions import boundary_arcs, phi
from .scenario import Scenario, ScenarioError, loads_scenario
from .strategies import HumanLivePolicy, ScriptPolicy


def _f(v: float) -> str:
    return format(float(v), ".17g")


class Session:
    """One live episode; single writer, stepped only through tick()."""

    def __init__(self, scenario: Scenario, session_id: str):
        self.id = session_id
        self.scenario = scenario
        self.config = scenario.config
        self.tick_rate = scenario.tick_rate
        self.runner = EpisodeRunner(self.config)
        self.region = scenario.region()
        self.human = self.config.evader if isinstance(self.config.evader, HumanLivePolicy) else None
        self.cursor: Optional[Point2] = None
        self.flags: set = set()
        self.status = "running"
        self.t_final: Optional[float] = None
        self.input_record: list = []  # (held ux, held uy) per tick, pre-projection
        self.boundary_version = 0
        self._boundary_doc: Optional[dict] = None
        self.lock = asyncio.Lock()

    # -- steering ----------------------------------------------------------

    def handle_steer(self, line: str) -> None:
        parts = line.strip().split()
        if len(parts) < 5 or parts[0] != "steer":
            self.flags.add("bad_message")
            return
        if parts[1] != self.id:
            self.flags.add("wrong_session")
            return
        try:
            ux, uy = float(parts[2]), float(parts[3])
        except ValueError:
            self.flags.add("bad_message")
            return
        norm = math.hypot(ux, uy)
        if norm == 0.0:
            self.flags.add("zero_heading")
            return
        if abs(norm - 1.0) > 1e-9:
            ux, uy = ux / norm, uy / norm
            self.flags.add("normalized")
        if self.human is not None:
            self.human.set_heading(Point2(ux, uy))
        else:
            self.flags.add("not_human")
        if len(parts) >= 7:
            try:
                self.cursor = Point2(float(parts[5]), float(parts[6]))
            except ValueError:
                self.flags.add("bad_message")

    # -- stepping ----------------------------------------------------------

    def tick(self) -> str:
        if self.status != "running":
            return self.frame_line()
        held = self.human.held.direction if self.human is not None else None
        outcome = self.runner.tick()
        traj = self.runner.traj
        k = len(traj) - 1
        if held is not None:
            self.input_record.append((held.x, held.y))
        else:
            self.input_record.append((traj.ue_x[k], traj.ue_y[k]))
        if traj.slide_e[k]:
            self.flags.add("slide")
        if outcome is not None:
            if isinstance(outcome, Captured):
                self.status = "captured"
                self.t_final = outcome.t_f
            elif isinstance(outcome, TimedOut):
                self.status = "timed_out"
                self.t_final = outcome.t_end
            else:
                self.status = "violation"
                self.t_final = outcome.t
        return self.frame_line()

    def frame_line(self) -> str:
        traj = self.runner.traj
        k = len(traj) - 1
        phi_cursor = "nan"
        if self.cursor is not None and contains_point(self.config.world, self.cursor):
            phi_cursor = _f(phi(self.region, self.cursor))
        flags = ",".join(sorted(self.flags)) if self.flags else "-"
        self.flags = set()
        fields = [
            "frame", _f(traj.t[k]), _f(traj.xp_x[k]), _f(traj.xp_y[k]),
            _f(traj.xe_x[k]), _f(traj.xe_y[k]), _f(traj.up_x[k]), _f(traj.up_y[k]),
            _f(traj.ue_x[k]), _f(traj.ue_y[k]), _f(traj.separation[k]),
            phi_cursor, str(self.boundary_version), self.status, flags,
        ]
        return " ".join(fields)

    def end_line(self) -> str:
        return f"end {self.status} {_f(self.t_final if self.t_final is not None else self.runner.state.t)}"

    # -- exports -----------------------------------------------------------

    def boundary_doc(self) -> dict:
        if self._boundary_doc is None:
            geo = boundary_arcs(self.region, 360)
            self._boundary_doc = {
                "version": self.boundary_version,
                "capture_bound": self.config.capture_bound(),
                "alpha": self.config.alpha,
                "capture_threshold": self.config.capture_threshold,
                "world": _world_doc(self.config.world),
                "targets": [t for t in self.scenario.raw.get("targets", [])],
                "arcs": [
                    {"type": arc.arc_type,
                     "points": [[p.x, p.y] for p in arc.points]}
                    for arc in geo.arcs
                ],
            }
        return self._boundary_doc

    def record_text(self) -> str:
        lines = [f"{i} {_f(ux)} {_f(uy)}" for i, (ux, uy) in enumerate(self.input_record)]
        return "\n".join(lines) + ("\n" if lines else "")

    def trajectory_text(self) -> str:
        return trajectory_to_text(self.runner.traj)

    def replay_matches(self) -> bool:
        cfg = self.config
        script = ScriptPolicy([Point2(ux, uy) for ux, uy in self.input_record])
        replay_cfg = SimConfig(
            world=cfg.world, alpha=cfg.alpha, x_p0=cfg.x_p0, x_e0=cfg.x_e0,
            pursuer=_fresh_pursuer(self.scenario), evader=script,
            capture_radius=cfg.capture_radius, dt=cfg.dt, t_max=cfg.t_max,
            eps_capture=cfg.eps_capture, input_delay_ticks=cfg.input_delay_ticks,
        )
        runner = EpisodeRunner(replay_cfg)
        for _ in range(len(self.input_record)):
            if runner.tick() is not None:
                break
        return trajectory_to_text(runner.traj) == self.trajectory_text()


def _fresh_pursuer(scenario: Scenario):
    from .scenario import parse_pursuer

    return parse_pursuer(scenario.raw["pursuer"])


def trajectory_to_text(traj: Trajectory) -> str:
    out = ["\t".join(Trajectory.COLUMNS)]
    for row in traj.rows():
        out.append("\t".join("1" if v is True else "0" if v is False else _f(v)
                             for v in row))
    return "\n".join(out) + "\n"


def _world_doc(world) -> dict:
    if isinstance(world, FreePlane):
        return {"kind": "free"}
    if isinstance(world, CornerWedge):
        return {"kind": "corner", "theta0_deg": world.theta0 * 180.0 / math.pi}
    if isinstance(world, PolygonWorld):
        return {"kind": "polygons",
                "obstacles": [[[v.x, v.y] for v in poly] for poly in world.obstacles]}
    return {"kind": "unknown"}


def create_app(scenario_dir: Optional[str] = "scenarios",
               console_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="domgame service")
    sessions: dict = {}
    app.state.sessions = sessions

    @app.post("/sessions")
    async def create_session(body: dict):
        try:
            scenario = loads_scenario(json.dumps(body))
        except ScenarioError as err:
            raise HTTPException(status_code=422, detail=str(err))
        sid = uuid.uuid4().hex[:12]
        session = Session(scenario, sid)
        sessions[sid] = session
        return {
            "session_id": sid,
            "dt": session.config.dt,
            "alpha": session.config.alpha,
            "capture_bound": session.config.capture_bound(),
            "capture_threshold": session.config.capture_threshold,
            "tick_rate": session.tick_rate,
            "status": session.status,
        }

    def _get(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.get("/sessions/{sid}/state", response_class=PlainTextResponse)
    async def get_state(sid: str):
        return _get(sid).frame_line()

    @app.get("/sessions/{sid}/boundary")
    async def get_boundary(sid: str):
        return JSONResponse(_get(sid).boundary_doc())

    @app.get("/sessions/{sid}/record", response_class=PlainTextResponse)
    async def get_record(sid: str):
        return _get(sid).record_text()

    @app.get("/sessions/{sid}/trajectory", response_class=PlainTextResponse)
    async def get_trajectory(sid: str):
        return _get(sid).trajectory_text()

    @app.post("/sessions/{sid}/replay")
    async def post_replay(sid: str):
        session = _get(sid)
        async with session.lock:
            match = session.replay_matches()
        return {"match": match, "ticks": len(session.input_record)}

    @app.get("/scenarios")
    async def list_scenarios():
        base = Path(scenario_dir) if scenario_dir else None
        if base is None or not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    @app.get("/scenarios/{name}")
    async def get_scenario(name: str):
        base = Path(scenario_dir) if scenario_dir else None
        path = (base / f"{name}.json") if base else None
        if path is None or not path.is_file():
            raise HTTPException(status_code=404, detail="unknown scenario")
        return JSONResponse(json.loads(path.read_text()))

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        session = sessions.get(sid)
        if session is None:
            await ws.send_text("error unknown-session")
            await ws.close()
            return
        period = 1.0 / max(session.tick_rate, 1e-6)
        loop = asyncio.get_event_loop()
        try:
            async with session.lock:  # single writer per session
                while session.status == "running":
                    deadline = loop.time() + period
                    while True:
                        timeout = deadline - loop.time()
                        if timeout <= 0.0:
                            break
                        try:
                            msg = await asyncio.wait_for(ws.receive_text(), timeout)
                        except asyncio.TimeoutError:
                            break
                        session.handle_steer(msg)
                    await ws.send_text(session.tick())
                await ws.send_text(session.end_line())
            await ws.close()
        except WebSocketDisconnect:
            pass  # session stays; reconnecting resumes the stream
        except RuntimeError:
            pass  # socket torn down mid-send

    if console_dir and Path(console_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
