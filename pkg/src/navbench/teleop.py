"""Teleoperation session server: live episodes over a wire protocol so a
human can play the benchmark with the exact same action space and budget
as the algorithmic agents, logged through the same harness code.

Protocol (JSON text messages over a persistent WebSocket, one object per
frame; field reference in docs/protocol.md):

  server -> client
    {"type": "episode_start", "episode", "n_episodes", "scenario_id",
     "budget", "success_radius", "fov", "n_rays"}
    {"type": "obs", "step", "depth": [m...], "valid": [bool...],
     "goal": {"distance", "bearing"}, "budget_left"}
    {"type": "episode_end", "result": {...result row fields...}}
    {"type": "session_end"}
    {"type": "error", "message", "expected_step"}
  client -> server
    {"type": "action", "action": "forward"|"left"|"right"|"done", "step": N}

The server never advances the world without a client action (turn-based);
the configured minimum action interval enforces the nominal action-rate
cap. Exactly one obs is sent per accepted action, plus the initial one.
A stale step echo is rejected with an error message and no world step.
"""
from __future__ import annotations

import asyncio
import itertools
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .config import BenchConfig
from .episode import EpisodeEngine, EpisodeResult
from .metrics import build_report
from .report import RESULT_FIELDS, result_row, write_results
from .scenarios import Scenario, load_scenarios
from .world import Action, WorldMap, load_map

_ACTION_NAMES = {a.value: a for a in Action}


def result_payload(r: EpisodeResult) -> dict:
    return {
        "scenario_id": r.scenario_id,
        "agent": r.agent,
        "success": r.success,
        "shortest_m": r.shortest,
        "executed_m": r.executed,
        "budget_frac": r.budget_frac,
        "steps": r.steps_used,
        "reason": r.reason,
        "spl_term": r.spl_term,
        "pace_term": r.pace_term,
    }


class ResultStore:
    """Append-only, mutex-guarded result sink shared by all sessions."""

    def __init__(self, csv_path: Path | None = None):
        self._results: list[tuple[str, EpisodeResult]] = []
        self._lock = asyncio.Lock()
        self._csv_path = csv_path

    async def append(self, session_id: str, result: EpisodeResult) -> None:
        async with self._lock:
            self._results.append((session_id, result))
            if self._csv_path is not None:
                write_results([r for _s, r in self._results], self._csv_path)

    def rows(self, session_id: str | None = None) -> list[EpisodeResult]:
        return [r for s, r in self._results
                if session_id is None or s == session_id]


class Session:
    AWAITING = "Awaiting"
    RUNNING = "Running"
    FINISHED = "Finished"

    def __init__(self, session_id: str, operator: str,
                 scenarios: list[Scenario], worlds: dict[str, WorldMap],
                 config: BenchConfig):
        self.id = session_id
        self.operator = operator
        self.scenarios = scenarios
        self.worlds = worlds
        self.config = config
        self.status = self.AWAITING
        self.episode_index = 0
        self.engine: EpisodeEngine | None = None
        self.lock = asyncio.Lock()
        self.last_action_time = 0.0

    def start_next_episode(self) -> bool:
        if self.episode_index >= len(self.scenarios):
            self.engine = None
            self.status = self.FINISHED
            return False
        scenario = self.scenarios[self.episode_index]
        world = self.worlds[scenario.map_path]
        self.engine = EpisodeEngine(
            world, scenario, kin=self.config.kin, body=self.config.body,
            sensor=self.config.sensor, agent_name=self.operator,
            needs_depth=True, lenient_success=self.config.lenient_success)
        self.status = self.RUNNING
        return True

    def status_dict(self) -> dict:
        d = {
            "id": self.id,
            "operator": self.operator,
            "status": self.status,
            "episode_index": self.episode_index,
            "n_episodes": len(self.scenarios),
        }
        if self.engine is not None and not self.engine.finished:
            d["step"] = self.engine.steps_used
            d["budget_left"] = self.engine.budget_remaining
        return d


def _obs_message(engine: EpisodeEngine) -> dict:
    obs = engine.observation()
    return {
        "type": "obs",
        "step": engine.steps_used,
        "depth": [float(r) for r in obs.depth.ranges],
        "valid": [bool(v) for v in obs.depth.valid],
        "goal": {"distance": obs.goal_distance, "bearing": obs.goal_bearing},
        "budget_left": obs.budget_remaining,
    }


def _episode_start_message(session: Session) -> dict:
    scenario = session.scenarios[session.episode_index]
    return {
        "type": "episode_start",
        "episode": session.episode_index,
        "n_episodes": len(session.scenarios),
        "scenario_id": scenario.scenario_id,
        "budget": scenario.budget,
        "success_radius": scenario.success_radius,
        "fov": session.config.sensor.fov,
        "n_rays": session.config.sensor.n_rays,
    }


def create_app(suite_path, config: BenchConfig | None = None,
               debug_overlay: bool = False,
               min_action_interval: float = 0.0,
               ui_dir=None, results_dir=None) -> FastAPI:
    config = config or BenchConfig()
    suite_path = Path(suite_path)
    scenarios = load_scenarios(suite_path)
    if not scenarios:
        raise ValueError(f"{suite_path}: empty suite")
    worlds = {s.map_path: load_map(s.map_path) for s in scenarios}

    csv_path = None
    if results_dir is not None:
        results_dir = Path(results_dir)
        results_dir.mkdir(parents=True, exist_ok=True)
        csv_path = results_dir / "results_teleop.csv"
    store = ResultStore(csv_path)
    sessions: dict[str, Session] = {}
    counter = itertools.count()

    app = FastAPI(title="navbench teleop")
    app.state.store = store
    app.state.sessions = sessions

    @app.post("/sessions")
    async def create_session(body: dict | None = None):
        body = body or {}
        operator = str(body.get("operator", "human"))
        if "suite" in body and str(body["suite"]) != str(suite_path):
            raise HTTPException(status_code=404,
                                detail=f"unknown suite {body['suite']!r}")
        sid = f"s{next(counter)}-{uuid.uuid4().hex[:8]}"
        sessions[sid] = Session(sid, operator, scenarios, worlds, config)
        return {"session_id": sid, "n_episodes": len(scenarios),
                "status": Session.AWAITING}

    @app.get("/sessions/{sid}")
    async def session_status(sid: str):
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session.status_dict()

    @app.get("/results")
    async def results(session: str | None = None):
        rows = store.rows(session)
        payload = {
            "fields": list(RESULT_FIELDS),
            "rows": [result_row(r) for r in rows],
            "results": [result_payload(r) for r in rows],
        }
        if rows:
            report = build_report(rows)
            payload["summary"] = {
                "episodes": len(rows),
                "sr": report.sr, "spl": report.spl, "pace": report.pace,
            }
        return payload

    @app.get("/maps/{map_id}")
    async def map_grid(map_id: str):
        if not debug_overlay:
            raise HTTPException(status_code=403,
                                detail="server started without --debug-overlay")
        for path, world in worlds.items():
            if Path(path).stem == map_id:
                return {
                    "cell_size": world.cell_size,
                    "width": world.width,
                    "height": world.height,
                    "rows": ["".join("#" if world.occupancy[iy, ix] else "."
                                     for ix in range(world.width))
                             for iy in range(world.height)],
                }
        raise HTTPException(status_code=404, detail="unknown map")

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        session = sessions.get(sid)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        async with session.lock:
            if session.status == Session.FINISHED:
                await ws.send_json({"type": "session_end"})
                await ws.close()
                return
            if session.engine is None:
                session.start_next_episode()
            await ws.send_json(_episode_start_message(session))
            await ws.send_json(_obs_message(session.engine))
            try:
                while True:
                    msg = await ws.receive_json()
                    reply = await _handle_action(session, store, msg,
                                                 min_action_interval)
                    for m in reply:
                        await ws.send_json(m)
                    if session.status == Session.FINISHED:
                        await ws.close()
                        return
            except WebSocketDisconnect:
                return

    async def _handle_action(session: Session, store: ResultStore, msg: dict,
                             interval: float) -> list[dict]:
        engine = session.engine
        if session.status != Session.RUNNING or engine is None:
            return [{"type": "error", "message": "session is not running",
                     "expected_step": -1}]
        if msg.get("type") != "action":
            return [{"type": "error",
                     "message": f"unexpected message type {msg.get('type')!r}",
                     "expected_step": engine.steps_used}]
        name = msg.get("action")
        action = _ACTION_NAMES.get(name)
        if action is None:
            return [{"type": "error",
                     "message": f"action outside the action set: {name!r}",
                     "expected_step": engine.steps_used}]
        if msg.get("step") != engine.steps_used:
            return [{"type": "error",
                     "message": f"stale step echo {msg.get('step')}",
                     "expected_step": engine.steps_used}]
        if interval > 0.0:
            now = time.monotonic()
            wait = session.last_action_time + interval - now
            if wait > 0:
                await asyncio.sleep(wait)
            session.last_action_time = time.monotonic()

        engine.apply(action)
        if not engine.finished:
            return [_obs_message(engine)]
        result = engine.result()
        await store.append(session.id, result)
        session.episode_index += 1
        out = [{"type": "episode_end", "result": result_payload(result)}]
        if session.start_next_episode():
            out.append(_episode_start_message(session))
            out.append(_obs_message(session.engine))
        else:
            out.append({"type": "session_end"})
        return out

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
