"""Teleoperation service: live sessions over HTTP + WebSocket.

One worker thread per session owns the integrator; commands arrive through
a queue and are applied between steps; observers get immutable frame
snapshots, most-recent-wins.  Message schemas are documented in PROTOCOL.md.
"""

from __future__ import annotations

import asyncio
import os
import queue
import threading
import time
import uuid

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import RigConfig, build_default, load_config
from .scenarios import scenario_names
from .session import CommandError, Session

PROTOCOL_VERSION = 1


class _LiveSession:
    """A session plus the worker thread that steps it."""

    def __init__(self, session: Session, tick_rate: float,
                 real_time_factor: float):
        self.session = session
        self.tick = 1.0 / tick_rate
        self.rtf = real_time_factor
        self.queue: queue.Queue = queue.Queue()
        self.running = False
        self.closed = False
        self.latest = session.frame()
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    # -- worker ------------------------------------------------------------

    def _loop(self):
        dt = self.session.sim.params.dt
        steps_per_tick = max(1, round(self.tick * self.rtf / dt))
        while not self.closed:
            try:
                item = self.queue.get(timeout=0.0 if self.running else 0.05)
            except queue.Empty:
                item = None
            if item is not None:
                self._handle(item)
                continue
            if self.running and not self.session.finished:
                t0 = time.perf_counter()
                self.session.step(steps_per_tick)
                self.latest = self.session.frame()
                lag = self.tick - (time.perf_counter() - t0)
                if lag > 0:
                    time.sleep(lag)
            elif not self.running:
                pass  # idle; queue.get above provides the sleep

    def _handle(self, item):
        action, arg, reply = item
        try:
            if action == "command":
                kind, payload = arg
                out = self.session.apply(kind, payload)
            elif action == "start":
                self.running = True
                out = {"running": True}
            elif action == "pause":
                self.running = False
                out = {"running": False}
            elif action == "step":
                self.session.step(int(arg))
                self.latest = self.session.frame()
                out = {"step": self.session.sim.step_index,
                       "time": self.session.sim.state.time}
            else:
                raise CommandError(f"unknown control action {action!r}")
            if action == "command":
                self.latest = self.session.frame()
            reply.put(("ok", out))
        except CommandError as exc:
            reply.put(("error", str(exc)))
        except Exception as exc:  # surfaced to the client, session stays up
            reply.put(("error", f"{type(exc).__name__}: {exc}"))

    # -- client side -------------------------------------------------------

    def request(self, action, arg=None, timeout=30.0):
        reply: queue.Queue = queue.Queue()
        self.queue.put((action, arg, reply))
        status, out = reply.get(timeout=timeout)
        if status == "error":
            raise CommandError(out)
        return out

    def close(self):
        self.closed = True
        self.thread.join(timeout=5.0)


class OpenSessionRequest(BaseModel):
    scenario: str
    seed: int = 0
    scripted: bool = False


def create_app(cfg: RigConfig | None = None, tick_rate: float = 60.0,
               real_time_factor: float = 1.0,
               static_dir: str | None = None) -> FastAPI:
    cfg = cfg if cfg is not None else build_default()
    app = FastAPI(title="impactneedle teleop service")
    sessions: dict[str, _LiveSession] = {}
    app.state.sessions = sessions

    @app.get("/scenarios")
    def list_scenarios():
        return {"v": PROTOCOL_VERSION, "scenarios": scenario_names()}

    @app.post("/sessions")
    def open_session(req: OpenSessionRequest):
        if req.scenario not in scenario_names():
            raise HTTPException(404, f"unknown scenario {req.scenario!r}")
        session = Session(req.scenario, seed=req.seed, cfg=cfg,
                          scripted=req.scripted)
        sid = uuid.uuid4().hex[:12]
        sessions[sid] = _LiveSession(session, tick_rate, real_time_factor)
        return {"v": PROTOCOL_VERSION, "id": sid, "scenario": req.scenario,
                "seed": req.seed}

    def _get(sid: str) -> _LiveSession:
        live = sessions.get(sid)
        if live is None:
            raise HTTPException(410, "session gone")
        return live

    @app.delete("/sessions/{sid}")
    def close_session(sid: str):
        live = _get(sid)
        live.close()
        del sessions[sid]
        return {"v": PROTOCOL_VERSION, "closed": sid}

    @app.get("/sessions/{sid}/frame")
    def latest_frame(sid: str):
        return _get(sid).latest

    @app.get("/sessions/{sid}/log")
    def session_log(sid: str):
        return _get(sid).session.log_dict()

    @app.websocket("/sessions/{sid}/ws")
    async def session_ws(ws: WebSocket, sid: str):
        live = sessions.get(sid)
        await ws.accept()
        if live is None:
            await ws.send_json({"v": PROTOCOL_VERSION, "type": "closed",
                                "reason": "session gone"})
            await ws.close()
            return
        sender_task = None

        async def sender(rate: float):
            last_seq = -1
            gaps = 0
            loop = asyncio.get_running_loop()
            next_t = loop.time()
            while True:
                next_t += 1.0 / rate
                await asyncio.sleep(max(0.0, next_t - loop.time()))
                f = live.latest
                if f["seq"] == last_seq:
                    continue
                if last_seq >= 0:
                    gaps += f["seq"] - last_seq - 1
                last_seq = f["seq"]
                await ws.send_json({"v": PROTOCOL_VERSION, "type": "frame",
                                    "gaps": gaps, **f})

        try:
            while True:
                msg = await ws.receive_json()
                mid = msg.get("id")
                if msg.get("v") != PROTOCOL_VERSION:
                    await ws.send_json({"v": PROTOCOL_VERSION, "type": "error",
                                        "id": mid,
                                        "message": "unsupported version"})
                    continue
                mtype = msg.get("type")
                try:
                    if mtype == "command":
                        out = await asyncio.to_thread(
                            live.request, "command",
                            (msg.get("kind"), msg.get("payload", {})))
                        await ws.send_json({"v": PROTOCOL_VERSION,
                                            "type": "ack", "id": mid, **out})
                    elif mtype == "control":
                        action = msg.get("action")
                        arg = msg.get("steps", 1) if action == "step" else None
                        out = await asyncio.to_thread(
                            live.request, action, arg)
                        await ws.send_json({"v": PROTOCOL_VERSION,
                                            "type": "ack", "id": mid, **out})
                    elif mtype == "subscribe":
                        rate = float(msg.get("rate", 30.0))
                        if not 1.0 <= rate <= 120.0:
                            raise CommandError("rate must lie in [1, 120]")
                        if sender_task is not None:
                            sender_task.cancel()
                        sender_task = asyncio.create_task(sender(rate))
                        await ws.send_json({"v": PROTOCOL_VERSION,
                                            "type": "ack", "id": mid,
                                            "rate": rate})
                    else:
                        raise CommandError(f"unknown message type {mtype!r}")
                except CommandError as exc:
                    await ws.send_json({"v": PROTOCOL_VERSION, "type": "error",
                                        "id": mid, "message": str(exc)})
        except WebSocketDisconnect:
            pass
        finally:
            if sender_task is not None:
                sender_task.cancel()

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app


def serve(host: str = "127.0.0.1", port: int = 8321,
          config_path: str | None = None, tick_rate: float = 60.0,
          real_time_factor: float = 1.0, static_dir: str | None = None):
    """Run the teleop service under uvicorn (blocking)."""
    import uvicorn

    host = os.environ.get("IMPACTNEEDLE_HOST", host)
    port = int(os.environ.get("IMPACTNEEDLE_PORT", port))
    cfg = load_config(config_path)
    app = create_app(cfg, tick_rate=tick_rate,
                     real_time_factor=real_time_factor,
                     static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)
