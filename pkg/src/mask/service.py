"""Operational shell: service configuration, REST endpoints, session stream.

REST surface:
    GET  /catalog          cue-catalog manifest for UIs
    GET  /personas         databases available on disk
    GET  /personas/{name}  one full database document (transition inspector)
    POST /personas         enqueue a generation job, returns {"job_id"}
    GET  /jobs/{id}        job progress snapshot

Session stream (WebSocket /session), JSON messages:
    client -> server  {"type":"frame","time":t,"persons":[...]}
                      {"type":"load_persona","name":n} | {"type":"reset"}
    server -> client  {"type":"state",...} | {"type":"persona_loaded",...}
                      | {"type":"error","message":m}

One engine per connected session; a frame is answered by a state message when
a transition fired and by silence when quiescent. Protocol violations are
answered with error messages and the session stays open.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .behaviordb import PersonaSpec, deserialize, serialize
from .catalog import catalog_manifest
from .engine import BehaviorEngine
from .errors import SchemaError
from .infuser import GenerationJob, HTTPChatProvider, MockCompletionProvider, PromptTemplate
from .infuser.providers import CompletionProvider
from .perception import PerceptionConfig, PersonSnapshot, discretize

__all__ = ["ProviderConfig", "ServiceConfig", "create_app"]

DB_SUFFIX = ".maskdb.json"


@dataclass(frozen=True)
class ProviderConfig:
    """Where completions come from when a job asks for the real backend."""

    kind: str = "mock"
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4-0613"
    api_key_env: str = "MASK_API_KEY"
    temperature: float = 0.2
    max_retries: int = 3
    timeout_s: float = 30.0
    max_concurrency: int = 8


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    database_dir: str = "databases"
    motion_duration_s: float = 3.0
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)

    @classmethod
    def from_dict(cls, doc: dict) -> "ServiceConfig":
        cfg = cls()
        provider = replace(cfg.provider, **doc.get("provider", {}))
        perception = PerceptionConfig(**doc.get("perception", {}))
        known = {"host", "port", "database_dir", "motion_duration_s"}
        top = {k: v for k, v in doc.items() if k in known}
        return replace(cfg, provider=provider, perception=perception, **top)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"bad service config {path}: {e}") from None
        if not isinstance(doc, dict):
            raise SchemaError("$", f"bad service config {path}: expected object")
        try:
            return cls.from_dict(doc)
        except TypeError as e:
            raise SchemaError("$", f"bad service config {path}: {e}") from None

    def http_provider(self) -> HTTPChatProvider:
        p = self.provider
        return HTTPChatProvider(
            base_url=p.base_url,
            model=p.model,
            api_key_env=p.api_key_env,
            temperature=p.temperature,
            max_retries=p.max_retries,
            timeout_s=p.timeout_s,
            max_concurrency=p.max_concurrency,
        )

    def make_provider(self, kind: Optional[str] = None) -> CompletionProvider:
        kind = kind or self.provider.kind
        if kind == "mock":
            return MockCompletionProvider(max_retries=self.provider.max_retries)
        if kind == "real":
            return self.http_provider()
        raise ValueError(f"unknown provider kind: {kind!r}")


def _db_path(config: ServiceConfig, name: str) -> Path:
    # Persona names become file names; keep them to one path component.
    if not name or "/" in name or "\\" in name or name.startswith("."):
        raise HTTPException(status_code=400, detail=f"invalid persona name: {name!r}")
    return Path(config.database_dir) / f"{name}{DB_SUFFIX}"


def _snapshot_from_wire(rec: dict) -> PersonSnapshot:
    required = (
        "person_id",
        "left_hand_height",
        "right_hand_height",
        "gaze_angle",
        "distance",
        "hand_speed",
        "radial_velocity",
    )
    for key in required:
        if key not in rec:
            raise ValueError(f"person record missing {key!r}")
    return PersonSnapshot(
        person_id=rec["person_id"],
        left_hand_height=float(rec["left_hand_height"]),
        right_hand_height=float(rec["right_hand_height"]),
        gaze_angle=float(rec["gaze_angle"]),
        distance=float(rec["distance"]),
        hand_speed=float(rec["hand_speed"]),
        radial_velocity=float(rec["radial_velocity"]),
        bearing=float(rec.get("bearing", 0.0)),
    )


class _JobRegistry:
    """Background generation jobs, polled by id."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.jobs: dict[str, GenerationJob] = {}
        self.lock = threading.Lock()
        self.pool = ThreadPoolExecutor(max_workers=2, thread_name_prefix="mask-gen")

    def enqueue(self, persona: PersonaSpec, provider: CompletionProvider) -> str:
        job_id = uuid.uuid4().hex[:12]
        job = GenerationJob(persona, provider, PromptTemplate.default())
        with self.lock:
            self.jobs[job_id] = job

        def run():
            db = job.run()
            if db is not None:
                path = _db_path(self.config, persona.name)
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(path.suffix + ".tmp")
                tmp.write_bytes(serialize(db))
                os.replace(tmp, path)

        self.pool.submit(run)
        return job_id

    def get(self, job_id: str) -> GenerationJob:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no such job: {job_id}")
        return job


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="mask service")
    # The playground is static files served from anywhere; the service holds
    # no credentials, so open CORS is the simplest correct policy.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = _JobRegistry(config)
    app.state.config = config
    app.state.jobs = registry

    @app.get("/catalog")
    def get_catalog():
        return catalog_manifest()

    @app.get("/personas")
    def list_personas():
        directory = Path(config.database_dir)
        out = []
        for path in sorted(directory.glob(f"*{DB_SUFFIX}")):
            try:
                db = deserialize(path.read_bytes())
            except SchemaError:
                continue
            out.append(
                {
                    "name": db.persona.name,
                    "states": len(db.states),
                    "initial_state": db.initial_state,
                    "file": path.name,
                }
            )
        return out

    @app.get("/personas/{name}")
    def get_persona(name: str):
        path = _db_path(config, name)
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no database for persona {name!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.post("/personas", status_code=202)
    def generate_persona(body: dict):
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="expected a JSON object")
        try:
            persona = PersonaSpec(
                name=str(body["name"]),
                description=str(body["description"]),
                seed=int(body.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(status_code=400, detail=f"bad persona: {e}")
        _db_path(config, persona.name)  # rejects path-hostile names early
        kind = body.get("provider")
        try:
            provider = config.make_provider(kind)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        job_id = registry.enqueue(persona, provider)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return registry.get(job_id).snapshot()

    @app.websocket("/session")
    async def session(ws: WebSocket):
        await ws.accept()
        engine: Optional[BehaviorEngine] = None
        last_time = 0.0

        async def send_error(message: str):
            await ws.send_json({"type": "error", "message": message})

        async def send_state(trigger: str, time: float):
            motion, face, emoji, heading = engine.current_display()
            await ws.send_json(
                {
                    "type": "state",
                    "time": time,
                    "motion": motion,
                    "face": face,
                    "emoji": emoji,
                    "heading": heading,
                    "trigger": trigger,
                }
            )

        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await send_error("message is not valid JSON")
                    continue
                if not isinstance(msg, dict) or "type" not in msg:
                    await send_error("message must be an object with a 'type'")
                    continue
                msg_type = msg["type"]

                if msg_type == "load_persona":
                    name = msg.get("name")
                    if not isinstance(name, str):
                        await send_error("load_persona requires a string 'name'")
                        continue
                    try:
                        path = _db_path(config, name)
                    except HTTPException as e:
                        await send_error(e.detail)
                        continue
                    if not path.exists():
                        await send_error(f"no database for persona {name!r}")
                        continue
                    try:
                        db = deserialize(path.read_bytes())
                    except SchemaError as e:
                        await send_error(f"database for {name!r} is unreadable: {e}")
                        continue
                    engine = BehaviorEngine(db, config.perception)
                    last_time = 0.0
                    engine.reset(time=last_time)
                    await ws.send_json(
                        {
                            "type": "persona_loaded",
                            "name": db.persona.name,
                            "states": [
                                {"motion": s.motion.name, "face": s.face.name, "emoji": s.face.emoji}
                                for s in db.states
                            ],
                            "initial_state": db.initial_state,
                            "motion_duration_s": config.motion_duration_s,
                        }
                    )
                    await send_state("reset", last_time)

                elif msg_type == "reset":
                    if engine is None:
                        await send_error("no persona loaded")
                        continue
                    engine.reset(time=last_time)
                    await send_state("reset", last_time)

                elif msg_type == "frame":
                    if engine is None:
                        await send_error("no persona loaded")
                        continue
                    time = msg.get("time")
                    persons = msg.get("persons")
                    if not isinstance(time, (int, float)) or isinstance(time, bool):
                        await send_error("frame requires a numeric 'time'")
                        continue
                    if float(time) < last_time:
                        await send_error(
                            f"frame time {time} precedes session time {last_time}"
                        )
                        continue
                    if not isinstance(persons, list):
                        await send_error("frame requires a 'persons' array")
                        continue
                    try:
                        snaps = [_snapshot_from_wire(p) for p in persons]
                    except (TypeError, ValueError) as e:
                        await send_error(f"bad person record: {e}")
                        continue
                    last_time = float(time)
                    frame = [(s, discretize(s, config.perception)) for s in snaps]
                    event = engine.step(frame, time=last_time)
                    if event is not None:
                        await send_state(event.trigger, event.time)

                else:
                    await send_error(f"unknown message type: {msg_type!r}")
        except WebSocketDisconnect:
            pass

    return app
