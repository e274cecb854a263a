"""HTTP service: chat sessions, dataset generation, training jobs.

Sessions and jobs live in memory; transcripts persist as JSONL under the
data directory. One training job runs at a time on a background thread
and publishes progress through a locked snapshot. All responses are
canonical JSON so bodies are byte-stable for a given state.
"""

from __future__ import annotations

import logging
import os
import re
import threading
import time
import typing

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, ConfigDict

from .a2c import A2CConfig, A2CModel, train
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import build_dataset, generate_records, load_dataset, save_dataset
from .env import EnvConfig, SalesEnv
from .errors import (
    ClcaError,
    EmptyMessage,
    FormatError,
    GenerationInterrupted,
    ProviderUnavailable,
    SchemaError,
)
from .schemas import CompanyProfile, TextProviderSpec, canonical_json
from .selection import ChatState, SelectionConfig, select_response
from .rng import derive_seed

log = logging.getLogger("clca.service")

ENV_DATA_DIR = "CLCA_DATA_DIR"
JOB_STATUSES = ("queued", "running", "done", "failed")


class CanonicalJSONResponse(JSONResponse):
    media_type = "application/json"

    def render(self, content: typing.Any) -> bytes:
        return canonical_json(content).encode("utf-8")


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    profile: dict
    checkpoint_path: str | None = None


class MessageBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    text: str


class GenerateBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    profile: dict
    n: int
    seed: int


class TrainBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    dataset_path: str
    config: dict | None = None


class _Session:
    __slots__ = ("session_id", "chat", "model", "model_ref", "created_at",
                 "message_count", "lock")

    def __init__(self, session_id: str, chat: ChatState, model: A2CModel, model_ref: str):
        self.session_id = session_id
        self.chat = chat
        self.model = model
        self.model_ref = model_ref
        self.created_at = time.time()
        self.message_count = 0
        self.lock = threading.Lock()


class _TrainJob:
    __slots__ = ("job_id", "status", "steps_done", "mean_reward_window",
                 "checkpoint_path", "error", "lock")

    def __init__(self, job_id: str):
        self.job_id = job_id
        self.status = "queued"
        self.steps_done = 0
        self.mean_reward_window = 0.0
        self.checkpoint_path: str | None = None
        self.error: str | None = None
        self.lock = threading.Lock()

    def snapshot(self) -> dict:
        with self.lock:
            doc = {
                "job_id": self.job_id,
                "status": self.status,
                "steps_done": self.steps_done,
                "mean_reward_window": self.mean_reward_window,
            }
            if self.checkpoint_path is not None:
                doc["checkpoint_path"] = self.checkpoint_path
            if self.error is not None:
                doc["error"] = self.error
            return doc


def _slug(text: str) -> str:
    return re.sub(r"[^0-9a-z]+", "-", text.lower()).strip("-") or "profile"


class ServiceState:
    """Mutable service state behind the route handlers."""

    def __init__(
        self,
        model: A2CModel | None,
        model_ref: str,
        provider: TextProviderSpec,
        data_dir: str,
        seed: int,
        selection: SelectionConfig,
    ):
        self.default_model = model
        self.default_model_ref = model_ref
        self.provider = provider
        self.data_dir = data_dir
        self.seed = seed
        self.selection = selection
        self.sessions: dict[str, _Session] = {}
        self.jobs: dict[str, _TrainJob] = {}
        self.active_job_id: str | None = None
        self.store_lock = threading.Lock()
        self._session_counter = 0
        self._job_counter = 0
        self._model_cache: dict[str, A2CModel] = {}

    def next_session_id(self) -> str:
        self._session_counter += 1
        return f"sess-{self._session_counter:06d}"

    def next_job_id(self) -> str:
        self._job_counter += 1
        return f"job-{self._job_counter:06d}"

    def load_model(self, path: str) -> A2CModel:
        key = os.path.abspath(path)
        if key not in self._model_cache:
            self._model_cache[key] = load_checkpoint(path)
        return self._model_cache[key]

    def persist_transcript(self, session: _Session, turns) -> None:
        directory = os.path.join(self.data_dir, "transcripts")
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{session.session_id}.jsonl")
        with open(path, "a", encoding="utf-8", newline="\n") as fh:
            for turn in turns:
                fh.write(canonical_json(turn.to_dict()))
                fh.write("\n")


def _run_training_job(state: ServiceState, job: _TrainJob, dataset_path: str, config: A2CConfig) -> None:
    try:
        with job.lock:
            job.status = "running"
        dataset = load_dataset(dataset_path)
        env = SalesEnv(dataset, EnvConfig(seed=config.seed))

        def on_progress(steps_done: int, mean_reward: float) -> None:
            with job.lock:
                job.steps_done = steps_done
                job.mean_reward_window = mean_reward

        model, _stats = train(env, config, progress=on_progress)
        ckpt_dir = os.path.join(state.data_dir, "checkpoints")
        os.makedirs(ckpt_dir, exist_ok=True)
        ckpt_path = os.path.join(ckpt_dir, f"{job.job_id}.json")
        save_checkpoint(model, ckpt_path)
        with job.lock:
            job.steps_done = config.total_timesteps
            job.checkpoint_path = ckpt_path
            job.status = "done"
    except Exception as exc:  # job thread: report, never raise
        log.exception("training job %s failed", job.job_id)
        with job.lock:
            job.status = "failed"
            job.error = str(exc)
    finally:
        with state.store_lock:
            if state.active_job_id == job.job_id:
                state.active_job_id = None


def create_app(
    model: A2CModel | None = None,
    model_path: str | None = None,
    provider: TextProviderSpec | None = None,
    data_dir: str | None = None,
    static_dir: str | None = None,
    seed: int = 0,
    ui_origin: str = "*",
    selection: SelectionConfig | None = None,
) -> FastAPI:
    """Build the service app.

    `model`/`model_path` set the default checkpoint for new sessions
    (sessions may override it per request). The static directory is
    mounted at "/" when it exists; otherwise the API runs alone.
    """
    if model is None and model_path is not None:
        model = load_checkpoint(model_path)
    if provider is None:
        provider = TextProviderSpec(kind="builtin_template")
    if data_dir is None:
        data_dir = os.environ.get(ENV_DATA_DIR, os.path.join(os.getcwd(), "data"))
    state = ServiceState(
        model=model,
        model_ref=model_path or ("<in-memory>" if model is not None else ""),
        provider=provider,
        data_dir=data_dir,
        seed=seed,
        selection=selection if selection is not None else SelectionConfig(),
    )

    app = FastAPI(default_response_class=CanonicalJSONResponse)
    app.state.clca = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[ui_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _error(status: int, detail: str, **extra) -> CanonicalJSONResponse:
        return CanonicalJSONResponse({"detail": detail, **extra}, status_code=status)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request, exc):
        return _error(400, f"invalid request: {exc.errors()[0].get('msg', 'bad body')} "
                           f"at {'.'.join(str(p) for p in exc.errors()[0].get('loc', ()))}")

    @app.exception_handler(SchemaError)
    async def _on_schema(request, exc):
        return _error(400, str(exc))

    @app.exception_handler(EmptyMessage)
    async def _on_empty(request, exc):
        return _error(400, str(exc))

    @app.exception_handler(FormatError)
    async def _on_format(request, exc):
        return _error(422, str(exc))

    @app.exception_handler(ProviderUnavailable)
    async def _on_provider(request, exc):
        return _error(502, str(exc))

    @app.exception_handler(GenerationInterrupted)
    async def _on_interrupted(request, exc):
        return _error(502, str(exc), count=len(exc.records))

    @app.exception_handler(FileNotFoundError)
    async def _on_missing(request, exc):
        return _error(404, f"not found: {exc}")

    @app.exception_handler(ClcaError)
    async def _on_clca(request, exc):
        return _error(400, str(exc))

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        profile = CompanyProfile.from_dict(body.profile)
        if body.checkpoint_path is not None:
            if not os.path.isfile(body.checkpoint_path):
                raise FileNotFoundError(body.checkpoint_path)
            session_model = state.load_model(body.checkpoint_path)
            model_ref = body.checkpoint_path
        else:
            if state.default_model is None:
                raise SchemaError(
                    "checkpoint_path required: the service was started without a model"
                )
            session_model = state.default_model
            model_ref = state.default_model_ref
        chat = ChatState(profile=profile)
        with state.store_lock:
            session_id = state.next_session_id()
            state.sessions[session_id] = _Session(session_id, chat, session_model, model_ref)
        return {"session_id": session_id}

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        session = state.sessions.get(session_id)
        if session is None:
            raise FileNotFoundError(f"session {session_id}")
        with session.lock:
            message_seed = derive_seed(state.seed, session.message_count)
            result = select_response(
                session.chat, body.text, session.model, state.provider,
                state.selection, message_seed,
            )
            session.chat = result.chat
            session.message_count += 1
            state.persist_transcript(session, result.chat.history[-2:])
        return {
            "response": result.response,
            "action": list(result.action.as_tuple()),
            "candidates": [
                {
                    "text": sc.candidate.text,
                    "temperature": sc.candidate.temperature,
                    "features": list(sc.features.as_tuple()),
                    "score": sc.score,
                }
                for sc in result.scored
            ],
            "selected_index": result.selected_index,
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            raise FileNotFoundError(f"session {session_id}")
        with session.lock:
            transcript = [t.to_dict() for t in session.chat.history]
        return {"transcript": transcript}

    @app.post("/api/datasets/generate")
    def generate_dataset(body: GenerateBody):
        profile = CompanyProfile.from_dict(body.profile)
        if body.n < 1:
            raise SchemaError("n must be >= 1")
        records = generate_records(profile, body.n, state.provider, body.seed)
        dataset = build_dataset(records)
        directory = os.path.join(state.data_dir, "datasets")
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(
            directory, f"{_slug(profile.company_id)}-n{body.n}-s{body.seed}.jsonl"
        )
        save_dataset(dataset, path)
        return {"path": path, "count": len(records)}

    @app.post("/api/train", status_code=202)
    def start_training(body: TrainBody):
        config = A2CConfig.from_dict(body.config or {})
        if not os.path.isfile(body.dataset_path):
            raise FileNotFoundError(body.dataset_path)
        with state.store_lock:
            if state.active_job_id is not None:
                active = state.jobs[state.active_job_id]
                return _error(
                    409,
                    f"training job {active.job_id} is already {active.status}",
                )
            job_id = state.next_job_id()
            job = _TrainJob(job_id)
            state.jobs[job_id] = job
            state.active_job_id = job_id
        thread = threading.Thread(
            target=_run_training_job,
            args=(state, job, body.dataset_path, config),
            daemon=True,
            name=f"clca-{job_id}",
        )
        thread.start()
        return {"job_id": job_id}

    @app.get("/api/train/{job_id}")
    def get_training(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise FileNotFoundError(f"job {job_id}")
        return job.snapshot()

    if static_dir is not None:
        if os.path.isdir(static_dir):
            from fastapi.staticfiles import StaticFiles

            app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")
        else:
            log.warning(
                "static directory %s does not exist; serving the API only", static_dir
            )

    return app
