"""HTTP advisor service for live annotation campaigns.

A human drives the same loop the simulator runs: confirm an annotation
installment, train models on the emitted subsets, report the observed
scores, and receive the next recommended installment. One JSON document
per session, written atomically on every mutation.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import gp as gpmod
from .acquisition import AcquisitionContext, acquisition_front, next_installment
from .campaign import _STREAM_SAMPLER, derive_seed
from .gp import GPHyperparams, UtilitySample, posterior_grid
from .sampler import AnnotatedPool, draw_subset_plans, grow_pool
from .strategy import CostModel, Strategy, cost

PHASES = ("awaiting_annotation", "awaiting_evaluations", "recommendation_ready", "finished")

# Visualization lattice resolution (per axis) for posterior payloads.
VIZ_POINTS = 25


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field

    def body(self) -> dict[str, Any]:
        out = {"code": self.code, "message": self.message}
        if self.field:
            out["field"] = self.field
        return out


class SessionConfigBody(BaseModel):
    alpha_c: float = Field(default=1.0)
    alpha_s: float = Field(default=12.0)
    budget: float
    total_steps: int = Field(default=8)
    initial_c: int
    initial_s: int
    m_count: int = Field(default=20)
    seed: int = Field(default=0)
    gp_learning_rate: float = Field(default=0.1)
    gp_iterations: int = Field(default=200)
    stride_c: int = Field(default=1)
    stride_s: int = Field(default=1)
    weighted_sampling: bool = Field(default=False)


class ObservationBody(BaseModel):
    request_id: str
    score: float


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _validate_config(cfg: SessionConfigBody) -> None:
    checks = [
        ("alpha_c", cfg.alpha_c > 0, "must be positive"),
        ("alpha_s", cfg.alpha_s > 0, "must be positive"),
        ("budget", cfg.budget > 0, "must be positive"),
        ("total_steps", cfg.total_steps >= 1, "must be >= 1"),
        ("initial_c", cfg.initial_c >= 0, "must be non-negative"),
        ("initial_s", cfg.initial_s >= 0, "must be non-negative"),
        ("m_count", cfg.m_count >= 1, "must be >= 1"),
        ("gp_learning_rate", cfg.gp_learning_rate > 0, "must be positive"),
        ("gp_iterations", cfg.gp_iterations >= 1, "must be >= 1"),
        ("stride_c", cfg.stride_c >= 1, "must be >= 1"),
        ("stride_s", cfg.stride_s >= 1, "must be >= 1"),
    ]
    for field, ok, message in checks:
        if not ok:
            raise ApiError(422, "invalid_config", f"{field} {message}", field)
    if cfg.initial_c == 0 and cfg.initial_s == 0:
        raise ApiError(422, "invalid_config", "initial strategy must be non-empty", "initial_c")
    initial_cost = cfg.alpha_c * cfg.initial_c + cfg.alpha_s * cfg.initial_s
    if initial_cost > cfg.budget:
        raise ApiError(
            422,
            "invalid_config",
            f"initial strategy costs {initial_cost}, over budget {cfg.budget}",
            "budget",
        )


class SessionStore:
    """Directory of per-session JSON documents with atomic writes."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def load(self, session_id: str) -> dict[str, Any]:
        path = self._path(session_id)
        if not path.exists():
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        return json.loads(path.read_text(encoding="utf-8"))

    def save(self, state: dict[str, Any]) -> None:
        state["updated_at"] = _now()
        path = self._path(state["id"])
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state, indent=2), encoding="utf-8")
        os.replace(tmp, path)

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


def _cost_model(state: dict[str, Any]) -> CostModel:
    cfg = state["config"]
    return CostModel(alpha_c=cfg["alpha_c"], alpha_s=cfg["alpha_s"], budget=cfg["budget"])


def _pool(state: dict[str, Any]) -> AnnotatedPool:
    return AnnotatedPool(tuple(state["pool_c"]), tuple(state["pool_s"]))


def _committed_strategy(state: dict[str, Any]) -> Strategy:
    pool = _pool(state)
    base = pool.strategy
    if state["phase"] == "awaiting_annotation":
        inst = state["installment"]
        return Strategy(base.c + inst["delta_c"], base.s + inst["delta_s"])
    if state["phase"] == "finished":
        final = state["recommendation"]["strategy"]
        return Strategy(final["c"], final["s"])
    return base


def snapshot(state: dict[str, Any]) -> dict[str, Any]:
    model = _cost_model(state)
    committed = _committed_strategy(state)
    return {
        "id": state["id"],
        "phase": state["phase"],
        "step": state["t"],
        "config": state["config"],
        "pool": {"c": len(state["pool_c"]), "s": len(state["pool_s"])},
        "installment": state["installment"],
        "strategy": {"c": committed.c, "s": committed.s},
        "spent": cost(committed, model),
        "budget": model.budget,
        "pending_requests": state["pending_requests"],
        "observations": state["observations"],
        "sample_count": len(state["samples"]),
        "history": state["history"],
        "created_at": state["created_at"],
        "updated_at": state["updated_at"],
    }


def _viz_lattice(model: CostModel) -> tuple[list[int], list[int]]:
    max_c = int(model.budget // model.alpha_c)
    max_s = int(model.budget // model.alpha_s)
    cs = sorted({round(i * max_c / (VIZ_POINTS - 1)) for i in range(VIZ_POINTS)})
    ss = sorted({round(j * max_s / (VIZ_POINTS - 1)) for j in range(VIZ_POINTS)})
    return cs, ss


def _compute_recommendation(state: dict[str, Any]) -> None:
    """Fit the GP on all samples and solve the installment selection.

    Mutates `state`: stores the recommendation, advances the step counter,
    and moves the phase forward.
    """
    cfg = state["config"]
    model = _cost_model(state)
    t = state["t"]
    total = cfg["total_steps"]

    samples = [
        UtilitySample(Strategy(s["c"], s["s"]), s["score"]) for s in state["samples"]
    ]
    init = (
        GPHyperparams.from_dict(state["hyperparams"])
        if state["hyperparams"]
        else gpmod.initial_hyperparams(samples)
    )
    fitted = gpmod.fit(
        samples,
        init,
        learning_rate=cfg["gp_learning_rate"],
        iterations=cfg["gp_iterations"],
        seed=cfg["seed"],
    )
    state["hyperparams"] = fitted.hyperparams.to_dict()

    incumbent = state["observations"][state["pending_requests"][0]["request_id"]]
    current = _pool(state).strategy
    ctx = AcquisitionContext(
        gp=fitted,
        incumbent=incumbent,
        cost_model=model,
        current=current,
        total_steps=total,
        step=t,
    )
    strides = (cfg["stride_c"], cfg["stride_s"])
    front = acquisition_front(ctx, strides)
    u_star = front[-1].value
    theta = u_star / (total - t)
    delta = next_installment(ctx, strides)
    chosen = Strategy(current.c + delta[0], current.s + delta[1])
    assert cost(chosen, model) <= model.budget + 1e-9

    viz_c, viz_s = _viz_lattice(model)
    grid_queries = [Strategy(c, s) for s in viz_s for c in viz_c]
    means, variances = posterior_grid(fitted, grid_queries)
    n_c = len(viz_c)
    payload = {
        "step": t,
        "delta": {"delta_c": delta[0], "delta_s": delta[1]},
        "strategy": {"c": chosen.c, "s": chosen.s},
        "remaining_budget": model.budget - cost(chosen, model),
        "best_ei": u_star,
        "threshold": theta,
        "pareto_front": [
            {"c": p.strategy.c, "s": p.strategy.s, "cost": p.cost, "ei": p.value}
            for p in front
        ],
        "posterior": {
            "c": viz_c,
            "s": viz_s,
            "means": [list(map(float, means[i * n_c : (i + 1) * n_c])) for i in range(len(viz_s))],
            "variances": [
                list(map(float, variances[i * n_c : (i + 1) * n_c])) for i in range(len(viz_s))
            ],
        },
    }

    state["history"].append(
        {
            "step": t,
            "strategy": {"c": current.c, "s": current.s},
            "spent": cost(current, model),
            "incumbent": incumbent,
            "best_ei": u_star,
            "delta": {"c": delta[0], "s": delta[1]},
            "sample_count": len(samples),
        }
    )
    state["t"] = t + 1
    if state["t"] >= total:
        payload["delta"] = {"delta_c": 0, "delta_s": 0}
        payload["final"] = True
        state["phase"] = "finished"
        state["installment"] = {"delta_c": 0, "delta_s": 0}
    else:
        payload["final"] = False
        state["phase"] = "recommendation_ready"
        state["installment"] = {"delta_c": delta[0], "delta_s": delta[1]}
    state["recommendation"] = payload


def create_app(session_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="budgetwise advisor")
    store = SessionStore(session_dir)

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError) -> JSONResponse:
        first = exc.errors()[0]
        loc = [str(part) for part in first.get("loc", ()) if part != "body"]
        return JSONResponse(
            status_code=422,
            content={
                "code": "invalid_request",
                "message": first.get("msg", "invalid request"),
                "field": ".".join(loc) or None,
            },
        )

    @app.post("/v1/sessions", status_code=201)
    def create_session(cfg: SessionConfigBody) -> dict[str, Any]:
        _validate_config(cfg)
        session_id = uuid.uuid4().hex
        state = {
            "id": session_id,
            "created_at": _now(),
            "updated_at": _now(),
            "config": cfg.model_dump(),
            "phase": "awaiting_annotation",
            "t": 0,
            "pool_c": [],
            "pool_s": [],
            "installment": {"delta_c": cfg.initial_c, "delta_s": cfg.initial_s},
            "pending_requests": [],
            "observations": {},
            "samples": [],
            "hyperparams": None,
            "recommendation": None,
            "history": [],
        }
        store.save(state)
        return snapshot(state)

    @app.get("/v1/sessions")
    def list_sessions(phase: Optional[str] = None) -> list[dict[str, Any]]:
        if phase is not None and phase not in PHASES:
            raise ApiError(422, "invalid_filter", f"unknown phase {phase!r}", "phase")
        out = []
        for session_id in store.list_ids():
            state = store.load(session_id)
            if phase is None or state["phase"] == phase:
                out.append(snapshot(state))
        return out

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        return snapshot(store.load(session_id))

    @app.post("/v1/sessions/{session_id}/confirm-annotation")
    def confirm_annotation(session_id: str) -> dict[str, Any]:
        with store.lock(session_id):
            state = store.load(session_id)
            if state["phase"] == "awaiting_evaluations":
                # Idempotent retry: same request ids, no state change.
                return {"requests": state["pending_requests"], "phase": state["phase"]}
            if state["phase"] != "awaiting_annotation":
                raise ApiError(
                    409,
                    "wrong_phase",
                    f"confirm-annotation not allowed in phase {state['phase']}",
                )
            cfg = state["config"]
            t = state["t"]
            inst = state["installment"]
            pool = grow_pool(_pool(state), inst["delta_c"], inst["delta_s"])
            model = _cost_model(state)
            spent = cost(pool.strategy, model)
            assert spent <= model.budget + 1e-9
            plans = draw_subset_plans(
                pool,
                cfg["m_count"],
                derive_seed(cfg["seed"], t, _STREAM_SAMPLER),
                weighted=cfg["weighted_sampling"],
            )
            requests = [
                {
                    "request_id": f"t{t}-r{i}",
                    "c": plan.strategy.c,
                    "s": plan.strategy.s,
                    "classification_ids": list(plan.classification_subset),
                    "segmentation_ids": list(plan.segmentation_subset),
                }
                for i, plan in enumerate(plans)
            ]
            state["pool_c"] = list(pool.classification_ids)
            state["pool_s"] = list(pool.segmentation_ids)
            state["pending_requests"] = requests
            state["observations"] = {}
            state["phase"] = "awaiting_evaluations"
            store.save(state)
            return {"requests": requests, "phase": state["phase"]}

    @app.post("/v1/sessions/{session_id}/observations")
    def submit_observation(session_id: str, body: ObservationBody) -> dict[str, Any]:
        with store.lock(session_id):
            state = store.load(session_id)
            if state["phase"] != "awaiting_evaluations":
                raise ApiError(
                    409, "wrong_phase", f"observations not accepted in phase {state['phase']}"
                )
            known = {req["request_id"] for req in state["pending_requests"]}
            if body.request_id not in known:
                raise ApiError(404, "unknown_request", f"no pending request {body.request_id}")
            if body.request_id in state["observations"]:
                raise ApiError(
                    409, "duplicate_observation", f"{body.request_id} already submitted"
                )
            if not 0.0 <= body.score <= 1.0:
                raise ApiError(422, "invalid_score", "score must lie in [0, 1]", "score")
            state["observations"][body.request_id] = body.score
            remaining = len(state["pending_requests"]) - len(state["observations"])
            if remaining == 0:
                for req in state["pending_requests"]:
                    state["samples"].append(
                        {
                            "c": req["c"],
                            "s": req["s"],
                            "score": state["observations"][req["request_id"]],
                        }
                    )
                try:
                    _compute_recommendation(state)
                except gpmod.GPFitError as exc:
                    raise ApiError(500, "gp_failure", str(exc)) from exc
            store.save(state)
            return {"remaining": remaining, "phase": state["phase"]}

    @app.get("/v1/sessions/{session_id}/recommendation")
    def get_recommendation(session_id: str) -> dict[str, Any]:
        state = store.load(session_id)
        if state["phase"] not in ("recommendation_ready", "finished"):
            raise ApiError(
                409, "wrong_phase", f"no recommendation in phase {state['phase']}"
            )
        return state["recommendation"]

    @app.post("/v1/sessions/{session_id}/accept")
    def accept_recommendation(session_id: str) -> dict[str, Any]:
        with store.lock(session_id):
            state = store.load(session_id)
            if (
                state["phase"] == "awaiting_annotation"
                and state["recommendation"] is not None
                and state["recommendation"]["step"] == state["t"] - 1
            ):
                return snapshot(state)  # idempotent retry
            if state["phase"] != "recommendation_ready":
                raise ApiError(
                    409, "wrong_phase", f"accept not allowed in phase {state['phase']}"
                )
            state["phase"] = "awaiting_annotation"
            store.save(state)
            return snapshot(state)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
