"""HTTP elicitation service: serve preference queries to a human labeler.

Each session runs the same loop as the experiment harness, minus the
simulated oracle: generate a query under the configured condition, wait
for a label, refit the posterior, repeat until `t_pref` answers have
been collected.  Sessions are persisted to disk after every mutation,
so a restarted server resumes every session with the identical pending
query.

Endpoints (all JSON):
    POST /sessions                       -> {"session_id": ...}
    GET  /sessions/{id}/query            -> the pending query
    POST /sessions/{id}/answer           -> next query or completion
    GET  /sessions/{id}/belief           -> posterior summary
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .belief import (
    BeliefEnsemble,
    PreferenceRecord,
    adaptive_metropolis,
    belief_entropy_kde,
)
from .config import ExperimentConfig
from .design import environment_design
from .envs import EnvironmentSpec, decode_env, environment_from_json, environment_to_json
from .queries import (
    PolicyCache,
    PreferenceQuery,
    counterfactual_query,
    mean_belief_query,
    random_rollout_query,
)

__all__ = ["SessionState", "SessionStore", "create_app", "serve"]

STATIC_DIR = Path(__file__).parent / "webui" / "static"


class AnswerBody(BaseModel):
    query_id: str
    label: Literal["+1", "-1"]


class CreateBody(BaseModel):
    seed: int | None = None


class SessionState:
    """One labeler's session: records, posterior, and the pending query."""

    def __init__(self, session_id: str, config: ExperimentConfig, seed: int):
        self.session_id = session_id
        self.config = config
        self.seed = seed
        self.records: list[PreferenceRecord] = []
        self.ensemble: BeliefEnsemble | None = None
        self.pending_query: PreferenceQuery | None = None
        self.pending_env: EnvironmentSpec | None = None
        self.pending_id: str | None = None
        self.history: list[dict] = []
        # transient helpers, rebuilt on load
        self.cache = PolicyCache(goal_bonus=config.goal_bonus)
        self.lock = threading.Lock()

    # -- derived ------------------------------------------------------

    @property
    def iteration(self) -> int:
        """Number of answers collected so far."""
        return len(self.records)

    @property
    def complete(self) -> bool:
        return self.iteration >= self.config.t_pref

    def _seed_block(self) -> np.ndarray:
        root = np.random.default_rng(self.seed)
        return root.integers(0, 2**63 - 1, size=(self.config.t_pref + 1, 3))

    # -- loop ---------------------------------------------------------

    def start(self) -> None:
        """Fit the prior and generate the first query."""
        block = self._seed_block()
        self.ensemble = adaptive_metropolis(
            [],
            n_samples=self.config.mcmc_samples,
            burn_in=self.config.mcmc_burn_in,
            thin=self.config.mcmc_thin,
            seed=int(block[0, 0]),
            dim=self.config.train_env.feature_dim,
        )
        self._generate_query()

    def _generate_query(self) -> None:
        config = self.config
        it = self.iteration + 1  # the query about to be asked
        q_seed = int(self._seed_block()[it, 0])
        env = config.train_env
        if config.condition == "RR":
            query = random_rollout_query(env, self.ensemble, k=config.k_rollouts, seed=q_seed)
        elif config.condition == "MBP":
            query = mean_belief_query(
                env, self.ensemble, epsilon=config.mbp_epsilon,
                k=config.k_rollouts, seed=q_seed, cache=self.cache,
            )
        elif config.condition == "CR":
            query = counterfactual_query(
                env, self.ensemble, n_bootstrap=config.n_bootstrap,
                m_diverse=config.m_diverse, seed=q_seed, cache=self.cache,
            )
            if query is None:
                query = mean_belief_query(
                    env, self.ensemble, epsilon=config.mbp_epsilon,
                    k=config.k_rollouts, seed=q_seed, cache=self.cache,
                )
        else:  # CRED / MBP+ED
            inner = "CR" if config.condition == "CRED" else "MBP"
            result = environment_design(
                env, self.ensemble,
                n_iters=config.design_iters, kappa=config.design_kappa,
                seed=q_seed, n_init=config.design_init,
                n_candidates=config.design_candidates,
                n_bootstrap=config.n_bootstrap, m_diverse=config.m_diverse,
                inner=inner, epsilon=config.mbp_epsilon,
                k_rollouts=config.k_rollouts, cache=self.cache,
            )
            query = result.query
            if not result.fallback:
                env = decode_env(result.theta, config.train_env)
        self.pending_query = query
        self.pending_env = env
        self.pending_id = f"q{it:04d}"

    def answer(self, query_id: str, label: int) -> None:
        """Record one label and advance the loop (caller validates the id)."""
        query = self.pending_query
        scale = self.config.train_env.feature_scale
        self.records.append(
            PreferenceRecord(
                phi_a=query.traj_a.features * scale,
                phi_b=query.traj_b.features * scale,
                label=label,
                env_id=query.env_id,
                iteration=self.iteration + 1,
            )
        )
        self.history.append(
            {"query_id": query_id, "label": label, "info_gain": query.info_gain}
        )
        block = self._seed_block()
        self.ensemble = adaptive_metropolis(
            self.records,
            n_samples=self.config.mcmc_samples,
            burn_in=self.config.mcmc_burn_in,
            thin=self.config.mcmc_thin,
            seed=int(block[self.iteration, 1]),
            dim=self.config.train_env.feature_dim,
        )
        if self.complete:
            self.pending_query = None
            self.pending_env = None
            self.pending_id = None
        else:
            self._generate_query()

    # -- payloads -----------------------------------------------------

    def query_payload(self) -> dict:
        return {
            "query_id": self.pending_id,
            "iteration": self.iteration + 1,
            "total": self.config.t_pref,
            "env": environment_to_json(self.pending_env),
            "traj_a": self.pending_query.traj_a.to_json(),
            "traj_b": self.pending_query.traj_b.to_json(),
            "info_gain": self.pending_query.info_gain,
            "generator": self.pending_query.generator,
        }

    def belief_payload(self) -> dict:
        return {
            "mean_weight": [float(v) for v in self.ensemble.mean],
            "entropy": float(belief_entropy_kde(self.ensemble)),
            "sample_count": len(self.ensemble.samples),
            "answered": self.iteration,
            "total": self.config.t_pref,
            "complete": self.complete,
        }

    # -- persistence ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "seed": self.seed,
            "config": self.config.to_json(),
            "records": [r.to_json() for r in self.records],
            "ensemble": None if self.ensemble is None else self.ensemble.to_json(),
            "pending_query": None
            if self.pending_query is None
            else self.pending_query.to_json(),
            "pending_env": None
            if self.pending_env is None
            else environment_to_json(self.pending_env),
            "pending_id": self.pending_id,
            "history": self.history,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SessionState":
        config = ExperimentConfig.from_json(data["config"])
        state = cls(data["session_id"], config, int(data["seed"]))
        state.records = [PreferenceRecord.from_json(r) for r in data["records"]]
        if data["ensemble"] is not None:
            state.ensemble = BeliefEnsemble.from_json(data["ensemble"])
        if data["pending_query"] is not None:
            state.pending_query = PreferenceQuery.from_json(data["pending_query"])
            state.pending_env = environment_from_json(data["pending_env"])
            state.pending_id = data["pending_id"]
        state.history = list(data["history"])
        return state


class SessionStore:
    """Disk-backed session registry with per-session write-through."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def get(self, session_id: str) -> SessionState:
        with self._registry_lock:
            state = self._sessions.get(session_id)
            if state is None:
                path = self._path(session_id)
                if not path.exists():
                    raise KeyError(session_id)
                with open(path) as fh:
                    state = SessionState.from_json(json.load(fh))
                self._sessions[session_id] = state
            return state

    def add(self, state: SessionState) -> None:
        with self._registry_lock:
            self._sessions[state.session_id] = state
        self.save(state)

    def save(self, state: SessionState) -> None:
        path = self._path(state.session_id)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(state.to_json(), fh)
        os.replace(tmp, path)


def create_app(config: ExperimentConfig, sessions_dir) -> FastAPI:
    """Build the service around one experiment configuration.

    The config's oracle fields are ignored — the labeler is the oracle.
    """
    app = FastAPI(title="preference elicitation")
    store = SessionStore(sessions_dir)
    app.state.store = store

    def lookup(session_id: str) -> SessionState:
        try:
            return store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")

    @app.post("/sessions")
    def create_session(body: CreateBody | None = None):
        seed = body.seed if body is not None and body.seed is not None else (
            int.from_bytes(os.urandom(4), "little")
        )
        state = SessionState(uuid.uuid4().hex, config, seed)
        state.start()
        store.add(state)
        return {"session_id": state.session_id, "total": config.t_pref}

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        state = lookup(session_id)
        with state.lock:
            if state.complete:
                return {"status": "complete", "belief_summary": state.belief_payload()}
            return state.query_payload()

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: AnswerBody):
        state = lookup(session_id)
        with state.lock:
            if state.complete:
                raise HTTPException(status_code=409, detail="session already complete")
            if body.query_id != state.pending_id:
                raise HTTPException(
                    status_code=409,
                    detail=(
                        f"query {body.query_id!r} is not pending "
                        f"(current is {state.pending_id!r}); refetch the query"
                    ),
                )
            state.answer(body.query_id, 1 if body.label == "+1" else -1)
            store.save(state)
            summary = state.belief_payload()
            if state.complete:
                return {"status": "complete", "belief_summary": summary}
            return {"next_query": state.query_payload(), "belief_summary": summary}

    @app.get("/sessions/{session_id}/belief")
    def get_belief(session_id: str):
        state = lookup(session_id)
        with state.lock:
            return state.belief_payload()

    if STATIC_DIR.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=STATIC_DIR, html=True), name="ui")

    return app


def serve(config: ExperimentConfig, sessions_dir, bind: str = "127.0.0.1:8000") -> None:
    """Run the service under uvicorn until interrupted."""
    import uvicorn

    host, _, port = bind.partition(":")
    app = create_app(config, sessions_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
