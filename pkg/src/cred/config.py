"""Experiment configuration: JSON-loadable settings with sane defaults.

Every tunable that the library modules expose (chain lengths, rollout
counts, optimizer budgets, evaluation sizes) is a field here so that a
single JSON file pins an entire experiment.  Environments may be given
inline as JSON objects or as paths to environment files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .envs import (
    EnvironmentSpec,
    environment_from_json,
    environment_to_json,
    load_environment,
)

CONDITIONS = ("RR", "MBP", "MBP+ED", "CR", "CRED")
ORACLE_MODES = ("boltzmann", "exact")

__all__ = [
    "CONDITIONS",
    "ORACLE_MODES",
    "ExperimentConfig",
    "SuiteConfig",
    "load_config",
]


def _resolve_env(entry, base_dir: Path | None) -> EnvironmentSpec:
    """Accept an inline environment object or a path to one."""
    if isinstance(entry, EnvironmentSpec):
        return entry
    if isinstance(entry, dict):
        return environment_from_json(entry)
    path = Path(entry)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return load_environment(path)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Settings for one preference-learning run."""

    condition: str
    train_env: EnvironmentSpec
    test_envs: tuple[EnvironmentSpec, ...]
    w_true: np.ndarray
    seed: int = 0
    t_pref: int = 30
    user_name: str = "user0"

    # oracle
    oracle_mode: str = "boltzmann"

    # posterior sampling
    mcmc_samples: int = 200
    mcmc_burn_in: int = 2000
    mcmc_thin: int = 5

    # query generation
    n_bootstrap: int = 100
    m_diverse: int = 8
    k_rollouts: int = 100
    mbp_epsilon: float = 0.25

    # environment design
    design_iters: int = 15
    design_kappa: float = 2.0
    design_init: int = 5
    design_candidates: int = 2000

    # evaluation
    n_eval: int = 20
    entropy_grid: int | None = None
    metrics_period: int = 1  # 0 = final iteration only
    goal_bonus: float = 10.0

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(
                f"unknown condition {self.condition!r}; expected one of {CONDITIONS}"
            )
        if self.oracle_mode not in ORACLE_MODES:
            raise ValueError(
                f"unknown oracle mode {self.oracle_mode!r}; expected one of {ORACLE_MODES}"
            )
        if self.t_pref < 1:
            raise ValueError("t_pref must be at least 1")
        if not self.test_envs:
            raise ValueError("at least one test environment is required")
        w = np.asarray(self.w_true, dtype=float)
        if w.ndim != 1 or len(w) != self.train_env.feature_dim:
            raise ValueError(
                f"w_true must be a vector of length {self.train_env.feature_dim}"
            )
        object.__setattr__(self, "w_true", w)
        object.__setattr__(self, "test_envs", tuple(self.test_envs))
        for env in self.test_envs:
            if env.feature_dim != self.train_env.feature_dim:
                raise ValueError("test environments must share the feature space")

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "train_env":
                value = environment_to_json(value)
            elif f.name == "test_envs":
                value = [environment_to_json(env) for env in value]
            elif f.name == "w_true":
                value = [float(v) for v in value]
            out[f.name] = value
        return out

    @classmethod
    def from_json(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "train_env" not in data or "test_envs" not in data:
            raise ValueError("config requires train_env and test_envs")
        data["train_env"] = _resolve_env(data["train_env"], base_dir)
        data["test_envs"] = tuple(
            _resolve_env(e, base_dir) for e in data["test_envs"]
        )
        return cls(**data)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True, eq=False)
class SuiteConfig:
    """A grid of runs: every condition crossed with every user and seed."""

    base: ExperimentConfig
    conditions: tuple[str, ...]
    users: tuple[tuple[str, np.ndarray], ...]  # (name, w_true) pairs
    seeds: tuple[int, ...]
    workers: int = 1

    def __post_init__(self):
        for c in self.conditions:
            if c not in CONDITIONS:
                raise ValueError(f"unknown condition {c!r}")
        if not self.conditions or not self.users or not self.seeds:
            raise ValueError("conditions, users, and seeds must be non-empty")
        users = tuple(
            (str(name), np.asarray(w, dtype=float)) for name, w in self.users
        )
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "conditions", tuple(self.conditions))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def cells(self) -> list[ExperimentConfig]:
        """Expand the grid in a fixed order: condition, then user, then seed."""
        out = []
        for condition in self.conditions:
            for name, w in self.users:
                for seed in self.seeds:
                    out.append(
                        self.base.with_overrides(
                            condition=condition,
                            w_true=w,
                            user_name=name,
                            seed=seed,
                        )
                    )
        return out

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "conditions": list(self.conditions),
            "users": [[name, [float(v) for v in w]] for name, w in self.users],
            "seeds": list(self.seeds),
            "workers": self.workers,
        }

    @classmethod
    def from_json(cls, data: dict, base_dir: Path | None = None) -> "SuiteConfig":
        base = ExperimentConfig.from_json(data["base"], base_dir)
        users = tuple((name, np.asarray(w, dtype=float)) for name, w in data["users"])
        return cls(
            base=base,
            conditions=tuple(data["conditions"]),
            users=users,
            seeds=tuple(data["seeds"]),
            workers=int(data.get("workers", 1)),
        )


def load_config(path) -> "ExperimentConfig | SuiteConfig":
    """Load a run or suite config; suites are recognized by their `base` key."""
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    if "base" in data:
        return SuiteConfig.from_json(data, base_dir=path.parent)
    return ExperimentConfig.from_json(data, base_dir=path.parent)
