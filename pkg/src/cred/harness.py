"""Experiment loop: query, label, update, evaluate — repeated T times.

`run_experiment` executes one (condition, user, seed) cell and returns a
list of per-iteration logs; `run_suite` expands a grid of cells, runs
them (optionally in parallel), and writes a per-iteration CSV plus a
summary JSON.  Everything is deterministic given the config seed: the
same cell re-run produces byte-identical CSV rows.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .belief import BeliefEnsemble, PreferenceRecord, adaptive_metropolis
from .config import ExperimentConfig, SuiteConfig
from .design import environment_design
from .envs import EnvironmentSpec
from .metrics import entropy, jaccard_similarity, policy_accuracy, reward_difference
from .oracle import SimulatedUser
from .queries import (
    PolicyCache,
    PreferenceQuery,
    counterfactual_query,
    mean_belief_query,
    random_rollout_query,
)

# Fixed column order of the per-iteration CSV.  The trailing `user` and
# `environment` columns disambiguate suite rows (several users and several
# evaluation environments share an iteration).
CSV_COLUMNS = (
    "iteration",
    "condition",
    "seed",
    "entropy",
    "reward_diff",
    "policy_acc",
    "jaccard",
    "info_gain",
    "user",
    "environment",
)

__all__ = [
    "CSV_COLUMNS",
    "IterationLog",
    "RunResult",
    "run_experiment",
    "run_suite",
    "logs_to_rows",
    "write_csv",
    "summarize_rows",
]


@dataclass(eq=False)
class IterationLog:
    """Everything recorded about one loop iteration.

    `metrics` maps an environment name ("train", "test0", ...) to the
    evaluation metrics computed on it; it is empty on iterations where
    evaluation was skipped (see `ExperimentConfig.metrics_period`).
    `entropy` is belief-level and therefore logged once, not per
    environment.
    """

    iteration: int
    query: PreferenceQuery | None
    label: int | None
    entropy: float | None
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    fallback: bool = False

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "query": None if self.query is None else self.query.to_json(),
            "label": self.label,
            "entropy": self.entropy,
            "metrics": self.metrics,
            "wall_time": self.wall_time,
            "fallback": self.fallback,
        }


@dataclass(eq=False)
class RunResult:
    """Output of one experiment cell."""

    config: ExperimentConfig
    logs: list[IterationLog]
    records: list[PreferenceRecord]
    ensemble: BeliefEnsemble


def _env_names(config: ExperimentConfig) -> list[tuple[str, EnvironmentSpec]]:
    named = [("train", config.train_env)]
    named += [(f"test{i}", env) for i, env in enumerate(config.test_envs)]
    return named


def _evaluate(config, ensemble, caches, seed) -> tuple[float, dict]:
    """Compute belief entropy plus per-environment metrics."""
    h = entropy(ensemble, grid_points_per_dim=config.entropy_grid)
    per_env = {}
    for name, env in _env_names(config):
        cache = caches[name]
        per_env[name] = {
            "reward_diff": reward_difference(
                ensemble, config.w_true, env,
                n_eval=config.n_eval, seed=seed, cache=cache,
                goal_bonus=config.goal_bonus,
            ),
            "policy_acc": policy_accuracy(
                ensemble, config.w_true, env,
                n_eval=config.n_eval, seed=seed, cache=cache,
            ),
            "jaccard": jaccard_similarity(
                ensemble, config.w_true, env,
                n_eval=config.n_eval, seed=seed, cache=cache,
            ),
        }
    return float(h), per_env


def _generate_query(config, ensemble, seed, cache):
    """Dispatch on the condition.  Returns (query, fallback_flag)."""
    env = config.train_env
    if config.condition == "RR":
        return random_rollout_query(env, ensemble, k=config.k_rollouts, seed=seed), False
    if config.condition == "MBP":
        return (
            mean_belief_query(
                env, ensemble,
                epsilon=config.mbp_epsilon, k=config.k_rollouts,
                seed=seed, cache=cache,
            ),
            False,
        )
    if config.condition == "CR":
        query = counterfactual_query(
            env, ensemble,
            n_bootstrap=config.n_bootstrap, m_diverse=config.m_diverse,
            seed=seed, cache=cache,
        )
        if query is not None:
            return query, False
        # Degenerate ensemble: every bootstrapped policy walked the same
        # path.  Fall back to a perturbed mean-belief query so the loop
        # always produces a label to learn from.
        query = mean_belief_query(
            env, ensemble,
            epsilon=config.mbp_epsilon, k=config.k_rollouts,
            seed=seed, cache=cache,
        )
        return query, True
    if config.condition in ("CRED", "MBP+ED"):
        inner = "CR" if config.condition == "CRED" else "MBP"
        result = environment_design(
            env, ensemble,
            n_iters=config.design_iters, kappa=config.design_kappa,
            seed=seed, n_init=config.design_init,
            n_candidates=config.design_candidates,
            n_bootstrap=config.n_bootstrap, m_diverse=config.m_diverse,
            inner=inner, epsilon=config.mbp_epsilon,
            k_rollouts=config.k_rollouts, cache=cache,
        )
        return result.query, result.fallback
    raise ValueError(f"unknown condition {config.condition!r}")


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Run one full preference-learning loop.

    Iteration 0 logs the prior belief (no query); iterations 1..t_pref
    each generate a query, obtain the oracle's label, refit the
    posterior from scratch on all records, and (on scheduled
    iterations) evaluate the belief on the training and held-out
    environments.
    """
    root = np.random.default_rng(config.seed)
    # Pre-draw one seed block per iteration so the stream consumed by one
    # stage can never shift another stage's randomness.
    seed_block = root.integers(0, 2**63 - 1, size=(config.t_pref + 1, 3))

    user = SimulatedUser(
        config.w_true, mode=config.oracle_mode, seed=config.seed,
    )
    dim = config.train_env.feature_dim
    scale = config.train_env.feature_scale
    caches = {
        name: PolicyCache(goal_bonus=config.goal_bonus)
        for name, _ in _env_names(config)
    }
    query_cache = caches["train"]

    records: list[PreferenceRecord] = []
    logs: list[IterationLog] = []

    def metrics_due(iteration: int) -> bool:
        if iteration == 0 or iteration == config.t_pref:
            return True
        if config.metrics_period <= 0:
            return False
        return iteration % config.metrics_period == 0

    # Iteration 0: prior belief, no query.
    t0 = time.perf_counter()
    ensemble = adaptive_metropolis(
        records, n_samples=config.mcmc_samples, burn_in=config.mcmc_burn_in,
        thin=config.mcmc_thin, seed=int(seed_block[0, 0]), dim=dim,
    )
    h, per_env = _evaluate(config, ensemble, caches, seed=int(seed_block[0, 1]))
    logs.append(
        IterationLog(
            iteration=0, query=None, label=None, entropy=h,
            metrics=per_env, wall_time=time.perf_counter() - t0,
        )
    )

    for it in range(1, config.t_pref + 1):
        t0 = time.perf_counter()
        q_seed, mcmc_seed, eval_seed = (int(s) for s in seed_block[it])

        query, fallback = _generate_query(config, ensemble, q_seed, query_cache)
        label = user.respond(query.traj_a, query.traj_b, index=it, scale=scale)
        records.append(
            PreferenceRecord(
                phi_a=query.traj_a.features * scale,
                phi_b=query.traj_b.features * scale,
                label=label,
                env_id=query.env_id,
                iteration=it,
            )
        )
        ensemble = adaptive_metropolis(
            records, n_samples=config.mcmc_samples, burn_in=config.mcmc_burn_in,
            thin=config.mcmc_thin, seed=mcmc_seed, dim=dim,
        )

        if metrics_due(it):
            h, per_env = _evaluate(config, ensemble, caches, seed=eval_seed)
        else:
            h, per_env = None, {}
        logs.append(
            IterationLog(
                iteration=it, query=query, label=label, entropy=h,
                metrics=per_env, wall_time=time.perf_counter() - t0,
                fallback=fallback,
            )
        )

    return RunResult(config=config, logs=logs, records=records, ensemble=ensemble)


def _fmt(value) -> str:
    """Format a cell; floats use repr so rows round-trip bit-for-bit."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def logs_to_rows(result: RunResult) -> list[dict]:
    """Flatten a run into CSV rows, one per (iteration, environment).

    Iterations where evaluation was skipped still produce a single row
    (environment "train") so the query's information gain is never lost.
    """
    config = result.config
    rows = []
    for log in result.logs:
        gain = None if log.query is None else log.query.info_gain
        base = {
            "iteration": log.iteration,
            "condition": config.condition,
            "seed": config.seed,
            "entropy": log.entropy,
            "info_gain": gain,
            "user": config.user_name,
        }
        if log.metrics:
            for name, _ in _env_names(config):
                m = log.metrics[name]
                rows.append(
                    base
                    | {
                        "environment": name,
                        "reward_diff": m["reward_diff"],
                        "policy_acc": m["policy_acc"],
                        "jaccard": m["jaccard"],
                    }
                )
        else:
            rows.append(
                base
                | {"environment": "train", "reward_diff": None,
                   "policy_acc": None, "jaccard": None}
            )
    return rows


def write_csv(rows: list[dict], path=None) -> str:
    """Serialize rows in the fixed column order; returns the CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _run_cell(config: ExperimentConfig) -> list[dict]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return logs_to_rows(run_experiment(config))


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def summarize_rows(rows: list[dict], t_pref: int) -> dict:
    """Per-condition final-iteration statistics over users and seeds.

    For each condition and environment, every metric's mean and standard
    deviation on the last iteration; plus the mean information gain of
    the first ten queries (the early-iteration signal that query quality
    shows up in).
    """
    summary: dict = {}
    conditions = sorted({r["condition"] for r in rows})
    for condition in conditions:
        cond_rows = [r for r in rows if r["condition"] == condition]
        envs = sorted({r["environment"] for r in cond_rows})
        per_env = {}
        for env_name in envs:
            final = [
                r
                for r in cond_rows
                if r["environment"] == env_name
                and r["iteration"] == t_pref
                and r["reward_diff"] is not None
            ]
            if not final:
                continue
            per_env[env_name] = {
                metric: _mean_std([r[metric] for r in final])
                for metric in ("entropy", "reward_diff", "policy_acc", "jaccard")
            }
        early = [
            r["info_gain"]
            for r in cond_rows
            if r["environment"] == "train"
            and 1 <= r["iteration"] <= 10
            and r["info_gain"] is not None
        ]
        summary[condition] = {
            "environments": per_env,
            "info_gain_first_10": _mean_std(early) if early else None,
        }
    return summary


def run_suite(suite: SuiteConfig, out_dir=None) -> dict:
    """Run every (condition, user, seed) cell and aggregate.

    Returns {"rows": [...], "summary": {...}, "failures": [...]}; when
    `out_dir` is given, also writes metrics.csv and summary.json there.
    A failing cell is recorded and skipped — one bad cell does not lose
    the rest of the suite.
    """
    cells = suite.cells()
    rows: list[dict] = []
    failures: list[dict] = []

    if suite.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=suite.workers) as pool:
            futures = [pool.submit(_run_cell, cell) for cell in cells]
            for cell, fut in zip(cells, futures):
                try:
                    rows.extend(fut.result())
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    failures.append(_failure_entry(cell, exc))
    else:
        for cell in cells:
            try:
                rows.extend(_run_cell(cell))
            except Exception as exc:  # noqa: BLE001 - cell isolation
                failures.append(_failure_entry(cell, exc))

    rows.sort(key=_row_key)
    summary = summarize_rows(rows, t_pref=suite.base.t_pref)
    out = {"rows": rows, "summary": summary, "failures": failures}

    if out_dir is not None:
        from pathlib import Path

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out_dir / "metrics.csv")
        with open(out_dir / "summary.json", "w") as fh:
            json.dump({"summary": summary, "failures": failures}, fh, indent=2)
            fh.write("\n")
    return out


_ENV_ORDER = {"train": 0}


def _row_key(row: dict):
    env = row["environment"]
    return (
        row["condition"],
        row["user"],
        row["seed"],
        row["iteration"],
        _ENV_ORDER.get(env, 1),
        env,
    )


def _failure_entry(cell: ExperimentConfig, exc: Exception) -> dict:
    return {
        "condition": cell.condition,
        "user": cell.user_name,
        "seed": cell.seed,
        "error": f"{type(exc).__name__}: {exc}",
    }
