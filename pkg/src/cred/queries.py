"""Preference-query generation and information-gain scoring.

A query shows two trajectories from the same environment and asks which the
person prefers.  Its worth is the mutual information between the answer and
the reward weights, estimated on the discrete belief ensemble.  Candidate
queries come from three generators: counterfactual plans (one optimal
trajectory per diverse weight hypothesis), random walks, and noisy rollouts
of the mean-belief policy.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .belief import BeliefEnsemble
from .envs import EnvironmentSpec
from .errors import ShapeError
from .planner import (
    GOAL_BONUS,
    Policy,
    TrajectoryRecord,
    random_walk,
    rollout,
    value_iteration,
)


@dataclass(frozen=True, eq=False)
class PreferenceQuery:
    """Two same-environment trajectories plus the gain that selected them."""

    traj_a: TrajectoryRecord
    traj_b: TrajectoryRecord
    env_id: str
    info_gain: float
    generator: str  # CR | RR | MBP | CRED

    def __post_init__(self):
        if self.traj_a.env_id != self.env_id or self.traj_b.env_id != self.env_id:
            raise ValueError("both trajectories must belong to the query's environment")
        if not 0.0 <= self.info_gain <= 1.0:
            raise ValueError(f"binary-query gain must lie in [0, 1] bits, got {self.info_gain}")

    def to_json(self) -> dict:
        return {
            "env_id": self.env_id,
            "generator": self.generator,
            "info_gain": self.info_gain,
            "traj_a": self.traj_a.to_json(),
            "traj_b": self.traj_b.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PreferenceQuery":
        return cls(
            TrajectoryRecord.from_json(data["traj_a"]),
            TrajectoryRecord.from_json(data["traj_b"]),
            data["env_id"],
            float(data["info_gain"]),
            data["generator"],
        )


def info_gain_from_features(phi_a, phi_b, weights) -> float:
    """Mutual information (bits) between the answer and the weight samples.

    With equally weighted samples {w_m}, the estimator is
    (1/M) sum_m sum_I P(I|w_m) log2( M P(I|w_m) / sum_m' P(I|w_m') ),
    which equals prior minus expected posterior entropy on the ensemble.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    if len(weights) == 0:
        raise ValueError("info gain needs a non-empty ensemble")
    psi = np.asarray(phi_a, dtype=float) - np.asarray(phi_b, dtype=float)
    if psi.shape != (weights.shape[1],):
        raise ShapeError(f"feature dim {psi.shape} does not match weights {weights.shape}")
    p_plus = expit(weights @ psi)  # (M,)
    p = np.stack([p_plus, 1.0 - p_plus])  # (2, M)
    m = p.shape[1]
    denom = p.sum(axis=1, keepdims=True)
    ratio = np.where(p > 0, m * p / np.where(denom > 0, denom, 1.0), 1.0)
    gain = float(np.sum(np.where(p > 0, p * np.log2(ratio), 0.0)) / m)
    return float(np.clip(gain, 0.0, 1.0))


def info_gain(traj_a: TrajectoryRecord, traj_b: TrajectoryRecord, ensemble, scale: float = 1.0) -> float:
    """Query-level gain: trajectory features are scaled before the softmax."""
    if traj_a.env_id != traj_b.env_id:
        raise ValueError("trajectories must share an environment")
    weights = getattr(ensemble, "samples", ensemble)
    return info_gain_from_features(scale * traj_a.features, scale * traj_b.features, weights)


def _pairwise_gains(features: np.ndarray, weights: np.ndarray):
    """Gains for all index pairs (i < j); returns (pairs, gains) arrays."""
    pairs = list(itertools.combinations(range(len(features)), 2))
    psi = np.stack([features[i] - features[j] for i, j in pairs])  # (P, d)
    p_plus = expit(weights @ psi.T)  # (M, P)
    p = np.stack([p_plus, 1.0 - p_plus])  # (2, M, P)
    m = weights.shape[0]
    denom = p.sum(axis=1, keepdims=True)
    ratio = np.where(p > 0, m * p / np.where(denom > 0, denom, 1.0), 1.0)
    gains = np.sum(np.where(p > 0, p * np.log2(ratio), 0.0), axis=(0, 1)) / m
    return pairs, np.clip(gains, 0.0, 1.0)


def _argmax_pair(env: EnvironmentSpec, trajectories, ensemble, generator: str) -> PreferenceQuery:
    weights = np.atleast_2d(getattr(ensemble, "samples", ensemble))
    features = np.stack([t.features for t in trajectories]) * env.feature_scale
    pairs, gains = _pairwise_gains(features, weights)
    best = int(np.argmax(gains))  # first max wins: lowest pair index on ties
    i, j = pairs[best]
    return PreferenceQuery(
        traj_a=trajectories[i],
        traj_b=trajectories[j],
        env_id=env.env_id,
        info_gain=float(gains[best]),
        generator=generator,
    )


def select_diverse_weights(samples, m: int, first: int | None = None) -> np.ndarray:
    """Greedy max-min cosine-distance subset of the weight samples.

    Seeds with the sample nearest the mean direction (or index ``first``),
    then repeatedly adds the candidate whose minimum cosine distance to the
    chosen set is largest; ties break to the lowest index.  Zero-norm
    samples cannot define a direction and are dropped with a warning.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    norms = np.linalg.norm(samples, axis=1)
    keep = norms > 0
    if not np.all(keep):
        warnings.warn(f"excluding {int((~keep).sum())} zero-norm samples", stacklevel=2)
        if first is not None:
            raise ValueError("cannot pin the seed index while dropping zero-norm samples")
        samples, norms = samples[keep], norms[keep]
    if not 1 <= m <= len(samples):
        raise ValueError(f"need 1 <= m <= {len(samples)}, got {m}")
    units = samples / norms[:, None]
    if first is None:
        mean = samples.mean(axis=0)
        mean_norm = np.linalg.norm(mean)
        if mean_norm == 0:
            first = 0
        else:
            first = int(np.argmax(units @ (mean / mean_norm)))
    chosen = [int(first)]
    # min cosine distance from each candidate to the chosen set
    min_dist = 1.0 - units @ units[first]
    for _ in range(m - 1):
        min_dist[chosen] = -np.inf
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, 1.0 - units @ units[nxt])
    return samples[chosen]


class PolicyCache:
    """Memo of trained policies keyed by (environment id, quantized weight).

    All policies in one cache share the same goal bonus, so a cache must
    not be reused across different bonus settings.
    """

    def __init__(self, decimals: int = 8, goal_bonus: float = GOAL_BONUS):
        self.decimals = decimals
        self.goal_bonus = goal_bonus
        self._store: dict = {}
        self.hits = 0
        self.misses = 0

    def get(self, env: EnvironmentSpec, w) -> Policy:
        key = (env.env_id, tuple(np.round(np.asarray(w, dtype=float), self.decimals)))
        policy = self._store.get(key)
        if policy is None:
            self.misses += 1
            policy = value_iteration(env, w, goal_bonus=self.goal_bonus)
            self._store[key] = policy
        else:
            self.hits += 1
        return policy

    def __len__(self) -> int:
        return len(self._store)


def _dedupe_by_features(trajectories) -> list:
    seen = set()
    out = []
    for t in trajectories:
        key = t.features.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


def counterfactual_query(
    env: EnvironmentSpec,
    ensemble,
    n_bootstrap: int = 100,
    m_diverse: int = 8,
    seed: int | None = None,
    cache: PolicyCache | None = None,
) -> PreferenceQuery | None:
    """Most informative pair of counterfactual plans, or None if degenerate.

    Bootstraps weight hypotheses from the ensemble, keeps a diverse subset,
    plans optimally for each, and scores every pair of the resulting
    (deduplicated) trajectories.  Fewer than two distinct trajectories means
    no informative comparison exists here; the caller may fall back to the
    mean-belief generator.
    """
    if not n_bootstrap >= m_diverse >= 2:
        raise ValueError(f"need n_bootstrap >= m_diverse >= 2, got {n_bootstrap}, {m_diverse}")
    samples = np.atleast_2d(getattr(ensemble, "samples", ensemble))
    rng = np.random.default_rng(seed)
    drawn = samples[rng.integers(0, len(samples), size=n_bootstrap)]
    drawn = drawn[np.linalg.norm(drawn, axis=1) > 0]
    if len(drawn) < 2:
        return None
    diverse = select_diverse_weights(drawn, min(m_diverse, len(drawn)))
    if cache is None:
        cache = PolicyCache()
    trajectories = [rollout(env, cache.get(env, w), epsilon=0.0) for w in diverse]
    distinct = _dedupe_by_features(trajectories)
    if len(distinct) < 2:
        return None
    return _argmax_pair(env, distinct, ensemble, "CR")


def random_rollout_query(
    env: EnvironmentSpec, ensemble, k: int = 100, seed: int | None = None
) -> PreferenceQuery:
    """Most informative pair among K uniform random walks.

    Walks stop at the horizon or the goal; they are not required to reach
    the goal, which is exactly what makes this baseline weak.
    """
    if k < 2:
        raise ValueError(f"need at least 2 rollouts, got {k}")
    seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=k)
    trajectories = [random_walk(env, seed=int(s)) for s in seeds]
    return _argmax_pair(env, trajectories, ensemble, "RR")


def mean_belief_query(
    env: EnvironmentSpec,
    ensemble,
    epsilon: float = 0.25,
    k: int = 100,
    seed: int | None = None,
    cache: PolicyCache | None = None,
) -> PreferenceQuery:
    """Most informative pair among noisy rollouts of the mean-belief policy."""
    if k < 2:
        raise ValueError(f"need at least 2 rollouts, got {k}")
    samples = np.atleast_2d(getattr(ensemble, "samples", ensemble))
    mean = samples.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm > 1.0:
        mean = mean / norm
    if cache is None:
        cache = PolicyCache()
    policy = cache.get(env, mean)
    seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=k)
    trajectories = [rollout(env, policy, epsilon=epsilon, seed=int(s)) for s in seeds]
    return _argmax_pair(env, trajectories, ensemble, "MBP")
