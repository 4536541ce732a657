"""Evaluation of a learned belief against a hidden ground-truth user.

Three policy-level metrics (relative return shortfall, greedy-action
agreement, visited-state overlap) average over weights sampled from the
belief; the fourth (entropy) measures the belief itself.  All are pure
functions of (ensemble, true weights, environment, seed).
"""

from __future__ import annotations

import numpy as np

from .belief import belief_entropy_kde
from .envs import EnvironmentSpec, goal_reachable_mask
from .errors import UndefinedBaselineError
from .planner import GOAL_BONUS, discounted_return, rollout
from .queries import PolicyCache

N_EVAL = 20


def _sample_weights(ensemble, n_eval: int, seed) -> np.ndarray:
    samples = np.atleast_2d(getattr(ensemble, "samples", ensemble))
    rng = np.random.default_rng(seed)
    if n_eval >= len(samples):
        return samples
    idx = rng.choice(len(samples), size=n_eval, replace=False)
    return samples[idx]


def reward_difference(
    ensemble,
    w_true,
    env: EnvironmentSpec,
    n_eval: int = N_EVAL,
    seed: int | None = None,
    cache: PolicyCache | None = None,
    goal_bonus: float = GOAL_BONUS,
) -> float:
    """Mean percentage shortfall of believed-optimal behavior, in percent.

    Each sampled weight trains a policy whose deterministic rollout is
    scored under the true weights (goal bonus included); the shortfall is
    (R_est - R_gt) / |R_gt| * 100, never meaningfully positive because the
    true policy is optimal for the true weights.
    """
    w_true = np.asarray(w_true, dtype=float)
    if cache is None:
        cache = PolicyCache()
    pi_gt = cache.get(env, w_true)
    r_gt = discounted_return(env, rollout(env, pi_gt), w_true, goal_bonus=goal_bonus)
    if abs(r_gt) < 1e-9:
        raise UndefinedBaselineError(
            f"true-policy return {r_gt} is too close to zero to normalize against"
        )
    diffs = []
    for w in _sample_weights(ensemble, n_eval, seed):
        traj = rollout(env, cache.get(env, w))
        r_est = discounted_return(env, traj, w_true, goal_bonus=goal_bonus)
        diffs.append((r_est - r_gt) / abs(r_gt) * 100.0)
    return float(np.mean(diffs))


def policy_accuracy(
    ensemble,
    w_true,
    env: EnvironmentSpec,
    n_eval: int = N_EVAL,
    seed: int | None = None,
    cache: PolicyCache | None = None,
) -> float:
    """Expected fraction of goal-reaching non-goal states whose greedy action
    matches the true policy's (identical tie-breaking on both sides).
    """
    w_true = np.asarray(w_true, dtype=float)
    if cache is None:
        cache = PolicyCache()
    dyn = env.dynamics()
    counted = goal_reachable_mask(env)
    counted[dyn.goal] = False
    gt = cache.get(env, w_true).greedy[counted]
    fractions = [
        float(np.mean(cache.get(env, w).greedy[counted] == gt))
        for w in _sample_weights(ensemble, n_eval, seed)
    ]
    return float(np.mean(fractions))


def jaccard_similarity(
    ensemble,
    w_true,
    env: EnvironmentSpec,
    n_eval: int = N_EVAL,
    seed: int | None = None,
    cache: PolicyCache | None = None,
) -> float:
    """Expected overlap of visited-state sets between believed and true
    deterministic rollouts: |intersection| / |union|.
    """
    w_true = np.asarray(w_true, dtype=float)
    if cache is None:
        cache = PolicyCache()
    gt_states = set(rollout(env, cache.get(env, w_true)).states)
    scores = []
    for w in _sample_weights(ensemble, n_eval, seed):
        est_states = set(rollout(env, cache.get(env, w)).states)
        scores.append(len(gt_states & est_states) / len(gt_states | est_states))
    return float(np.mean(scores))


def entropy(ensemble, grid_points_per_dim: int | None = None) -> float:
    """Belief uncertainty in nats; the KDE-on-a-grid estimate."""
    return belief_entropy_kde(ensemble, grid_points_per_dim)
