"""Simulated preference oracles with hidden ground-truth reward weights.

Users answer pairwise queries either exactly (the sign of the true reward
difference) or noisily through the same softmax model the learner assumes.
Ground-truth weight sets are diversified by clustering a large pool of
random directions, so a panel of simulated users covers distinct
preference profiles rather than near-duplicates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .belief import feature_difference, preference_likelihood


@dataclass(frozen=True)
class SimulatedUser:
    """Hidden-weight responder; answers are pure in (seed, query index)."""

    w_true: np.ndarray
    mode: str = "boltzmann"  # boltzmann | exact
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.w_true, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "w_true", w)
        if np.linalg.norm(w) > 1.0 + 1e-9:
            raise ValueError(f"true weights must satisfy the unit-ball bound, got norm {np.linalg.norm(w)}")
        if self.mode not in ("boltzmann", "exact"):
            raise ValueError(f"unknown response mode: {self.mode!r}")

    def respond(self, traj_a, traj_b, index: int = 0, scale: float = 1.0) -> int:
        phi_a = scale * np.asarray(getattr(traj_a, "features", traj_a), dtype=float)
        phi_b = scale * np.asarray(getattr(traj_b, "features", traj_b), dtype=float)
        if self.mode == "exact":
            margin = float(self.w_true @ feature_difference(phi_a, phi_b))
            return -1 if margin < 0 else +1
        p_plus = preference_likelihood(self.w_true, phi_a, phi_b, +1)
        rng = np.random.default_rng((self.seed, index))
        return +1 if rng.random() < p_plus else -1

    def to_json(self) -> dict:
        return {"w_true": self.w_true.tolist(), "mode": self.mode, "seed": self.seed}

    @classmethod
    def from_json(cls, data: dict) -> "SimulatedUser":
        return cls(np.asarray(data["w_true"], dtype=float), data["mode"], int(data["seed"]))


def simulated_preference(user: SimulatedUser, traj_a, traj_b, index: int = 0, scale: float = 1.0) -> int:
    return user.respond(traj_a, traj_b, index=index, scale=scale)


def kmeans(points: np.ndarray, k: int, restarts: int = 20, tol: float = 1e-6, seed=None):
    """Plain Lloyd iterations with restarts; empty clusters trigger a fresh
    initialization.  Returns (centers, labels, objective_history) of the best
    restart, where the history is the per-iteration sum of squared distances.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    best = None
    attempts = 0
    done = 0
    while done < restarts:
        attempts += 1
        if attempts > 50 * restarts:
            raise RuntimeError("k-means kept producing empty clusters")
        centers = points[rng.choice(n, size=k, replace=False)].copy()
        history = []
        while True:
            d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
            objective = float(d2[np.arange(n), labels].sum())
            if history:
                assert objective <= history[-1] + 1e-9, "k-means objective increased"
            history.append(objective)
            if np.bincount(labels, minlength=k).min() == 0:
                history = None  # empty cluster: abandon this initialization
                break
            new_centers = np.stack([points[labels == j].mean(axis=0) for j in range(k)])
            if history[-1] == 0.0 or (
                len(history) > 1 and history[-2] - history[-1] < tol
            ):
                centers = new_centers
                break
            centers = new_centers
        if history is None:
            continue
        done += 1
        if best is None or history[-1] < best[2][-1]:
            best = (centers, labels, history)
    return best


def ground_truth_weights(
    n_users: int, dim: int, n_pool: int = 1000, seed=None
) -> np.ndarray:
    """Diverse unit-norm ground-truth weights: cluster a pool of uniformly
    random sphere directions and renormalize the resulting centers.
    """
    if n_users > n_pool:
        raise ValueError(f"need n_users <= n_pool, got {n_users} > {n_pool}")
    rng = np.random.default_rng(seed)
    pool = rng.standard_normal((n_pool, dim))
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)
    centers, _, _ = kmeans(pool, n_users, restarts=20, tol=1e-6, seed=rng)
    return centers / np.linalg.norm(centers, axis=1, keepdims=True)


def save_users(users, path) -> None:
    with open(path, "w") as f:
        json.dump([u.to_json() for u in users], f, indent=2)


def load_users(path) -> list:
    with open(path) as f:
        return [SimulatedUser.from_json(d) for d in json.load(f)]
