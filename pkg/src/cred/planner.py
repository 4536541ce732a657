"""Tabular planning: value iteration, greedy policies, and rollouts.

A policy is trained for one weight vector on one environment.  Per-step
reward is ``w @ step_features`` plus a fixed goal bonus granted on arrival;
the goal is absorbing with value zero.  All tie-breaking is by smallest
action index so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .envs import EnvironmentSpec
from .errors import InvalidTrajectoryError, ShapeError

GOAL_BONUS = 10.0


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """A finished rollout: the visited (state, action) path plus cached features."""

    env_id: str
    states: tuple  # length n_steps + 1, includes the final state
    actions: tuple  # length n_steps
    features: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TrajectoryRecord):
            return NotImplemented
        return (
            self.env_id == other.env_id
            and self.states == other.states
            and self.actions == other.actions
            and np.array_equal(self.features, other.features)
        )

    def __hash__(self):
        return hash((self.env_id, self.states, self.actions))

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        features = np.asarray(self.features, dtype=float)
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        if len(self.states) != len(self.actions) + 1:
            raise InvalidTrajectoryError(
                f"{len(self.states)} states cannot pair with {len(self.actions)} actions"
            )

    @property
    def steps(self) -> tuple:
        return tuple(zip(self.states[:-1], self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def to_json(self) -> dict:
        return {
            "env_id": self.env_id,
            "steps": [[_state_to_json(s), a] for s, a in self.steps],
            "states": [_state_to_json(s) for s in self.states],
            "features": self.features.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict, env: EnvironmentSpec | None = None) -> "TrajectoryRecord":
        actions = tuple(int(a) for _, a in data["steps"])
        if "states" in data:
            states = tuple(_state_from_json(s) for s in data["states"])
        elif env is not None:
            states = list(_state_from_json(s) for s, _ in data["steps"])
            dyn = env.dynamics()
            if states:
                last = dyn.next_state[dyn.state_index[states[-1]], actions[-1]]
                states.append(dyn.states[last])
            else:
                states.append(dyn.states[dyn.start])
            states = tuple(states)
        else:
            raise InvalidTrajectoryError(
                "trajectory JSON lacks a 'states' list and no environment was given"
            )
        return cls(data["env_id"], states, actions, np.asarray(data["features"], dtype=float))


def _state_to_json(state):
    return list(state) if isinstance(state, tuple) else state


def _state_from_json(state):
    return tuple(state) if isinstance(state, list) else state


@dataclass(frozen=True, eq=False)
class Policy:
    """Greedy policy with its action-value table and training weights."""

    env_id: str
    weights: np.ndarray
    q_values: np.ndarray  # (S, A), -inf at illegal actions
    values: np.ndarray  # (S,)
    greedy: np.ndarray  # (S,) action indices
    goal_bonus: float = GOAL_BONUS
    _state_index: dict = field(default=None, repr=False, compare=False)

    def action(self, state) -> int:
        return int(self.greedy[self._state_index[state]])

    def value(self, state) -> float:
        return float(self.values[self._state_index[state]])


def value_iteration(
    env: EnvironmentSpec,
    w,
    gamma: float | None = None,
    tol: float = 1e-6,
    goal_bonus: float = GOAL_BONUS,
    max_iters: int = 200_000,
) -> Policy:
    """Solve the tabular MDP for weight vector ``w``.

    The returned values satisfy ``|V - V*|`` below ``tol`` in sup-norm (the
    contraction bound converts the per-sweep change into that guarantee).
    Rewards use the raw (unscaled) step features.  Greedy ties go to the
    smallest action index.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (env.feature_dim,):
        raise ShapeError(f"weight shape {w.shape} does not match feature dim {env.feature_dim}")
    if gamma is None:
        gamma = env.gamma
    dyn = env.dynamics()
    legal = dyn.next_state >= 0
    nxt = np.where(legal, dyn.next_state, 0)
    reward = dyn.step_phi @ w + goal_bonus * (dyn.next_state == dyn.goal)
    sweep_tol = 0.5 * tol * (1.0 - gamma) / gamma if gamma > 0 else tol
    v = np.zeros(dyn.n_states)
    for _ in range(max_iters):
        q = np.where(legal, reward + gamma * v[nxt], -np.inf)
        v_new = q.max(axis=1)
        v_new[~legal.any(axis=1)] = 0.0  # dead ends hold no value
        v_new[dyn.goal] = 0.0  # absorbing
        if np.max(np.abs(v_new - v)) < sweep_tol:
            v = v_new
            break
        v = v_new
    q = np.where(legal, reward + gamma * v[nxt], -np.inf)
    q[dyn.goal] = -np.inf  # no actions are taken from the goal
    greedy = q.argmax(axis=1)
    return Policy(
        env_id=env.env_id,
        weights=w,
        q_values=q,
        values=v,
        greedy=greedy,
        goal_bonus=goal_bonus,
        _state_index=dyn.state_index,
    )


def rollout(
    env: EnvironmentSpec,
    policy: Policy,
    epsilon: float = 0.0,
    horizon: int | None = None,
    seed: int | None = None,
    start=None,
) -> TrajectoryRecord:
    """Run the policy from the start state, taking random legal actions with
    probability ``epsilon``.  Stops at the goal or the horizon.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    dyn = env.dynamics()
    if horizon is None:
        horizon = env.horizon
    rng = np.random.default_rng(seed)
    s = dyn.start if start is None else dyn.state_index[start]
    states = [dyn.states[s]]
    actions = []
    phi = np.zeros(env.feature_dim)
    for _ in range(horizon):
        if s == dyn.goal:
            break
        legal = dyn.legal_actions(s)
        if len(legal) == 0:
            break
        if epsilon > 0.0 and rng.random() < epsilon:
            a = int(rng.choice(legal))
        else:
            a = int(policy.greedy[s])
        actions.append(a)
        phi += dyn.step_phi[s, a]
        s = int(dyn.next_state[s, a])
        states.append(dyn.states[s])
    return TrajectoryRecord(env.env_id, tuple(states), tuple(actions), phi)


def random_walk(
    env: EnvironmentSpec, horizon: int | None = None, seed: int | None = None
) -> TrajectoryRecord:
    """Uniform random legal walk; a rollout with ε = 1 needing no policy."""
    dummy = Policy(
        env_id=env.env_id,
        weights=np.zeros(env.feature_dim),
        q_values=np.zeros((0, 0)),
        values=np.zeros(0),
        greedy=np.zeros(env.dynamics().n_states, dtype=np.int64),
        _state_index=env.dynamics().state_index,
    )
    return rollout(env, dummy, epsilon=1.0, horizon=horizon, seed=seed)


def trajectory_return(w, phi) -> float:
    """Preference-model trajectory reward: the plain dot product w @ phi."""
    w = np.asarray(w, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if w.shape != phi.shape:
        raise ShapeError(f"weight shape {w.shape} does not match feature shape {phi.shape}")
    return float(w @ phi)


def discounted_return(
    env: EnvironmentSpec,
    steps,
    w,
    gamma: float | None = None,
    goal_bonus: float = GOAL_BONUS,
) -> float:
    """Planner-side return: discounted per-step rewards plus the goal bonus.

    This is the quantity value iteration optimizes, so an ε = 0 rollout's
    discounted return equals V(start) up to the solver tolerance.
    """
    steps = getattr(steps, "steps", steps)
    w = np.asarray(w, dtype=float)
    if gamma is None:
        gamma = env.gamma
    dyn = env.dynamics()
    total = 0.0
    discount = 1.0
    for state, action in steps:
        s = dyn.state_index[state]
        r = float(dyn.step_phi[s, action] @ w)
        if dyn.next_state[s, action] == dyn.goal:
            r += goal_bonus
        total += discount * r
        discount *= gamma
    return total
