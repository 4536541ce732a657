"""Planning: value iteration, greedy rollouts, and the goal bonus.

The reward on a trajectory is w @ phi plus a fixed bonus for reaching the
goal; value iteration solves the finite-horizon discounted MDP exactly and
a greedy rollout of the resulting policy is the optimal plan.  Different
weight hypotheses produce visibly different routes — that disagreement is
the raw material every query generator works with.
"""

import numpy as np

from cred.envs import TERRAIN_NAMES, grid_environment
from cred.planner import GOAL_BONUS, discounted_return, rollout, value_iteration

rng = np.random.default_rng(4)
env = grid_environment(rng.integers(0, 4, size=(6, 6)))
print(env)
print(env.domain.terrain)


def show(w, label):
    policy = value_iteration(env, w)
    traj = rollout(env, policy, epsilon=0.0)
    print(f"\n{label}: w = {np.round(w, 2)}")
    print("  route:", " -> ".join(str(s) for s in traj.states))
    print("  terrain visits:", dict(zip(TERRAIN_NAMES, traj.features.astype(int))))
    print("  discounted return: %.3f (includes %.0f goal bonus at arrival)"
          % (discounted_return(env, traj, w), GOAL_BONUS))
    return traj


# A brick-hater and a sand-hater plan through the same grid.
hates_brick = np.array([-0.9, -0.1, -0.1, -0.1])
hates_sand = np.array([-0.1, -0.1, -0.9, -0.1])
a = show(hates_brick / np.linalg.norm(hates_brick), "hates brick")
b = show(hates_sand / np.linalg.norm(hates_sand), "hates sand")
print("\nroutes differ:", not np.array_equal(a.features, b.features))

# Noisy rollouts of one policy explore near-optimal variations; that is the
# mean-belief baseline's trajectory pool.
policy = value_iteration(env, hates_brick)
variants = {tuple(rollout(env, policy, epsilon=0.3, seed=s).features) for s in range(20)}
print("distinct feature vectors among 20 noisy rollouts (epsilon=0.3):", len(variants))
