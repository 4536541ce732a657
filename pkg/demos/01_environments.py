"""Environments: terrain grids, street graphs, and the design space.

Both navigation domains share one contract: tabular dynamics plus additive
step features.  Grids count terrain-type visits (brick, gravel, sand,
grass); street graphs sum each edge's distance, travel time, and elevation
delta.  A linear reward w @ phi(trajectory) over those features is all the
planner and the belief machinery ever see.
"""

import numpy as np

from cred.envs import (
    TERRAIN_NAMES,
    EnvParamVector,
    decode_env,
    default_bounds,
    design_space,
    grid_environment,
    sample_training_graph,
    step_features,
    trajectory_features,
)

rng = np.random.default_rng(0)

# ---------------------------------------------------------------------------
# A terrain grid: integers in [0, 4) index the terrain palette.
terrain = rng.integers(0, 4, size=(6, 6))
grid = grid_environment(terrain)  # start top-left, goal bottom-right
print("grid:", grid)
print("terrain ids -> names:", dict(enumerate(TERRAIN_NAMES)))
print(terrain)

# Every step contributes a one-hot count of the terrain it lands on.
phi = step_features(grid, (0, 0), 1)  # move right from the corner
print("\nstep (0,0) -> right lands on",
      TERRAIN_NAMES[int(terrain[0, 1])], "=> features", phi)

# Trajectory features are plain sums over steps, so rewards stay linear.
walk = [((0, 0), 1), ((0, 1), 2), ((1, 1), 2)]
print("3-step walk features:", trajectory_features(grid, walk))

# ---------------------------------------------------------------------------
# A street graph: the fixed 9-node / 12-edge lattice used for training,
# with distance / time / elevation edge features.
graph = sample_training_graph(seed=3)
print("\ngraph:", graph)
print("feature dim:", graph.feature_dim, "(distance, time, elevation)")
first = graph.domain.edges[0]
print("first edge:", (first.src, first.dst),
      "distance %.2f, time %.2f, elevation %+.2f"
      % (first.distance, first.travel_time, first.elevation))

# ---------------------------------------------------------------------------
# The designer's view: every environment compresses to a bounded parameter
# vector (grid: 3x3 patch terrain ids; graph: per-edge features).  Decoding
# any vector inside the bounds yields a valid environment, which is what
# lets Bayesian optimization search over environments at all.
theta = design_space(grid)
print("\ndesign vector kind:", theta.kind, "length:", len(theta.values))
bounds = default_bounds(theta.kind, len(theta.values))
random_theta = EnvParamVector(rng.uniform(bounds[:, 0], bounds[:, 1]), theta.kind)
imagined = decode_env(random_theta, grid)
print("decoded environment:", imagined)
print("same horizon/discount as template:", imagined.horizon == grid.horizon,
      imagined.gamma == grid.gamma)
