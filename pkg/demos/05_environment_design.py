"""Environment design: searching for the world that asks the best question.

If no trajectory pair in the real environment separates the remaining
weight hypotheses, imagine one that does: Bayesian optimization (GP + UCB)
searches a bounded design vector (terrain patches for grids), decodes each
candidate into a full environment, runs the counterfactual generator
inside it, and keeps the environment whose best query gains the most.
"""

import numpy as np

from cred.belief import PreferenceRecord, adaptive_metropolis
from cred.design import environment_design
from cred.envs import decode_env, grid_environment
from cred.queries import PolicyCache, counterfactual_query

rng = np.random.default_rng(3)

# A nearly uniform template: every route looks alike, so in-place queries
# are weak and the designer has room to help.
terrain = np.zeros((8, 8), dtype=int)
terrain[4:, :] = 1
template = grid_environment(terrain)
print("template:", template)

records = [
    PreferenceRecord(rng.normal(size=4), rng.normal(size=4), +1),
    PreferenceRecord(rng.normal(size=4), rng.normal(size=4), -1),
]
ensemble = adaptive_metropolis(records, n_samples=300, burn_in=1500, thin=3, seed=0)

cache = PolicyCache()
in_place = counterfactual_query(template, ensemble, seed=5, cache=cache)
baseline = 0.0 if in_place is None else in_place.info_gain
print(f"best counterfactual query gain in the template: {baseline:.4f} bits")

result = environment_design(
    template, ensemble, n_iters=10, seed=5, n_candidates=300, cache=cache
)
print(f"\nafter 10 design iterations: best gain {result.best_gain:.4f} bits "
      f"(fallback={result.fallback})")
print("designed terrain patches (3x3 blocks):")
designed = decode_env(result.theta, template)
print(designed.domain.terrain)

print("\nsearch trace (gain per proposed environment):")
print(np.round([entry.info_gain for entry in result.trace], 4))
print("the designed environment's query is served to the user even though "
      "the environment itself is imagined; its answer still constrains w.")
