"""Active preference learning over navigation MDPs.

Learn a user's linear reward over trajectory features from pairwise
preference queries.  Candidate queries come from counterfactual plans for
diverse weight hypotheses (CR); when the real environment has no
informative pair left, Bayesian optimization designs one that does (ED).
The combination — CRED — is benchmarked against random-rollout and
mean-belief baselines by a deterministic experiment harness, with a small
HTTP service for live elicitation.
"""

from .belief import (
    BeliefEnsemble,
    PreferenceRecord,
    adaptive_metropolis,
    belief_entropy_kde,
    feature_difference,
    log_likelihood_matrix,
    posterior_logdensity,
    preference_likelihood,
    scott_bandwidths,
)
from .config import CONDITIONS, ORACLE_MODES, ExperimentConfig, SuiteConfig, load_config
from .design import (
    DesignResult,
    GPModel,
    TraceEntry,
    bayes_opt,
    environment_design,
    gp_fit_hyperparams,
    gp_posterior,
    propose_theta,
)
from .envs import (
    TERRAIN_NAMES,
    Edge,
    EnvironmentSpec,
    EnvParamVector,
    StreetGraph,
    TerrainGrid,
    decode_env,
    default_bounds,
    design_space,
    environment_from_json,
    environment_to_json,
    graph_environment,
    grid_environment,
    load_environment,
    sample_training_graph,
    save_environment,
    step_features,
    trajectory_features,
)
from .errors import (
    BoundsViolationError,
    EnvironmentValidationError,
    InvalidActionError,
    InvalidTrajectoryError,
    ShapeError,
    UndefinedBaselineError,
)
from .harness import (
    CSV_COLUMNS,
    IterationLog,
    RunResult,
    logs_to_rows,
    run_experiment,
    run_suite,
    summarize_rows,
    write_csv,
)
from .metrics import entropy, jaccard_similarity, policy_accuracy, reward_difference
from .oracle import (
    SimulatedUser,
    ground_truth_weights,
    kmeans,
    load_users,
    save_users,
    simulated_preference,
)
from .osm import convert_osm, convert_osm_to_file, parse_osm
from .planner import (
    GOAL_BONUS,
    Policy,
    TrajectoryRecord,
    discounted_return,
    random_walk,
    rollout,
    trajectory_return,
    value_iteration,
)
from .queries import (
    PolicyCache,
    PreferenceQuery,
    counterfactual_query,
    info_gain,
    info_gain_from_features,
    mean_belief_query,
    random_rollout_query,
    select_diverse_weights,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefEnsemble",
    "BoundsViolationError",
    "CONDITIONS",
    "CSV_COLUMNS",
    "DesignResult",
    "Edge",
    "EnvParamVector",
    "EnvironmentSpec",
    "EnvironmentValidationError",
    "ExperimentConfig",
    "GOAL_BONUS",
    "GPModel",
    "InvalidActionError",
    "InvalidTrajectoryError",
    "IterationLog",
    "ORACLE_MODES",
    "Policy",
    "PolicyCache",
    "PreferenceQuery",
    "PreferenceRecord",
    "RunResult",
    "ShapeError",
    "SimulatedUser",
    "StreetGraph",
    "SuiteConfig",
    "TERRAIN_NAMES",
    "TerrainGrid",
    "TraceEntry",
    "TrajectoryRecord",
    "UndefinedBaselineError",
    "adaptive_metropolis",
    "bayes_opt",
    "belief_entropy_kde",
    "convert_osm",
    "convert_osm_to_file",
    "counterfactual_query",
    "decode_env",
    "default_bounds",
    "design_space",
    "discounted_return",
    "entropy",
    "environment_design",
    "environment_from_json",
    "environment_to_json",
    "feature_difference",
    "gp_fit_hyperparams",
    "gp_posterior",
    "graph_environment",
    "grid_environment",
    "ground_truth_weights",
    "info_gain",
    "info_gain_from_features",
    "jaccard_similarity",
    "kmeans",
    "load_config",
    "load_environment",
    "load_users",
    "log_likelihood_matrix",
    "logs_to_rows",
    "mean_belief_query",
    "parse_osm",
    "policy_accuracy",
    "posterior_logdensity",
    "preference_likelihood",
    "propose_theta",
    "random_rollout_query",
    "random_walk",
    "reward_difference",
    "rollout",
    "run_experiment",
    "run_suite",
    "sample_training_graph",
    "save_environment",
    "save_users",
    "scott_bandwidths",
    "select_diverse_weights",
    "simulated_preference",
    "step_features",
    "summarize_rows",
    "trajectory_features",
    "trajectory_return",
    "value_iteration",
    "write_csv",
]
