"""permix: exact distinguishing-advantage metrics for random permutations
and desk-scale verification of swap-or-not shuffle mixing bounds."""

from .bounds import (
    BoundReport,
    SecurityParams,
    cca_bound_for_eps,
    collision_conditional_bound,
    security_params,
    shuffle_joint_floor,
    span_lower_bound,
    target_joint_bound,
    target_pair_bound,
)
from .ccagame import (
    CcaQuery,
    Direction,
    QueryInput,
    StrategyNode,
    StrategyTree,
    cca_advantage,
    cca_advantage_by_enumeration,
    check_cca_le_separation,
    check_inverse_composition,
    optimal_strategy,
    strategy_from_json,
    strategy_to_json,
    strategy_value,
    transcript_constraint,
    validate_strategy,
)
from .errors import (
    EstimationError,
    InconsistentTranscript,
    InvalidDistribution,
    InvalidStrategy,
    OutcomeMismatch,
    PermixError,
    ResourceLimit,
)
from .markov import (
    TransitionMatrix,
    compose_chains,
    composition_gap,
    matrix_from_csv,
    matrix_to_csv,
    random_doubly_stochastic,
    sep_composition_check,
    stationary_dist,
    time_reversal,
    uniform_pi,
    verify_stationary,
)
from .permdist import (
    PermDist,
    Permutation,
    compose_perm_dists,
    falling_factorial,
    image_dist,
    invert_perm_dist,
    ncpa_advantage,
    perm_dist_from_json,
    perm_dist_to_json,
    sep_security,
    uniform_perm_dist,
    uniform_tuple_dist,
)
from .probcore import (
    Dist,
    DistFamily,
    Probability,
    dist_from_json,
    dist_to_json,
    family_distance,
    frac_str,
    sep_distance,
    tv_distance,
)
from .swapnot import (
    CoinTable,
    CollisionLog,
    CoupledRun,
    McEstimate,
    ShuffleParams,
    TrackedJointDist,
    conditional_collision_estimate,
    conditional_collision_exact,
    coupled_batch,
    coupled_sample,
    evolve_free_joint,
    evolve_son_joint,
    free_law_fixed_keys,
    gf2_rank,
    sep_from_uniform,
    son_eval,
    son_inverse_eval,
    son_round,
    span_mc_estimate,
    span_probability,
    subspace_attack,
    target_first_exact_law,
    target_first_sample,
)

__version__ = "0.1.0"
