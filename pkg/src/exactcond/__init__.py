"""Exact sampling from conditional laws by completing the last coordinates.

Draw the first half of an independent vector, solve the conditioning
equations for the remaining pivot block, and accept with the ratio of
the completed block's density to its maximum.  Accepted draws follow
the conditional law exactly, and the accounting counts every uniform
the generator hands out, so rejection schemes can be compared by cost
per delivered sample.
"""

from .engine import (
    DEFAULT_MAX_ATTEMPTS,
    Completion,
    ConditioningProblem,
    SampleRecord,
    SecondConstraint,
    SparseVector,
    complete_from_sums,
    dsh_continuous_sample,
    dsh_discrete_sample,
    dsh_uniform_weight_sample,
    free_partial_sums,
    hard_rejection_sample,
    soft_rejection_sample,
    solve_completion_linear,
    solve_completion_two_constraint,
)
from .errors import (
    ExactcondError,
    InfeasibleTarget,
    InvalidFamily,
    InvalidProfile,
    InvalidRejection,
    NonTerminating,
    SingularSystem,
    SupportTooLarge,
    UnboundedDensity,
)
from .geometry import (
    IntervalUnion,
    borel_conditional_sample,
    feller_polytope_sample,
    rado_check,
    sample_beta_sum,
    sample_exponential_sum,
    sample_hypersimplex,
    sample_permutahedron,
    sample_sphere_surface,
    uniform_spacings,
)
from .marginals import (
    AbsWeightedGaussian,
    Bernoulli,
    Beta,
    Binomial,
    ContinuousMarginal,
    CountingRng,
    DiscreteMarginal,
    Exponential,
    Geometric,
    NegativeBinomial,
    Normal,
    Poisson,
    SignedUnit,
    UniformInt,
    UniformReal,
    derive_seed,
)
from .structures import (
    Assembly,
    DistinctPartition,
    EwensProfile,
    Family,
    Multiset,
    MultiplicityVector,
    Partition,
    PlaneGrid,
    PlanePartitionGrid,
    Selection,
    SetPartition,
    build_problem,
    feller_permutation_cycles,
    grid_cells,
    materialize_set_partition,
    sample_structure,
    small_ball_sample,
    solve_tilt,
)
from .verify import (
    CostStats,
    ExactDistribution,
    benchmark,
    chi_squared_gof,
    counting_oracle,
    empirical,
    enumerate_conditional,
    ks_statistic,
    ks_two_sample,
    merge_cost_stats,
    speedup_ratio,
    tv_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AbsWeightedGaussian",
    "Assembly",
    "Bernoulli",
    "Beta",
    "Binomial",
    "Completion",
    "ConditioningProblem",
    "ContinuousMarginal",
    "CostStats",
    "CountingRng",
    "DEFAULT_MAX_ATTEMPTS",
    "DiscreteMarginal",
    "DistinctPartition",
    "EwensProfile",
    "ExactDistribution",
    "ExactcondError",
    "Exponential",
    "Family",
    "Geometric",
    "InfeasibleTarget",
    "IntervalUnion",
    "InvalidFamily",
    "InvalidProfile",
    "InvalidRejection",
    "Multiset",
    "MultiplicityVector",
    "NegativeBinomial",
    "NonTerminating",
    "Normal",
    "Partition",
    "PlaneGrid",
    "PlanePartitionGrid",
    "Poisson",
    "SampleRecord",
    "SecondConstraint",
    "Selection",
    "SetPartition",
    "SignedUnit",
    "SingularSystem",
    "SparseVector",
    "SupportTooLarge",
    "UnboundedDensity",
    "UniformInt",
    "UniformReal",
    "benchmark",
    "borel_conditional_sample",
    "build_problem",
    "chi_squared_gof",
    "complete_from_sums",
    "counting_oracle",
    "derive_seed",
    "dsh_continuous_sample",
    "dsh_discrete_sample",
    "dsh_uniform_weight_sample",
    "empirical",
    "enumerate_conditional",
    "feller_permutation_cycles",
    "feller_polytope_sample",
    "free_partial_sums",
    "grid_cells",
    "hard_rejection_sample",
    "ks_statistic",
    "ks_two_sample",
    "materialize_set_partition",
    "merge_cost_stats",
    "rado_check",
    "sample_beta_sum",
    "sample_exponential_sum",
    "sample_hypersimplex",
    "sample_permutahedron",
    "sample_sphere_surface",
    "sample_structure",
    "small_ball_sample",
    "soft_rejection_sample",
    "solve_completion_linear",
    "solve_completion_two_constraint",
    "solve_tilt",
    "speedup_ratio",
    "tv_distance",
    "uniform_spacings",
]
