"""Risk-averse security games over loss distributions.

Models defense against stealthy multi-stage intrusions as a zero-sum matrix
game whose payoffs are entire loss distributions, decides the risk-averse
preference between such distributions, and computes approximate lexicographic
equilibria by fictitious play on stacked real matrices.
"""

from .errors import ComparisonError, EncodingRangeError, ParseError
from .games import (
    DEFAULT_PRIOR_WEIGHT,
    EquilibriumReport,
    GameMatrix,
    MatrixStack,
    MultiGame,
    StrategyProfile,
    build_stack,
    encode_scalar,
    fictitious_play,
    mix_distribution,
    mixture_value,
    saddle_check,
    scalarize,
    smooth_deterministic,
    solve,
    stack_value,
)
from .graphs import (
    AttackGraph,
    AttackPath,
    DistanceRiskMap,
    GraphNode,
    PathEnumeration,
    distance_to_risk,
    enumerate_paths,
    parse_graph,
)
from .losses import (
    DEFAULT_DEPTH,
    TIE_TOLERANCE,
    CategoricalLoss,
    DerivativeSequence,
    DeterministicLoss,
    EmpiricalSample,
    KdeLoss,
    Loss,
    MixtureLoss,
    Ordering,
    RiskScale,
    cdf,
    compare_categorical,
    compare_det_vs_random,
    compare_lex,
    compare_losses,
    density,
    derivative_sequence,
    hermite,
    kde_density,
    kde_derivative,
    moment,
    select_best,
    silverman_bandwidth,
    support_upper,
    upper_tail_mass,
    zero_day_mass,
)
from .survey import (
    ExpertSurvey,
    SurveyRating,
    build_game,
    default_cutoff,
    parse_survey,
    serialize_survey,
)

__version__ = "0.1.0"

__all__ = [
    "AttackGraph",
    "AttackPath",
    "CategoricalLoss",
    "ComparisonError",
    "DEFAULT_DEPTH",
    "DEFAULT_PRIOR_WEIGHT",
    "DerivativeSequence",
    "DeterministicLoss",
    "DistanceRiskMap",
    "EmpiricalSample",
    "EncodingRangeError",
    "EquilibriumReport",
    "ExpertSurvey",
    "GameMatrix",
    "GraphNode",
    "KdeLoss",
    "Loss",
    "MatrixStack",
    "MixtureLoss",
    "MultiGame",
    "Ordering",
    "ParseError",
    "PathEnumeration",
    "RiskScale",
    "StrategyProfile",
    "SurveyRating",
    "TIE_TOLERANCE",
    "build_game",
    "build_stack",
    "cdf",
    "default_cutoff",
    "compare_categorical",
    "compare_det_vs_random",
    "compare_lex",
    "compare_losses",
    "density",
    "derivative_sequence",
    "distance_to_risk",
    "encode_scalar",
    "enumerate_paths",
    "fictitious_play",
    "hermite",
    "kde_density",
    "kde_derivative",
    "mix_distribution",
    "mixture_value",
    "moment",
    "parse_graph",
    "parse_survey",
    "saddle_check",
    "scalarize",
    "select_best",
    "serialize_survey",
    "silverman_bandwidth",
    "smooth_deterministic",
    "solve",
    "stack_value",
    "support_upper",
    "upper_tail_mass",
    "zero_day_mass",
]
