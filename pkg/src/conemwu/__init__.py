"""Saddle points of bilinear games over trace-one slices of symmetric cones.

Strategy sets are spectraplex-like slices of Euclidean Jordan algebras
(orthant, spin, symmetric-matrix, and products thereof).  Both players run
multiplicative weights in the algebra, optionally with an optimistic
prediction step, and their average iterates approximate a saddle point.
"""

from .cones import (
    ConeDescriptor,
    EjaElement,
    NumericPolicy,
    SpectralDecomposition,
    diagonal_map,
    identity,
    in_cone,
    inner,
    jordan_product,
    lowner_apply,
    norm,
    random_element,
    spectral_decompose,
    trace,
    trace_p_norm,
    zero,
)
from .simplex import (
    SimplexPoint,
    SupportMax,
    bregman,
    entropy,
    exp_normalize,
    log_rank,
    random_interior_point,
    support_max,
    uniform_point,
)
from .learners import (
    LearnerConfig,
    LearnerState,
    RegretLedger,
    learner_init,
    learner_step,
    regret,
    regret_series,
)
from .games import (
    BilinearZeroSumGame,
    DualityGap,
    SelfPlayTrace,
    duality_gap,
    game_schedule,
    matching_pennies_game,
    n_player_self_play,
    saddle_point_horizon,
    saddle_point_schedule,
    self_play,
    sum_regret_schedule,
)
from .applications import (
    FermatWeberEvaluator,
    FermatWeberInstance,
    MetricLearningInstance,
    OnlineTrace,
    StreamParams,
    build_fermat_weber_game,
    build_metric_learning_game,
    generate_stream,
    inverse_sqrt_psd,
    load_labeled_csv,
    online_self_play,
    sample_pairs,
    sample_sum_of_norms_instance,
    standardize_features,
)
from .gamefile import descriptor_from_json, descriptor_to_json, load_game, pairing_weights

__version__ = "0.1.0"

__all__ = [
    "ConeDescriptor",
    "EjaElement",
    "NumericPolicy",
    "SpectralDecomposition",
    "diagonal_map",
    "identity",
    "in_cone",
    "inner",
    "jordan_product",
    "lowner_apply",
    "norm",
    "random_element",
    "spectral_decompose",
    "trace",
    "trace_p_norm",
    "zero",
    "SimplexPoint",
    "SupportMax",
    "bregman",
    "entropy",
    "exp_normalize",
    "log_rank",
    "random_interior_point",
    "support_max",
    "uniform_point",
    "LearnerConfig",
    "LearnerState",
    "RegretLedger",
    "learner_init",
    "learner_step",
    "regret",
    "regret_series",
    "BilinearZeroSumGame",
    "DualityGap",
    "SelfPlayTrace",
    "duality_gap",
    "game_schedule",
    "matching_pennies_game",
    "n_player_self_play",
    "saddle_point_horizon",
    "saddle_point_schedule",
    "self_play",
    "sum_regret_schedule",
    "FermatWeberEvaluator",
    "FermatWeberInstance",
    "MetricLearningInstance",
    "OnlineTrace",
    "StreamParams",
    "build_fermat_weber_game",
    "build_metric_learning_game",
    "generate_stream",
    "inverse_sqrt_psd",
    "load_labeled_csv",
    "online_self_play",
    "sample_pairs",
    "sample_sum_of_norms_instance",
    "standardize_features",
    "descriptor_from_json",
    "descriptor_to_json",
    "load_game",
    "pairing_weights",
    "__version__",
]
