"""Online square-loss regression lab.

Forecasters built from admissible relaxations (finite experts,
Vovk-Azoury-Warmuth), the game protocol with exact regret accounting,
adversarial lower-bound environments on shattered trees, and desk-scale
computation of sequential covers, fat-shattering dimension, offset
Rademacher complexity, and chaining/rate bounds.
"""

from .adversary import (
    BlockAdversary,
    Environment,
    ShatteringAdversary,
    StochasticEnvironment,
    lower_bound_value,
)
from .chaining import (
    adaptive_simpson,
    dudley_offset_bound,
    dudley_offset_bound_optimistic,
    finite_maximal_bound,
    scaled_entropy_integral,
    sqrt_entropy_integral,
)
from .covers import CoverResult, cover_fat_relation_check, sequential_cover_size
from .entropy import EntropyFunction
from .forecasters import (
    FiniteClassForecaster,
    FiniteClassRelaxation,
    Forecaster,
    NumericalError,
    RelaxationValue,
    VAWForecaster,
    VAWRelaxation,
    admissibility_check,
    clip,
    relaxation_predict,
    vaw_regret_bound,
)
from .function_class import FunctionClass, dump_class_file, load_class_file
from .protocol import (
    GameConfig,
    Round,
    Transcript,
    alpha_regret,
    cumulative_best_loss,
    optimistic_conversion,
    regret,
    run_game,
    transcript_to_csv,
)
from .rademacher import (
    OffsetRademacherEstimate,
    offset_rademacher,
    offset_rademacher_exact,
    offset_rademacher_sup,
)
from .rates import (
    BesovRate,
    RateSpec,
    besov_rate_exponent,
    minimax_lower_rate,
    minimax_upper_rate,
    optimistic_regret_bound,
    sparse_combination_entropy,
)
from .shattering import fat_shattering_dim, is_beta_shattered
from .trees import LabeledTree, ResourceLimitError, sign_vectors, tree_path_eval

__version__ = "0.1.0"
