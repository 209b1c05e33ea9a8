"""Budget-limited Shapley value estimation and top-k player identification.

Players are numbered 1..n throughout the public API.  All randomness flows
through :class:`RandomSource` (a portable xoshiro256++ stream), so equal
seeds reproduce runs bit-for-bit, with or without the compiled kernels.
"""

from .backend import get_backend, kernel_available, set_backend
from .coalition import Coalition
from .errors import (
    BudgetExhausted,
    ConfigError,
    DomainError,
    FormatError,
    InvalidCarrier,
    InvalidK,
    InvalidSize,
    LengthMismatch,
    NotMultiple,
    SamePlayer,
    ShapTopkError,
    SizeError,
)
from .estimators import (
    Checkpoint,
    CiBounds,
    EstimatorState,
    FixedBudget,
    PacMode,
    PairStats,
    RunResult,
    ci_bounds,
    pair_probability,
    run_appro_shapley,
    run_cmcs,
    run_cmcs_at_k,
    run_greedy_cmcs,
    run_identical,
    run_independent,
    run_same_length,
    run_sampling_shap_at_k,
    select_players,
    stopping_condition,
    top_k_of,
)
from .games import (
    BudgetedOracle,
    Game,
    eligible_sets,
    exact_shapley,
    exact_shapley_extended,
    load_tabular_game,
    make_airport_game,
    make_carrier_game,
    make_random_sou_game,
    make_unanimity_game,
    save_tabular_game,
)
from .metrics import (
    BoundResult,
    GameMoments,
    binary_precision,
    covariance_formula,
    exact_moments,
    identification_lower_bound,
    inclusion_exclusion_error,
    mse,
    predicted_mse_budget,
    predicted_mse_rounds,
    ratio_precision,
)
from .rng import (
    RandomSource,
    derive_seed,
    draw_cmcs_coalition,
    draw_marginal_coalition,
    draw_permutation,
    normal_cdf,
    normal_quantile,
)

__version__ = "0.1.0"
