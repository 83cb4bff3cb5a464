from .offline import (
    EquilibriumReport,
    NonConvergenceError,
    StrategyProfile,
    algorithm2_epsilon_nash,
    best_response,
    best_response_m2,
    br_dynamics_m2,
    grid_deviation,
    measure_epsilon,
    stage_utilities,
    total_utilities,
)
from .online import (
    FULL,
    PARTIAL,
    corollary5_feasibility,
    online_game_m2,
    online_game_multi,
    online_stage_full_info,
    online_stage_partial_info,
    run_online_game,
)

__all__ = [
    "EquilibriumReport",
    "FULL",
    "NonConvergenceError",
    "PARTIAL",
    "StrategyProfile",
    "algorithm2_epsilon_nash",
    "best_response",
    "best_response_m2",
    "br_dynamics_m2",
    "corollary5_feasibility",
    "grid_deviation",
    "measure_epsilon",
    "online_game_m2",
    "online_game_multi",
    "online_stage_full_info",
    "online_stage_partial_info",
    "run_online_game",
    "stage_utilities",
    "total_utilities",
]
