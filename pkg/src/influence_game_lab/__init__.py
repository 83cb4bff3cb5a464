"""Budgeted influence maximisation games over De Groot social networks."""
from .dynamics import (
    CampaignWeights,
    Network,
    adjusted_stage_utility,
    de_groot_weights,
    opinion_update,
    stage_gradient,
    stage_utility,
)
from .offline_single import OfflineSolution, brute_force_oracle, solve_offline_single
from .online_single import (
    DualState,
    OnlineRunTrace,
    budget_gate,
    dual_subgradient,
    estimate_regret,
    mirror_descent_update,
    online_stage_allocation,
    run_online_single,
    theorem1_bound,
)
from .scenario import Scenario, ScenarioError, load_scenario, sample_path

__version__ = "0.1.0"

__all__ = [
    "CampaignWeights",
    "DualState",
    "Network",
    "OfflineSolution",
    "OnlineRunTrace",
    "Scenario",
    "ScenarioError",
    "adjusted_stage_utility",
    "brute_force_oracle",
    "budget_gate",
    "de_groot_weights",
    "dual_subgradient",
    "estimate_regret",
    "load_scenario",
    "mirror_descent_update",
    "online_stage_allocation",
    "opinion_update",
    "run_online_single",
    "sample_path",
    "solve_offline_single",
    "stage_gradient",
    "stage_utility",
    "theorem1_bound",
]
