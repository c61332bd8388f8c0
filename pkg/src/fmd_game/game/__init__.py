from .core import (
    UtilityState,
    make_state,
    alpha_of,
    privacy_cost,
    bandwidth_cost,
    player_utility,
    cost_breakdown,
    eval_unilateral_move,
    apply_move,
)
from .altruism import assign_altruism, altruism_incidence

__all__ = [
    "UtilityState",
    "make_state",
    "alpha_of",
    "privacy_cost",
    "bandwidth_cost",
    "player_utility",
    "cost_breakdown",
    "eval_unilateral_move",
    "apply_move",
    "assign_altruism",
    "altruism_incidence",
]
