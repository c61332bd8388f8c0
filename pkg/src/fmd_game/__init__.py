from .types import (
    CommGraph,
    NodeMetric,
    StrategyLadder,
    Profile,
    AltruismSpec,
    GameParams,
    CostBreakdown,
)
from .exceptions import FMDGameError
from .graph.graph_io import parse_temporal_edges, build_comm_graph, halve_graph, derive_privacy_loss
from .graph.centrality import betweenness_centrality, degree_vector
from .game.core import UtilityState, make_state
from .game.altruism import assign_altruism
from .dynamics.initialization import InitSpec, build_initial_profile
from .dynamics.best_response import RunRecord, brd_run, so_search, uniform_sweep
from .analysis.verification import verify_step_stable, verify_epsilon_ne, enumerate_oracle, poa_pos
from .analysis.metrics import EquilibriumReport, equilibrium_metrics
from .utils.config import ExperimentConfig, load_config
from .experiment import run_experiment, load_bundle, emit_plot_data

__all__ = [
    "CommGraph",
    "NodeMetric",
    "StrategyLadder",
    "Profile",
    "AltruismSpec",
    "GameParams",
    "CostBreakdown",
    "FMDGameError",
    "parse_temporal_edges",
    "build_comm_graph",
    "halve_graph",
    "derive_privacy_loss",
    "betweenness_centrality",
    "degree_vector",
    "UtilityState",
    "make_state",
    "assign_altruism",
    "InitSpec",
    "build_initial_profile",
    "RunRecord",
    "brd_run",
    "so_search",
    "uniform_sweep",
    "verify_step_stable",
    "verify_epsilon_ne",
    "enumerate_oracle",
    "poa_pos",
    "EquilibriumReport",
    "equilibrium_metrics",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "load_bundle",
    "emit_plot_data",
]
