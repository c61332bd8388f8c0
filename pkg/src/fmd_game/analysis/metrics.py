"""
Equilibrium characterization: strategy histograms, cost composition and how
betweenness centrality is spread over the players providing cover traffic.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..game.core import make_state
from ..graph.centrality import top_k_ids
from ..types import CommGraph, GameParams, NodeMetric, Profile

# Prefix lengths read off the contribution curve, as exact fractions of n
PERCENTILES: Tuple[Tuple[int, int], ...] = ((1, 10), (1, 2), (9, 10))
TOP_K = 10


@dataclass
class BCContribution:
    """Cumulative betweenness over players ordered by decreasing rate."""
    order: List[int]
    cumulative: np.ndarray
    cumulative_raw: np.ndarray
    percentiles: Tuple[float, float, float]
    raw_percentiles: Tuple[float, float, float]

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write (prefix_fraction, cumulative_bc, cumulative_bc_raw) rows."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        n = len(self.order)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["prefix_fraction", "cumulative_bc", "cumulative_bc_raw"])
            for i in range(n):
                writer.writerow([repr((i + 1) / n), repr(float(self.cumulative[i])), repr(float(self.cumulative_raw[i]))])
        return path


def _prefix_length(n: int, fraction: Tuple[int, int]) -> int:
    num, den = fraction
    return -(-n * num // den)


def bc_contribution_cdf(profile: Profile, bc: NodeMetric) -> BCContribution:
    """
    Order players by decreasing rate (ties: decreasing BC, then id) and
    accumulate their normalized and raw betweenness.

    Percentiles are the cumulative sums over the first ceil(0.1 n),
    ceil(0.5 n) and ceil(0.9 n) players.
    """
    n = len(profile)
    if len(bc) != n:
        raise ValueError("Betweenness vector does not match the profile length")
    raw_values = bc.raw if bc.raw is not None else bc.values
    order = sorted(range(n), key=lambda u: (-profile[u], -bc.values[u], u))
    cumulative = np.cumsum(bc.values[order]) if n else np.zeros(0)
    cumulative_raw = np.cumsum(raw_values[order]) if n else np.zeros(0)

    def read(curve: np.ndarray) -> Tuple[float, float, float]:
        if n == 0:
            return (0.0, 0.0, 0.0)
        return tuple(float(curve[_prefix_length(n, p) - 1]) for p in PERCENTILES)

    return BCContribution(
        order=order,
        cumulative=cumulative,
        cumulative_raw=cumulative_raw,
        percentiles=read(cumulative),
        raw_percentiles=read(cumulative_raw),
    )


@dataclass
class EquilibriumReport:
    """Characterization of one terminal profile."""
    strategy_histogram: List[int]
    total_privacy: float
    total_bandwidth: float
    social_cost: float
    welfare: float
    privacy_share: float
    max_nodes: List[int]
    max_node_bc_sum: float
    max_node_fraction: float
    top10_in_max: int
    bc_total: float
    bc_cdf_percentiles: Tuple[float, float, float]
    bc_cdf_raw_percentiles: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    rate_labels: List[str] = field(default_factory=list)

    @property
    def bandwidth_share(self) -> float:
        return 1.0 - self.privacy_share if self.social_cost > 0 else 0.0

    @property
    def max_node_bc_share(self) -> float:
        return self.max_node_bc_sum / self.bc_total if self.bc_total > 0 else 0.0

    def __str__(self) -> str:
        return (
            f"{len(self.max_nodes)} max nodes ({100 * self.max_node_fraction:.1f}%) holding "
            f"{100 * self.max_node_bc_share:.1f}% of BC, {self.top10_in_max} of the top {TOP_K}; "
            f"privacy share {100 * self.privacy_share:.1f}% of social cost {self.social_cost:.2f}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "strategy_histogram": list(self.strategy_histogram),
            "rate_labels": list(self.rate_labels),
            "total_privacy": self.total_privacy,
            "total_bandwidth": self.total_bandwidth,
            "social_cost": self.social_cost,
            "welfare": self.welfare,
            "privacy_share": self.privacy_share,
            "max_nodes": list(self.max_nodes),
            "max_node_bc_sum": self.max_node_bc_sum,
            "max_node_fraction": self.max_node_fraction,
            "top10_in_max": self.top10_in_max,
            "bc_total": self.bc_total,
            "bc_cdf_percentiles": list(self.bc_cdf_percentiles),
            "bc_cdf_raw_percentiles": list(self.bc_cdf_raw_percentiles),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EquilibriumReport":
        return cls(
            strategy_histogram=[int(c) for c in data["strategy_histogram"]],
            total_privacy=float(data["total_privacy"]),
            total_bandwidth=float(data["total_bandwidth"]),
            social_cost=float(data["social_cost"]),
            welfare=float(data["welfare"]),
            privacy_share=float(data["privacy_share"]),
            max_nodes=[int(u) for u in data["max_nodes"]],
            max_node_bc_sum=float(data["max_node_bc_sum"]),
            max_node_fraction=float(data["max_node_fraction"]),
            top10_in_max=int(data["top10_in_max"]),
            bc_total=float(data["bc_total"]),
            bc_cdf_percentiles=tuple(data["bc_cdf_percentiles"]),
            bc_cdf_raw_percentiles=tuple(data.get("bc_cdf_raw_percentiles", (0.0, 0.0, 0.0))),
            rate_labels=list(data.get("rate_labels", [])),
        )


def equilibrium_metrics(
    g: CommGraph,
    params: GameParams,
    profile: Profile,
    bc: NodeMetric,
) -> EquilibriumReport:
    """
    Build the EquilibriumReport of a profile.

    Args:
        g: Message graph
        params: Game parameters (the welfare includes their altruism terms)
        profile: Terminal profile to characterize
        bc: Betweenness centrality computed on the same graph

    Returns:
        EquilibriumReport; max nodes are the players at the top ladder rate
    """
    if len(bc) != g.node_count:
        raise ValueError("Betweenness vector does not match the graph")
    n = g.node_count
    breakdown = make_state(g, params, profile).breakdown()
    top = params.ladder.top
    max_nodes = [u for u in range(n) if profile[u] == top]
    top_ids = set(top_k_ids(bc, min(TOP_K, n)))
    contribution = bc_contribution_cdf(profile, bc)

    return EquilibriumReport(
        strategy_histogram=profile.histogram(params.ladder),
        total_privacy=breakdown.total_privacy,
        total_bandwidth=breakdown.total_bandwidth,
        social_cost=breakdown.social_cost,
        welfare=breakdown.welfare,
        privacy_share=breakdown.privacy_share,
        max_nodes=max_nodes,
        max_node_bc_sum=math.fsum(bc.values[max_nodes]) if max_nodes else 0.0,
        max_node_fraction=len(max_nodes) / n if n else 0.0,
        top10_in_max=len(top_ids.intersection(max_nodes)),
        bc_total=math.fsum(bc.values),
        bc_cdf_percentiles=contribution.percentiles,
        bc_cdf_raw_percentiles=contribution.raw_percentiles,
        rate_labels=[params.ladder.exponent_label(i) for i in range(params.ladder.size)],
    )
