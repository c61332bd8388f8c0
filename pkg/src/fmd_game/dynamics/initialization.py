"""
Initial strategy profiles for best-response dynamics and SO search.

Three families: thresholding on a node property, sorting into rate buckets by
a node property, and uniform random draws. Uniform and explicit profiles are
available for sweeps and replays.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from ..types import CommGraph, NodeMetric, Profile, StrategyLadder

logger = logging.getLogger(__name__)

InitKind = Literal["threshold", "sorted", "random", "uniform", "explicit"]
NodeProperty = Literal["bc", "degree"]
Interpolation = Literal["linear", "exponential"]

# Thresholds that keep the above-threshold sets small but non-trivial
DEFAULT_CUTOFFS: Dict[str, float] = {"bc": 0.01, "degree": 4.0}


@dataclass(frozen=True)
class InitSpec:
    """Description of how an initial profile is built."""
    kind: InitKind
    property: NodeProperty = "bc"
    cutoff: Optional[float] = None
    level_idx: Optional[int] = None
    interp: Interpolation = "linear"
    seed: Optional[int] = None
    profile: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.cutoff is not None and self.cutoff < 0:
            raise ValueError(f"Threshold cutoff must be >= 0, got {self.cutoff}")
        if self.kind in ("threshold", "uniform") and self.level_idx is None:
            raise ValueError(f"Init kind {self.kind!r} needs a level_idx")
        if self.kind == "explicit" and self.profile is None:
            raise ValueError("Init kind 'explicit' needs a profile")

    def effective_cutoff(self) -> float:
        return DEFAULT_CUTOFFS[self.property] if self.cutoff is None else self.cutoff

    def label(self, ladder: StrategyLadder) -> str:
        """Run label in the published naming scheme, e.g. "['bc', 'Threshold', 'all from -10']"."""
        if self.kind == "threshold":
            threshold = "Threshold" if self.effective_cutoff() > 0 else "No Threshold"
            level = ladder.exponent_label(self.level_idx)
            return str([self.property, threshold, f"all from {level}"])
        if self.kind == "sorted":
            return f"{self.property}_{'lin' if self.interp == 'linear' else 'exp'}"
        if self.kind == "random":
            return f"random_{self.seed}"
        if self.kind == "uniform":
            return f"uniform_{ladder.exponent_label(self.level_idx)}"
        return "explicit"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind in ("threshold", "sorted"):
            data["property"] = self.property
        if self.kind == "threshold":
            data["cutoff"] = self.effective_cutoff()
        if self.level_idx is not None:
            data["level_idx"] = self.level_idx
        if self.kind == "sorted":
            data["interp"] = self.interp
        if self.seed is not None:
            data["seed"] = self.seed
        if self.profile is not None:
            data["profile"] = list(self.profile)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InitSpec":
        profile = data.get("profile")
        return cls(
            kind=data["kind"],
            property=data.get("property", "bc"),
            cutoff=data.get("cutoff"),
            level_idx=data.get("level_idx"),
            interp=data.get("interp", "linear"),
            seed=data.get("seed"),
            profile=tuple(profile) if profile is not None else None,
        )


def init_threshold(g: CommGraph, metric: NodeMetric, cutoff: float, level_idx: int) -> Profile:
    """Nodes whose metric is strictly above `cutoff` start at `level_idx`, the rest at index 0."""
    if len(metric) != g.node_count:
        raise ValueError("Metric length does not match the graph")
    return Profile(tuple(level_idx if v > cutoff else 0 for v in metric.values))


def _bucket_sizes(n: int, buckets: int, interp: Interpolation) -> List[int]:
    if interp == "linear":
        base = n // buckets
        sizes = [base] * buckets
        sizes[-1] += n - base * buckets
        return sizes
    sizes = []
    remaining = n
    for i in range(buckets - 1):
        take = min(2 ** i, remaining)
        sizes.append(take)
        remaining -= take
    sizes.append(remaining)
    return sizes


def init_sorted(
    g: CommGraph,
    metric: NodeMetric,
    interp: Interpolation,
    ladder: Optional[StrategyLadder] = None,
) -> Profile:
    """
    Bucket nodes by descending metric into the non-zero ladder rates.

    The first bucket gets the highest rate. Linear buckets have equal size
    with the remainder in the last one; exponential buckets have sizes
    1, 2, 4, ... with the last bucket taking the rest. Buckets after the
    nodes run out stay empty.
    """
    ladder = ladder or StrategyLadder.default()
    n = g.node_count
    levels = [i for i in range(ladder.top, -1, -1) if ladder.rates[i] > 0]
    order = sorted(range(n), key=lambda u: (-metric.values[u], u))
    idx = [0] * n
    start = 0
    for level, size in zip(levels, _bucket_sizes(n, len(levels), interp)):
        for u in order[start:start + size]:
            idx[u] = level
        start += size
    return Profile(tuple(idx))


def init_random(g: CommGraph, ladder: Optional[StrategyLadder], seed: int) -> Profile:
    """Independent uniform ladder index per node from a seeded generator."""
    ladder = ladder or StrategyLadder.default()
    rng = np.random.default_rng(seed)
    return Profile(tuple(int(i) for i in rng.integers(0, ladder.size, size=g.node_count)))


def build_initial_profile(
    spec: InitSpec,
    g: CommGraph,
    ladder: StrategyLadder,
    bc: Optional[NodeMetric] = None,
    degree: Optional[NodeMetric] = None,
) -> Profile:
    """Resolve an InitSpec against a graph and its node metrics."""
    metric = bc if spec.property == "bc" else degree
    if spec.kind in ("threshold", "sorted") and metric is None:
        raise ValueError(f"Init {spec.label(ladder)} needs the {spec.property} metric")

    if spec.kind == "threshold":
        profile = init_threshold(g, metric, spec.effective_cutoff(), spec.level_idx)
    elif spec.kind == "sorted":
        profile = init_sorted(g, metric, spec.interp, ladder)
    elif spec.kind == "random":
        profile = init_random(g, ladder, spec.seed if spec.seed is not None else 0)
    elif spec.kind == "uniform":
        profile = Profile.uniform(g.node_count, spec.level_idx)
    else:
        profile = Profile(spec.profile)
    profile.validate(g.node_count, ladder)
    logger.debug("Initial profile %s: histogram %s", spec.label(ladder), profile.histogram(ladder))
    return profile
