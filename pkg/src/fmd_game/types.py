from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Any, Literal, Tuple, Sequence

import numpy as np


AltruismModel = Literal["selfish", "local", "global"]
MetricKind = Literal["betweenness_normalized", "degree_simple"]

# Default action set: 0, 2^-10, 2^-9, ..., 2^-1
DEFAULT_RATES: Tuple[float, ...] = (0.0,) + tuple(2.0 ** (i - 11) for i in range(1, 11))


@dataclass
class RawEventLog:
    events: List[Tuple[str, str, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def labels(self) -> List[str]:
        """Distinct labels in order of first appearance."""
        seen: Dict[str, None] = {}
        for src, dst, _ in self.events:
            seen.setdefault(src, None)
            seen.setdefault(dst, None)
        return list(seen)


@dataclass(frozen=True, eq=False)
class CommGraph:
    """
    Directed weighted message graph.

    Node ids are compact (0..n-1). `edges` holds collapsed multi-edges as
    (src, dst, msg_count); `contacts` is the undirected neighbour relation.
    """
    node_count: int
    labels: Tuple[str, ...]
    edges: Tuple[Tuple[int, int, int], ...]
    in_msgs: Tuple[int, ...]
    out_msgs: Tuple[int, ...]
    contacts: Tuple[Tuple[int, ...], ...]
    total_messages: int
    dropped_self_loops: int = 0
    event_count: int = 0

    @cached_property
    def in_array(self) -> np.ndarray:
        return np.asarray(self.in_msgs, dtype=np.float64)

    @cached_property
    def max_in(self) -> int:
        return max(self.in_msgs, default=0)

    def degree(self, u: int) -> int:
        return len(self.contacts[u])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CommGraph):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.edges == other.edges
            and self.in_msgs == other.in_msgs
            and self.out_msgs == other.out_msgs
            and self.contacts == other.contacts
            and self.total_messages == other.total_messages
            and self.dropped_self_loops == other.dropped_self_loops
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class NodeMetric:
    """Per-node importance values (betweenness or simple degree)."""
    values: np.ndarray
    kind: MetricKind
    normalized: bool = False
    raw: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class StrategyLadder:
    """Ordered false-positive-rate action set."""
    rates: Tuple[float, ...] = DEFAULT_RATES

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "rates", rates)
        if not rates:
            raise ValueError("Strategy ladder must hold at least one rate")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"Ladder rates must be strictly increasing: {rates}")
        if rates[0] < 0 or rates[-1] > 0.5:
            raise ValueError("Ladder rates must lie in [0, 1/2]")

    @classmethod
    def default(cls) -> "StrategyLadder":
        return cls(DEFAULT_RATES)

    @property
    def size(self) -> int:
        return len(self.rates)

    @property
    def top(self) -> int:
        return len(self.rates) - 1

    @cached_property
    def log_complements(self) -> np.ndarray:
        """log(1 - rate) per ladder index."""
        return np.log1p(-np.asarray(self.rates, dtype=np.float64))

    def is_valid(self, idx: int) -> bool:
        return 0 <= idx < len(self.rates)

    def index_of(self, rate: float) -> int:
        for i, r in enumerate(self.rates):
            if r == rate:
                return i
        raise ValueError(f"Rate {rate} is not on the ladder {self.rates}")

    def exponent_label(self, idx: int) -> str:
        """'zero' for rate 0, the base-2 exponent (e.g. '-10') for powers of two."""
        rate = self.rates[idx]
        if rate == 0.0:
            return "zero"
        mantissa, exponent = np.frexp(rate)
        if mantissa == 0.5:
            return str(int(exponent) - 1)
        return repr(rate)

    def index_from_label(self, label: str) -> int:
        label = label.strip()
        if label == "zero":
            return self.index_of(0.0)
        try:
            return self.index_of(2.0 ** int(label))
        except ValueError:
            return self.index_of(float(label))


@dataclass(frozen=True)
class Profile:
    """One ladder index per node."""
    idx: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "idx", tuple(int(i) for i in self.idx))

    def __len__(self) -> int:
        return len(self.idx)

    def __getitem__(self, u: int) -> int:
        return self.idx[u]

    @classmethod
    def uniform(cls, n: int, level_idx: int) -> "Profile":
        return cls((level_idx,) * n)

    def validate(self, node_count: int, ladder: StrategyLadder) -> None:
        if len(self.idx) != node_count:
            raise ValueError(
                f"Profile length {len(self.idx)} does not match node count {node_count}"
            )
        bad = [i for i in self.idx if not ladder.is_valid(i)]
        if bad:
            raise ValueError(f"Profile holds invalid ladder indices: {sorted(set(bad))}")

    def rates(self, ladder: StrategyLadder) -> np.ndarray:
        return np.asarray(ladder.rates, dtype=np.float64)[list(self.idx)] if self.idx else np.zeros(0)

    def with_move(self, u: int, new_idx: int) -> "Profile":
        idx = list(self.idx)
        idx[u] = new_idx
        return Profile(tuple(idx))

    def histogram(self, ladder: StrategyLadder) -> List[int]:
        counts = [0] * ladder.size
        for i in self.idx:
            counts[i] += 1
        return counts


@dataclass(frozen=True, eq=False)
class AltruismSpec:
    """
    Altruism model plus the per-node constants a_u.

    `rule` is a human-readable record of how the constants were assigned
    (e.g. "all(0.1)", "random_k(5, 1.0, seed=3)").
    """
    model: AltruismModel
    constants: np.ndarray
    rule: str = "all(0.0)"

    def __post_init__(self):
        if self.model not in ("selfish", "local", "global"):
            raise ValueError(f"Unknown altruism model: {self.model}")
        constants = np.asarray(self.constants, dtype=np.float64)
        object.__setattr__(self, "constants", constants)
        if np.any(constants < 0):
            raise ValueError("Altruistic constants must be non-negative")
        if self.model == "selfish" and np.any(constants != 0):
            raise ValueError("The selfish model requires every a_u = 0")

    @classmethod
    def selfish(cls, n: int) -> "AltruismSpec":
        return cls("selfish", np.zeros(n), "all(0.0)")

    @classmethod
    def uniform(cls, model: AltruismModel, n: int, a: float) -> "AltruismSpec":
        if model == "selfish":
            return cls.selfish(n)
        return cls(model, np.full(n, float(a)), f"all({a})")

    @property
    def is_selfish(self) -> bool:
        return self.model == "selfish" or not np.any(self.constants)

    @property
    def level(self) -> float:
        """Largest constant; the 'a' of a uniform assignment."""
        return float(self.constants.max()) if len(self.constants) else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.model, "a": self.level, "rule": self.rule}


@dataclass(frozen=True)
class GameParams:
    """Symbols of the FMD utility: breach cost L, per-message cost f, ladder, altruism."""
    L: float
    f: float
    altruism: AltruismSpec
    ladder: StrategyLadder = field(default_factory=StrategyLadder.default)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"Privacy-breach cost L must be positive, got {self.L}")
        if not self.f > 0:
            raise ValueError(f"Bandwidth cost f must be positive, got {self.f}")

    def with_altruism(self, altruism: AltruismSpec) -> "GameParams":
        return GameParams(L=self.L, f=self.f, altruism=altruism, ladder=self.ladder)


@dataclass
class CostBreakdown:
    total_privacy: float
    total_bandwidth: float
    social_cost: float
    welfare: float

    @property
    def privacy_share(self) -> float:
        return self.total_privacy / self.social_cost if self.social_cost > 0 else 0.0

    def __str__(self) -> str:
        return (
            f"social cost {self.social_cost:.2f} "
            f"(privacy {self.total_privacy:.2f}, bandwidth {self.total_bandwidth:.2f}), "
            f"welfare {self.welfare:.2f}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_privacy": self.total_privacy,
            "total_bandwidth": self.total_bandwidth,
            "social_cost": self.social_cost,
            "welfare": self.welfare,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CostBreakdown":
        return cls(
            total_privacy=float(data["total_privacy"]),
            total_bandwidth=float(data["total_bandwidth"]),
            social_cost=float(data["social_cost"]),
            welfare=float(data["welfare"]),
        )


def ladder_from_rates(rates: Optional[Sequence[float]]) -> StrategyLadder:
    return StrategyLadder.default() if rates is None else StrategyLadder(tuple(rates))
