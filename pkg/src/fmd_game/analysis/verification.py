"""
Equilibrium verification, the exhaustive small-instance oracle and PoA/PoS.

A deviation counts as improving when its gain exceeds
epsilon + NOISE_FLOOR * max(1, |U|), U being the deviator's current utility
(or the welfare for social checks). NOISE_FLOOR is a few dozen ulps, so it
only absorbs rounding between evaluation paths. Step and full-ladder checks
share the rule, so every step violation is also a full-ladder violation,
and the oracle uses it at epsilon = 0.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import OracleTooLargeError, UndefinedRatioError
from ..game.core import Objective, UtilityState, make_state
from ..types import CommGraph, GameParams, Profile

logger = logging.getLogger(__name__)

NOISE_FLOOR = 64 * np.finfo(float).eps
MAX_ORACLE_PROFILES = 10 ** 6

CheckKind = Literal["step", "full"]


@dataclass
class Deviation:
    """An improving unilateral change of one player's ladder index."""
    node: int
    from_idx: int
    to_idx: int
    gain: float

    @property
    def direction(self) -> str:
        return "up" if self.to_idx > self.from_idx else "down"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node": self.node,
            "from_idx": self.from_idx,
            "to_idx": self.to_idx,
            "direction": self.direction,
            "gain": self.gain,
        }


@dataclass
class VerificationReport:
    """Outcome of a step-stability or epsilon-NE check."""
    kind: CheckKind
    objective: Objective
    epsilon: float
    violations: List[Deviation] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        name = "step-stable" if self.kind == "step" else f"{self.epsilon:g}-equilibrium"
        if self.holds:
            return f"Profile is {name} ({self.objective})"
        lines = "\n".join(
            f"  - node {d.node}: {d.from_idx} -> {d.to_idx} gains {d.gain:.6g}"
            for d in self.violations
        )
        return f"Profile is not {name} ({self.objective}), {len(self.violations)} violator(s):\n{lines}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "objective": self.objective,
            "epsilon": self.epsilon,
            "holds": self.holds,
            "violations": [d.to_dict() for d in self.violations],
        }


class EquilibriumVerifier:
    """
    Checks profiles of one game for stability.

    Attributes:
        graph: Message graph
        params: Game parameters
        objective: "own_utility" for Nash checks, "welfare" for SO checks
        relative_epsilon: Compare gains against epsilon * |U| instead of epsilon
    """

    def __init__(
        self,
        graph: CommGraph,
        params: GameParams,
        objective: Objective = "own_utility",
        relative_epsilon: bool = False,
    ):
        self.graph = graph
        self.params = params
        self.objective = objective
        self.relative_epsilon = relative_epsilon

    def _scale(self, state: UtilityState) -> np.ndarray:
        if self.objective == "welfare":
            return np.full(len(state.idx), abs(state.welfare()))
        return np.abs(state.own_utilities())

    def _thresholds(self, state: UtilityState, epsilon: float) -> np.ndarray:
        scale = self._scale(state)
        base = epsilon * scale if self.relative_epsilon else np.full(len(scale), epsilon)
        return (base + NOISE_FLOOR * np.maximum(1.0, scale))[:, None]

    def step_stable(self, profile: Profile, epsilon: float) -> VerificationReport:
        """
        Every single-step move (index +1 / -1) gaining more than epsilon.

        An empty report means the profile is a fixed point of the dynamics.
        """
        state = make_state(self.graph, self.params, profile)
        gains = state.candidate_gains(self.objective)
        thresholds = self._thresholds(state, epsilon)
        violations = []
        for u, col in zip(*np.nonzero(gains > thresholds)):
            old = int(state.idx[u])
            violations.append(Deviation(int(u), old, old + (1 if col == 0 else -1), float(gains[u, col])))
        return VerificationReport("step", self.objective, epsilon, violations)

    def epsilon_ne(self, profile: Profile, epsilon: float) -> VerificationReport:
        """
        Best full-ladder deviation of every player whose gain clears the threshold.

        For the welfare objective this is the epsilon-SO check: no
        single-coordinate change improves welfare by more than epsilon.
        """
        state = make_state(self.graph, self.params, profile)
        gains = state.ladder_gains(self.objective)
        thresholds = self._thresholds(state, epsilon)
        violations = []
        for u in np.nonzero((gains > thresholds).any(axis=1))[0]:
            target = int(np.argmax(gains[u]))
            violations.append(Deviation(int(u), int(state.idx[u]), target, float(gains[u, target])))
        return VerificationReport("full", self.objective, epsilon, violations)


def verify_step_stable(
    g: CommGraph,
    params: GameParams,
    profile: Profile,
    epsilon: float = 1e-5,
    objective: Objective = "own_utility",
    relative_epsilon: bool = False,
) -> VerificationReport:
    """Convenience wrapper around EquilibriumVerifier.step_stable."""
    return EquilibriumVerifier(g, params, objective, relative_epsilon).step_stable(profile, epsilon)


def verify_epsilon_ne(
    g: CommGraph,
    params: GameParams,
    profile: Profile,
    epsilon: float = 1e-5,
    objective: Objective = "own_utility",
    relative_epsilon: bool = False,
) -> VerificationReport:
    """Convenience wrapper around EquilibriumVerifier.epsilon_ne."""
    return EquilibriumVerifier(g, params, objective, relative_epsilon).epsilon_ne(profile, epsilon)


@dataclass
class OracleResult:
    """Every profile over a restricted ladder with its welfare, the exact NE set and the SO."""
    ladder_subset: Tuple[int, ...]
    profiles: List[Profile]
    welfare: np.ndarray
    ne_profiles: List[Profile]
    so_profile: Profile
    so_welfare: float

    def welfare_of(self, profile: Profile) -> float:
        return float(self.welfare[self.profiles.index(profile)])

    def is_ne(self, profile: Profile) -> bool:
        return profile in self.ne_profiles

    def gap_to(self, welfare: float) -> float:
        """How far `welfare` falls short of the enumerated optimum."""
        return self.so_welfare - welfare

    def __str__(self) -> str:
        return (
            f"{len(self.profiles)} profiles over ladder indices {list(self.ladder_subset)}: "
            f"{len(self.ne_profiles)} pure NE, SO {list(self.so_profile.idx)} "
            f"with welfare {self.so_welfare:.6g}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ladder_subset": list(self.ladder_subset),
            "ne_profiles": [list(p.idx) for p in self.ne_profiles],
            "so_profile": list(self.so_profile.idx),
            "so_welfare": self.so_welfare,
            "welfare_table": [
                {"profile": list(p.idx), "welfare": float(w)}
                for p, w in zip(self.profiles, self.welfare)
            ],
        }


def enumerate_oracle(
    g: CommGraph,
    params: GameParams,
    ladder_subset: Optional[Sequence[int]] = None,
    max_profiles: int = MAX_ORACLE_PROFILES,
) -> OracleResult:
    """
    Brute-force every pure profile over `ladder_subset`.

    Args:
        g: Message graph
        params: Game parameters
        ladder_subset: Ladder indices each player may pick; all indices by default
        max_profiles: Refuse instances with more profiles than this

    Returns:
        OracleResult; a profile is an NE when no player gains from switching
        to another index of the subset

    Raises:
        OracleTooLargeError: if |subset|^n exceeds max_profiles
    """
    subset = tuple(range(params.ladder.size)) if ladder_subset is None else tuple(ladder_subset)
    for i in subset:
        if not params.ladder.is_valid(i):
            raise ValueError(f"Ladder index {i} is outside 0..{params.ladder.top}")
    n, k = g.node_count, len(subset)
    total = k ** n
    if total > max_profiles:
        raise OracleTooLargeError(f"{k}^{n} = {total} profiles exceeds the limit of {max_profiles}")

    profiles = [Profile(p) for p in itertools.product(subset, repeat=n)]
    utilities = np.empty((total, n))
    welfare = np.empty(total)
    for row, profile in enumerate(profiles):
        state = make_state(g, params, profile)
        utilities[row] = state.own_utilities()
        welfare[row] = state.welfare()

    # itertools.product varies the last player fastest
    rows = np.arange(total)
    stride = [k ** (n - 1 - u) for u in range(n)]
    digits = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64).reshape(total, n)
    unstable = np.zeros(total, dtype=bool)
    for u in range(n):
        current = utilities[:, u]
        threshold = NOISE_FLOOR * np.maximum(1.0, np.abs(current))
        for j in range(k):
            deviated = rows + (j - digits[:, u]) * stride[u]
            unstable |= (utilities[deviated, u] - current) > threshold

    best = int(np.argmax(welfare))
    result = OracleResult(
        ladder_subset=subset,
        profiles=profiles,
        welfare=welfare,
        ne_profiles=[profiles[r] for r in np.nonzero(~unstable)[0]],
        so_profile=profiles[best],
        so_welfare=float(welfare[best]),
    )
    logger.debug("Oracle: %s", result)
    return result


def poa_pos(so_welfare: float, ne_welfares: Sequence[float]) -> Tuple[float, float]:
    """
    Price of anarchy and stability as cost ratios.

    With cost = -welfare, PoA = worst NE cost / SO cost and
    PoS = best NE cost / SO cost.

    Raises:
        ValueError: on an empty NE list or a positive welfare value
        UndefinedRatioError: if the SO cost is 0
    """
    if not ne_welfares:
        raise ValueError("PoA/PoS need at least one equilibrium")
    if so_welfare > 0 or any(w > 0 for w in ne_welfares):
        raise ValueError("Welfare values of this game are never positive")
    so_cost = -so_welfare
    if so_cost == 0:
        raise UndefinedRatioError("Social-optimum cost is 0; PoA/PoS are undefined")
    costs = [-w for w in ne_welfares]
    return max(costs) / so_cost, min(costs) / so_cost


def potential(state: UtilityState) -> float:
    """Exact potential of the selfish game: minus the total bandwidth cost."""
    return -math.fsum(state.bandwidth)
