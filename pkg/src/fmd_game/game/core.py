"""
Costs and utilities of the FMD game.

For player u with genuine incoming messages in_u, total messages M and
false-positive rate p_u:

    alpha_u  = prod_{v != u} (1 - p_v)
    C_u^P    = L * (1 - (1 - alpha_u)^in_u)
    C_u^BW   = f * (in_u + p_u * (M - in_u))
    phi_u    = -C_u^P - C_u^BW - a_u * sum_{v in scope(u)} C_v^P

scope(u) is empty (selfish), contacts[u] (local) or every other player
(global). Welfare is regrouped as -sum C^BW - sum (1 + A_v) C_v^P where A is
the altruism incidence, so it is linear in the per-node caches.

UtilityState keeps S = sum_v log(1 - p_v) and the per-node caches and
updates them in O(n) per applied move; every `refresh_interval` moves the
caches are rebuilt from scratch.
"""

import logging
import math
from typing import Literal

import numpy as np

from ..exceptions import InvalidMoveError
from ..types import CommGraph, CostBreakdown, GameParams, Profile
from .altruism import altruism_incidence, contact_matrix

logger = logging.getLogger(__name__)

Objective = Literal["own_utility", "welfare"]

DEFAULT_REFRESH_INTERVAL = 1000


def breach_cost(log_alpha: np.ndarray, in_msgs: np.ndarray, L: float) -> np.ndarray:
    """
    L * (1 - (1 - alpha)^in) evaluated as -L * expm1(in * log1p(-alpha)).

    Nodes without incoming messages cost 0; alpha = 1 with in >= 1 costs exactly L.
    """
    alpha = np.exp(np.minimum(log_alpha, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = np.where(in_msgs > 0, in_msgs * np.log1p(-alpha), 0.0)
    return -L * np.expm1(exponent)


def exclusive_log_sums(log_complements: np.ndarray) -> np.ndarray:
    """sum_{v != u} log(1 - p_v) for every u, never touching the u-th term."""
    prefix = np.concatenate(([0.0], np.cumsum(log_complements)[:-1]))
    suffix = np.concatenate((np.cumsum(log_complements[::-1])[::-1][1:], [0.0]))
    return prefix + suffix


class UtilityState:
    """
    Cached game state for one profile.

    Single-writer: `apply_move` mutates, every other method is read-only and
    may be called concurrently against a frozen state.
    """

    def __init__(
        self,
        graph: CommGraph,
        params: GameParams,
        profile: Profile,
        refresh_interval: int = DEFAULT_REFRESH_INTERVAL,
    ):
        profile.validate(graph.node_count, params.ladder)
        if len(params.altruism.constants) != graph.node_count:
            raise ValueError(
                f"Altruism constants cover {len(params.altruism.constants)} nodes, "
                f"graph has {graph.node_count}"
            )
        self.graph = graph
        self.params = params
        self.refresh_interval = refresh_interval

        self._rates = np.asarray(params.ladder.rates, dtype=np.float64)
        self._ladder_logs = params.ladder.log_complements
        self._in = graph.in_array
        self._others = float(graph.total_messages) - self._in
        self._a = params.altruism.constants
        self.incidence = altruism_incidence(graph, params.altruism)
        self._adjacency = contact_matrix(graph) if params.altruism.model == "local" else None

        self.idx = np.asarray(profile.idx, dtype=np.int64)
        self.moves_since_refresh = 0
        self.refresh()

    # -- cache maintenance -------------------------------------------------

    def refresh(self) -> None:
        """Recompute every cache from the profile."""
        self.log_q = self._ladder_logs[self.idx] if len(self.idx) else np.zeros(0)
        self.log_sum = math.fsum(self.log_q)
        self.log_alpha = exclusive_log_sums(self.log_q)
        self.privacy = breach_cost(self.log_alpha, self._in, self.params.L)
        self.bandwidth = self.params.f * (self._in + self._rates[self.idx] * self._others)
        self.moves_since_refresh = 0

    def copy(self) -> "UtilityState":
        clone = object.__new__(UtilityState)
        clone.__dict__.update(self.__dict__)
        for name in ("idx", "log_q", "log_alpha", "privacy", "bandwidth"):
            setattr(clone, name, getattr(self, name).copy())
        return clone

    @property
    def profile(self) -> Profile:
        return Profile(tuple(int(i) for i in self.idx))

    @property
    def alpha(self) -> np.ndarray:
        return np.exp(np.minimum(self.log_alpha, 0.0))

    # -- per-player quantities ----------------------------------------------

    def alpha_of(self, u: int) -> float:
        return float(math.exp(min(self.log_sum - self.log_q[u], 0.0)))

    def scope_sum(self, u: int, values: np.ndarray) -> float:
        """Sum of `values` over the altruism scope of u."""
        model = self.params.altruism.model
        if model == "selfish":
            return 0.0
        if model == "local":
            return float(values[list(self.graph.contacts[u])].sum())
        return float(values.sum() - values[u])

    def player_utility(self, u: int) -> float:
        return float(
            -self.privacy[u] - self.bandwidth[u]
            - self._a[u] * self.scope_sum(u, self.privacy)
        )

    def own_utilities(self) -> np.ndarray:
        """phi_u for every player."""
        model = self.params.altruism.model
        if model == "selfish":
            scope = np.zeros_like(self.privacy)
        elif model == "local":
            scope = np.asarray(self._adjacency @ self.privacy)
        else:
            scope = self.privacy.sum() - self.privacy
        return -self.privacy - self.bandwidth - self._a * scope

    def welfare(self) -> float:
        return -math.fsum(self.bandwidth) - math.fsum((1.0 + self.incidence) * self.privacy)

    def breakdown(self) -> CostBreakdown:
        total_privacy = math.fsum(self.privacy)
        total_bandwidth = math.fsum(self.bandwidth)
        return CostBreakdown(
            total_privacy=total_privacy,
            total_bandwidth=total_bandwidth,
            social_cost=total_privacy + total_bandwidth,
            welfare=self.welfare(),
        )

    # -- unilateral moves ---------------------------------------------------

    def _privacy_shift(self, d: float) -> np.ndarray:
        """Change of every C_v^P when some other player's log(1-p) moves by d."""
        return breach_cost(self.log_alpha + d, self._in, self.params.L) - self.privacy

    def _check_index(self, new_idx: int) -> None:
        if not self.params.ladder.is_valid(new_idx):
            raise InvalidMoveError(
                f"Ladder index {new_idx} is outside 0..{self.params.ladder.top}"
            )

    def eval_move(self, u: int, new_idx: int, objective: Objective = "own_utility") -> float:
        """
        Objective gain of moving player u to `new_idx`, without mutating the state.

        C_u^P does not depend on p_u, so only u's bandwidth and the other
        players' privacy costs change.
        """
        self._check_index(new_idx)
        old_idx = int(self.idx[u])
        if new_idx == old_idx:
            return 0.0
        bandwidth_delta = self.params.f * (self._rates[new_idx] - self._rates[old_idx]) * self._others[u]
        shift = self._privacy_shift(float(self._ladder_logs[new_idx] - self._ladder_logs[old_idx]))
        if objective == "own_utility":
            return float(-bandwidth_delta - self._a[u] * self.scope_sum(u, shift))
        if objective == "welfare":
            weighted = (1.0 + self.incidence) * shift
            return float(-bandwidth_delta - (weighted.sum() - weighted[u]))
        raise ValueError(f"Unknown objective: {objective}")

    def gains_to(self, target: np.ndarray, objective: Objective = "own_utility") -> np.ndarray:
        """
        Gain of moving each player u to ladder index target[u], all at once
        as independent unilateral deviations.

        Entries whose target is off the ladder or equal to the current index
        are -inf. Deviations sharing the same log-ratio share one vectorized
        privacy-shift evaluation.
        """
        n = len(self.idx)
        gains = np.full(n, -np.inf)
        valid = (target >= 0) & (target <= self.params.ladder.top) & (target != self.idx)
        if not valid.any():
            return gains
        model = self.params.altruism.model
        movers = np.nonzero(valid)[0]
        new_idx = target[movers]
        old_idx = self.idx[movers]
        bandwidth_delta = self.params.f * (self._rates[new_idx] - self._rates[old_idx]) * self._others[movers]
        log_ratio = self._ladder_logs[new_idx] - self._ladder_logs[old_idx]
        side = np.zeros(len(movers))
        for d in np.unique(log_ratio):
            group = log_ratio == d
            nodes = movers[group]
            if objective == "welfare":
                weighted = (1.0 + self.incidence) * self._privacy_shift(float(d))
                side[group] = weighted.sum() - weighted[nodes]
            elif self.params.altruism.is_selfish:
                continue
            else:
                shift = self._privacy_shift(float(d))
                if model == "local":
                    scoped = np.asarray(self._adjacency @ shift)[nodes]
                else:
                    scoped = shift.sum() - shift[nodes]
                side[group] = self._a[nodes] * scoped
        gains[movers] = -bandwidth_delta - side
        return gains

    def candidate_gains(self, objective: Objective = "own_utility") -> np.ndarray:
        """
        Gains of every single-step move, shape (n, 2).

        Column 0 is the increment, column 1 the decrement; steps that would
        leave the ladder are -inf.
        """
        return np.column_stack((
            self.gains_to(self.idx + 1, objective),
            self.gains_to(self.idx - 1, objective),
        )) if len(self.idx) else np.full((0, 2), -np.inf)

    def ladder_gains(self, objective: Objective = "own_utility") -> np.ndarray:
        """Gains of every single-coordinate change to every ladder index, shape (n, ladder size)."""
        n = len(self.idx)
        return np.column_stack([
            self.gains_to(np.full(n, j, dtype=np.int64), objective)
            for j in range(self.params.ladder.size)
        ]) if n else np.full((0, self.params.ladder.size), -np.inf)

    def apply_move(self, u: int, new_idx: int) -> None:
        """Move player u to `new_idx` and update the caches incrementally."""
        self._check_index(new_idx)
        old_idx = int(self.idx[u])
        if new_idx == old_idx:
            raise InvalidMoveError(f"Player {u} already plays ladder index {new_idx}")
        d = float(self._ladder_logs[new_idx] - self._ladder_logs[old_idx])
        self.idx[u] = new_idx
        self.log_q[u] = self._ladder_logs[new_idx]
        self.log_sum += d
        self.log_alpha = self.log_sum - self.log_q
        self.privacy = breach_cost(self.log_alpha, self._in, self.params.L)
        self.bandwidth[u] = self.params.f * (self._in[u] + self._rates[new_idx] * self._others[u])
        self.moves_since_refresh += 1
        if self.moves_since_refresh >= self.refresh_interval:
            drift = abs(self.log_sum - math.fsum(self.log_q))
            logger.debug("Refreshing utility caches (log-sum drift %.3e)", drift)
            self.refresh()


# -- functional API ------------------------------------------------------------

def make_state(
    g: CommGraph,
    params: GameParams,
    profile: Profile,
    refresh_interval: int = DEFAULT_REFRESH_INTERVAL,
) -> UtilityState:
    return UtilityState(g, params, profile, refresh_interval=refresh_interval)


def alpha_of(state: UtilityState, u: int) -> float:
    """Probability that no other player downloads a message addressed to u."""
    return state.alpha_of(u)


def privacy_cost(state: UtilityState, u: int) -> float:
    return float(state.privacy[u])


def bandwidth_cost(g: CommGraph, params: GameParams, profile: Profile, u: int) -> float:
    p = params.ladder.rates[profile[u]]
    return params.f * (g.in_msgs[u] + p * (g.total_messages - g.in_msgs[u]))


def player_utility(state: UtilityState, g: CommGraph, params: GameParams, u: int) -> float:
    return state.player_utility(u)


def cost_breakdown(state: UtilityState, g: CommGraph, params: GameParams) -> CostBreakdown:
    return state.breakdown()


def eval_unilateral_move(
    state: UtilityState,
    g: CommGraph,
    params: GameParams,
    u: int,
    new_idx: int,
    objective: Objective = "own_utility",
) -> float:
    return state.eval_move(u, new_idx, objective)


def apply_move(state: UtilityState, u: int, new_idx: int) -> UtilityState:
    state.apply_move(u, new_idx)
    return state


def direct_alpha(params: GameParams, profile: Profile, u: int) -> float:
    """alpha_u as a plain product, for cross-checking the log-domain value."""
    rates = profile.rates(params.ladder)
    product = 1.0
    for v, p in enumerate(rates):
        if v != u:
            product *= 1.0 - p
    return product

