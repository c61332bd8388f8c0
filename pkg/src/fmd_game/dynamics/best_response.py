"""
Maximum-gain epsilon best-response dynamics and social-optimum search.

Both loops evaluate every single-step move (ladder index +1 / -1) of every
player against the current state, apply the single best one and stop when
no move gains more than epsilon. Ties go to the lowest node id, then to the
increment. so_search optimizes welfare instead of the mover's own utility and
by default escapes single-step stalls with full-ladder coordinate moves.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional

import numpy as np

from ..game.core import Objective, UtilityState, make_state
from ..types import AltruismSpec, CommGraph, CostBreakdown, GameParams, Profile
from .initialization import InitSpec

logger = logging.getLogger(__name__)

RunObjective = Literal["nash", "social"]

DEFAULT_EPSILON = 1e-5
DEFAULT_MAX_ITERS = 200_000
SPOT_CHECK_INTERVAL = 1000
SPOT_CHECK_TOLERANCE = 1e-9
TRACE_LOG_INTERVAL = 100


@dataclass
class TraceEntry:
    """One applied move."""
    iteration: int
    mover: int
    old_idx: int
    new_idx: int
    gain: float
    objective_after: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "mover": self.mover,
            "old_idx": self.old_idx,
            "new_idx": self.new_idx,
            "gain": self.gain,
            "objective_after": self.objective_after,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TraceEntry":
        return cls(
            iteration=int(data["iteration"]),
            mover=int(data["mover"]),
            old_idx=int(data["old_idx"]),
            new_idx=int(data["new_idx"]),
            gain=float(data["gain"]),
            objective_after=float(data["objective_after"]),
        )


@dataclass
class RunRecord:
    """Result of one brd_run or so_search."""
    init: InitSpec
    init_label: str
    objective: RunObjective
    iterations: int
    converged: bool
    terminal: Profile
    breakdown: CostBreakdown
    epsilon: float
    seed: Optional[int] = None
    trace: List[TraceEntry] = field(default_factory=list)
    trace_thinning: int = 1
    wall_time: float = 0.0

    def __str__(self) -> str:
        status = "converged" if self.converged else "NOT converged"
        return (
            f"{self.objective} run {self.init_label}: {status} after "
            f"{self.iterations} iterations, {self.breakdown}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "init": self.init.to_dict(),
            "init_label": self.init_label,
            "objective": self.objective,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "converged": self.converged,
            "terminal": list(self.terminal.idx),
            "breakdown": self.breakdown.to_dict(),
            "trace_thinning": self.trace_thinning,
            "trace": [entry.to_dict() for entry in self.trace],
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunRecord":
        return cls(
            init=InitSpec.from_dict(data["init"]),
            init_label=data["init_label"],
            objective=data["objective"],
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            terminal=Profile(tuple(data["terminal"])),
            breakdown=CostBreakdown.from_dict(data["breakdown"]),
            epsilon=float(data["epsilon"]),
            seed=data.get("seed"),
            trace=[TraceEntry.from_dict(entry) for entry in data.get("trace", [])],
            trace_thinning=int(data.get("trace_thinning", 1)),
            wall_time=float(data.get("wall_time", 0.0)),
        )


@dataclass
class SweepRow:
    """Base costs with every node at the same rate."""
    level_idx: int
    rate: float
    rate_label: str
    social_cost: float
    total_privacy: float
    total_bandwidth: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level_idx": self.level_idx,
            "rate": self.rate,
            "rate_exponent": self.rate_label,
            "social_cost": self.social_cost,
            "total_privacy": self.total_privacy,
            "total_bandwidth": self.total_bandwidth,
        }


def _thresholds(
    state: UtilityState,
    objective: Objective,
    epsilon: float,
    relative_epsilon: bool,
) -> np.ndarray:
    """Per-player gain threshold, shape (n, 1) so it broadcasts over move columns."""
    n = len(state.idx)
    if not relative_epsilon:
        return np.full((n, 1), epsilon)
    if objective == "welfare":
        return np.full((n, 1), epsilon * abs(state.welfare()))
    return (epsilon * np.abs(state.own_utilities()))[:, None]


def _best_move(gains: np.ndarray, thresholds: np.ndarray) -> Optional[tuple]:
    """
    (row, column, gain) of the largest gain that clears its threshold, or None.

    argmax over the row-major flattening returns the first maximum, which
    is the lowest node id and then the lowest column.
    """
    eligible = np.where(gains > thresholds, gains, -np.inf)
    if eligible.size == 0:
        return None
    flat = int(np.argmax(eligible))
    row, col = divmod(flat, eligible.shape[1])
    gain = float(eligible[row, col])
    if not np.isfinite(gain):
        return None
    return row, col, gain


def _objective_value(state: UtilityState, objective: Objective, mover: int) -> float:
    return state.welfare() if objective == "welfare" else state.player_utility(mover)


def _spot_check(state: UtilityState, objective: Objective, mover: int, iteration: int) -> None:
    fresh = make_state(state.graph, state.params, state.profile)
    cached = _objective_value(state, objective, mover)
    expected = _objective_value(fresh, objective, mover)
    deviation = abs(cached - expected) / max(1.0, abs(expected))
    if deviation > SPOT_CHECK_TOLERANCE:
        logger.warning(
            "Cached objective drifted at iteration %d: %.12g vs %.12g (rel %.2e)",
            iteration, cached, expected, deviation,
        )


def _next_move(
    state: UtilityState,
    objective: Objective,
    epsilon: float,
    relative_epsilon: bool,
    full_ladder: bool,
) -> Optional[tuple]:
    """(node, new ladder index, gain) of the move to apply next, or None at a fixed point."""
    thresholds = _thresholds(state, objective, epsilon, relative_epsilon)
    move = _best_move(state.candidate_gains(objective), thresholds)
    if move is not None:
        u, col, gain = move
        return u, int(state.idx[u]) + (1 if col == 0 else -1), gain
    if not full_ladder:
        return None
    move = _best_move(state.ladder_gains(objective), thresholds)
    if move is not None:
        logger.debug("Full-ladder escape: node %d %d -> %d (gain %.6g)", move[0], state.idx[move[0]], move[1], move[2])
    return move


def _run_dynamics(
    g: CommGraph,
    params: GameParams,
    init: Profile,
    objective: Objective,
    epsilon: float,
    max_iters: int,
    relative_epsilon: bool,
    trace_thinning: int,
    full_ladder: bool,
) -> tuple:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if trace_thinning < 1:
        raise ValueError(f"trace_thinning must be >= 1, got {trace_thinning}")

    state = make_state(g, params, init)
    trace: List[TraceEntry] = []
    last: Optional[TraceEntry] = None
    iterations = 0
    converged = False

    while True:
        move = _next_move(state, objective, epsilon, relative_epsilon, full_ladder)
        if move is None:
            converged = True
            break
        if iterations >= max_iters:
            break
        u, new_idx, gain = move

        old_idx = int(state.idx[u])
        state.apply_move(u, new_idx)
        iterations += 1
        last = TraceEntry(iterations, u, old_idx, new_idx, gain, _objective_value(state, objective, u))
        if iterations % trace_thinning == 0:
            trace.append(last)
        if iterations % TRACE_LOG_INTERVAL == 0:
            logger.debug(
                "iteration %d: node %d %d -> %d, gain %.6g", iterations, u, old_idx, new_idx, gain
            )
        if iterations % SPOT_CHECK_INTERVAL == 0:
            _spot_check(state, objective, u, iterations)

    if last is not None and (not trace or trace[-1] is not last):
        trace.append(last)
    if not converged:
        logger.warning("Dynamics stopped at max_iters=%d without converging", max_iters)
    return state, trace, iterations, converged


def _record(
    run_objective: RunObjective,
    g: CommGraph,
    params: GameParams,
    init: Profile,
    init_spec: Optional[InitSpec],
    epsilon: float,
    max_iters: int,
    relative_epsilon: bool,
    trace_thinning: int,
    full_ladder: bool,
) -> RunRecord:
    init_spec = init_spec or InitSpec(kind="explicit", profile=init.idx)
    label = init_spec.label(params.ladder)
    objective: Objective = "welfare" if run_objective == "social" else "own_utility"
    logger.info("Starting %s run from %s (%d players)", run_objective, label, g.node_count)

    started = time.perf_counter()
    state, trace, iterations, converged = _run_dynamics(
        g, params, init, objective, epsilon, max_iters, relative_epsilon, trace_thinning, full_ladder
    )
    record = RunRecord(
        init=init_spec,
        init_label=label,
        objective=run_objective,
        iterations=iterations,
        converged=converged,
        terminal=state.profile,
        breakdown=state.breakdown(),
        epsilon=epsilon,
        seed=init_spec.seed,
        trace=trace,
        trace_thinning=trace_thinning,
        wall_time=time.perf_counter() - started,
    )
    logger.info("Finished %s", record)
    return record


def brd_run(
    g: CommGraph,
    params: GameParams,
    init: Profile,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    relative_epsilon: bool = False,
    trace_thinning: int = 1,
    init_spec: Optional[InitSpec] = None,
) -> RunRecord:
    """
    Maximum-gain single-step epsilon best-response dynamics.

    Args:
        g: Message graph
        params: Game parameters
        init: Starting profile
        epsilon: A move is applied only if its own-utility gain exceeds epsilon
        max_iters: Iteration guard; hitting it leaves the record non-converged
        relative_epsilon: Compare gains against epsilon * |current utility of the mover|
        trace_thinning: Keep every k-th trace entry (the last move is always kept)
        init_spec: How `init` was built, for labelling; defaults to an explicit spec

    Returns:
        RunRecord with objective "nash"
    """
    return _record(
        "nash", g, params, init, init_spec, epsilon, max_iters,
        relative_epsilon, trace_thinning, full_ladder=False,
    )


def so_search(
    g: CommGraph,
    params: GameParams,
    init: Profile,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    relative_epsilon: bool = False,
    trace_thinning: int = 1,
    init_spec: Optional[InitSpec] = None,
    full_ladder: bool = True,
) -> RunRecord:
    """
    Social-optimum coordinate search on the altruism-weighted welfare.

    Same loop as brd_run with welfare as the gain objective. With
    `full_ladder`, a single-step fixed point is followed by a check of every
    single-coordinate change to any ladder index; the best one improving
    welfare by more than epsilon is applied and single steps resume.
    Welfare is convex along each coordinate, so single steps alone can stop
    at the wrong end of a player's ladder.

    Returns:
        RunRecord with objective "social"
    """
    return _record(
        "social", g, params, init, init_spec, epsilon, max_iters,
        relative_epsilon, trace_thinning, full_ladder=full_ladder,
    )


def uniform_sweep(g: CommGraph, params: GameParams) -> List[SweepRow]:
    """Base cost breakdown (no altruism term) for every ladder rate applied to all nodes."""
    base = params.with_altruism(AltruismSpec.selfish(g.node_count))
    rows = []
    for level_idx, rate in enumerate(params.ladder.rates):
        breakdown = make_state(g, base, Profile.uniform(g.node_count, level_idx)).breakdown()
        rows.append(SweepRow(
            level_idx=level_idx,
            rate=rate,
            rate_label=params.ladder.exponent_label(level_idx),
            social_cost=breakdown.social_cost,
            total_privacy=breakdown.total_privacy,
            total_bandwidth=breakdown.total_bandwidth,
        ))
    return rows


def sweep_optimum(rows: List[SweepRow]) -> SweepRow:
    """Row with the lowest social cost (first on ties)."""
    return min(rows, key=lambda row: row.social_cost)


def thin_trace(trace: List[TraceEntry], every: int) -> List[TraceEntry]:
    """Every `every`-th entry by iteration number, plus the final entry."""
    if every < 1:
        raise ValueError(f"Thinning interval must be >= 1, got {every}")
    kept = [entry for entry in trace if entry.iteration % every == 0]
    if trace and (not kept or kept[-1] is not trace[-1]):
        kept.append(trace[-1])
    return kept


def replay_trace(init: Profile, trace: List[TraceEntry]) -> Profile:
    """
    Re-apply a full (unthinned) trace to its starting profile.

    Raises:
        ValueError: if an entry's old index does not match the replayed profile
    """
    idx = list(init.idx)
    for entry in trace:
        if idx[entry.mover] != entry.old_idx:
            raise ValueError(
                f"Trace entry {entry.iteration} moves node {entry.mover} from "
                f"{entry.old_idx}, but the replayed profile has {idx[entry.mover]}"
            )
        idx[entry.mover] = entry.new_idx
    return Profile(tuple(idx))
