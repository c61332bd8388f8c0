"""
Experiment orchestration.

run_experiment turns an ExperimentConfig into a result bundle on disk:

    <output>/<bundle label>/
        bundle.json          config echo, graph stats, run summaries
        index.csv            one row per run with SW% and Iter%
        sweep.csv            uniform-rate sweep (when requested)
        bc.csv               betweenness per node
        runs/*.json          RunRecord per run
        reports/*.json       EquilibriumReport per run
        traces/*.csv         move trace per run

emit_plot_data reads one or more bundles and writes one tidy CSV per figure.
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .analysis.metrics import EquilibriumReport, bc_contribution_cdf, equilibrium_metrics
from .analysis.verification import poa_pos
from .dynamics.best_response import RunRecord, brd_run, so_search, uniform_sweep
from .dynamics.initialization import build_initial_profile
from .exceptions import ConfigError, MissingRunError, NonConvergenceError
from .game.altruism import assign_altruism
from .graph.centrality import betweenness_centrality, degree_vector, metric_to_csv
from .graph.graph_io import GraphStats, build_comm_graph, derive_privacy_loss, graph_stats, halve_graph
from .types import CommGraph, GameParams, NodeMetric, StrategyLadder, ladder_from_rates
from .utils.config import ExperimentConfig
from .utils.dataset_loader import DATASETS, load_event_log
from .utils.serialization import read_csv, read_json, trace_to_csv, write_csv, write_json

logger = logging.getLogger(__name__)

BUNDLE_FILE = "bundle.json"
INDEX_COLUMNS = [
    "init_label", "objective", "seed", "sumcost", "welfare", "iterations",
    "converged", "sw_pct", "iter_pct", "sum_bc_at_max", "top10_at_max",
]
SWEEP_COLUMNS = ["level_idx", "rate", "rate_exponent", "social_cost", "total_privacy", "total_bandwidth"]


@dataclass
class PreparedGame:
    """Graph, node metrics and game parameters of one experiment."""
    graph: CommGraph
    params: GameParams
    bc: NodeMetric
    degree: NodeMetric
    stats: GraphStats


@dataclass
class ResultBundle:
    """All runs of one experiment, as written to (or read from) disk."""
    label: str
    directory: Path
    config: Dict[str, Any]
    stats: Dict[str, Any]
    L: float
    f: float
    model: str
    a: float
    ladder: StrategyLadder
    runs: List[RunRecord] = field(default_factory=list)
    reports: List[EquilibriumReport] = field(default_factory=list)
    sweep: List[Dict[str, Any]] = field(default_factory=list)
    bc: Optional[NodeMetric] = None

    def __str__(self) -> str:
        converged = sum(1 for r in self.runs if r.converged)
        return (
            f"Bundle {self.label}: {len(self.runs)} runs ({converged} converged), "
            f"{'with' if self.sweep else 'no'} uniform sweep, L={self.L:g}, f={self.f:g}"
        )

    def runs_for(self, objective: str) -> List[Tuple[RunRecord, EquilibriumReport]]:
        return [(r, rep) for r, rep in zip(self.runs, self.reports) if r.objective == objective]

    def find(self, init_label: str, objective: str) -> Tuple[RunRecord, EquilibriumReport]:
        for run, report in self.runs_for(objective):
            if run.init_label == init_label:
                return run, report
        raise MissingRunError(init_label, objective)

    def best(self, objective: str) -> Tuple[RunRecord, EquilibriumReport]:
        """Highest-welfare run of an objective (first in config order on ties)."""
        candidates = self.runs_for(objective)
        if not candidates:
            raise MissingRunError("*", objective)
        return max(candidates, key=lambda pair: pair[1].welfare)


# -- preparation -----------------------------------------------------------------

def prepare_game(
    config: ExperimentConfig,
    cache_dir: Optional[Union[str, Path]] = None,
    offline: Optional[bool] = None,
) -> PreparedGame:
    """Load the dataset, build (and halve) the graph, derive L and assign altruism."""
    log = load_event_log(config.dataset, cache_dir=cache_dir, offline=offline)
    graph = build_comm_graph(log)
    if config.halve:
        graph = halve_graph(graph)
    stats = graph_stats(graph)
    logger.info("Graph %s: %s", config.dataset, stats)

    known = config.dataset if config.dataset in DATASETS and config.halve else None
    L = derive_privacy_loss(graph, known) if config.game.L == "derive" else float(config.game.L)
    bc = betweenness_centrality(graph, directed=config.bc_directed, max_workers=config.workers)
    degree = degree_vector(graph)

    alt = config.altruism
    try:
        altruism = assign_altruism(
            graph.node_count, alt.model, alt.a, rule=alt.rule, k=alt.k, seed=alt.seed,
            metric=bc if alt.metric == "bc" else degree,
        )
    except ValueError as e:
        raise ConfigError(f"Invalid altruism assignment: {e}") from e
    params = GameParams(L=L, f=config.game.f, altruism=altruism, ladder=config.build_ladder())
    return PreparedGame(graph=graph, params=params, bc=bc, degree=degree, stats=stats)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_") or "run"


def _percent(numerator: float, denominator: float) -> Optional[float]:
    if denominator == 0:
        return 100.0 if numerator == 0 else None
    return round(100.0 * numerator / denominator, 2)


def index_rows(runs: Sequence[RunRecord], reports: Sequence[EquilibriumReport]) -> List[Dict[str, Any]]:
    """
    Run-index rows in run order.

    SW% and Iter% are relative to the run with the lowest social cost among
    runs of the same objective: SW% = 100 * best cost / cost, Iter% =
    100 * iterations / best iterations.
    """
    best: Dict[str, RunRecord] = {}
    for run in runs:
        current = best.get(run.objective)
        if current is None or run.breakdown.social_cost < current.breakdown.social_cost:
            best[run.objective] = run

    rows = []
    for run, report in zip(runs, reports):
        baseline = best[run.objective]
        rows.append({
            "init_label": run.init_label,
            "objective": run.objective,
            "seed": "" if run.seed is None else run.seed,
            "sumcost": run.breakdown.social_cost,
            "welfare": run.breakdown.welfare,
            "iterations": run.iterations,
            "converged": run.converged,
            "sw_pct": 100.0 if run is baseline else _percent(baseline.breakdown.social_cost, run.breakdown.social_cost),
            "iter_pct": 100.0 if run is baseline else _percent(run.iterations, baseline.iterations),
            "sum_bc_at_max": round(report.max_node_bc_sum, 6),
            "top10_at_max": report.top10_in_max,
        })
    return rows



def run_experiment(
    config: ExperimentConfig,
    cache_dir: Optional[Union[str, Path]] = None,
    offline: Optional[bool] = None,
    strict: bool = False,
) -> ResultBundle:
    """
    Execute every (init, objective) run of a configuration and write the bundle.

    Non-converged runs are flagged in their records and the index. With
    `strict`, a NonConvergenceError is raised after everything is written.

    Returns:
        The ResultBundle that was written
    """
    game = prepare_game(config, cache_dir=cache_dir, offline=offline)
    g, params = game.graph, game.params
    directory = Path(config.output) / _slug(config.bundle_label)
    directory.mkdir(parents=True, exist_ok=True)

    bundle = ResultBundle(
        label=config.bundle_label,
        directory=directory,
        config=config.echo(),
        stats=game.stats.to_dict(),
        L=params.L,
        f=params.f,
        model=params.altruism.model,
        a=params.altruism.level,
        ladder=params.ladder,
        bc=game.bc,
    )
    metric_to_csv(game.bc, directory / "bc.csv")

    summaries = []
    specs = config.init_specs()
    for objective in config.objectives:
        if objective == "uniform_sweep":
            bundle.sweep = [row.to_dict() for row in uniform_sweep(g, params)]
            write_csv(bundle.sweep, directory / "sweep.csv", SWEEP_COLUMNS)
            continue
        run_fn = brd_run if objective == "nash" else so_search
        for spec in specs:
            init = build_initial_profile(spec, g, params.ladder, bc=game.bc, degree=game.degree)
            record = run_fn(
                g, params, init,
                epsilon=config.epsilon,
                max_iters=config.max_iters,
                relative_epsilon=config.relative_epsilon,
                trace_thinning=config.trace_thinning,
                init_spec=spec,
            )
            report = equilibrium_metrics(g, params, record.terminal, game.bc)
            stem = f"{len(bundle.runs):03d}_{objective}_{_slug(record.init_label)}"
            write_json(record.to_dict(), directory / "runs" / f"{stem}.json")
            write_json(report.to_dict(), directory / "reports" / f"{stem}.json")
            trace_to_csv(record.trace, directory / "traces" / f"{stem}.csv")
            bundle.runs.append(record)
            bundle.reports.append(report)
            summaries.append({
                "init_label": record.init_label,
                "objective": record.objective,
                "seed": record.seed,
                "iterations": record.iterations,
                "converged": record.converged,
                "social_cost": record.breakdown.social_cost,
                "welfare": record.breakdown.welfare,
                "run_file": f"runs/{stem}.json",
                "report_file": f"reports/{stem}.json",
            })

    if bundle.runs:
        write_csv(index_rows(bundle.runs, bundle.reports), directory / "index.csv", INDEX_COLUMNS)
    write_json({
        "label": bundle.label,
        "config": bundle.config,
        "graph_stats": bundle.stats,
        "L": bundle.L,
        "f": bundle.f,
        "model": bundle.model,
        "a": bundle.a,
        "ladder": list(params.ladder.rates),
        "runs": summaries,
        "sweep_file": "sweep.csv" if bundle.sweep else None,
        "bc_file": "bc.csv",
    }, directory / BUNDLE_FILE)
    logger.info("Wrote %s to %s", bundle, directory)

    failed = [r.init_label for r in bundle.runs if not r.converged]
    if failed:
        logger.warning("%d run(s) did not converge: %s", len(failed), ", ".join(failed))
        if strict:
            raise NonConvergenceError(f"{len(failed)} run(s) hit max_iters: {', '.join(failed)}")
    return bundle


def load_bundle(path: Union[str, Path]) -> ResultBundle:
    """Read a bundle written by run_experiment (its directory or its bundle.json)."""
    path = Path(path)
    directory = path.parent if path.is_file() else path
    meta = read_json(directory / BUNDLE_FILE)

    runs, reports = [], []
    for summary in meta["runs"]:
        runs.append(RunRecord.from_dict(read_json(directory / summary["run_file"])))
        reports.append(EquilibriumReport.from_dict(read_json(directory / summary["report_file"])))

    sweep = []
    if meta.get("sweep_file"):
        sweep = [
            {k: (float(v) if k in ("rate", "social_cost", "total_privacy", "total_bandwidth") else v)
             for k, v in row.items()}
            for row in read_csv(directory / meta["sweep_file"])
        ]
    bc = None
    if meta.get("bc_file") and (directory / meta["bc_file"]).exists():
        values = np.array([float(row["value"]) for row in read_csv(directory / meta["bc_file"])])
        bc = NodeMetric(values=values, kind="betweenness_normalized", normalized=True)

    return ResultBundle(
        label=meta["label"],
        directory=directory,
        config=meta["config"],
        stats=meta["graph_stats"],
        L=float(meta["L"]),
        f=float(meta["f"]),
        model=meta["model"],
        a=float(meta["a"]),
        ladder=ladder_from_rates(meta["ladder"]),
        runs=runs,
        reports=reports,
        sweep=sweep,
        bc=bc,
    )


# -- plot data ---------------------------------------------------------------------

def _setting(bundle: ResultBundle) -> Dict[str, Any]:
    return {"bundle": bundle.label, "model": bundle.model, "a": bundle.a}


def _sweep(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        if not bundle.sweep:
            raise MissingRunError("uniform", "uniform_sweep")
        lowest = min(row["social_cost"] for row in bundle.sweep)
        for row in bundle.sweep:
            rows.append({"bundle": bundle.label, **row, "is_min": row["social_cost"] == lowest})
    return rows, ["bundle"] + SWEEP_COLUMNS + ["is_min"]


def _histogram_rows(bundle: ResultBundle, run: RunRecord, report: EquilibriumReport) -> List[Dict[str, Any]]:
    labels = report.rate_labels or [bundle.ladder.exponent_label(i) for i in range(bundle.ladder.size)]
    return [
        {**_setting(bundle), "init_label": run.init_label, "rate_exponent": label, "node_count": count}
        for label, count in zip(labels, report.strategy_histogram)
    ]


HIST_COLUMNS = ["bundle", "model", "a", "init_label", "rate_exponent", "node_count"]


def _so_histogram(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        run, report = bundle.best("social")
        rows.extend(_histogram_rows(bundle, run, report))
    return rows, HIST_COLUMNS


def _ne_histogram(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        pairs = bundle.runs_for("nash")
        if not pairs:
            raise MissingRunError("*", "nash")
        for run, report in pairs:
            rows.extend(_histogram_rows(bundle, run, report))
    return rows, HIST_COLUMNS


def _bc_at_max(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        pairs = bundle.runs_for("nash")
        if not pairs:
            raise MissingRunError("*", "nash")
        for run, report in pairs:
            rows.append({
                **_setting(bundle),
                "init_label": run.init_label,
                "social_cost": report.social_cost,
                "max_node_count": len(report.max_nodes),
                "max_node_bc_sum": report.max_node_bc_sum,
                "other_bc_sum": report.bc_total - report.max_node_bc_sum,
                "top10_in_max": report.top10_in_max,
            })
    columns = ["bundle", "model", "a", "init_label", "social_cost", "max_node_count",
               "max_node_bc_sum", "other_bc_sum", "top10_in_max"]
    return rows, columns


def _cost_composition(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        nash = bundle.runs_for("nash")
        if not nash:
            raise MissingRunError("*", "nash")
        regimes = [("so", bundle.best("social")[1])]
        regimes.append(("ne_best", max((rep for _, rep in nash), key=lambda rep: rep.welfare)))
        regimes.append(("ne_worst", min((rep for _, rep in nash), key=lambda rep: rep.welfare)))
        for regime, report in regimes:
            rows.append({
                **_setting(bundle),
                "regime": regime,
                "social_cost": report.social_cost,
                "privacy_share": report.privacy_share,
                "bandwidth_share": report.bandwidth_share,
            })
    return rows, ["bundle", "model", "a", "regime", "social_cost", "privacy_share", "bandwidth_share"]


def _poa_pos(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        nash = [rep.welfare for _, rep in bundle.runs_for("nash")]
        if not nash:
            raise MissingRunError("*", "nash")
        so_welfare = bundle.best("social")[1].welfare
        # a discovered NE can beat the SO search; the optimum is at least as good
        if max(nash) > so_welfare:
            logger.warning("Bundle %s: best NE welfare exceeds the SO search result", bundle.label)
            so_welfare = max(nash)
        poa, pos = poa_pos(so_welfare, nash)
        rows.append({
            **_setting(bundle),
            "dataset": bundle.config.get("dataset", ""),
            "so_welfare": so_welfare,
            "ne_count": len(nash),
            "poa": poa,
            "pos": pos,
        })
    return rows, ["bundle", "dataset", "model", "a", "so_welfare", "ne_count", "poa", "pos"]


def _bc_cdf(bundles: Sequence[ResultBundle]):
    rows = []
    for bundle in bundles:
        if bundle.bc is None:
            raise MissingRunError("*", "betweenness")
        regimes = [("ne_best", bundle.best("nash")[0])]
        if bundle.runs_for("social"):
            regimes.append(("so", bundle.best("social")[0]))
        for regime, run in regimes:
            curve = bc_contribution_cdf(run.terminal, bundle.bc)
            n = len(curve.order)
            for i in range(n):
                rows.append({
                    **_setting(bundle),
                    "regime": regime,
                    "init_label": run.init_label,
                    "prefix_fraction": (i + 1) / n,
                    "cumulative_bc": float(curve.cumulative[i]),
                })
    return rows, ["bundle", "model", "a", "regime", "init_label", "prefix_fraction", "cumulative_bc"]


FIGURES: Dict[str, Callable[[Sequence[ResultBundle]], Tuple[List[Dict[str, Any]], List[str]]]] = {
    "sweep": _sweep,
    "so_histogram": _so_histogram,
    "ne_histogram": _ne_histogram,
    "bc_at_max": _bc_at_max,
    "cost_composition": _cost_composition,
    "poa_pos": _poa_pos,
    "bc_cdf": _bc_cdf,
}


def emit_plot_data(
    bundles: Union[ResultBundle, Sequence[ResultBundle]],
    figure: str,
    out_dir: Union[str, Path],
) -> Path:
    """
    Write the data series of one figure as `<out_dir>/<figure>.csv`.

    Raises:
        ValueError: for an unknown figure name
        MissingRunError: if a bundle lacks the runs the figure needs
    """
    if figure not in FIGURES:
        raise ValueError(f"Unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    if isinstance(bundles, ResultBundle):
        bundles = [bundles]
    rows, columns = FIGURES[figure](bundles)
    path = write_csv(rows, Path(out_dir) / f"{figure}.csv", columns)
    logger.info("Wrote %d rows of %s to %s", len(rows), figure, path)
    return path
