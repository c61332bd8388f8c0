"""
Command-line entry point: fmd-game {fetch, stats, run, verify, oracle, plotdata}.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(parse, dataset, checksum, missing runs), 3 non-convergence in strict mode.
`verify` also exits 2 when a checked profile is not stable.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .analysis.verification import enumerate_oracle, verify_epsilon_ne, verify_step_stable
from .exceptions import (
    ConfigError,
    DatasetError,
    GraphParseError,
    MissingRunError,
    NonConvergenceError,
    OracleTooLargeError,
)
from .experiment import FIGURES, emit_plot_data, load_bundle, prepare_game, run_experiment
from .graph.centrality import betweenness_centrality, metric_to_csv, top_k_ids
from .graph.graph_io import build_comm_graph, derive_privacy_loss, graph_stats, halve_graph
from .utils.config import load_config, parse_config
from .utils.dataset_loader import DATASETS, fetch_dataset, load_event_log
from .utils.serialization import profile_from_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NONCONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _cmd_fetch(args) -> int:
    path = fetch_dataset(args.name, cache_dir=args.cache_dir, offline=args.offline, expected_sha256=args.sha256)
    print(f"✓ {args.name}: {path}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    graph = build_comm_graph(load_event_log(args.source, cache_dir=args.cache_dir, offline=args.offline))
    if args.halve:
        graph = halve_graph(graph)
    known = args.source if args.source in DATASETS and args.halve else None
    L = derive_privacy_loss(graph, known)
    print(f"✓ {args.source}{' (halved)' if args.halve else ''}: {graph_stats(graph)}")
    print(f"  L = {L:g}")
    if args.bc_out or args.top:
        bc = betweenness_centrality(graph, max_workers=args.workers)
        if args.top:
            for u in top_k_ids(bc, min(args.top, graph.node_count)):
                print(f"  node {graph.labels[u]:>6}  bc {bc.values[u]:.6f}  degree {graph.degree(u)}")
        if args.bc_out:
            print(f"✓ Betweenness written to {metric_to_csv(bc, args.bc_out)}")
    return EXIT_OK


def _config_overrides(args) -> dict:
    overrides = {
        "epsilon": args.epsilon,
        "halve": args.halve,
        "output": args.output,
    }
    if args.seed is not None:
        overrides["seeds"] = args.seed
    return overrides


def _cmd_run(args) -> int:
    config = load_config(args.config, overrides=_config_overrides(args))
    try:
        bundle = run_experiment(config, cache_dir=args.cache_dir, offline=args.offline, strict=args.strict)
    except NonConvergenceError as e:
        print(f"✗ {e}")
        return EXIT_NONCONVERGENCE
    for run in bundle.runs:
        print(f"{'✓' if run.converged else '✗'} {run}")
    print(f"✓ Results written to {bundle.directory}")
    return EXIT_OK


def _print_report(prefix: str, report) -> bool:
    print(f"{'✓' if report.holds else '✗'} {prefix}: {report}")
    return report.holds


def _cmd_verify(args) -> int:
    if args.bundle:
        bundle = load_bundle(args.bundle)
        config = parse_config(bundle.config)
        targets = [(f"{r.objective} {r.init_label}", r.terminal, r.objective, r.epsilon) for r in bundle.runs]
    else:
        if not (args.config and args.profile):
            raise ConfigError("verify needs --bundle, or --config together with --profile")
        config = load_config(args.config)
        targets = [(str(args.profile), None, args.objective, args.epsilon or config.epsilon)]

    game = prepare_game(config, cache_dir=args.cache_dir, offline=args.offline)
    ok = True
    for name, profile, objective, epsilon in targets:
        if profile is None:
            profile = profile_from_csv(args.profile, game.params.ladder)
        kind = "welfare" if objective == "social" else "own_utility"
        step = verify_step_stable(game.graph, game.params, profile, epsilon, objective=kind)
        full = verify_epsilon_ne(game.graph, game.params, profile, epsilon, objective=kind)
        ok &= _print_report(f"{name} step", step)
        ok &= _print_report(f"{name} full ladder", full)
    return EXIT_OK if ok else EXIT_DATA


def _cmd_oracle(args) -> int:
    config = load_config(args.config)
    game = prepare_game(config, cache_dir=args.cache_dir, offline=args.offline)
    ladder = game.params.ladder
    subset = [ladder.index_from_label(level) for level in args.levels.split(",")] if args.levels else None
    result = enumerate_oracle(game.graph, game.params, ladder_subset=subset)
    print(f"✓ {result}")
    for profile in result.ne_profiles:
        print("  NE " + " ".join(ladder.exponent_label(i) for i in profile.idx))
    if args.out:
        print(f"✓ Oracle table written to {write_json(result.to_dict(), args.out)}")
    return EXIT_OK


def _cmd_plotdata(args) -> int:
    bundles = [load_bundle(path) for path in args.bundles]
    figures = sorted(FIGURES) if args.figure == "all" else [args.figure]
    for figure in figures:
        print(f"✓ {figure}: {emit_plot_data(bundles, figure, args.out)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fmd-game", description="FMD game simulator: equilibria, social optima and plot data.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_flags(p):
        p.add_argument("--cache-dir", type=Path, help="Dataset cache (default $FMD_GAME_CACHE_DIR or ~/.cache/fmd_game).")
        p.add_argument("--offline", action="store_true", default=None, help="Use cached datasets only.")

    p = sub.add_parser("fetch", help="Download and cache a dataset.")
    p.add_argument("name", choices=sorted(DATASETS))
    p.add_argument("--sha256", help="Expected SHA-256 of the download.")
    data_flags(p)
    p.set_defaults(func=_cmd_fetch)

    p = sub.add_parser("stats", help="Print graph statistics and the derived L.")
    p.add_argument("source", help="Dataset name (message, mail) or edge-list path.")
    p.add_argument("--halve", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--top", type=int, default=0, metavar="K", help="List the K highest-betweenness nodes.")
    p.add_argument("--bc-out", type=Path, help="Write per-node betweenness to this CSV.")
    p.add_argument("--workers", type=int, help="Process pool size for betweenness.")
    data_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("run", help="Run an experiment config.")
    p.add_argument("--config", type=Path, required=True, help="Experiment JSON document.")
    p.add_argument("--seed", type=int, nargs="+", help="Seeds for random inits (overrides the config).")
    p.add_argument("--epsilon", type=float, help="Gain threshold (default 1e-5).")
    p.add_argument("--halve", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--output", help="Output directory.")
    p.add_argument("--strict", action="store_true", help="Exit 3 if any run hits max_iters.")
    data_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="Check step stability and full-ladder stability of profiles.")
    p.add_argument("--bundle", type=Path, help="Verify every terminal profile of a result bundle.")
    p.add_argument("--config", type=Path, help="Experiment config describing the game.")
    p.add_argument("--profile", type=Path, help="Profile CSV (node_id, rate_exponent).")
    p.add_argument("--objective", choices=["nash", "social"], default="nash")
    p.add_argument("--epsilon", type=float)
    data_flags(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("oracle", help="Enumerate every profile of a small game.")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--levels", help="Comma-separated rate exponents, e.g. zero,-2,-1.")
    p.add_argument("--out", type=Path, help="Write the oracle table as JSON.")
    data_flags(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("plotdata", help="Emit figure data series from result bundles.")
    p.add_argument("bundles", nargs="+", type=Path)
    p.add_argument("--figure", choices=sorted(FIGURES) + ["all"], default="all")
    p.add_argument("--out", type=Path, default=Path("plotdata"))
    p.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (ConfigError, OracleTooLargeError, ValueError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphParseError, DatasetError, MissingRunError, FileNotFoundError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_DATA
    except NonConvergenceError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
