from .initialization import (
    InitSpec,
    init_threshold,
    init_sorted,
    init_random,
    build_initial_profile,
)
from .best_response import (
    TraceEntry,
    RunRecord,
    SweepRow,
    brd_run,
    so_search,
    uniform_sweep,
    replay_trace,
    thin_trace,
)

__all__ = [
    "InitSpec",
    "init_threshold",
    "init_sorted",
    "init_random",
    "build_initial_profile",
    "TraceEntry",
    "RunRecord",
    "SweepRow",
    "brd_run",
    "so_search",
    "uniform_sweep",
    "replay_trace",
    "thin_trace",
]
