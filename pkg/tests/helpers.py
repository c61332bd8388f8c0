"""
Graph builders shared by the test modules.
"""

import numpy as np

from fmd_game.graph.graph_io import build_comm_graph, parse_text
from fmd_game.types import StrategyLadder

SMALL_LADDER = StrategyLadder((0.0, 0.25, 0.5))


def graph_from_pairs(pairs):
    """CommGraph from (src, dst) label pairs, one message each."""
    text = "\n".join(f"{s} {d} {1000 + i}" for i, (s, d) in enumerate(pairs))
    return build_comm_graph(parse_text(text))


def random_pairs(rng, n, messages):
    pairs = []
    while len(pairs) < messages:
        s, d = rng.integers(0, n, size=2)
        if s != d:
            pairs.append((f"n{s}", f"n{d}"))
    return pairs


def random_graph(seed, n, messages):
    return graph_from_pairs(random_pairs(np.random.default_rng(seed), n, messages))


def edge_list_text(pairs):
    return "".join(f"{s} {d} {1000 + i}\n" for i, (s, d) in enumerate(pairs))


def ring_graph(n):
    """Directed n-cycle n0 -> n1 -> ... -> n0, so every label is a node."""
    return graph_from_pairs([(f"n{i}", f"n{(i + 1) % n}") for i in range(n)])
