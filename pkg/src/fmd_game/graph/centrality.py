"""
Node-importance measures: Brandes betweenness, simple degree, top-k selection.
"""

import csv
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..types import CommGraph, NodeMetric

logger = logging.getLogger(__name__)


def _adjacency(g: CommGraph, directed: bool) -> List[Sequence[int]]:
    if not directed:
        return list(g.contacts)
    out: List[set] = [set() for _ in range(g.node_count)]
    for s, d, _ in g.edges:
        out[s].add(d)
    return [sorted(nb) for nb in out]


def _source_dependencies(source: int, adjacency: List[Sequence[int]]) -> np.ndarray:
    """Single-source Brandes pass: BFS path counting then reverse accumulation."""
    n = len(adjacency)
    dist = [-1] * n
    sigma = [0] * n
    preds: List[List[int]] = [[] for _ in range(n)]
    dist[source] = 0
    sigma[source] = 1
    order: List[int] = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adjacency[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)

    delta = [0.0] * n
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
    delta[source] = 0.0
    return np.asarray(delta, dtype=np.float64)


# Set once per pool process by _init_worker.
_worker_adjacency: Optional[List[Sequence[int]]] = None


def _init_worker(adjacency: List[Sequence[int]]) -> None:
    global _worker_adjacency
    _worker_adjacency = adjacency


def _worker_dependencies(source: int) -> np.ndarray:
    return _source_dependencies(source, _worker_adjacency)


def betweenness_centrality(
    g: CommGraph,
    directed: bool = False,
    max_workers: Optional[int] = None,
) -> NodeMetric:
    """
    Brandes betweenness on the simple (unweighted, multi-edge-free) graph.

    Args:
        g: Message graph
        directed: Use directed message edges instead of the undirected contact graph
        max_workers: When > 1, run per-source passes in a process pool; the
            reduction is always in source order so the result does not depend
            on the degree of parallelism

    Returns:
        NodeMetric with normalized values in [0, 1] and raw pair-dependency sums
    """
    n = g.node_count
    if n < 3:
        zeros = np.zeros(n)
        return NodeMetric(values=zeros, kind="betweenness_normalized", normalized=True, raw=zeros.copy())

    adjacency = _adjacency(g, directed)
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(
            max_workers=max_workers, initializer=_init_worker, initargs=(adjacency,)
        ) as pool:
            per_source = list(pool.map(
                _worker_dependencies, range(n), chunksize=max(1, n // (4 * max_workers))
            ))
    else:
        per_source = [_source_dependencies(s, adjacency) for s in range(n)]

    stacked = np.vstack(per_source)
    raw = np.array([math.fsum(stacked[:, v]) for v in range(n)])
    if directed:
        scale = (n - 1) * (n - 2)
    else:
        # each unordered pair was counted from both endpoints
        raw = raw / 2.0
        scale = (n - 1) * (n - 2) / 2.0
    logger.debug("Betweenness computed for %d nodes (directed=%s)", n, directed)
    return NodeMetric(values=raw / scale, kind="betweenness_normalized", normalized=True, raw=raw)


def degree_vector(g: CommGraph) -> NodeMetric:
    """Simple undirected degree |contacts[u]|."""
    values = np.array([len(nb) for nb in g.contacts], dtype=np.float64)
    return NodeMetric(values=values, kind="degree_simple", normalized=False)


def top_k_ids(metric: NodeMetric, k: int) -> List[int]:
    """Ids of the k largest values, ties broken by ascending id."""
    n = len(metric)
    if k < 0 or k > n:
        raise ValueError(f"k={k} is outside [0, {n}]")
    order = sorted(range(n), key=lambda u: (-metric.values[u], u))
    return order[:k]


def metric_to_csv(metric: NodeMetric, path: Union[str, Path]) -> Path:
    """Write (node_id, value) rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["node_id", "value"])
        for u, value in enumerate(metric.values):
            writer.writerow([u, repr(float(value))])
    return path
