"""
Altruist assignment rules and altruism incidence weights.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import sparse

from ..graph.centrality import top_k_ids
from ..types import AltruismModel, AltruismSpec, CommGraph, NodeMetric

logger = logging.getLogger(__name__)


def contact_matrix(g: CommGraph) -> sparse.csr_matrix:
    """Symmetric 0/1 adjacency of the contact relation, one entry per distinct neighbour."""
    rows = [u for u, nb in enumerate(g.contacts) for _ in nb]
    cols = [v for nb in g.contacts for v in nb]
    data = np.ones(len(rows), dtype=np.float64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(g.node_count, g.node_count))


def assign_altruism(
    n: int,
    model: AltruismModel,
    a: float,
    rule: str = "all",
    k: Optional[int] = None,
    seed: Optional[int] = None,
    metric: Optional[NodeMetric] = None,
) -> AltruismSpec:
    """
    Build an AltruismSpec from an assignment rule.

    Args:
        n: Number of players
        model: "selfish", "local" or "global"
        a: Altruistic constant given to every altruist
        rule: "all", "random_k" (k altruists drawn with `seed`) or
            "top_k" (k largest values of `metric`)
        k: Number of altruists for the random_k / top_k rules
        seed: Generator seed for random_k
        metric: Node metric for top_k

    Returns:
        AltruismSpec; the selfish model always yields all-zero constants
    """
    if model == "selfish" or a == 0:
        return AltruismSpec("selfish" if model == "selfish" else model, np.zeros(n), "all(0.0)")
    if rule == "all":
        return AltruismSpec.uniform(model, n, a)

    if k is None or not 0 <= k <= n:
        raise ValueError(f"Rule {rule!r} needs 0 <= k <= {n}, got {k}")
    constants = np.zeros(n)
    if rule == "random_k":
        rng = np.random.default_rng(seed)
        chosen = rng.choice(n, size=k, replace=False)
        constants[chosen] = a
        description = f"random_k({k}, {a}, seed={seed})"
    elif rule == "top_k":
        if metric is None:
            raise ValueError("Rule 'top_k' needs a node metric")
        constants[top_k_ids(metric, k)] = a
        description = f"top_k({k}, {metric.kind}, {a})"
    else:
        raise ValueError(f"Unknown altruism assignment rule: {rule}")
    logger.debug("Assigned %d altruists with %s", k, description)
    return AltruismSpec(model, constants, description)


def altruism_incidence(g: CommGraph, spec: AltruismSpec) -> np.ndarray:
    """
    A_u = sum of a_w over every w whose altruism scope contains u.

    The scope of w is contacts[w] under local altruism and N minus w under
    global altruism; the selfish model gives zeros.
    """
    a = spec.constants
    if spec.model == "selfish":
        return np.zeros(g.node_count)
    if spec.model == "local":
        return np.asarray(contact_matrix(g) @ a, dtype=np.float64)
    return math.fsum(a) - a
