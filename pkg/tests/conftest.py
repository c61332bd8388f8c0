"""
Shared fixtures for the fmd_game test suite.
"""

import pytest

from fmd_game.types import AltruismSpec, GameParams, StrategyLadder

from helpers import graph_from_pairs, random_graph as _random_graph


@pytest.fixture
def triangle():
    """A -> B -> C -> A, one message each."""
    return graph_from_pairs([("A", "B"), ("B", "C"), ("C", "A")])


@pytest.fixture
def make_params():
    """Factory for GameParams with a uniform altruism assignment."""
    def _make(g, model="selfish", a=0.0, L=10.0, f=1.0, ladder=None):
        altruism = AltruismSpec.uniform(model, g.node_count, a)
        return GameParams(L=L, f=f, altruism=altruism, ladder=ladder or StrategyLadder.default())
    return _make


@pytest.fixture
def random_graph():
    """Factory for seeded random message graphs."""
    return _random_graph

