"""
Dataset-scale checks against the published results.

These need the SNAP files in the cache (`fmd-game fetch message` and
`fmd-game fetch mail`) and are skipped otherwise. Runs are shared per module,
so the whole file costs a handful of BRD runs per dataset.
"""

from functools import lru_cache

import numpy as np
import pytest

from fmd_game.analysis.metrics import equilibrium_metrics
from fmd_game.analysis.verification import verify_epsilon_ne
from fmd_game.dynamics.best_response import brd_run, so_search, sweep_optimum, uniform_sweep
from fmd_game.dynamics.initialization import InitSpec, build_initial_profile, init_random
from fmd_game.game.core import make_state
from fmd_game.graph.centrality import betweenness_centrality
from fmd_game.graph.graph_io import build_comm_graph, derive_privacy_loss, halve_graph, read_edge_file
from fmd_game.types import AltruismSpec, GameParams, Profile, StrategyLadder
from fmd_game.utils.config import default_cache_dir
from fmd_game.utils.dataset_loader import DATASETS

pytestmark = pytest.mark.slow

PUBLISHED = {"message": (1899, 59835, 14797), "mail": (986, 332334, 77947)}
SWEEP_OPTIMUM = {"message": "-6", "mail": "-7"}
LADDER = StrategyLadder.default()
RANDOM_SEEDS = (0, 1, 2)


def dataset_path(name):
    path = default_cache_dir() / DATASETS[name].filename
    if not path.exists():
        pytest.skip(f"dataset {name} is not cached at {path}")
    return path


@lru_cache(maxsize=None)
def _halved(name):
    return halve_graph(build_comm_graph(read_edge_file(dataset_path(name))))


@lru_cache(maxsize=None)
def _bc(name):
    return betweenness_centrality(_halved(name))


def halved(name):
    dataset_path(name)
    return _halved(name)


def game(name, model, a):
    g = halved(name)
    altruism = AltruismSpec.uniform(model, g.node_count, a)
    return g, GameParams(L=derive_privacy_loss(g), f=1.0, altruism=altruism, ladder=LADDER)


@lru_cache(maxsize=None)
def _random_run(name, model, a, seed):
    g, params = game(name, model, a)
    return brd_run(g, params, init_random(g, LADDER, seed))


def random_run(name, model, a, seed=0):
    dataset_path(name)
    return _random_run(name, model, a, seed)


class TestGraphs:
    """Test dataset sizes, L and the uniform sweep."""

    @pytest.mark.parametrize("name", ["message", "mail"])
    def test_sizes_and_privacy_loss(self, name):
        """Test node and event counts exactly, and the halved L within 2%."""
        nodes, events, published_L = PUBLISHED[name]
        log = read_edge_file(dataset_path(name))
        assert len(log) == events
        assert len(log.labels) == nodes
        g = halved(name)
        assert g.node_count == -(-nodes // 2)
        assert abs(derive_privacy_loss(g) - published_L) / published_L < 0.02

    @pytest.mark.parametrize("name", ["message", "mail"])
    def test_uniform_sweep_optimum(self, name):
        """Test the cheapest uniform rate is within one ladder step of the published one."""
        g, params = game(name, "selfish", 0.0)
        best = sweep_optimum(uniform_sweep(g, params))
        assert abs(best.level_idx - LADDER.index_from_label(SWEEP_OPTIMUM[name])) <= 1

    def test_incremental_fidelity_on_mail(self):
        """Test 10,000 random moves on halved mail match a fresh state within 1e-9."""
        g, params = game("mail", "global", 0.1)
        rng = np.random.default_rng(4)
        state = make_state(g, params, init_random(g, LADDER, 4), refresh_interval=10**9)
        for _ in range(10_000):
            u = int(rng.integers(g.node_count))
            j = int(rng.integers(LADDER.size))
            if j != state.idx[u]:
                state.apply_move(u, j)
        fresh = make_state(g, params, state.profile)
        assert np.allclose(state.alpha, fresh.alpha, rtol=1e-9, atol=0)
        assert np.allclose(state.privacy, fresh.privacy, rtol=1e-9, atol=0)
        assert np.allclose(state.bandwidth, fresh.bandwidth, rtol=1e-9, atol=0)
        assert state.welfare() == pytest.approx(fresh.welfare(), rel=1e-9)


class TestEquilibria:
    """Test the qualitative shape of equilibria and optima."""

    @pytest.mark.parametrize("name", ["message", "mail"])
    def test_selfish_collapse(self, name):
        """Test selfish dynamics from a random start end at the all-zero exact NE."""
        run = random_run(name, "selfish", 0.0)
        g, params = game(name, "selfish", 0.0)
        assert run.converged
        assert run.terminal == Profile.uniform(g.node_count, 0)
        assert verify_epsilon_ne(g, params, run.terminal, 0.0).holds

    @pytest.mark.parametrize("a", [0.1, 1.0])
    def test_local_altruism_is_polarized(self, a):
        """Test a local-altruism mail NE has a zero-rate majority and 5 to 40 max nodes."""
        run = random_run("mail", "local", a)
        assert run.converged
        histogram = run.terminal.histogram(LADDER)
        n = len(run.terminal)
        assert histogram[0] > n / 2
        assert 5 <= histogram[LADDER.top] <= 40

    def test_max_nodes_hold_betweenness(self):
        """Test max nodes of some local-altruism mail NE hold at least 30% of betweenness."""
        g = halved("mail")
        shares = []
        for a in (0.1, 1.0):
            _, params = game("mail", "local", a)
            report = equilibrium_metrics(g, params, random_run("mail", "local", a).terminal, _bc("mail"))
            shares.append(report.max_node_bc_share)
        assert max(shares) >= 0.30

    @pytest.mark.parametrize("model,a", [("local", 0.1), ("local", 1.0), ("global", 0.1), ("global", 1.0)])
    def test_top_decile_holds_half_of_betweenness(self, model, a):
        """Test the top 10% of contributors in the best NE hold half of the betweenness."""
        g, params = game("mail", model, a)
        runs = [random_run("mail", model, a, seed) for seed in RANDOM_SEEDS[:2]]
        best = min(runs, key=lambda run: run.breakdown.social_cost)
        report = equilibrium_metrics(g, params, best.terminal, _bc("mail"))
        assert report.bc_cdf_percentiles[0] / report.bc_total >= 0.50

    @pytest.mark.parametrize("model", ["global", "local"])
    def test_cost_composition(self, model):
        """Test bandwidth dominates at the optimum and privacy dominates at a low-altruism NE."""
        g, params = game("message", model, 0.1)
        optimum = so_search(g, params, Profile.uniform(g.node_count, LADDER.index_from_label("-6")))
        assert optimum.converged
        assert optimum.breakdown.total_bandwidth / optimum.breakdown.social_cost >= 0.90
        equilibrium = random_run("message", model, 0.1)
        assert equilibrium.breakdown.privacy_share > 0.50

    def test_threshold_init_converges_fastest(self):
        """Test the bc-threshold start needs fewer iterations than every random start."""
        g, params = game("mail", "global", 0.1)
        spec = InitSpec(kind="threshold", property="bc", cutoff=0.01, level_idx=LADDER.index_from_label("-10"))
        threshold = brd_run(g, params, build_initial_profile(spec, g, LADDER, bc=_bc("mail")), init_spec=spec)
        random_iterations = [random_run("mail", "global", 0.1, seed).iterations for seed in RANDOM_SEEDS]
        assert threshold.converged
        assert threshold.iterations < min(random_iterations)
