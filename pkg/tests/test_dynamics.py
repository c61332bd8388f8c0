"""
Tests for best-response dynamics, the social-optimum search and sweeps.
"""

import logging
import math

import numpy as np
import pytest

from fmd_game.analysis.verification import verify_epsilon_ne, verify_step_stable
from fmd_game.dynamics.best_response import (
    RunRecord,
    brd_run,
    replay_trace,
    so_search,
    sweep_optimum,
    thin_trace,
    uniform_sweep,
)
from fmd_game.dynamics.initialization import InitSpec, init_random
from fmd_game.types import Profile

from helpers import SMALL_LADDER, random_graph


def utility_by_hand(in_msgs, M, rates, L, f, a, u, profile):
    """phi_u under global altruism, computed with plain products."""
    def privacy(v):
        alpha = 1.0
        for w, i in enumerate(profile):
            if w != v:
                alpha *= 1.0 - rates[i]
        return L * (1.0 - (1.0 - alpha) ** in_msgs[v])

    own = privacy(u) + f * (in_msgs[u] + rates[profile[u]] * (M - in_msgs[u]))
    return -own - a * sum(privacy(v) for v in range(len(profile)) if v != u)


def brute_force_brd(in_msgs, M, rates, L, f, a, epsilon, cap=1000):
    """Maximum-gain single-step dynamics; ties go to the lowest node, then to the increment."""
    n = len(in_msgs)
    profile = [0] * n
    iterations = 0
    while iterations < cap:
        best = None
        for u in range(n):
            for step in (1, -1):
                j = profile[u] + step
                if not 0 <= j < len(rates):
                    continue
                moved = profile.copy()
                moved[u] = j
                gain = (
                    utility_by_hand(in_msgs, M, rates, L, f, a, u, moved)
                    - utility_by_hand(in_msgs, M, rates, L, f, a, u, profile)
                )
                if gain > epsilon and (best is None or gain > best[0] + 1e-12):
                    best = (gain, u, j)
        if best is None:
            break
        profile[best[1]] = best[2]
        iterations += 1
    return tuple(profile), iterations


class TestBestResponse:
    """Test brd_run."""

    def test_selfish_collapses_to_zero(self, make_params):
        """Test selfish dynamics end with every player at rate 0."""
        for seed in range(4):
            g = random_graph(seed, n=30, messages=90)
            params = make_params(g)
            for init_seed in range(3):
                record = brd_run(g, params, init_random(g, params.ladder, init_seed))
                assert record.converged
                assert record.terminal == Profile.uniform(g.node_count, 0)
                assert record.iterations == sum(init_random(g, params.ladder, init_seed).idx)

    def test_matches_brute_force_simulator(self, triangle, make_params):
        """Test the move sequence on the 3-cycle with ladder (0, 1/4, 1/2) and global a = 1."""
        params = make_params(triangle, model="global", a=1.0, L=10.0, f=1.0, ladder=SMALL_LADDER)
        record = brd_run(triangle, params, Profile.uniform(3, 0))
        expected, iterations = brute_force_brd(
            list(triangle.in_msgs), triangle.total_messages, SMALL_LADDER.rates,
            10.0, 1.0, 1.0, 1e-5,
        )
        assert record.converged
        assert record.terminal.idx == expected
        assert record.iterations == iterations

    def test_trace_moves(self, make_params):
        """Test each trace entry is a single step with a gain above epsilon."""
        g = random_graph(5, n=20, messages=60)
        params = make_params(g, model="global", a=0.5)
        record = brd_run(g, params, Profile.uniform(g.node_count, 0))
        for entry in record.trace:
            assert abs(entry.new_idx - entry.old_idx) == 1
            assert entry.gain > record.epsilon
        assert [e.iteration for e in record.trace] == list(range(1, record.iterations + 1))

    def test_replay_reaches_terminal(self, make_params):
        """Test re-applying the trace reproduces the terminal profile."""
        g = random_graph(6, n=20, messages=60)
        params = make_params(g, model="local", a=1.0)
        init = init_random(g, params.ladder, 3)
        record = brd_run(g, params, init)
        assert replay_trace(init, record.trace) == record.terminal

    def test_replay_rejects_wrong_start(self, make_params):
        """Test a trace replayed from the wrong profile fails."""
        g = random_graph(6, n=20, messages=60)
        params = make_params(g)
        record = brd_run(g, params, Profile.uniform(g.node_count, 10))
        with pytest.raises(ValueError):
            replay_trace(Profile.uniform(g.node_count, 0), record.trace)

    def test_deterministic(self, make_params):
        """Test identical inputs give identical records."""
        g = random_graph(8, n=25, messages=80)
        params = make_params(g, model="global", a=0.2)
        init = init_random(g, params.ladder, 1)
        first, second = brd_run(g, params, init), brd_run(g, params, init)
        first.wall_time = second.wall_time = 0.0
        assert first.to_dict() == second.to_dict()

    def test_trace_thinning(self, make_params):
        """Test thinning keeps every k-th move and always the last one."""
        g = random_graph(9, n=20, messages=60)
        params = make_params(g)
        init = init_random(g, params.ladder, 2)
        full = brd_run(g, params, init)
        thinned = brd_run(g, params, init, trace_thinning=7)
        assert [e.iteration for e in thinned.trace] == [e.iteration for e in thin_trace(full.trace, 7)]
        assert thinned.trace[-1].iteration == full.iterations
        assert all(e.iteration % 7 == 0 for e in thinned.trace[:-1])

    def test_max_iters_guard(self, make_params, caplog):
        """Test hitting max_iters leaves the run non-converged with a warning."""
        g = random_graph(10, n=10, messages=30)
        params = make_params(g)
        with caplog.at_level(logging.WARNING):
            record = brd_run(g, params, Profile.uniform(g.node_count, 10), max_iters=3)
        assert not record.converged
        assert record.iterations == 3
        assert "max_iters" in caplog.text

    def test_fixed_point_at_max_iters_converges(self, make_params):
        """Test reaching a fixed point exactly at max_iters still counts as converged."""
        g = random_graph(10, n=10, messages=30)
        params = make_params(g)
        init = Profile.uniform(g.node_count, 0).with_move(0, 1)
        assert brd_run(g, params, init, max_iters=1).converged
        assert brd_run(g, params, Profile.uniform(g.node_count, 0), max_iters=0).converged

    def test_bad_arguments(self, triangle, make_params):
        """Test non-positive epsilon and thinning are rejected."""
        params = make_params(triangle)
        with pytest.raises(ValueError):
            brd_run(triangle, params, Profile.uniform(3, 0), epsilon=0.0)
        with pytest.raises(ValueError):
            brd_run(triangle, params, Profile.uniform(3, 0), trace_thinning=0)

    def test_relative_epsilon(self, make_params):
        """Test relative-epsilon runs stop at relatively step-stable profiles."""
        g = random_graph(11, n=15, messages=50)
        params = make_params(g, model="global", a=1.0)
        record = brd_run(g, params, Profile.uniform(g.node_count, 0), epsilon=1e-6, relative_epsilon=True)
        assert record.converged
        report = verify_step_stable(g, params, record.terminal, 1e-6, relative_epsilon=True)
        assert report.holds

    def test_record_dict(self, make_params):
        """Test a RunRecord survives to_dict / from_dict."""
        g = random_graph(12, n=10, messages=30)
        params = make_params(g)
        spec = InitSpec(kind="random", seed=4)
        record = brd_run(g, params, init_random(g, params.ladder, 4), init_spec=spec)
        restored = RunRecord.from_dict(record.to_dict())
        assert restored.terminal == record.terminal
        assert restored.init == spec
        assert restored.init_label == "random_4"
        assert restored.trace == record.trace


class TestSocialOptimum:
    """Test so_search."""

    @pytest.mark.parametrize("model,a", [("selfish", 0.0), ("local", 1.0), ("global", 0.1)])
    def test_no_full_ladder_improvement(self, make_params, model, a):
        """Test the terminal profile has no welfare-improving coordinate change."""
        g = random_graph(13, n=15, messages=50)
        params = make_params(g, model=model, a=a)
        record = so_search(g, params, Profile.uniform(g.node_count, 0))
        assert record.converged
        assert record.objective == "social"
        report = verify_epsilon_ne(g, params, record.terminal, record.epsilon, objective="welfare")
        assert report.holds, str(report)

    def test_welfare_never_decreases(self, make_params):
        """Test every applied move raises welfare."""
        g = random_graph(14, n=12, messages=40)
        params = make_params(g, model="global", a=1.0)
        record = so_search(g, params, Profile.uniform(g.node_count, 10))
        values = [e.objective_after for e in record.trace]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert record.breakdown.welfare == pytest.approx(values[-1])

    def test_single_step_only(self, make_params):
        """Test disabling the escape still gives a welfare step-stable profile."""
        g = random_graph(15, n=12, messages=40)
        params = make_params(g, model="local", a=1.0)
        record = so_search(g, params, Profile.uniform(g.node_count, 0), full_ladder=False)
        assert verify_step_stable(g, params, record.terminal, record.epsilon, objective="welfare").holds


class TestUniformSweep:
    """Test the uniform-rate sweep."""

    def test_rate_zero_row(self, make_params):
        """Test rate 0 costs L per receiver plus f * M."""
        g = random_graph(16, n=20, messages=70)
        params = make_params(g, model="global", a=1.0, L=50.0, f=2.0)
        rows = uniform_sweep(g, params)
        receivers = sum(1 for i in g.in_msgs if i > 0)
        assert rows[0].total_privacy == pytest.approx(50.0 * receivers)
        assert rows[0].total_bandwidth == pytest.approx(2.0 * g.total_messages)
        assert rows[0].rate_label == "zero"
        assert len(rows) == params.ladder.size

    def test_top_row_bandwidth(self, make_params):
        """Test rate 1/2 bandwidth is sum f * (in + (M - in) / 2)."""
        g = random_graph(17, n=20, messages=70)
        params = make_params(g)
        top = uniform_sweep(g, params)[-1]
        M = g.total_messages
        assert top.rate_label == "-1"
        assert top.total_bandwidth == pytest.approx(math.fsum(i + 0.5 * (M - i) for i in g.in_msgs))

    def test_optimum(self, make_params):
        """Test sweep_optimum picks the cheapest row."""
        g = random_graph(18, n=20, messages=70)
        rows = uniform_sweep(g, make_params(g, L=1000.0))
        best = sweep_optimum(rows)
        assert best.social_cost == min(r.social_cost for r in rows)
        assert np.isfinite(best.rate)
