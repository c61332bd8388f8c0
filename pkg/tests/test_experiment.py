"""
End-to-end tests for run_experiment, result bundles and plot data.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from fmd_game.exceptions import MissingRunError, NonConvergenceError
from fmd_game.experiment import FIGURES, emit_plot_data, index_rows, load_bundle, prepare_game, run_experiment
from fmd_game.utils.config import parse_config
from fmd_game.utils.serialization import read_csv

from helpers import edge_list_text, random_pairs


@pytest.fixture
def edge_file(tmp_path):
    """Twelve-node random message log on disk."""
    path = tmp_path / "toy.txt"
    path.write_text(edge_list_text(random_pairs(np.random.default_rng(42), 12, 40)))
    return path


@pytest.fixture
def config_data(edge_file, tmp_path):
    """Experiment dict running every objective on the toy log."""
    return {
        "dataset": str(edge_file),
        "halve": False,
        "game": {"L": 20.0, "f": 1.0},
        "altruism": {"model": "global", "a": 1.0},
        "inits": [
            {"kind": "threshold", "property": "bc", "level": "-10"},
            {"kind": "random"},
            {"kind": "uniform", "level": "-1"},
        ],
        "objectives": ["nash", "social", "uniform_sweep"],
        "seeds": [0, 1],
        "output": str(tmp_path / "results"),
    }


def run_without_wall_time(path):
    data = json.loads(path.read_text())
    data.pop("wall_time")
    return data


class TestPrepareGame:
    """Test game preparation from a config."""

    def test_explicit_and_derived_L(self, config_data):
        """Test an explicit L is used as given and 'derive' uses M - max_in + 1."""
        game = prepare_game(parse_config(config_data))
        assert game.params.L == 20.0
        config_data["game"] = {"L": "derive"}
        derived = prepare_game(parse_config(config_data))
        g = derived.graph
        assert derived.params.L == g.total_messages - g.max_in + 1
        assert len(derived.bc) == g.node_count


class TestRunExperiment:
    """Test the bundle written by run_experiment."""

    def test_bundle_layout(self, config_data):
        """Test every run, report, trace and table is written."""
        bundle = run_experiment(parse_config(config_data))
        directory = bundle.directory
        assert len(bundle.runs) == 8
        assert (directory / "bundle.json").exists()
        assert len(list((directory / "runs").glob("*.json"))) == 8
        assert len(list((directory / "reports").glob("*.json"))) == 8
        assert len(list((directory / "traces").glob("*.csv"))) == 8
        assert len(read_csv(directory / "sweep.csv")) == 11
        assert len(read_csv(directory / "bc.csv")) == len(bundle.runs[0].terminal)
        assert all(run.converged for run in bundle.runs)

    def test_index_percentages(self, config_data):
        """Test the cheapest run of each objective sits at SW% 100 and others below."""
        bundle = run_experiment(parse_config(config_data))
        rows = read_csv(bundle.directory / "index.csv")
        assert len(rows) == 8
        for objective in ("nash", "social"):
            subset = [r for r in rows if r["objective"] == objective]
            cheapest = min(subset, key=lambda r: float(r["sumcost"]))
            assert float(cheapest["sw_pct"]) == 100.0
            assert float(cheapest["iter_pct"]) == 100.0
            assert all(float(r["sw_pct"]) <= 100.0 for r in subset)
        assert [r["init_label"] for r in rows[:4]] == [
            "['bc', 'Threshold', 'all from -10']", "random_0", "random_1", "uniform_-1",
        ]

    def test_index_rows_baseline(self, config_data):
        """Test SW% is best cost over cost, rounded to two decimals."""
        bundle = run_experiment(parse_config(config_data))
        rows = index_rows(bundle.runs, bundle.reports)
        nash = [(run, row) for run, row in zip(bundle.runs, rows) if run.objective == "nash"]
        best = min(run.breakdown.social_cost for run, _ in nash)
        for run, row in nash:
            assert row["sw_pct"] == pytest.approx(100.0 * best / run.breakdown.social_cost, abs=0.01)

    def test_deterministic(self, config_data, tmp_path):
        """Test two runs of the same config write identical results apart from wall time."""
        first = run_experiment(parse_config(config_data))
        config_data["output"] = str(tmp_path / "again")
        second = run_experiment(parse_config(config_data))
        for name in ("index.csv", "sweep.csv", "bc.csv"):
            assert (first.directory / name).read_bytes() == (second.directory / name).read_bytes()
        for path in sorted((first.directory / "runs").glob("*.json")):
            assert run_without_wall_time(path) == run_without_wall_time(second.directory / "runs" / path.name)

    def test_load_bundle(self, config_data):
        """Test a bundle read back from disk matches the one returned."""
        written = run_experiment(parse_config(config_data))
        loaded = load_bundle(written.directory / "bundle.json")
        assert loaded.label == written.label
        assert [r.terminal for r in loaded.runs] == [r.terminal for r in written.runs]
        assert [r.to_dict() for r in loaded.reports] == [r.to_dict() for r in written.reports]
        assert len(loaded.sweep) == 11
        assert np.array_equal(loaded.bc.values, written.bc.values)
        assert loaded.find("random_1", "social")[0].objective == "social"

    def test_missing_run(self, config_data):
        """Test asking for an absent run names it."""
        bundle = run_experiment(parse_config(config_data))
        with pytest.raises(MissingRunError, match="random_9"):
            bundle.find("random_9", "nash")

    def test_strict_non_convergence(self, config_data):
        """Test strict mode raises after the bundle is written."""
        config_data.update(max_iters=1, objectives=["nash"], inits=[{"kind": "uniform", "level": "-1"}])
        config_data["altruism"] = {"model": "selfish"}
        config = parse_config(config_data)
        with pytest.raises(NonConvergenceError):
            run_experiment(config, strict=True)
        rows = read_csv(next(Path(config.output).glob("*/index.csv")))
        assert rows[0]["converged"] == "False"


class TestPlotData:
    """Test emit_plot_data."""

    def test_every_figure(self, config_data, tmp_path):
        """Test every figure series is written from a complete bundle."""
        bundle = load_bundle(run_experiment(parse_config(config_data)).directory)
        out = tmp_path / "plots"
        for figure in FIGURES:
            assert emit_plot_data(bundle, figure, out).exists()

        sweep = read_csv(out / "sweep.csv")
        assert len(sweep) == 11
        assert sum(1 for row in sweep if row["is_min"] == "True") >= 1

        for row in read_csv(out / "cost_composition.csv"):
            assert float(row["privacy_share"]) + float(row["bandwidth_share"]) == pytest.approx(1.0)

        n = len(bundle.runs[0].terminal)
        histogram = read_csv(out / "ne_histogram.csv")
        for label in {row["init_label"] for row in histogram}:
            assert sum(int(r["node_count"]) for r in histogram if r["init_label"] == label) == n

        (poa_row,) = read_csv(out / "poa_pos.csv")
        assert float(poa_row["poa"]) >= float(poa_row["pos"]) >= 1.0 - 1e-9

    def test_missing_objective(self, config_data, tmp_path):
        """Test a figure whose runs are absent raises MissingRunError."""
        config_data["objectives"] = ["nash"]
        bundle = run_experiment(parse_config(config_data))
        with pytest.raises(MissingRunError):
            emit_plot_data(bundle, "so_histogram", tmp_path / "plots")
        with pytest.raises(MissingRunError):
            emit_plot_data(bundle, "sweep", tmp_path / "plots")

    def test_unknown_figure(self, config_data, tmp_path):
        """Test unknown figure names are rejected."""
        bundle = run_experiment(parse_config(config_data))
        with pytest.raises(ValueError):
            emit_plot_data(bundle, "fig99", tmp_path)
