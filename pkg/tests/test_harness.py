"""
Test Suite for the benchmark harness
Configuration, experiment execution, result files and grid sampling
"""

import json
import os

import numpy as np
import pytest


def _small_config(**overrides):
    from src.harness import ExperimentConfig

    data = {
        "objectives": ["xin_she_yang_n4", "salomon", "drop_wave", "schaffer_n2"],
        "algorithms": ["qbo", "sa", "qa"],
        "seeds": [0],
        "max_evaluations": 200,
        "qa": {"replicas": 4},
    }
    data.update(overrides)
    return ExperimentConfig.from_mapping(data)


def _row(function="sphere", algorithm="qbo", seed=0, iterations=None, evaluations=100,
         best_f=0.5, ratio=50.0, wall_ms=None):
    from src.harness import ResultRow

    return ResultRow(function, algorithm, seed, iterations, evaluations, best_f, ratio, wall_ms)


class TestExperimentConfig:
    """Test cases for ExperimentConfig loading"""

    def test_nested_and_dotted_keys_are_equivalent(self):
        """Test sa: {alpha: x} and sa.alpha: x give the same config"""
        from src.harness import ExperimentConfig

        base = {"objectives": ["sphere"], "algorithms": ["sa"], "seeds": [1]}
        nested = ExperimentConfig.from_mapping({**base, "sa": {"alpha": 0.9}})
        dotted = ExperimentConfig.from_mapping({**base, "sa.alpha": 0.9})
        assert nested.sa.alpha == dotted.sa.alpha == 0.9

    def test_seed_range(self):
        """Test seed_base + n_seeds expands to consecutive seeds"""
        config = _small_config(seeds=None, seed_base=10, n_seeds=3)
        assert config.seeds == (10, 11, 12)

    def test_overrides_win(self):
        """Test KEY=VALUE overrides are parsed as YAML and replace file values"""
        from src.harness import ExperimentConfig

        config = ExperimentConfig.from_mapping(
            {"objectives": ["sphere"], "algorithms": ["qbo"], "seeds": [0], "max_evaluations": 10},
            overrides=["max_evaluations=500", "qbo.power_cap=12", "seeds=[3, 4]", "trace=true"],
        )
        assert config.max_evaluations == 500
        assert config.qbo.power_cap == 12
        assert config.seeds == (3, 4)
        assert config.trace is True

    def test_auto_t0(self):
        """Test sa.t0: auto means T0 = f(x0) + 1"""
        config = _small_config(sa={"t0": "auto"})
        assert config.sa.t0 is None

    def test_per_objective_dim_and_box(self):
        """Test dim.<name> and box.<name> overrides"""
        config = _small_config(dim={"salomon": 5}, box={"salomon": [-50, 50]})
        assert config.dim_for("salomon") == 5
        assert config.dim_for("drop_wave") is None
        assert config.boxes["salomon"] == (-50.0, 50.0)

    def test_unknown_key_rejected(self):
        """Test keys outside the schema raise InvalidArgumentError"""
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            _small_config(population=30)
        with pytest.raises(InvalidArgumentError):
            _small_config(sa={"cooling": 0.9})

    def test_empty_seed_list_rejected(self):
        """Test an empty seed list raises InvalidArgumentError"""
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            _small_config(seeds=[])

    def test_malformed_override(self):
        """Test an override without '=' raises"""
        from src.harness import parse_override
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            parse_override("max_evaluations")

    def test_from_file(self, tmp_path):
        """Test YAML files load through from_file"""
        from src.harness import ExperimentConfig

        path = tmp_path / "experiment.yaml"
        path.write_text("objectives: [sphere]\nalgorithms: [qbo]\nn_seeds: 2\nsa:\n  alpha: 0.99\n")
        config = ExperimentConfig.from_file(path)
        assert config.seeds == (0, 1)
        assert config.sa.alpha == 0.99

    def test_missing_file(self, tmp_path):
        """Test a missing config file raises InvalidArgumentError"""
        from src.harness import ExperimentConfig
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            ExperimentConfig.from_file(tmp_path / "absent.yaml")

    def test_shipped_configs_load(self):
        """Test the configs in config/ are valid"""
        from pathlib import Path
        from src.harness import ExperimentConfig

        root = Path(__file__).resolve().parent.parent / "config"
        full = ExperimentConfig.from_file(root / "settings.yaml")
        assert len(full.seeds) == 50
        assert full.algorithms == ("qbo", "sa", "qa")
        full.validate_names()
        ExperimentConfig.from_file(root / "smoke.yaml").validate_names()


class TestRunExperiment:
    """Test cases for run_experiment"""

    def test_cell_count(self):
        """Test 4 functions x 3 algorithms x 1 seed gives 12 rows and 12 summaries"""
        from src.harness import run_experiment

        result = run_experiment(_small_config())
        assert len(result.rows) == 12
        assert len(result.summary) == 12
        assert [r.sort_key for r in result.rows] == sorted(r.sort_key for r in result.rows)
        for row in result.rows:
            assert row.evaluations <= 200
            assert 0.0 <= row.improvement_ratio <= 100.0

    def test_unknown_name_fails_before_any_run(self, mocker):
        """Test an unknown algorithm raises NotFoundError and nothing runs"""
        from src.harness import run_experiment
        from src.errors import NotFoundError

        spy = mocker.patch("src.harness.run")
        with pytest.raises(NotFoundError):
            run_experiment(_small_config(algorithms=["qbo", "genetic"]))
        spy.assert_not_called()

    def test_thread_count_does_not_change_results(self):
        """Test results.csv is byte-identical for 1 and 8 threads"""
        from src.harness import render_results_csv, run_experiment

        single = run_experiment(_small_config(seeds=[0, 1, 2], jobs=1))
        many = run_experiment(_small_config(seeds=[0, 1, 2], jobs=8))
        assert render_results_csv(single.rows) == render_results_csv(many.rows)

    def test_traces_only_when_enabled(self):
        """Test traces are collected only with trace: true"""
        from src.harness import run_experiment

        assert run_experiment(_small_config(seeds=[0])).traces == {}
        traced = run_experiment(_small_config(seeds=[0], trace=True))
        assert len(traced.traces) == 12


def _protocol_summary(objectives, algorithms):
    """50 seeds at budget 1e5 and tolerance 1e-3, keyed by (function, algorithm)"""
    from src.harness import ExperimentConfig, run_experiment

    config = ExperimentConfig.from_mapping({
        "objectives": objectives,
        "algorithms": algorithms,
        "dim": 2,
        "n_seeds": 50,
        "max_evaluations": 100_000,
        "success_tolerance": 1e-3,
        "jobs": 4,
    })
    result = run_experiment(config)
    return {(s.function, s.algorithm): s for s in result.summary}, result.rows


@pytest.mark.slow
class TestBenchmarkProtocol:
    """Full-size seeded runs of uniform quantized search against annealing"""

    def test_drop_wave_favours_annealing(self):
        """Test uniform draws rarely hit the 1e-3 basin of Drop-Wave while SA often does"""
        summary, _ = _protocol_summary(["drop_wave"], ["qbo", "sa"])
        qbo, sa = summary[("drop_wave", "qbo")], summary[("drop_wave", "sa")]
        # per-draw hit probability is about 8e-7, so roughly 8% of runs succeed
        assert qbo.successes <= 15
        assert qbo.median_iterations_to_success is None
        assert sa.successes > qbo.successes

    def test_schaffer_n2_favours_annealing(self):
        """Test SA succeeds at least as often as QBO and needs fewer iterations"""
        summary, _ = _protocol_summary(["schaffer_n2"], ["qbo", "sa"])
        qbo, sa = summary[("schaffer_n2", "qbo")], summary[("schaffer_n2", "sa")]
        assert sa.successes >= qbo.successes
        assert sa.median_iterations_to_success is not None
        assert (
            qbo.median_iterations_to_success is None
            or qbo.median_iterations_to_success > sa.median_iterations_to_success
        )

    def test_salomon_is_out_of_reach(self):
        """Test the 1e-3 basin of Salomon is too small for 1e5 uniform draws"""
        summary, rows = _protocol_summary(["salomon"], ["qbo"])
        assert summary[("salomon", "qbo")].successes <= 1
        assert all(row.evaluations <= 100_000 for row in rows)

    def test_xin_she_yang_n4_best_values(self):
        """Test every run ends inside the central basin and most end near the optimum"""
        summary, rows = _protocol_summary(["xin_she_yang_n4"], ["qbo"])
        best = np.array([row.best_f for row in rows])
        assert len(best) == 50
        # f < 1 only near the origin, where f is about |x| + |y|
        assert np.all((best >= 0.0) & (best < 1.0))
        assert summary[("xin_she_yang_n4", "qbo")].median_best_f < 0.5


class TestSummarize:
    """Test cases for summarize()"""

    def test_medians_and_success_rate(self):
        """Test per-cell aggregation"""
        from src.harness import summarize

        rows = [
            _row(seed=0, iterations=10, evaluations=11, best_f=0.0, ratio=100.0),
            _row(seed=1, iterations=30, evaluations=31, best_f=0.0, ratio=100.0),
            _row(seed=2, iterations=None, evaluations=100, best_f=0.4, ratio=60.0),
        ]
        (summary,) = summarize(rows)
        assert summary.n_seeds == 3
        assert summary.successes == 2
        assert summary.success_rate == pytest.approx(2 / 3)
        assert summary.median_iterations_to_success == 30
        assert summary.median_evaluations == 31
        assert summary.median_improvement_ratio == 100.0

    def test_failures_dominate_iteration_median(self):
        """Test a median landing on a failure is reported as missing"""
        from src.harness import summarize

        rows = [_row(seed=0, iterations=5), _row(seed=1), _row(seed=2)]
        (summary,) = summarize(rows)
        assert summary.median_iterations_to_success is None
        assert summary.to_fields()[5] == ""

    def test_one_summary_per_cell(self):
        """Test grouping by (function, algorithm)"""
        from src.harness import summarize

        rows = [_row(algorithm="sa"), _row(algorithm="qbo"), _row(function="salomon")]
        summary = summarize(rows)
        assert [(s.function, s.algorithm) for s in summary] == [
            ("salomon", "qbo"), ("sphere", "qbo"), ("sphere", "sa"),
        ]


class TestWriteOutputs:
    """Test cases for write_outputs and the file formats"""

    def test_zero_rows_writes_header_only(self, tmp_path):
        """Test an empty result set gives a header-only results.csv"""
        from src.harness import write_outputs

        write_outputs([], None, tmp_path)
        assert (tmp_path / "results.csv").read_text() == (
            "function,algorithm,seed,iterations_to_success,evaluations,best_f,improvement_ratio,wall_ms\n"
        )

    def test_number_formatting(self, tmp_path):
        """Test 6 significant digits, '100' for a full ratio and blank failure fields"""
        from src.harness import write_outputs

        rows = [
            _row(iterations=254, evaluations=255, best_f=0.000123456789, ratio=100.0),
            _row(seed=1, iterations=None, evaluations=100000, best_f=0.3333333333, ratio=97.123456789),
        ]
        write_outputs(rows, None, tmp_path)
        lines = (tmp_path / "results.csv").read_text().splitlines()
        assert lines[1] == "sphere,qbo,0,254,255,0.000123457,100,"
        assert lines[2] == "sphere,qbo,1,,100000,0.333333,97.1235,"

    def test_wall_ms_rendered_only_with_timing(self, tmp_path):
        """Test wall_ms is blank unless timing is requested"""
        from src.harness import read_results_csv, write_outputs

        write_outputs([_row(wall_ms=12.5)], None, tmp_path / "plain")
        write_outputs([_row(wall_ms=12.5)], None, tmp_path / "timed", timing=True)
        assert read_results_csv(tmp_path / "plain" / "results.csv")[0].wall_ms is None
        assert read_results_csv(tmp_path / "timed" / "results.csv")[0].wall_ms == 12.5

    def test_manifest_with_traces(self, tmp_path):
        """Test a traced 12-cell run lists 12 jsonl files plus 3 csv/txt files"""
        from src.harness import run_experiment, write_experiment

        result = run_experiment(_small_config(trace=True))
        entries = write_experiment(result, tmp_path)
        names = [name for name, _ in entries]
        assert len([n for n in names if n.endswith(".jsonl")]) == 12
        assert {"results.csv", "summary.csv", "manifest.txt"} <= set(names)
        assert len(names) == 15

        manifest = (tmp_path / "manifest.txt").read_text().splitlines()
        assert len(manifest) == 15
        for line in manifest:
            name, size = line.rsplit(" ", 1)
            assert os.path.getsize(tmp_path / name) == int(size)

    def test_trace_records(self, tmp_path):
        """Test JSONL records carry t, x, f, fq, qp, accepted and replay through the quantizer"""
        from src.harness import replay_trace_file, run_experiment, write_experiment

        result = run_experiment(_small_config(trace=True, algorithms=["qbo"]))
        write_experiment(result, tmp_path)
        for path in sorted(tmp_path.glob("trace_*_qbo_0.jsonl")):
            lines = path.read_text().splitlines()
            first = json.loads(lines[0])
            assert set(first) == {"t", "x", "f", "fq", "qp", "accepted"}
            assert first["t"] == 0
            assert replay_trace_file(path) == []

    def test_results_round_trip(self, tmp_path):
        """Test read_results_csv recovers every field at the rendered precision"""
        from src.harness import read_results_csv, run_experiment, write_experiment

        result = run_experiment(_small_config(seeds=[0, 1]))
        write_experiment(result, tmp_path)
        parsed = read_results_csv(tmp_path / "results.csv")
        assert len(parsed) == len(result.rows)
        for original, back in zip(result.rows, parsed):
            assert back.sort_key == original.sort_key
            assert back.iterations_to_success == original.iterations_to_success
            assert back.evaluations == original.evaluations
            assert back.best_f == pytest.approx(original.best_f, rel=1e-5, abs=1e-300)
            assert back.improvement_ratio == pytest.approx(original.improvement_ratio, rel=1e-5)

    def test_unwritable_directory(self, tmp_path):
        """Test an output path that is a file raises OutputError naming it"""
        from src.harness import write_outputs
        from src.errors import OutputError

        blocker = tmp_path / "not_a_dir"
        blocker.write_text("x")
        with pytest.raises(OutputError) as info:
            write_outputs([_row()], None, blocker)
        assert info.value.path == blocker

    def test_partial_outputs_removed(self, tmp_path, mocker):
        """Test a failure mid-way removes every file written so far"""
        from src.harness import write_outputs
        from src.errors import OutputError

        real_replace = os.replace
        calls = {"n": 0}

        def flaky_replace(src, dst):
            calls["n"] += 1
            if calls["n"] == 2:
                raise OSError("disk full")
            return real_replace(src, dst)

        mocker.patch("src.harness.os.replace", side_effect=flaky_replace)
        with pytest.raises(OutputError) as info:
            write_outputs([_row()], None, tmp_path)
        assert info.value.path.name == "summary.csv"
        assert list(tmp_path.iterdir()) == []

    def test_failed_rewrite_keeps_previous_outputs(self, tmp_path, mocker):
        """Test a rewrite failing mid-way leaves the earlier run's files byte-identical"""
        from src.harness import write_outputs
        from src.errors import OutputError

        write_outputs([_row(seed=0), _row(seed=1)], None, tmp_path)
        before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert sorted(before) == ["manifest.txt", "results.csv", "summary.csv"]

        real_replace = os.replace
        calls = {"n": 0}

        def flaky_replace(src, dst):
            calls["n"] += 1
            # backup then install results.csv, backup summary.csv, then fail installing it
            if calls["n"] == 4:
                raise OSError("disk full")
            return real_replace(src, dst)

        mocker.patch("src.harness.os.replace", side_effect=flaky_replace)
        with pytest.raises(OutputError) as info:
            write_outputs([_row(seed=5)], None, tmp_path)
        assert info.value.path.name == "summary.csv"

        after = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert after == before

    def test_stale_traces_removed(self, tmp_path):
        """Test trace files from a previous run disappear when the new run lists none"""
        from src.harness import run_experiment, write_experiment, write_outputs

        traced = run_experiment(_small_config(objectives=["sphere"], algorithms=["qbo"], trace=True))
        write_experiment(traced, tmp_path)
        assert len(list(tmp_path.glob("trace_*.jsonl"))) == 1

        entries = write_outputs([_row()], None, tmp_path)
        assert list(tmp_path.glob("trace_*.jsonl")) == []
        assert sorted(p.name for p in tmp_path.iterdir()) == sorted(name for name, _ in entries)

    def test_rewrite_leaves_no_temporary_files(self, tmp_path):
        """Test a successful rewrite over existing outputs leaves only the manifest's files"""
        from src.harness import write_outputs

        write_outputs([_row(seed=0)], None, tmp_path)
        entries = write_outputs([_row(seed=1)], None, tmp_path)
        assert sorted(p.name for p in tmp_path.iterdir()) == [name for name, _ in entries]
        assert ",1," in (tmp_path / "results.csv").read_text().splitlines()[1]


class TestGridSample:
    """Test cases for grid_sample"""

    def test_sphere_grid(self):
        """Test a 3x3 grid over [-1, 1]^2 with 0 in the center"""
        from src.harness import grid_sample
        from src.objectives import get_objective

        grid = grid_sample(get_objective("sphere", box=(-1.0, 1.0)), 3)
        assert grid.columns == ("x", "y", "f")
        assert len(grid) == 9
        np.testing.assert_array_equal(grid.values[4], [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(grid.values[1, :2], [-1.0, 0.0])

    def test_corner_matches_direct_evaluation(self):
        """Test the first drop_wave row is the (-5.12, -5.12) corner"""
        from src.harness import grid_sample
        from src.objectives import get_objective

        grid = grid_sample("drop_wave", 3)
        np.testing.assert_array_equal(grid.values[0, :2], [-5.12, -5.12])
        assert grid.values[0, 2] == pytest.approx(get_objective("drop_wave").evaluate([-5.12, -5.12]))

    def test_slice_minimum(self):
        """Test the Schaffer N2 slice at y=0 is minimal at x=0"""
        from src.harness import grid_sample

        grid = grid_sample("schaffer_n2", 401, "y=0")
        assert grid.columns == ("x", "f")
        assert len(grid) == 401
        assert grid.values[np.argmin(grid.values[:, 1]), 0] == 0.0

    def test_resolution_below_two(self):
        """Test resolution < 2 raises InvalidArgumentError"""
        from src.harness import grid_sample
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            grid_sample("sphere", 1)

    def test_full_grid_needs_two_dimensions(self):
        """Test a full grid on a 3-D objective is rejected but a slice works"""
        from src.harness import grid_sample
        from src.objectives import get_objective
        from src.errors import InvalidArgumentError

        salomon = get_objective("salomon", dim=3)
        with pytest.raises(InvalidArgumentError):
            grid_sample(salomon, 5)
        grid = grid_sample(salomon, 5, "x0=0,x2=0")
        assert grid.columns == ("y", "f")

    def test_bad_slices(self):
        """Test malformed or under-constrained slices are rejected"""
        from src.harness import grid_sample
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            grid_sample("sphere", 5, "z=1")
        with pytest.raises(InvalidArgumentError):
            grid_sample("sphere", 5, "x=0,y=0")
        with pytest.raises(InvalidArgumentError):
            grid_sample("sphere", 5, "x5=0")

    def test_write_grid_csv(self, tmp_path):
        """Test grid CSV output"""
        from src.harness import grid_sample, write_grid_csv

        path = write_grid_csv(grid_sample("sphere", 2), tmp_path / "grids" / "sphere.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,f"
        assert lines[1] == "-10,-10,100"
        assert len(lines) == 5
