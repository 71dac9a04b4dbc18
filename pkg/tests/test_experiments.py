"""Tests for the benchmark sweep harness and its file formats."""

import dataclasses
import json
import math

import numpy as np
import pytest

from ngca.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    RateFit,
    TrialRecord,
    child_seed,
    export_projection,
    fit_rate,
    read_records,
    run_experiment,
    write_records,
)
from ngca.subspace import ORIGINAL, WHITENED, Subspace


class FakeClock:
    """Deterministic stand-in for perf_counter: advances 0.5 per call."""

    def __init__(self):
        self.now = 0.0

    def __call__(self):
        self.now += 0.5
        return self.now


def tiny_config(**overrides):
    base = dict(
        algorithms=("pca",),
        generator="gaussian_mixture",
        n_grid=(50, 100),
        gamma2_grid=(0.0,),
        d_x=4,
        d_s=2,
        trials=2,
        seed=5,
        output="",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError, match="unknown algorithm"):
            tiny_config(algorithms=("pca", "kmeans"))

    def test_empty_algorithms_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            tiny_config(algorithms=())

    def test_unknown_generator_rejected(self):
        with pytest.raises(ValueError):
            tiny_config(generator="cauchy")

    def test_descending_n_grid_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            tiny_config(n_grid=(100, 50))

    def test_negative_gamma2_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            tiny_config(gamma2_grid=(-1.0,))

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError, match="trials"):
            tiny_config(trials=0)

    def test_signal_dimension_must_be_proper(self):
        with pytest.raises(ValueError, match="d_s"):
            tiny_config(d_x=2, d_s=2)

    def test_options_for_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError, match="options"):
            tiny_config(algorithm_options={"kmeans": {}})

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict(
                {"algorithms": ["pca"], "generator": "gaussian_mixture", "bogus": 1}
            )

    def test_from_dict_collects_algorithm_blocks(self):
        cfg = ExperimentConfig.from_dict(
            {
                "algorithms": ["imak"],
                "generator": "super_gaussian",
                "imak": {"outer_iters": 3},
            }
        )
        assert cfg.algorithm_options == {"imak": {"outer_iters": 3}}

    def test_from_json_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(
            json.dumps(
                {
                    "algorithms": ["pca"],
                    "generator": "gaussian_mixture",
                    "n_grid": [50],
                    "trials": 1,
                    "seed": 3,
                    "output": "",
                }
            )
        )
        cfg = ExperimentConfig.from_json_file(path)
        assert cfg.seed == 3
        assert cfg.n_grid == (50,)

    def test_from_json_file_rejects_non_object(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError, match="JSON object"):
            ExperimentConfig.from_json_file(path)


class TestChildSeed:
    def test_deterministic(self):
        assert child_seed(0, "signals", 500, 0.0, 3) == child_seed(
            0, "signals", 500, 0.0, 3
        )

    def test_components_all_matter(self):
        base = child_seed(0, "signals", 500, 0.0, 3)
        assert child_seed(1, "signals", 500, 0.0, 3) != base
        assert child_seed(0, "noise", 500, 0.0, 3) != base
        assert child_seed(0, "signals", 501, 0.0, 3) != base
        assert child_seed(0, "signals", 500, 0.5, 3) != base
        assert child_seed(0, "signals", 500, 0.0, 4) != base

    def test_fits_in_64_bits(self):
        s = child_seed(12345, "lsngca", 8000, 2.5, 9)
        assert 0 <= s < 2**64

    def test_cell_records_do_not_depend_on_grid_shape(self):
        """A (n, gamma2, trial) cell produces the same record whether or not
        other cells are present in the sweep.
        """
        wide = run_experiment(tiny_config(n_grid=(50, 100)), clock=FakeClock())
        narrow = run_experiment(tiny_config(n_grid=(100,)), clock=FakeClock())
        wide_cell = [r for r in wide if r.n == 100]
        assert [dataclasses.replace(r, time_sec=0.0) for r in wide_cell] == [
            dataclasses.replace(r, time_sec=0.0) for r in narrow
        ]


class TestRunExperiment:
    def test_record_order_is_fixed(self):
        cfg = tiny_config(gamma2_grid=(0.0, 1.0))
        records = run_experiment(cfg, clock=FakeClock())
        expected = [
            (a, n, g, t)
            for a in cfg.algorithms
            for n in cfg.n_grid
            for g in cfg.gamma2_grid
            for t in range(cfg.trials)
        ]
        assert [(r.algorithm, r.n, r.gamma2, r.trial) for r in records] == expected
        assert all(r.generator == cfg.generator for r in records)

    def test_byte_identical_reruns(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        run_experiment(tiny_config(output=str(first)), clock=FakeClock())
        run_experiment(tiny_config(output=str(second)), clock=FakeClock())
        assert first.read_bytes() == second.read_bytes()

    def test_failures_become_nan_records(self):
        """A trial too small to whiten fails alone; the sweep continues."""
        cfg = tiny_config(
            algorithms=("lsngca",), n_grid=(3, 300), d_x=4, d_s=1, trials=1
        )
        records = run_experiment(cfg, clock=FakeClock())
        failed = [r for r in records if r.n == 3]
        worked = [r for r in records if r.n == 300]
        assert len(failed) == 1 and len(worked) == 1
        assert math.isnan(failed[0].error_E) and math.isnan(failed[0].distance_D)
        assert failed[0].error_msg != ""
        assert worked[0].error_msg == ""
        assert 0.0 <= worked[0].error_E <= 1.0

    def test_unknown_algorithm_option_is_isolated(self):
        cfg = tiny_config(n_grid=(50,), trials=1, algorithm_options={"pca": {"bogus": 1}})
        records = run_experiment(cfg, clock=FakeClock())
        assert len(records) == 1
        assert math.isnan(records[0].error_E)
        assert "bogus" in records[0].error_msg

    def test_parallel_matches_serial(self):
        serial = run_experiment(tiny_config(n_jobs=1))
        parallel = run_experiment(tiny_config(n_jobs=2))
        strip = lambda rs: [dataclasses.replace(r, time_sec=0.0) for r in rs]
        assert strip(serial) == strip(parallel)

    def test_trial_timing_uses_injected_clock(self):
        records = run_experiment(tiny_config(n_grid=(50,), trials=1), clock=FakeClock())
        assert records[0].time_sec == 0.5


class TestRecordsCSV:
    def test_header_and_line_endings(self, tmp_path):
        path = tmp_path / "out.csv"
        run_experiment(tiny_config(output=str(path)), clock=FakeClock())
        raw = path.read_bytes()
        assert raw.startswith(
            b"algorithm,generator,n,gamma2,trial,seed,error_E,distance_D,time_sec,error_msg\n"
        )
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_floats_written_as_repr(self, tmp_path):
        path = tmp_path / "out.csv"
        records = [
            TrialRecord(
                algorithm="pca",
                generator="gaussian_mixture",
                n=100,
                gamma2=0.1,
                trial=0,
                seed=7,
                error_E=1 / 3,
                distance_D=0.25,
                time_sec=1e-3,
            )
        ]
        write_records(records, path)
        line = path.read_text().splitlines()[1]
        assert line == f"pca,gaussian_mixture,100,{0.1!r},0,7,{1 / 3!r},{0.25!r},{0.001!r},"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "out.csv"
        original = run_experiment(tiny_config(output=str(path)), clock=FakeClock())
        loaded = read_records(path)
        assert loaded == original

    def test_round_trip_preserves_nan(self, tmp_path):
        path = tmp_path / "out.csv"
        record = TrialRecord(
            algorithm="lsngca",
            generator="super_gaussian",
            n=3,
            gamma2=0.0,
            trial=0,
            seed=1,
            error_E=math.nan,
            distance_D=math.nan,
            time_sec=0.5,
            error_msg="needs more samples",
        )
        write_records([record], path)
        loaded = read_records(path)[0]
        assert math.isnan(loaded.error_E) and math.isnan(loaded.distance_D)
        assert loaded.error_msg == "needs more samples"

    def test_read_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            read_records(path)

    def test_read_rejects_ragged_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(CSV_HEADER) + "\npca,gaussian_mixture,100\n")
        with pytest.raises(ValueError, match="row 1"):
            read_records(path)


def synthetic_records(values_by_n, algorithm="lsngca", metric_values=None):
    records = []
    for n, values in values_by_n.items():
        for trial, v in enumerate(values):
            records.append(
                TrialRecord(
                    algorithm=algorithm,
                    generator="gaussian_mixture",
                    n=n,
                    gamma2=0.0,
                    trial=trial,
                    seed=0,
                    error_E=v,
                    distance_D=(metric_values or {}).get(n, [v] * len(values))[trial],
                    time_sec=1.0,
                )
            )
    return records


class TestRateFit:
    def test_exact_power_law(self):
        records = synthetic_records({n: [3.0 * n**-0.5] for n in (100, 200, 400, 800)})
        fit = fit_rate(records, "lsngca", metric="E")
        assert abs(fit.slope - (-0.5)) < 1e-10
        assert fit.stderr < 1e-10
        assert fit.n_points == 4

    def test_constant_metric_gives_zero_slope(self):
        records = synthetic_records({n: [0.25] for n in (100, 200, 400)})
        assert abs(fit_rate(records, "lsngca").slope) < 1e-12

    def test_distance_metric_column(self):
        records = synthetic_records(
            {n: [1.0] for n in (100, 200, 400)},
            metric_values={n: [2.0 * n**-0.25] for n in (100, 200, 400)},
        )
        fit = fit_rate(records, "lsngca", metric="D")
        assert abs(fit.slope - (-0.25)) < 1e-10

    def test_nan_trials_excluded_from_means(self):
        records = synthetic_records(
            {n: [4.0 * n**-0.5, math.nan] for n in (100, 200, 400)}
        )
        assert abs(fit_rate(records, "lsngca").slope - (-0.5)) < 1e-10

    def test_other_algorithms_ignored(self):
        records = synthetic_records({n: [n**-0.5] for n in (100, 200, 400)})
        records += synthetic_records({n: [0.9] for n in (100, 200, 400)}, algorithm="pca")
        assert abs(fit_rate(records, "lsngca").slope - (-0.5)) < 1e-10
        assert abs(fit_rate(records, "pca").slope) < 1e-12

    def test_too_few_sample_sizes_rejected(self):
        records = synthetic_records({100: [0.5], 200: [0.4]})
        with pytest.raises(ValueError, match="3 sample sizes"):
            fit_rate(records, "lsngca")

    def test_zero_means_dropped(self):
        records = synthetic_records({100: [0.0], 200: [0.0], 400: [0.1]})
        with pytest.raises(ValueError, match="positive"):
            fit_rate(records, "lsngca")

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError, match="metric"):
            fit_rate([], "lsngca", metric="Q")

    def test_result_is_frozen_dataclass(self):
        fit = RateFit(slope=-0.5, stderr=0.01, n_points=4)
        with pytest.raises(dataclasses.FrozenInstanceError):
            fit.slope = 0.0


class TestExportProjection:
    def test_identity_basis_reproduces_centered_data(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((20, 3))
        sub = Subspace(np.eye(3), frame=ORIGINAL)
        out = export_projection(X, sub, tmp_path / "p.csv")
        np.testing.assert_allclose(out, X - X.mean(axis=0), atol=1e-12)

    def test_axis_basis_extracts_centered_column(self, tmp_path):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((15, 4)) + 3.0
        sub = Subspace(np.eye(4)[:, :1], frame=ORIGINAL)
        out = export_projection(X, sub, tmp_path / "p.csv")
        np.testing.assert_allclose(
            out[:, 0], X[:, 0] - X[:, 0].mean(), atol=1e-12
        )

    def test_projection_contracts_norms(self, tmp_path):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((30, 5))
        Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        out = export_projection(X, Subspace(Q, frame=ORIGINAL), tmp_path / "p.csv")
        centered = X - X.mean(axis=0)
        assert np.all(
            np.linalg.norm(out, axis=1) <= np.linalg.norm(centered, axis=1) + 1e-12
        )

    def test_file_round_trips_through_repr(self, tmp_path):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((10, 3))
        path = tmp_path / "p.csv"
        out = export_projection(X, Subspace(np.eye(3)[:, :2], frame=ORIGINAL), path)
        rows = [
            [float(v) for v in line.split(",")]
            for line in path.read_text().splitlines()
        ]
        np.testing.assert_array_equal(np.array(rows), out)
        assert b"\r" not in path.read_bytes()

    def test_whitened_frame_rejected(self, tmp_path):
        sub = Subspace(np.eye(3)[:, :1], frame=WHITENED)
        with pytest.raises(ValueError, match="original"):
            export_projection(np.zeros((5, 3)), sub, tmp_path / "p.csv")

    def test_dimension_mismatch_rejected(self, tmp_path):
        sub = Subspace(np.eye(4)[:, :2], frame=ORIGINAL)
        with pytest.raises(ValueError, match="dimension"):
            export_projection(np.zeros((5, 3)), sub, tmp_path / "p.csv")
