import pytest
import pandas as pd

from scipy import stats

from src.minkowski_sensing.config import SweepRecord, load_experiment_config
from src.minkowski_sensing.constants import CONCENTRATION_CSV_COLUMNS, PHASE_CSV_COLUMNS
from src.minkowski_sensing.errors import DomainError
from src.minkowski_sensing.executor import MultiprocessingExecutor, SerialExecutor
from src.minkowski_sensing.experiments import (
    emit_csv,
    emit_svg_plot,
    read_metadata,
    run_concentration,
    run_experiment,
    run_phase,
    trial_seed,
)


def small_phase(tmp_path, name="phase.csv", **overrides):
    values = {
        "m": 4,
        "n": 4,
        "r": 1,
        "k_min": 4,
        "k_max": 12,
        "k_step": 4,
        "trials": 5,
        "output_path": str(tmp_path / name),
        "altmin.restarts": 2,
        "altmin.max_iters": 100,
    }
    values.update(overrides)
    return load_experiment_config(overrides=values, preset="phase")


def test_run_phase_accounting(tmp_path):
    config = small_phase(tmp_path)
    records, metadata = run_phase(config, SerialExecutor())
    assert [r.k for r in records] == [4, 8, 12]
    for record in records:
        assert record.trials == 5
        assert record.successes + record.failures == record.trials
        assert record.wall_seconds == 0.0
    assert metadata["k_star"] == 7
    assert metadata["trial_status"]["4"]["decoded"] == 5


def test_phase_csv_is_reproducible(tmp_path):
    first = small_phase(tmp_path, "a.csv")
    second = small_phase(tmp_path, "b.csv")
    run_experiment(first, SerialExecutor())
    run_experiment(second, MultiprocessingExecutor(processes=2))
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(PHASE_CSV_COLUMNS)


def test_metadata_sidecar(tmp_path):
    config = small_phase(tmp_path)
    run_experiment(config, SerialExecutor())
    metadata = read_metadata(config.output_path)
    assert metadata["k_star"] == 7
    assert metadata["config"]["master_seed"] == 0
    assert "rng_algorithm" in metadata


def test_trial_seeds_are_distinct(tmp_path):
    config = small_phase(tmp_path)
    seeds = {trial_seed(config, k, t) for k in config.k_values for t in range(config.trials)}
    assert len(seeds) == len(config.k_values) * config.trials


def test_emit_csv_shapes(tmp_path):
    with pytest.raises(DomainError):
        emit_csv([], tmp_path / "empty.csv")
    record = SweepRecord(
        k=3, trials=2, successes=1, success_rate=0.5, mean_rel_err=0.25, median_iters=4, wall_seconds=0.0
    )
    path = tmp_path / "one.csv"
    emit_csv([record], path)
    lines = path.read_text().splitlines()
    assert lines == ["k,trials,successes,success_rate,mean_rel_err,median_iters,wall_seconds", "3,2,1,0.5,0.25,4,0"]


def test_svg_is_byte_identical(tmp_path):
    record = SweepRecord(
        k=3, trials=2, successes=1, success_rate=0.5, mean_rel_err=0.25, median_iters=4, wall_seconds=0.0
    )
    emit_svg_plot([record], tmp_path / "a.svg", [7])
    emit_svg_plot([record], tmp_path / "b.svg", [7])
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_concentration_run(tmp_path):
    out = tmp_path / "concentration.csv"
    config = load_experiment_config(
        overrides={"trials": 20_000, "output_path": str(out), "mc_partition_size": 5_000, "delta_points": 6},
        preset="concentration",
    )
    reports, metadata = run_concentration(config, SerialExecutor())
    assert len(reports) == 6
    assert metadata["violations"] == 0
    assert metadata["rank"] == 1
    assert reports[-1].empirical_prob >= 0.999
    probabilities = [r.empirical_prob for r in reports]
    assert probabilities == sorted(probabilities)

    run_experiment(config, SerialExecutor())
    frame = pd.read_csv(out)
    assert list(frame.columns) == list(CONCENTRATION_CSV_COLUMNS)
    assert CONCENTRATION_CSV_COLUMNS == (
        "m",
        "n",
        "r",
        "s",
        "delta",
        "k",
        "trials",
        "empirical_prob",
        "ci_halfwidth",
        "f_value",
        "d_exact",
        "d_paper_bound",
        "single_bound",
        "k_bound",
    )
    assert (frame["empirical_prob"] - frame["ci_halfwidth"] <= frame["single_bound"]).all()
    assert (frame["d_exact"] <= frame["d_paper_bound"]).all()

    sidecar = read_metadata(out)
    assert sidecar["infinite_f_deltas"] == []
    volumes = {row["k"]: row for row in sidecar["ball_volume_audit"]}
    assert sorted(volumes) == list(range(1, 21))
    assert volumes[4]["lower_holds"] and not volumes[5]["lower_holds"]
    audit = sidecar["d_const_audit"]
    assert len(audit) == sum(min(m, n) for m in range(1, 5) for n in range(1, 5))
    assert {"r", "m", "n", "d_exact", "d_paper_bound", "holds"} <= set(audit[0])


def test_concentration_from_matrix_file(tmp_path):
    matrix = tmp_path / "x.csv"
    matrix.write_text("1,0,0\n0,0.5,0\n0,0,0\n")
    config = load_experiment_config(
        overrides={
            "trials": 5_000,
            "output_path": str(tmp_path / "c.csv"),
            "matrix_path": str(matrix),
            "delta_points": 4,
        },
        preset="concentration",
    )
    reports, metadata = run_concentration(config, SerialExecutor())
    assert metadata["rank"] == 2
    assert all(r.m == 3 and r.n == 3 and r.r == 2 for r in reports)


def test_dimension_point_cloud(tmp_path):
    out = tmp_path / "dimension.csv"
    config = load_experiment_config(
        overrides={"support": "pointcloud", "samples": 2_000, "output_path": str(out), "cloud_size": 10},
        preset="dimension",
    )
    metadata = run_experiment(config)
    assert metadata["estimate"]["slope"] <= 0.1
    assert metadata["rho_max"] == metadata["estimate"]["rho_schedule"][0]
    assert metadata["rho_min"] == metadata["estimate"]["rho_schedule"][-1]
    assert metadata["fitted_levels"] >= 2
    lines = out.read_text().splitlines()
    assert lines[0] == "rho,count"
    assert lines[-1].startswith("# slope=")


def test_phase_success_rate_rises_with_k(tmp_path):
    config = load_experiment_config(
        overrides={
            "m": 6,
            "n": 6,
            "r": 1,
            "k_min": 4,
            "k_max": 28,
            "k_step": 4,
            "trials": 12,
            "output_path": str(tmp_path / "sweep.csv"),
            "altmin.restarts": 3,
            "altmin.max_iters": 200,
        },
        preset="phase",
    )
    records, metadata = run_phase(config, SerialExecutor())
    rates = [r.success_rate for r in records]
    rho, _ = stats.spearmanr([r.k for r in records], rates)
    assert rho >= 0.8
    assert rates[0] <= 0.1
    assert rates[-1] >= 0.75
    assert metadata["k_star"] == 11


def test_example1_trial_status_accounting(tmp_path):
    config = load_experiment_config(
        overrides={
            "m": 6,
            "n": 6,
            "k_min": 2,
            "k_max": 2,
            "trials": 2,
            "output_path": str(tmp_path / "e1.csv"),
            "altmin.restarts": 1,
            "altmin.max_iters": 20,
        },
        preset="example1",
    )
    records, metadata = run_phase(config, SerialExecutor())
    assert records[0].trials == 2
    assert sum(metadata["trial_status"]["2"].values()) == 2
