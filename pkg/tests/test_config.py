import json
import pytest

from pathlib import Path
from pydantic import ValidationError

from src.minkowski_sensing.config import (
    DEFAULT_EXPERIMENT_CONFIG_DICT,
    DecoderKind,
    ExperimentKind,
    SweepRecord,
    deep_merge_dict,
    load_experiment_config,
)
from src.minkowski_sensing.errors import ConfigError
from src.minkowski_sensing.measurement import EnsembleKind


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"m": 6, "n": 5, "trials": 7, "altmin": {"restarts": 2}}))
    return path


def test_defaults():
    config = load_experiment_config()
    assert config.experiment == ExperimentKind.PHASE
    assert config.decoder == DecoderKind.ALTMIN
    assert config.k_values == [5, 10, 15, 20, 25, 30, 35, 40]
    assert config.altmin.restarts == 10
    assert isinstance(config.output_path, Path)


def test_defaults_are_not_mutated(config_file):
    load_experiment_config(str(config_file))
    assert DEFAULT_EXPERIMENT_CONFIG_DICT["m"] == 8
    assert DEFAULT_EXPERIMENT_CONFIG_DICT["altmin"]["restarts"] == 10


def test_example1_preset():
    config = load_experiment_config(preset="example1")
    assert config.decoder == DecoderKind.SPARSE_FACTOR
    assert config.ensemble == EnsembleKind.RANK_ONE
    assert (config.m, config.n, config.r, config.l1, config.l2) == (8, 8, 1, 2, 2)
    assert config.altmin.success_rel_err == 1e-6


def test_file_and_overrides(config_file):
    config = load_experiment_config(str(config_file), {"trials": 3, "n": None, "altmin.max_iters": 50})
    assert (config.m, config.n, config.trials) == (6, 5, 3)
    assert config.altmin.restarts == 2
    assert config.altmin.max_iters == 50
    assert config.altmin.tol == 1e-10


def test_preset_keeps_experiment_kind(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "phase", "trials": 2}))
    assert load_experiment_config(str(path), preset="example1").experiment == ExperimentKind.EXAMPLE1


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_experiment_config(str(bad))
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError):
        load_experiment_config(str(unknown))
    with pytest.raises(ConfigError):
        load_experiment_config(preset="nonsense")


@pytest.mark.parametrize(
    "overrides",
    [
        {"trials": 0},
        {"k_min": 10, "k_max": 5},
        {"r": 9},
        {"ensemble": "sparse"},
        {"executor": "beam"},
    ],
)
def test_validation_failures(overrides):
    with pytest.raises(ValidationError):
        load_experiment_config(overrides=overrides)


def test_example1_conditions_and_budget():
    with pytest.raises(ValidationError):
        load_experiment_config(overrides={"l1": 4}, preset="example1")
    with pytest.raises(ValidationError):
        load_experiment_config(overrides={"budget": 100}, preset="example1")
    with pytest.raises(ValidationError):
        load_experiment_config(overrides={"decoder": "altmin"}, preset="example1")


def test_validation_collects_all_errors():
    with pytest.raises(ValidationError) as info:
        load_experiment_config(overrides={"k_min": 50, "r": 9})
    message = str(info.value)
    assert "k_min=50" in message and "r=9" in message


def test_deep_merge_dict():
    merged = deep_merge_dict({"a": 1, "b": {"c": 2, "d": 3}}, {"b": {"c": 5}, "e": 6})
    assert merged == {"a": 1, "b": {"c": 5, "d": 3}, "e": 6}


def test_sweep_record_invariants():
    record = SweepRecord(
        k=5, trials=4, successes=3, success_rate=0.75, mean_rel_err=0.1, median_iters=7, wall_seconds=0.0
    )
    assert record.failures == 1
    assert "budget_refusals" not in record.model_dump()
    with pytest.raises(ValidationError):
        SweepRecord(k=5, trials=4, successes=5, success_rate=1.25, mean_rel_err=0.1, median_iters=7, wall_seconds=0.0)
    with pytest.raises(ValidationError):
        SweepRecord(k=5, trials=4, successes=2, success_rate=0.75, mean_rel_err=0.1, median_iters=7, wall_seconds=0.0)
