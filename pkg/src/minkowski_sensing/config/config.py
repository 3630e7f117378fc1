import copy
import yaml

from enum import Enum
from typing import Any, Dict, List, Optional
from typing_extensions import Self
from cloudpathlib import AnyPath
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from ..errors import ConfigError
from ..measurement import EnsembleKind
from ..ms_logging import logger
from ..recovery import AltMinOptions, InitKind
from ..recovery.decoders import enumeration_size
from ..types import ExpandedPath
from .defaults import DEFAULT_EXPERIMENT_CONFIG_DICT, EXPERIMENT_PRESETS


class ExperimentKind(str, Enum):
    PHASE = "phase"
    CONCENTRATION = "concentration"
    DIMENSION = "dimension"
    EXAMPLE1 = "example1"


class DecoderKind(str, Enum):
    ENUMERATE = "enumerate"
    ALTMIN = "altmin"
    SPARSE_FACTOR = "sparsefactor"


class SupportKind(str, Enum):
    LOW_RANK = "lowrank"
    SPARSE_FACTOR = "sparsefactor"
    FACTOR = "factor"
    POINT_CLOUD = "pointcloud"


class AltMinSettings(BaseModel):
    max_iters: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-10, gt=0.0, lt=1.0)
    restarts: int = Field(default=10, ge=1)
    init: InitKind = InitKind.RANDOM
    success_rel_err: float = Field(default=1e-4, gt=0.0)

    def options(self, r: int, seed: int) -> AltMinOptions:
        return AltMinOptions(r=r, seed=seed, **self.model_dump())


class ExperimentConfig(BaseModel):
    """
    One experiment run, mirrored field-for-field by the JSON config file.

    Every field required by the experiment kind is checked before any work starts; all
    problems are reported together.
    """

    experiment: ExperimentKind
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    r: int = Field(ge=0)
    l1: int = Field(ge=1)
    l2: int = Field(ge=1)
    ensemble: EnsembleKind
    s: float = Field(gt=0.0)
    k_min: int = Field(ge=0)
    k_max: int = Field(ge=0)
    k_step: int = Field(ge=1)
    trials: int = Field(ge=1)
    master_seed: int = Field(ge=0, lt=2**64)
    decoder: DecoderKind
    output_path: ExpandedPath
    plot_path: Optional[ExpandedPath] = None
    executor: str = Field(pattern="^(serial|multiprocessing)$")
    processes: int = Field(ge=1)
    record_timing: bool = False
    log_dir: Optional[ExpandedPath] = None
    budget: int = Field(ge=1)
    cloud_size: int = Field(ge=2)
    altmin: AltMinSettings
    matrix_path: Optional[ExpandedPath] = None
    delta_points: int = Field(ge=2)
    delta_min: float = Field(gt=0.0)
    mc_partition_size: int = Field(ge=1)
    support: SupportKind
    samples: int = Field(ge=1)
    bound: Optional[float] = Field(default=None, gt=0.0)
    rho_min: Optional[float] = Field(default=None, gt=0.0)
    rho_max: Optional[float] = Field(default=None, gt=0.0)
    levels: int = Field(ge=4)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def check_experiment_fields(self) -> Self:
        errors = []
        if self.k_min > self.k_max:
            errors.append(f"k_min={self.k_min} exceeds k_max={self.k_max}")
        if self.r > min(self.m, self.n):
            errors.append(f"r={self.r} exceeds min(m, n)={min(self.m, self.n)}")
        if self.rho_min is not None and self.rho_max is not None and self.rho_min >= self.rho_max:
            errors.append("rho_min must be smaller than rho_max")

        uses_sparse_factor = self.experiment == ExperimentKind.EXAMPLE1 or (
            self.experiment == ExperimentKind.PHASE and self.decoder == DecoderKind.SPARSE_FACTOR
        )
        if self.experiment == ExperimentKind.EXAMPLE1 and self.decoder != DecoderKind.SPARSE_FACTOR:
            errors.append("example1 runs use the sparsefactor decoder")
        if self.experiment in (ExperimentKind.PHASE, ExperimentKind.CONCENTRATION) and self.r < 1:
            errors.append(f"{self.experiment.value} needs r >= 1")
        if uses_sparse_factor or (
            self.experiment == ExperimentKind.DIMENSION and self.support == SupportKind.SPARSE_FACTOR
        ):
            errors.extend(self._sparse_factor_errors())
        if uses_sparse_factor and not errors:
            required = enumeration_size(self.m, self.n, self.l1, self.l2)
            if required > self.budget:
                errors.append(f"{required} support pairs exceed the enumeration budget {self.budget}")
        if self.experiment == ExperimentKind.DIMENSION and self.support == SupportKind.FACTOR:
            if not (1 <= self.r and self.l1 <= self.m):
                errors.append(f"factor support needs r >= 1 and l1 <= m, got r={self.r}, l1={self.l1}")
        if self.experiment == ExperimentKind.DIMENSION and self.support == SupportKind.LOW_RANK and self.r < 1:
            errors.append("lowrank support needs r >= 1")
        if self.experiment == ExperimentKind.CONCENTRATION and self.k_min < 1:
            errors.append("concentration needs k_min >= 1")

        if errors:
            raise ValueError("\n".join(errors))
        return self

    def _sparse_factor_errors(self) -> List[str]:
        errors = []
        if not (1 <= self.r <= self.l1 and 2 * self.l1 < self.m):
            errors.append(f"Need r <= l1 < m/2, got r={self.r}, l1={self.l1}, m={self.m}")
        if not (1 <= self.r <= self.l2 and self.l2 <= self.n / 2 - 1 / max(self.r, 1)):
            errors.append(f"Need r <= l2 <= n/2 - 1/r, got r={self.r}, l2={self.l2}, n={self.n}")
        return errors

    @computed_field
    @property
    def k_values(self) -> List[int]:
        return list(range(self.k_min, self.k_max + 1, self.k_step))

    def altmin_options(self, seed: int) -> AltMinOptions:
        return self.altmin.options(self.r, seed)


class SweepRecord(BaseModel):
    """
    Aggregate of the trials at one measurement count k.

    `budget_refusals` and `errors` are the failed trials that never produced a decode;
    successes + failures (which include both) equal trials.
    """

    k: int = Field(ge=0)
    trials: int = Field(ge=1)
    successes: int = Field(ge=0)
    success_rate: float = Field(ge=0.0, le=1.0)
    mean_rel_err: float
    median_iters: int = Field(ge=0)
    wall_seconds: float = Field(ge=0.0)
    budget_refusals: int = Field(default=0, ge=0, exclude=True)
    errors: int = Field(default=0, ge=0, exclude=True)

    @model_validator(mode="after")
    def check_counts(self) -> Self:
        if self.successes + self.budget_refusals + self.errors > self.trials:
            raise ValueError("successes and refusals exceed the number of trials")
        if abs(self.success_rate - self.successes / self.trials) > 1e-15:
            raise ValueError("success_rate must equal successes / trials")
        return self

    @property
    def failures(self) -> int:
        return self.trials - self.successes


def deep_merge_dict(orig: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Recursively merges 'override' into 'orig'.
      - If both orig[k] and override[k] are dicts, merge them.
      - Otherwise override orig[k] with override[k].
    """
    for k, v in override.items():
        if k in orig and isinstance(orig[k], dict) and isinstance(v, dict):
            deep_merge_dict(orig[k], v)
        else:
            orig[k] = v
    return orig


def read_config_file(config_uri: str) -> Dict[str, Any]:
    """Read a JSON (or YAML) config document from a local or cloud path."""
    path = AnyPath(config_uri)
    try:
        with path.open("r") as f:
            user_dict = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"Cannot read config {config_uri}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config {config_uri} is not valid JSON: {exc}") from exc
    if user_dict is None:
        return {}
    if not isinstance(user_dict, dict):
        raise ConfigError(f"Invalid experiment config at {config_uri}: expected an object")
    return user_dict


def load_experiment_config(
    config_uri: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
) -> ExperimentConfig:
    """
    Build the effective experiment config.

    Precedence, lowest first: defaults, the subcommand preset, the config file, then
    the non-None entries of `overrides` (CLI flags). A preset's experiment kind always wins
    over the file, so `example1 --config f.json` stays an example1 run.
    """
    merged = copy.deepcopy(DEFAULT_EXPERIMENT_CONFIG_DICT)
    if preset is not None:
        if preset not in EXPERIMENT_PRESETS:
            raise ConfigError(f"Unknown experiment preset `{preset}`")
        deep_merge_dict(merged, copy.deepcopy(EXPERIMENT_PRESETS[preset]))

    if config_uri:
        user_dict = read_config_file(config_uri)
        unknown = sorted(set(user_dict) - set(DEFAULT_EXPERIMENT_CONFIG_DICT))
        if unknown:
            raise ConfigError(f"Unknown config fields: {', '.join(unknown)}")
        deep_merge_dict(merged, user_dict)
        if preset is not None:
            merged["experiment"] = EXPERIMENT_PRESETS[preset]["experiment"]

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key.startswith("altmin."):
            merged["altmin"][key.split(".", 1)[1]] = value
        else:
            merged[key] = value

    logger.debug(f"Effective experiment config: {merged}")
    return ExperimentConfig(**merged)
