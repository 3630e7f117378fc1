from .defaults import DEFAULT_EXPERIMENT_CONFIG_DICT, EXPERIMENT_PRESETS
from .config import (
    AltMinSettings,
    DecoderKind,
    ExperimentConfig,
    ExperimentKind,
    SupportKind,
    SweepRecord,
    deep_merge_dict,
    load_experiment_config,
    read_config_file,
)
