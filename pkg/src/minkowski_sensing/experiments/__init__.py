from .output import emit_csv, emit_svg_plot, metadata_path, read_metadata, write_metadata
from .runners import (
    build_executor,
    concentration_matrix,
    k_star,
    run_concentration,
    run_dimension,
    run_experiment,
    run_phase,
    sample_dimension_support,
)
from .trials import TrialOutcome, TrialStatus, phase_trial, trial_seed
