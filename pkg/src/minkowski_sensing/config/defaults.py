from typing import Any, Dict

from ..constants import DEFAULT_ENUMERATION_BUDGET

DEFAULT_EXPERIMENT_CONFIG_DICT: Dict[str, Any] = {
    "experiment": "phase",
    "m": 8,
    "n": 8,
    "r": 1,
    "l1": 2,
    "l2": 2,
    "ensemble": "dense",
    "s": 1.0,
    "k_min": 5,
    "k_max": 40,
    "k_step": 5,
    "trials": 200,
    "master_seed": 0,
    "decoder": "altmin",
    "output_path": "results.csv",
    "plot_path": None,
    "executor": "serial",
    "processes": 1,
    "record_timing": False,
    "log_dir": None,
    "budget": DEFAULT_ENUMERATION_BUDGET,
    "cloud_size": 20,
    "altmin": {
        "max_iters": 500,
        "tol": 1e-10,
        "restarts": 10,
        "init": "random",
        "success_rel_err": 1e-4,
    },
    # concentration
    "matrix_path": None,
    "delta_points": 12,
    "delta_min": 1e-3,
    "mc_partition_size": 100_000,
    # dimension
    "support": "lowrank",
    "samples": 100_000,
    "bound": None,
    "rho_min": None,
    "rho_max": None,
    "levels": 6,
}

EXPERIMENT_PRESETS: Dict[str, Dict[str, Any]] = {
    "phase": {"experiment": "phase"},
    "concentration": {
        "experiment": "concentration",
        "m": 4,
        "n": 4,
        "r": 1,
        "ensemble": "rankone",
        "k_min": 1,
        "k_max": 1,
        "k_step": 1,
        "trials": 1_000_000,
    },
    "dimension": {
        "experiment": "dimension",
        "m": 3,
        "n": 3,
        "r": 1,
        "support": "lowrank",
        "samples": 100_000,
    },
    "example1": {
        "experiment": "example1",
        "decoder": "sparsefactor",
        "ensemble": "rankone",
        "m": 8,
        "n": 8,
        "r": 1,
        "l1": 2,
        "l2": 2,
        "k_min": 2,
        "k_max": 8,
        "k_step": 2,
        "trials": 100,
        "altmin": {"restarts": 3, "max_iters": 200, "success_rel_err": 1e-6},
    },
}
