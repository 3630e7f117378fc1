import sys
import logging
import argparse
import multiprocessing

from typing import Any, Dict, List, Optional
from pydantic import ValidationError

from ..config import ExperimentConfig, load_experiment_config
from ..errors import ConfigError, MinkowskiSensingError
from ..experiments import build_executor, run_experiment
from ..ms_logging import logger, _set_level

if multiprocessing.get_start_method(True) != "spawn":
    multiprocessing.set_start_method("spawn", True)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

LOG_FILE = "ms-experiment.log"

# argparse dest -> config field
_OVERRIDES = {
    "m": "m",
    "n": "n",
    "r": "r",
    "l1": "l1",
    "l2": "l2",
    "ensemble": "ensemble",
    "s": "s",
    "k_min": "k_min",
    "k_max": "k_max",
    "k_step": "k_step",
    "trials": "trials",
    "seed": "master_seed",
    "decoder": "decoder",
    "out": "output_path",
    "plot": "plot_path",
    "processes": "processes",
    "executor": "executor",
    "log_dir": "log_dir",
    "support": "support",
    "samples": "samples",
    "bound": "bound",
    "matrix": "matrix_path",
    "budget": "budget",
    "record_timing": "record_timing",
    "restarts": "altmin.restarts",
    "max_iters": "altmin.max_iters",
    "init": "altmin.init",
}


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON config mirroring ExperimentConfig.")
    common.add_argument("--out", type=str, default=None, help="Output CSV path (local or cloud URI).")
    common.add_argument("--plot", type=str, default=None, help="Optional SVG plot path.")
    common.add_argument("--m", type=int, default=None, help="Number of rows.")
    common.add_argument("--n", type=int, default=None, help="Number of columns.")
    common.add_argument("--r", type=int, default=None, help="Rank.")
    common.add_argument("--l1", type=int, default=None, help="Nonzero columns of the left factor.")
    common.add_argument("--l2", type=int, default=None, help="Nonzero columns of the right factor.")
    common.add_argument("--ensemble", type=str, choices=["dense", "rankone"], default=None)
    common.add_argument("--s", type=float, default=None, help="Radius of the measurement balls.")
    common.add_argument("--k-min", type=int, default=None)
    common.add_argument("--k-max", type=int, default=None)
    common.add_argument("--k-step", type=int, default=None)
    common.add_argument("--trials", type=int, default=None, help="Trials per sweep point (Monte-Carlo draws).")
    common.add_argument("--seed", type=int, default=None, help="64-bit master seed.")
    common.add_argument("--decoder", type=str, choices=["enumerate", "altmin", "sparsefactor"], default=None)
    common.add_argument("--restarts", type=int, default=None, help="Alternating-minimization restarts.")
    common.add_argument("--max-iters", type=int, default=None, help="Alternating-minimization iterations.")
    common.add_argument("--init", type=str, choices=["random", "spectral"], default=None)
    common.add_argument("--budget", type=int, default=None, help="Sparse-factor enumeration budget.")
    common.add_argument("--support", type=str, choices=["lowrank", "sparsefactor", "factor", "pointcloud"])
    common.add_argument("--samples", type=int, default=None, help="Points drawn for box counting.")
    common.add_argument("--bound", type=float, default=None, help="Norm bound L of the support set.")
    common.add_argument("--matrix", type=str, default=None, help="CSV file holding the fixed matrix X.")
    common.add_argument("--executor", type=str, choices=["serial", "multiprocessing"], default=None)
    common.add_argument("--processes", type=int, default=None, help="Worker processes (multiprocessing).")
    common.add_argument("--log-dir", type=str, default=None, help="Also write logs to this directory.")
    common.add_argument(
        "--record-timing",
        action="store_true",
        default=None,
        help="Fill wall_seconds; the CSV is then no longer byte-reproducible.",
    )
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG.")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ms-experiment", description="Recovery, concentration and dimension experiments for matrix sensing."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    subparsers.add_parser("phase", parents=[common], help="Success rate against the number of measurements.")
    subparsers.add_parser("concentration", parents=[common], help="Monte-Carlo check of the concentration bounds.")
    subparsers.add_parser("dimension", parents=[common], help="Box-counting dimension of a support set.")
    subparsers.add_parser("example1", parents=[common], help="Phase sweep with the sparse-factor decoder.")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, Any] = {field: getattr(args, dest) for dest, field in _OVERRIDES.items()}
    return load_experiment_config(args.config, overrides, preset=args.command)


def _log_level(verbose: int) -> int:
    return {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = _log_level(args.verbose)
    _set_level(level)

    try:
        config = config_from_args(args)
    except (ValidationError, ConfigError) as e:
        logger.error(f"Invalid configuration:\n{e}")
        return EXIT_VALIDATION

    init_args = (level,)
    if config.log_dir is not None:
        _set_level(level, add_file_handler=True, log_dir=config.log_dir, log_file=LOG_FILE)
        init_args = (level, str(config.log_dir), LOG_FILE)

    try:
        metadata = run_experiment(config, build_executor(config, init_args))
    except (ValidationError, ConfigError) as e:
        logger.error(f"Invalid configuration:\n{e}")
        return EXIT_VALIDATION
    except (MinkowskiSensingError, OSError, ArithmeticError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME

    logger.info(f"Wrote {config.output_path} (metadata keys: {', '.join(sorted(metadata))})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
