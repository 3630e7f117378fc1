import statistics
import numpy as np

from collections import Counter
from typing import Any, Dict, List, Optional, Tuple

from .. import __version__
from ..concentration import BoundReport, ball_volume_audit, bound_reports, d_const_audit, delta_grid, partition_sizes
from ..config import DecoderKind, ExperimentConfig, ExperimentKind, SupportKind, SweepRecord
from ..executor import ExecutorBase, ExecutorFactory
from ..linalg import svd
from ..measurement import RNG_ALGORITHM, derive_seed, make_rng
from ..ms_logging import logger
from ..support import (
    DimensionEstimate,
    LowRankSpec,
    PointCloudSpec,
    SparseFactorSpec,
    estimate_dim,
    export_dimension_estimate,
    import_matrix,
    manifold_dim,
    sample_factor_set,
    sample_support,
)
from .output import emit_csv, emit_svg_plot, write_metadata
from .trials import DEFAULT_SPARSE_FACTOR_BOUND, TrialOutcome, TrialStatus, phase_trial


def build_executor(config: ExperimentConfig, init_args: Tuple[Any, ...] = ()) -> ExecutorBase:
    return ExecutorFactory(mode=config.executor, processes=config.processes, init_args=init_args).create_executor()


def k_star(config: ExperimentConfig) -> int:
    """Information-theoretic reference line for the sweep: (m+n−r)r, or (l1+l2)r for sparse factors."""
    if config.decoder == DecoderKind.SPARSE_FACTOR:
        return (config.l1 + config.l2) * config.r
    return manifold_dim(config.m, config.n, config.r)


def _sweep_record(k: int, config: ExperimentConfig, outcomes: List[TrialOutcome]) -> SweepRecord:
    decoded = [o for o in outcomes if o.status == TrialStatus.DECODED]
    successes = sum(o.success for o in decoded)
    errors = [o.rel_error for o in decoded if o.rel_error is not None]
    iterations = [o.iterations for o in decoded]
    return SweepRecord(
        k=k,
        trials=config.trials,
        successes=successes,
        success_rate=successes / config.trials,
        mean_rel_err=float(np.mean(errors)) if errors else float("nan"),
        median_iters=statistics.median_low(iterations) if iterations else 0,
        wall_seconds=float(sum(o.wall_seconds for o in decoded)),
        budget_refusals=sum(o.status == TrialStatus.BUDGET_REFUSED for o in outcomes),
        errors=config.trials - len(outcomes),
    )


def run_phase(
    config: ExperimentConfig, executor: Optional[ExecutorBase] = None
) -> Tuple[List[SweepRecord], Dict[str, Any]]:
    """
    Phase-transition sweep: `trials` seeded (ensemble, planted X, decode) instances per k.

    Trials fan out to the executor; outcomes are regrouped by (k, trial index), so the
    records do not depend on the worker count.

    Returns:
    - records: one SweepRecord per k
    - metadata: k_star and per-k trial status counts
    """
    if config.experiment not in (ExperimentKind.PHASE, ExperimentKind.EXAMPLE1):
        raise ValueError(f"run_phase cannot run a `{config.experiment.value}` config")
    executor = executor or build_executor(config)
    tasks = [(config, k, t) for k in config.k_values for t in range(config.trials)]
    logger.info(f"Running {len(tasks)} {config.decoder.value} trials over k={config.k_values}")
    result = executor.run(tasks, phase_trial)
    for task, exc in result.failures:
        logger.error(f"Trial k={task[1]} index={task[2]} failed: {exc!r}")

    by_k: Dict[int, List[TrialOutcome]] = {k: [] for k in config.k_values}
    for outcome in sorted(result.successes, key=lambda o: (o.k, o.trial_index)):
        by_k[outcome.k].append(outcome)

    records = []
    status_counts = {}
    for k, outcomes in by_k.items():
        record = _sweep_record(k, config, outcomes)
        records.append(record)
        counts = Counter(o.status.value for o in outcomes)
        counts[TrialStatus.ERROR.value] = record.errors
        status_counts[str(k)] = {status.value: counts.get(status.value, 0) for status in TrialStatus}
        logger.info(f"k={k}: {record.successes}/{record.trials} successes")

    metadata = {
        "k_star": k_star(config),
        "manifold_dim": manifold_dim(config.m, config.n, config.r),
        "trial_status": status_counts,
        "success_criterion": f"rel_error <= {config.altmin.success_rel_err:g}",
    }
    return records, metadata


def concentration_matrix(config: ExperimentConfig) -> np.ndarray:
    """The fixed X: read from `matrix_path`, else a seeded Gaussian rank-r matrix scaled to σ₁ = 1."""
    if config.matrix_path is not None:
        return import_matrix(config.matrix_path)
    rng = make_rng(derive_seed(config.master_seed, "concentration-matrix"))
    x = rng.standard_normal((config.m, config.r)) @ rng.standard_normal((config.r, config.n))
    return x / svd(x).sigma_max


def run_concentration(
    config: ExperimentConfig, executor: Optional[ExecutorBase] = None
) -> Tuple[List[BoundReport], Dict[str, Any]]:
    """
    Empirical P[|aᵀXb| ≤ δ] on a geometric δ grid up to s²σ₁(X), next to every analytic bound,
    for each k in the sweep (k enters only through the k-measurement bound).
    """
    if config.experiment != ExperimentKind.CONCENTRATION:
        raise ValueError(f"run_concentration cannot run a `{config.experiment.value}` config")
    executor = executor or build_executor(config)
    x = concentration_matrix(config)
    deltas = delta_grid(x, config.s, config.delta_points, config.delta_min)
    seed = derive_seed(config.master_seed, "concentration")

    reports: List[BoundReport] = []
    for k in config.k_values:
        reports.extend(bound_reports(x, config.s, deltas, config.trials, seed, k, config.mc_partition_size, executor))
    violations = sum(r.violates for r in reports)
    if violations:
        logger.error(f"{violations} grid points exceed the single-measurement bound")

    metadata = {
        "matrix": x,
        "rank": svd(x).numerical_rank,
        "deltas": deltas,
        "partition_sizes": partition_sizes(config.trials, config.mc_partition_size),
        "violations": violations,
        "infinite_f_deltas": sorted({r.delta for r in reports if r.infinite_f}),
        "ball_volume_audit": ball_volume_audit().to_dict("records"),
        "d_const_audit": d_const_audit(max(x.shape)).to_dict("records"),
    }
    return reports, metadata


def sample_dimension_support(config: ExperimentConfig) -> Tuple[List[np.ndarray], float]:
    """Points drawn from the configured support set and its reference dimension."""
    seed = derive_seed(config.master_seed, "dimension")
    if config.support == SupportKind.LOW_RANK:
        spec = LowRankSpec(m=config.m, n=config.n, r=config.r, bound=config.bound or 1.0)
        return sample_support(spec, config.samples, seed), spec.reference_dim
    if config.support == SupportKind.SPARSE_FACTOR:
        spec = SparseFactorSpec(
            m=config.m,
            n=config.n,
            r=config.r,
            l1=config.l1,
            l2=config.l2,
            bound=config.bound or DEFAULT_SPARSE_FACTOR_BOUND,
        )
        return sample_support(spec, config.samples, seed), spec.reference_dim
    if config.support == SupportKind.FACTOR:
        bound = config.bound or DEFAULT_SPARSE_FACTOR_BOUND
        return sample_factor_set(config.r, config.m, config.l1, bound, config.samples, seed), config.l1 * config.r
    cloud = list(make_rng(derive_seed(seed, "cloud")).standard_normal((config.cloud_size, config.m, config.n)))
    return sample_support(PointCloudSpec(points=cloud), config.samples, seed), 0.0


def run_dimension(config: ExperimentConfig) -> Tuple[List[DimensionEstimate], Dict[str, Any]]:
    """
    Box-counting estimate of the configured support set. Without explicit radii the
    levels are chosen from the samples (see `estimate_dim`); with only one of them the
    other sits a factor 32 away.
    """
    if config.experiment != ExperimentKind.DIMENSION:
        raise ValueError(f"run_dimension cannot run a `{config.experiment.value}` config")
    points, reference = sample_dimension_support(config)
    rho_min, rho_max = config.rho_min, config.rho_max
    if rho_max is None and rho_min is not None:
        rho_max = 32.0 * rho_min
    if rho_min is None and rho_max is not None:
        rho_min = rho_max / 32.0
    estimate = estimate_dim(points, rho_min, rho_max, config.levels)
    logger.info(f"{config.support.value}: slope {estimate.slope:.3f} against reference {reference:g}")
    metadata = {
        "reference_dim": reference,
        "rho_min": estimate.rho_schedule[-1],
        "rho_max": estimate.rho_schedule[0],
        "fitted_levels": sum(estimate.fitted),
        "saturated": estimate.saturated,
    }
    return [estimate], metadata


def _base_metadata(config: ExperimentConfig) -> Dict[str, Any]:
    return {
        "version": __version__,
        "config": config.model_dump(),
        "rng_algorithm": RNG_ALGORITHM,
        "seed_derivation": "derive_seed(master_seed, experiment, k, trial_index)",
    }


def run_experiment(config: ExperimentConfig, executor: Optional[ExecutorBase] = None) -> Dict[str, Any]:
    """
    Run the configured experiment and write its CSV, metadata sidecar and optional SVG.

    Returns:
    - The metadata written next to the CSV.
    """
    metadata = _base_metadata(config)
    if config.experiment == ExperimentKind.DIMENSION:
        estimates, extra = run_dimension(config)
        export_dimension_estimate(estimates[0], config.output_path, extra["reference_dim"])
        if config.plot_path is not None:
            emit_svg_plot(estimates[0], config.plot_path, [extra["reference_dim"]])
        extra["estimate"] = estimates[0].model_dump()
    elif config.experiment == ExperimentKind.CONCENTRATION:
        reports, extra = run_concentration(config, executor)
        emit_csv(reports, config.output_path)
        if config.plot_path is not None:
            emit_svg_plot(reports, config.plot_path)
    else:
        records, extra = run_phase(config, executor)
        emit_csv(records, config.output_path)
        if config.plot_path is not None:
            lines = sorted({extra["k_star"], extra["manifold_dim"]})
            emit_svg_plot(records, config.plot_path, lines)

    metadata.update(extra)
    write_metadata(config.output_path, metadata)
    return metadata
