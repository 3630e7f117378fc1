import time
import numpy as np

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from ..config import DecoderKind, ExperimentConfig
from ..errors import BudgetExceededError
from ..measurement import derive_seed, make_rng, sample_ensemble
from ..recovery import DecodeResult, Outcome, decode_altmin, decode_enumerate, decode_sparse_factor
from ..support import LowRankSpec, SparseFactorSpec, sample_support

DEFAULT_SPARSE_FACTOR_BOUND = 3.0


class TrialStatus(str, Enum):
    DECODED = "decoded"
    BUDGET_REFUSED = "budget_refused"
    ERROR = "error"


class TrialOutcome(BaseModel):
    k: int
    trial_index: int
    status: TrialStatus
    outcome: Optional[Outcome] = None
    success: bool = False
    rel_error: Optional[float] = None
    iterations: int = Field(default=0, ge=0)
    wall_seconds: float = Field(default=0.0, ge=0.0)


def trial_seed(config: ExperimentConfig, k: int, trial_index: int) -> int:
    """seed_t = mix(master_seed, experiment tag, k, trial index)."""
    return derive_seed(config.master_seed, config.experiment.value, k, trial_index)


def planted_instance(config: ExperimentConfig, seed: int) -> Tuple[np.ndarray, Optional[List[np.ndarray]]]:
    """
    Ground truth for one trial, plus the candidate set for the enumeration decoder.

    - altmin: a LowRank(m, n, r) draw.
    - sparsefactor: an X₁ᵀX₂ draw with l1, l2 nonzero factor columns.
    - enumerate: a member of a fresh Gaussian cloud of `cloud_size` matrices.
    """
    if config.decoder == DecoderKind.SPARSE_FACTOR:
        spec = SparseFactorSpec(
            m=config.m,
            n=config.n,
            r=config.r,
            l1=config.l1,
            l2=config.l2,
            bound=config.bound or DEFAULT_SPARSE_FACTOR_BOUND,
        )
        return sample_support(spec, 1, seed)[0], None
    if config.decoder == DecoderKind.ENUMERATE:
        rng = make_rng(seed)
        cloud = list(rng.standard_normal((config.cloud_size, config.m, config.n)))
        return cloud[int(rng.integers(config.cloud_size))], cloud
    spec = LowRankSpec(m=config.m, n=config.n, r=config.r, bound=config.bound or 1.0)
    return sample_support(spec, 1, seed)[0], None


def decode_trial(config: ExperimentConfig, k: int, seed: int) -> DecodeResult:
    ensemble = sample_ensemble(config.ensemble, config.m, config.n, k, config.s, derive_seed(seed, "ensemble"))
    x_true, cloud = planted_instance(config, derive_seed(seed, "planted"))
    y = ensemble.apply(x_true)
    opts = config.altmin_options(derive_seed(seed, "decoder"))

    if config.decoder == DecoderKind.ENUMERATE:
        return decode_enumerate(ensemble, y, cloud, x_true=x_true)
    if config.decoder == DecoderKind.SPARSE_FACTOR:
        return decode_sparse_factor(
            ensemble, y, config.r, config.l1, config.l2, opts, budget=config.budget, x_true=x_true
        )
    return decode_altmin(ensemble, y, opts, x_true=x_true)


def phase_trial(config: ExperimentConfig, k: int, trial_index: int) -> TrialOutcome:
    """
    One (ensemble, planted matrix, decode) instance. Success is rel_error within
    `altmin.success_rel_err` against the planted matrix, whatever the decoder's label.
    Budget refusals are returned with their own status; other errors propagate to the executor.
    """
    start = time.perf_counter()
    seed = trial_seed(config, k, trial_index)
    try:
        result = decode_trial(config, k, seed)
    except BudgetExceededError:
        return TrialOutcome(k=k, trial_index=trial_index, status=TrialStatus.BUDGET_REFUSED)
    elapsed = time.perf_counter() - start
    return TrialOutcome(
        k=k,
        trial_index=trial_index,
        status=TrialStatus.DECODED,
        outcome=result.outcome,
        success=result.succeeded(config.altmin.success_rel_err),
        rel_error=result.rel_error,
        iterations=result.iterations,
        wall_seconds=elapsed if config.record_timing else 0.0,
    )
