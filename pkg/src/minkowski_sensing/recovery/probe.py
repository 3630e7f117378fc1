import itertools
import numpy as np

from typing import List, Tuple
from pydantic import BaseModel, Field

from ..constants import COLLISION_TOL
from ..errors import DomainError
from ..measurement import MeasurementEnsemble, derive_seed
from ..ms_logging import logger
from ..support import PointCloudSpec, SupportSpec, sample_support

# Redraws allowed for a pair whose two matrices coincide.
MAX_PAIR_RETRIES = 100


class ProbeResult(BaseModel):
    """
    Attributes:
    - min_gap: float
        Smallest ‖apply(e, X − X')‖₂ / ‖X − X'‖₂ over the probed pairs.
    - collisions: int
        Pairs with gap below 1e-9.
    - pairs: int
        Number of pairs evaluated.
    - resampled: int
        Degenerate pairs (X = X') that were redrawn or, in exhaustive mode, skipped.
    """

    min_gap: float = Field(ge=0.0)
    collisions: int = Field(ge=0)
    pairs: int = Field(ge=0)
    resampled: int = Field(default=0, ge=0)

    def __iter__(self):
        # unpacks as (min_gap, collisions)
        return iter((self.min_gap, self.collisions))


def _gaps(e: MeasurementEnsemble, diffs: np.ndarray) -> np.ndarray:
    return np.linalg.norm(e.apply_batch(diffs), axis=1) / np.linalg.norm(diffs.reshape(diffs.shape[0], -1), axis=1)


def _exhaustive_pairs(spec: PointCloudSpec) -> Tuple[np.ndarray, int]:
    stack = np.stack(spec.points)
    diffs = []
    skipped = 0
    for i, j in itertools.combinations(range(len(stack)), 2):
        diff = stack[i] - stack[j]
        if np.any(diff != 0.0):
            diffs.append(diff)
        else:
            skipped += 1
    if not diffs:
        raise DomainError("The point cloud has no pair of distinct matrices")
    return np.stack(diffs), skipped


def _sampled_pairs(spec: SupportSpec, trials: int, seed: int) -> Tuple[np.ndarray, int]:
    draws = sample_support(spec, 2 * trials, derive_seed(seed, "probe"))
    diffs: List[np.ndarray] = []
    resampled = 0
    for t in range(trials):
        diff = draws[2 * t] - draws[2 * t + 1]
        attempt = 0
        while not np.any(diff != 0.0):
            if attempt == MAX_PAIR_RETRIES:
                raise DomainError(f"Could not draw two distinct matrices in {MAX_PAIR_RETRIES} attempts")
            first, second = sample_support(spec, 2, derive_seed(seed, "probe-retry", t, attempt))
            diff = first - second
            attempt += 1
            resampled += 1
        diffs.append(diff)
    return np.stack(diffs), resampled


def injectivity_probe(
    e: MeasurementEnsemble, spec: SupportSpec, trials: int, seed: int, exhaustive: bool = False
) -> ProbeResult:
    """
    Empirical null-space check of the measurement map on a support set.

    Samples pairs X ≠ X' from `spec` and records the normalized gap
    ‖apply(e, X − X')‖₂ / ‖X − X'‖₂. With `exhaustive=True` and a point cloud, all distinct
    pairs are evaluated and `trials` is ignored.

    Returns:
    - ProbeResult, which unpacks as (min_gap, collisions).
    """
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if exhaustive:
        if not isinstance(spec, PointCloudSpec):
            raise DomainError("Exhaustive probing needs a point cloud")
        diffs, resampled = _exhaustive_pairs(spec)
    else:
        diffs, resampled = _sampled_pairs(spec, trials, seed)
    if diffs.shape[1:] != (e.m, e.n):
        raise DomainError(f"Support matrices are {diffs.shape[1:]}, the ensemble measures {e.m}x{e.n}")

    gaps = _gaps(e, diffs)
    result = ProbeResult(
        min_gap=float(gaps.min()),
        collisions=int(np.count_nonzero(gaps < COLLISION_TOL)),
        pairs=int(gaps.size),
        resampled=resampled,
    )
    logger.info(f"Injectivity probe: {result.pairs} pairs, min gap {result.min_gap:.3e}, {result.collisions} collisions")
    return result
