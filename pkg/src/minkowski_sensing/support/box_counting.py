import math
import numpy as np
import numpy.typing as npt

from typing import List, Optional, Sequence, Tuple
from pydantic import BaseModel, Field
from scipy import stats

from ..errors import DimensionError, DomainError
from ..ms_logging import logger

DEFAULT_LEVELS = 6
MAX_DATA_LEVELS = 30
POINTS_PER_CELL = 10


class DimensionEstimate(BaseModel):
    """
    Box-counting estimate of the Minkowski dimension of a sampled set.

    Attributes:
    - rho_schedule: List[float]
        Decreasing covering radii of the grids actually counted (side·√(mn)/2).
    - cell_sides: List[float]
        Dyadic grid side used at each radius.
    - counts: List[int]
        Occupied cells, nondecreasing along the schedule.
    - fitted: List[bool]
        Levels that entered the regression.
    - slope: float
        Least-squares slope of log N(ρ) against log(1/ρ) over the fitted levels.
    - r2: float
        Coefficient of determination of that fit (0 when degenerate).
    - local_slopes: List[float]
        Slopes between consecutive levels; divergence between them shows up here.
    - degenerate: bool
        True when every fitted level has the same count (slope reported as 0).
    - samples: int
        Number of points counted.
    """

    rho_schedule: List[float]
    cell_sides: List[float]
    counts: List[int]
    fitted: List[bool]
    slope: float = Field(ge=0.0)
    r2: float = Field(ge=0.0, le=1.0)
    local_slopes: List[float]
    degenerate: bool = False
    samples: int

    @property
    def saturated(self) -> bool:
        """Sampling heuristic: at least ten points per occupied cell at the finest fitted level."""
        finest = max(i for i, used in enumerate(self.fitted) if used)
        return self.samples >= POINTS_PER_CELL * self.counts[finest]


def _stack(points: Sequence[npt.ArrayLike]) -> np.ndarray:
    if len(points) == 0:
        raise DomainError("Covering numbers need at least one point")
    if isinstance(points, np.ndarray):
        arr = points.astype(np.float64, copy=False)
    else:
        shapes = {np.shape(p) for p in points}
        if len(shapes) != 1:
            raise DimensionError(f"Points must share one matrix shape, got {sorted(shapes)}")
        arr = np.stack([np.asarray(p, dtype=np.float64) for p in points])
    if arr.ndim != 3:
        raise DimensionError(f"Points must share one matrix shape, got array of shape {arr.shape}")
    return arr.reshape(arr.shape[0], -1)


def cell_side(rho: float, ambient_dim: int) -> float:
    """
    Largest dyadic side 2^e with cell diagonal side·√ambient_dim ≤ 2ρ. Dyadic sides make
    the grids nested, so counts are monotone in ρ.
    """
    if not rho > 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    target = 2.0 * rho / np.sqrt(ambient_dim)
    exponent = int(np.floor(np.log2(target)))
    side = 2.0**exponent
    if side > target:
        side /= 2.0
    return side


def _occupied_cells(vectors: np.ndarray, side: float, chunk_size: Optional[int]) -> np.ndarray:
    if chunk_size is None or chunk_size >= vectors.shape[0]:
        return np.unique(np.floor(vectors / side).astype(np.int64), axis=0)
    # per-chunk unique then a union; the merge order cannot change the result
    parts = [
        np.unique(np.floor(vectors[start : start + chunk_size] / side).astype(np.int64), axis=0)
        for start in range(0, vectors.shape[0], chunk_size)
    ]
    return np.unique(np.concatenate(parts, axis=0), axis=0)


def covering_count(points: Sequence[npt.ArrayLike], rho: float, chunk_size: Optional[int] = None) -> int:
    """
    Occupied cells of an origin-anchored axis-aligned grid whose cells have diagonal at
    most 2ρ; an upper-bound surrogate for the covering number N(ρ).

    Parameters:
    - points: sequence of equally shaped matrices
    - rho: float
        Covering radius.
    - chunk_size: Optional[int]
        Count in chunks and merge, bounding peak memory.
    """
    vectors = _stack(points)
    side = cell_side(rho, vectors.shape[1])
    return int(_occupied_cells(vectors, side, chunk_size).shape[0])


def rho_schedule(rho_min: float, rho_max: float, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    if not 0.0 < rho_min < rho_max:
        raise DomainError(f"Need 0 < rho_min < rho_max, got {rho_min}, {rho_max}")
    if levels < 4:
        raise DomainError(f"At least 4 levels are required, got {levels}")
    return np.geomspace(rho_max, rho_min, levels)


def _requested_levels(
    vectors: np.ndarray, rho_min: float, rho_max: float, levels: int, chunk_size: Optional[int]
) -> Tuple[List[float], List[int]]:
    sides, counts = [], []
    for rho in rho_schedule(rho_min, rho_max, levels):
        side = cell_side(float(rho), vectors.shape[1])
        if sides and side == sides[-1]:
            continue
        sides.append(side)
        counts.append(int(_occupied_cells(vectors, side, chunk_size).shape[0]))
        logger.debug(f"rho={rho:.4g} side={side:.4g} count={counts[-1]}")
    return sides, counts


def _data_levels(vectors: np.ndarray, levels: int, chunk_size: Optional[int]) -> Tuple[List[float], List[int]]:
    """
    Halve a dyadic side from the one-cell-per-orthant grid until a level is saturated
    (fewer than ten points per cell), or until a finite set has kept all its points apart
    for `levels` further halvings.
    """
    samples = vectors.shape[0]
    distinct = int(np.unique(vectors, axis=0).shape[0])
    extent = float(np.max(np.abs(vectors)))
    side = 2.0 ** math.ceil(math.log2(2.0 * extent)) if extent > 0.0 else 1.0

    sides, counts = [], []
    separated = 0
    while len(sides) < MAX_DATA_LEVELS:
        count = int(_occupied_cells(vectors, side, chunk_size).shape[0])
        sides.append(side)
        counts.append(count)
        logger.debug(f"side={side:.4g} count={count}")
        if POINTS_PER_CELL * count > samples:
            break
        if count >= distinct:
            separated += 1
            if separated >= levels:
                break
        side /= 2.0
    return sides, counts


def _fit_mask(counts: List[int], samples: int, levels: int) -> List[bool]:
    """
    Levels used by the regression: drop the coarse plateau (repeated counts before the
    first increase, unless nothing else remains) and saturated levels, then keep the
    finest `levels` of the rest.
    """
    start = 0
    while start + 1 < len(counts) and counts[start] == counts[start + 1]:
        start += 1
    if start == len(counts) - 1:
        start = 0
    candidates = [i for i in range(start, len(counts)) if POINTS_PER_CELL * counts[i] <= samples]
    if len(candidates) < 2:
        logger.warning("Fewer than two levels have ten points per cell; fitting the undersampled levels too")
        candidates = list(range(start, len(counts)))
    chosen = set(candidates[-levels:])
    return [i in chosen for i in range(len(counts))]


def estimate_dim(
    points: Sequence[npt.ArrayLike],
    rho_min: Optional[float] = None,
    rho_max: Optional[float] = None,
    levels: int = DEFAULT_LEVELS,
    chunk_size: Optional[int] = None,
) -> DimensionEstimate:
    """
    Regress log N(ρ) on log(1/ρ).

    With `rho_min` and `rho_max` the grids follow a geometric schedule between them; radii
    whose dyadic grid repeats the previous level are dropped. Without them the levels are
    chosen from the data by halving the grid side until occupancy saturates. Either way
    the regression skips the coarse plateau and levels with fewer than ten points per
    occupied cell, and uses the covering radius of each counted grid (side·√(mn)/2).

    Returns:
    - DimensionEstimate; fitted counts that never change give slope 0 and `degenerate=True`.
    """
    if (rho_min is None) != (rho_max is None):
        raise DomainError("Give both rho_min and rho_max, or neither")
    if levels < 4:
        raise DomainError(f"At least 4 levels are required, got {levels}")
    vectors = _stack(points)
    ambient_dim = vectors.shape[1]
    samples = vectors.shape[0]

    if rho_min is None:
        sides, counts = _data_levels(vectors, levels, chunk_size)
    else:
        sides, counts = _requested_levels(vectors, rho_min, rho_max, levels, chunk_size)

    rhos = (np.asarray(sides) * np.sqrt(ambient_dim) / 2.0).tolist()
    log_inv_rho = -np.log(np.asarray(rhos))
    log_counts = np.log(np.asarray(counts, dtype=np.float64))
    local_slopes = (np.diff(log_counts) / np.diff(log_inv_rho)).tolist() if len(counts) > 1 else []
    fitted = _fit_mask(counts, samples, levels)
    fit_counts = [c for c, used in zip(counts, fitted) if used]

    if len(set(fit_counts)) <= 1:
        logger.info("All fitted covering counts are equal; reporting slope 0")
        return DimensionEstimate(
            rho_schedule=rhos,
            cell_sides=sides,
            counts=counts,
            fitted=fitted,
            slope=0.0,
            r2=0.0,
            local_slopes=local_slopes,
            degenerate=True,
            samples=samples,
        )

    mask = np.asarray(fitted)
    fit = stats.linregress(log_inv_rho[mask], log_counts[mask])
    estimate = DimensionEstimate(
        rho_schedule=rhos,
        cell_sides=sides,
        counts=counts,
        fitted=fitted,
        slope=max(float(fit.slope), 0.0),
        r2=float(min(max(fit.rvalue**2, 0.0), 1.0)),
        local_slopes=local_slopes,
        samples=samples,
    )
    if not estimate.saturated:
        logger.warning(
            f"{samples} samples for {max(fit_counts)} occupied cells at the finest fitted level; "
            "the estimate is likely undersampled"
        )
    return estimate
