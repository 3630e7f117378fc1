import math
import numpy as np
import numpy.typing as npt

from typing import List, Optional, Sequence, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import stats

from ..constants import CONFIDENCE_LEVEL
from ..errors import DomainError, MinkowskiSensingError
from ..executor.executors import ExecutorBase, SerialExecutor
from ..linalg import as_matrix, svd
from ..measurement import derive_seed, make_rng, sample_uniform_ball
from ..ms_logging import logger
from .bounds import d_const, d_paper_bound, f_bound, lemma_bound_k, lemma_bound_single

DEFAULT_PARTITION_SIZE = 100_000


class ConcentrationParams(BaseModel):
    """
    Inputs of the single- and k-measurement concentration bounds.

    Attributes:
    - x: np.ndarray
        Fixed matrix of rank at least 1.
    - s: float
        Radius of the balls the measurement vectors are drawn from.
    - delta: float
        Threshold δ ≥ 0.
    - k: int
        Number of rank-one measurements.
    """

    x: np.ndarray = Field(repr=False)
    s: float = Field(default=1.0, gt=0.0)
    delta: float = Field(ge=0.0)
    k: int = Field(default=1, ge=1)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("x", mode="before")
    @classmethod
    def check_rank(cls, value):
        value = as_matrix(value)
        if svd(value).numerical_rank < 1:
            raise ValueError("x must have rank at least 1")
        return value


class BoundReport(BaseModel):
    """
    One row of the concentration table: empirical probability beside every analytic bound.
    `infinite_f` marks the rank-one δ = 0 row, where f is +inf and the bounds are set to 0.
    """

    m: int
    n: int
    r: int
    s: float
    delta: float
    k: int
    trials: int
    empirical_prob: float = Field(ge=0.0, le=1.0)
    ci_halfwidth: float = Field(ge=0.0)
    f_value: float
    d_exact: float = Field(gt=0.0)
    d_paper_bound: float
    single_bound: float = Field(ge=0.0, le=1.0)
    k_bound: float = Field(ge=0.0, le=1.0)
    infinite_f: bool = False
    single_bound_raw: float = Field(default=math.nan, exclude=True)

    @property
    def violates(self) -> bool:
        return self.empirical_prob - self.ci_halfwidth > self.single_bound


class McEstimate(BaseModel):
    deltas: List[float]
    hits: List[int]
    trials: int

    @property
    def probabilities(self) -> List[float]:
        return [h / self.trials for h in self.hits]

    @property
    def halfwidths(self) -> List[float]:
        return [wilson_halfwidth(h, self.trials) for h in self.hits]


def wilson_halfwidth(successes: int, trials: int, confidence: float = CONFIDENCE_LEVEL) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    return z / (1.0 + z**2 / trials) * math.sqrt(p * (1.0 - p) / trials + z**2 / (4.0 * trials**2))


def partition_sizes(trials: int, partition_size: int) -> List[int]:
    """Trial counts per partition; part of the reproducibility contract together with the seeds."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    full, rest = divmod(trials, partition_size)
    return [partition_size] * full + ([rest] if rest else [])


def _bilinear_partition(x: np.ndarray, s: float, size: int, seed: int, deltas: np.ndarray, k: int = 1) -> np.ndarray:
    """Hits per δ in one partition: |aᵀXb| ≤ δ (k = 1) or ‖(a_iᵀXb_i)_i‖₂ ≤ δ."""
    rng = make_rng(seed)
    m, n = x.shape
    a = sample_uniform_ball(m, s, rng, size=size * k)
    b = sample_uniform_ball(n, s, rng, size=size * k)
    values = np.abs(np.einsum("ci,ci->c", a @ x, b))
    if k > 1:
        values = np.sqrt(np.sum(values.reshape(size, k) ** 2, axis=1))
    values.sort()
    return np.searchsorted(values, deltas, side="right")


def _run_partitions(
    x: np.ndarray,
    s: float,
    deltas: Sequence[float],
    trials: int,
    seed: int,
    k: int,
    partition_size: int,
    executor: Optional[ExecutorBase],
) -> McEstimate:
    deltas = np.asarray(deltas, dtype=np.float64)
    if np.any(deltas < 0.0):
        raise DomainError("delta values must be nonnegative")
    sizes = partition_sizes(trials, partition_size)
    tasks = [(x, s, size, derive_seed(seed, "concentration", k, index), deltas, k) for index, size in enumerate(sizes)]
    executor = executor or SerialExecutor()
    result = executor.run(tasks, _bilinear_partition)
    if not result.all_successful:
        task, exc = result.failures[0]
        raise MinkowskiSensingError(f"{result.num_failures} Monte-Carlo partitions failed; first error: {exc}") from exc
    # integer sums are order independent, so completion order does not matter
    hits = np.sum(np.stack([np.asarray(h) for h in result.successes]), axis=0)
    logger.info(f"Monte-Carlo: {trials} trials in {len(sizes)} partitions, k={k}")
    return McEstimate(deltas=deltas.tolist(), hits=[int(h) for h in hits], trials=trials)


def mc_prob_curve(
    x: npt.ArrayLike,
    s: float,
    deltas: Sequence[float],
    trials: int,
    seed: int,
    partition_size: int = DEFAULT_PARTITION_SIZE,
    executor: Optional[ExecutorBase] = None,
) -> McEstimate:
    """
    Empirical P[|aᵀXb| ≤ δ] for every δ in `deltas` from one set of draws (a uniform on
    B_m(0,s), b uniform on B_n(0,s)), so the curve is exactly monotone in δ.
    """
    return _run_partitions(as_matrix(x), s, deltas, trials, seed, 1, partition_size, executor)


def mc_prob_single(
    x: npt.ArrayLike,
    s: float,
    delta: float,
    trials: int,
    seed: int,
    partition_size: int = DEFAULT_PARTITION_SIZE,
    executor: Optional[ExecutorBase] = None,
) -> Tuple[float, float]:
    """Empirical P[|aᵀXb| ≤ δ] and the 99% Wilson half-width."""
    estimate = mc_prob_curve(x, s, [delta], trials, seed, partition_size, executor)
    return estimate.probabilities[0], estimate.halfwidths[0]


def mc_prob_k(
    x: npt.ArrayLike,
    s: float,
    delta: float,
    k: int,
    trials: int,
    seed: int,
    partition_size: int = DEFAULT_PARTITION_SIZE,
    executor: Optional[ExecutorBase] = None,
) -> Tuple[float, float]:
    """Empirical P[‖(a_iᵀXb_i)_{i≤k}‖₂ ≤ δ] for k independent rank-one measurements, with half-width."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    estimate = _run_partitions(as_matrix(x), s, [delta], trials, seed, k, partition_size, executor)
    return estimate.probabilities[0], estimate.halfwidths[0]


def delta_grid(x: npt.ArrayLike, s: float, points: int = 12, delta_min: float = 1e-3) -> np.ndarray:
    """Geometric grid from `delta_min` to s²σ₁(X), the level at which the event is certain."""
    top = s**2 * svd(as_matrix(x)).sigma_max
    if not 0.0 < delta_min < top:
        raise DomainError(f"delta_min={delta_min} must lie in (0, s^2 sigma_1 = {top})")
    return np.geomspace(delta_min, top, points)


def bound_reports(
    x: npt.ArrayLike,
    s: float,
    deltas: Sequence[float],
    trials: int,
    seed: int,
    k: int = 1,
    partition_size: int = DEFAULT_PARTITION_SIZE,
    executor: Optional[ExecutorBase] = None,
) -> List[BoundReport]:
    """Coupled empirical probabilities and all analytic bounds for each δ."""
    params = ConcentrationParams(x=x, s=s, delta=0.0, k=k)
    x = params.x
    m, n = x.shape
    r = svd(x).numerical_rank
    estimate = mc_prob_curve(x, s, deltas, trials, seed, partition_size, executor)

    reports = []
    for delta, p, half in zip(estimate.deltas, estimate.probabilities, estimate.halfwidths):
        raw = lemma_bound_single(x, s, delta, clip=False)
        f_value = f_bound(x, s, delta)
        report = BoundReport(
            m=m,
            n=n,
            r=r,
            s=s,
            delta=delta,
            k=k,
            trials=trials,
            empirical_prob=p,
            ci_halfwidth=half,
            f_value=f_value,
            d_exact=d_const(r, m, n),
            d_paper_bound=d_paper_bound(r, m, n),
            single_bound=min(raw, 1.0),
            k_bound=lemma_bound_k(x, s, delta, k),
            single_bound_raw=raw,
            infinite_f=math.isinf(f_value),
        )
        if report.violates:
            logger.error(f"Empirical probability {p:.4g} exceeds the bound {report.single_bound:.4g} at delta={delta:.4g}")
        reports.append(report)
    return reports
