import numpy as np
import numpy.typing as npt

from typing import List, Literal, Tuple, Union
from typing_extensions import Annotated, Self
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..constants import DEFAULT_EPSILON
from ..errors import DomainError
from ..linalg import as_matrix
from ..measurement import make_rng
from ..ms_logging import logger

# Rejection attempts before a factor draw is rescaled into the open ball instead.
_MAX_REJECTIONS = 1000


def manifold_dim(m: int, n: int, r: int) -> int:
    """
    Dimension (m+n−r)·r of the manifold of rank-r m×n matrices.

    Raises:
    - DomainError if r is negative or exceeds min(m, n).
    """
    if r < 0 or r > min(m, n):
        raise DomainError(f"Rank {r} must lie in [0, min({m}, {n})]")
    return (m + n - r) * r


class LowRankSpec(BaseModel):
    """Matrices of rank at most r inside the Frobenius ball of radius `bound`."""

    kind: Literal["lowrank"] = "lowrank"
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    r: int = Field(ge=1)
    bound: float = Field(default=1.0, gt=0.0)
    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def check_rank(self) -> Self:
        if self.r > min(self.m, self.n):
            raise ValueError(f"r={self.r} exceeds min(m, n)={min(self.m, self.n)}")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.m, self.n)

    @property
    def reference_dim(self) -> int:
        return manifold_dim(self.m, self.n, self.r)


class SparseFactorSpec(BaseModel):
    """
    Products X = X₁ᵀX₂ where X₁ (r×m) and X₂ (r×n) each have exactly l₁, l₂ nonzero
    columns at uniformly random positions with Gaussian entries, factor norms below `bound`.
    Requires r ≤ l₁ < m/2 and r ≤ l₂ ≤ n/2 − 1/r.
    """

    kind: Literal["sparsefactor"] = "sparsefactor"
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    r: int = Field(ge=1)
    l1: int = Field(ge=1)
    l2: int = Field(ge=1)
    bound: float = Field(default=3.0, gt=0.0)
    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def check_sparsity(self) -> Self:
        errors = []
        if not (self.r <= self.l1 and 2 * self.l1 < self.m):
            errors.append(f"Need r <= l1 < m/2, got r={self.r}, l1={self.l1}, m={self.m}")
        if not (self.r <= self.l2 and self.l2 <= self.n / 2 - 1 / self.r):
            errors.append(f"Need r <= l2 <= n/2 - 1/r, got r={self.r}, l2={self.l2}, n={self.n}")
        if errors:
            raise ValueError("\n".join(errors))
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.m, self.n)

    @property
    def reference_dim(self) -> int:
        return (self.l1 + self.l2) * self.r


class PointCloudSpec(BaseModel):
    """A finite, nonempty set of equally shaped matrices."""

    kind: Literal["pointcloud"] = "pointcloud"
    points: List[np.ndarray] = Field(repr=False)
    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0, lt=1.0)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("points", mode="before")
    @classmethod
    def coerce_points(cls, value):
        points = [as_matrix(p, "point") for p in value]
        if not points:
            raise ValueError("A point cloud needs at least one matrix")
        shape = points[0].shape
        if any(p.shape != shape for p in points):
            raise ValueError("All points in a cloud must share one shape")
        return points

    @property
    def shape(self) -> Tuple[int, int]:
        return self.points[0].shape

    @property
    def reference_dim(self) -> int:
        return 0


SupportSpec = Annotated[Union[LowRankSpec, SparseFactorSpec, PointCloudSpec], Field(discriminator="kind")]


def _sample_sparse_factor(r: int, cols: int, l: int, bound: float, rng: np.random.Generator) -> np.ndarray:
    """One r×cols factor with exactly l nonzero Gaussian columns and Frobenius norm below `bound`."""
    factor = np.zeros((r, cols))
    positions = np.sort(rng.choice(cols, size=l, replace=False))
    for _ in range(_MAX_REJECTIONS):
        block = rng.standard_normal((r, l))
        if np.linalg.norm(block) < bound:
            factor[:, positions] = block
            return factor
    logger.warning(f"Factor bound {bound} rejects almost every draw; rescaling into the ball instead")
    factor[:, positions] = block * (bound * rng.random() ** (1.0 / (r * l)) / np.linalg.norm(block))
    return factor


def _sample_low_rank(spec: LowRankSpec, rng: np.random.Generator) -> np.ndarray:
    u = rng.standard_normal((spec.r, spec.m))
    v = rng.standard_normal((spec.r, spec.n))
    x = u.T @ v
    # radial redraw keeps the rank and spreads mass over the whole bounded cone
    radius = spec.bound * rng.random() ** (1.0 / spec.reference_dim)
    return x * (radius / np.linalg.norm(x))


def sample_support(spec: SupportSpec, count: int, seed: int) -> List[np.ndarray]:
    """
    Draw `count` matrices from a support set.

    - LowRank: X = UᵀV with U (r×m), V (r×n) standard Gaussian, then rescaled to
      Frobenius norm L·W^{1/d}, W uniform and d = (m+n−r)r, so ‖X‖₂ ≤ L.
    - SparseFactor: X = X₁ᵀX₂ with exactly l_i nonzero Gaussian columns per factor,
      factors redrawn until ‖X_i‖₂ < L.
    - PointCloud: uniform choice with replacement.
    """
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    rng = make_rng(seed)
    if isinstance(spec, LowRankSpec):
        return [_sample_low_rank(spec, rng) for _ in range(count)]
    if isinstance(spec, SparseFactorSpec):
        out = []
        for _ in range(count):
            x1 = _sample_sparse_factor(spec.r, spec.m, spec.l1, spec.bound, rng)
            x2 = _sample_sparse_factor(spec.r, spec.n, spec.l2, spec.bound, rng)
            out.append(x1.T @ x2)
        return out
    if isinstance(spec, PointCloudSpec):
        picks = rng.integers(0, len(spec.points), size=count)
        return [spec.points[i].copy() for i in picks]
    raise DomainError(f"Unknown support spec {type(spec).__name__}")


def sample_sparse_factor_pair(spec: SparseFactorSpec, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """One (X₁, X₂) factor pair; X₁ᵀX₂ is distributed as a `sample_support` draw."""
    rng = make_rng(seed)
    x1 = _sample_sparse_factor(spec.r, spec.m, spec.l1, spec.bound, rng)
    x2 = _sample_sparse_factor(spec.r, spec.n, spec.l2, spec.bound, rng)
    return x1, x2


def sample_factor_set(r: int, m: int, l: int, bound: float, count: int, seed: int) -> List[np.ndarray]:
    """
    Draws from the factor set of r×m matrices with exactly l nonzero columns and norm
    below `bound`; its box-counting dimension is l·r.
    """
    if not 1 <= l <= m:
        raise DomainError(f"Need 1 <= l <= m, got l={l}, m={m}")
    rng = make_rng(seed)
    return [_sample_sparse_factor(r, m, l, bound, rng) for _ in range(count)]


def product_perturbation(
    x1: npt.ArrayLike, x1_bar: npt.ArrayLike, x2: npt.ArrayLike, x2_bar: npt.ArrayLike, bound: float
) -> Tuple[float, float]:
    """
    Both sides of ‖X₁ᵀX₂ − X̄₁ᵀX̄₂‖₂ ≤ L(‖X₁−X̄₁‖₂ + ‖X₂−X̄₂‖₂), valid when every factor
    has Frobenius norm at most L = `bound`.
    """
    x1, x1_bar, x2, x2_bar = (as_matrix(a) for a in (x1, x1_bar, x2, x2_bar))
    lhs = float(np.linalg.norm(x1.T @ x2 - x1_bar.T @ x2_bar))
    rhs = bound * float(np.linalg.norm(x1 - x1_bar) + np.linalg.norm(x2 - x2_bar))
    return lhs, rhs
