import numpy as np
import numpy.typing as npt
import scipy.linalg

from pydantic import BaseModel, ConfigDict, Field, computed_field

from ..constants import RANK_TOL
from ..errors import DimensionError, DomainError, NumericError


def as_matrix(x: npt.ArrayLike, name: str = "x") -> np.ndarray:
    """
    Coerce `x` to a finite 2-D float64 array.

    Parameters:
    - x: array-like
        Matrix entries; nested lists are read in row-major order.
    - name: str
        Used in error messages.

    Returns:
    - np.ndarray
        A (rows, cols) float64 array.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"`{name}` must be a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"`{name}` must have positive dimensions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"`{name}` contains NaN or Inf entries")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"Shape mismatch: {a.shape} vs {b.shape}")


def trace_inner(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """
    Trace inner product tr(aᵀb), i.e. the sum of elementwise products.

    Raises:
    - DimensionError if `a` and `b` differ in shape.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    check_same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


class SvdResult(BaseModel):
    """
    Thin singular value decomposition x = U diag(σ) Vᵀ.

    Attributes:
    - singular_values: np.ndarray
        Nonincreasing, nonnegative, length min(m, n).
    - left_factors: np.ndarray
        (m, min(m, n)) orthonormal columns.
    - right_factors: np.ndarray
        (n, min(m, n)) orthonormal columns.
    - rank_tol: float
        Relative cutoff used for `numerical_rank`.
    """

    singular_values: np.ndarray = Field(repr=True)
    left_factors: np.ndarray = Field(repr=False)
    right_factors: np.ndarray = Field(repr=False)
    rank_tol: float = RANK_TOL

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @computed_field
    @property
    def numerical_rank(self) -> int:
        if self.singular_values.size == 0 or self.singular_values[0] <= 0.0:
            return 0
        return int(np.count_nonzero(self.singular_values > self.rank_tol * self.singular_values[0]))

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    def reconstruct(self) -> np.ndarray:
        return (self.left_factors * self.singular_values) @ self.right_factors.T

    def truncate(self, r: int) -> np.ndarray:
        """Best rank-`r` approximation in Frobenius norm."""
        return (self.left_factors[:, :r] * self.singular_values[:r]) @ self.right_factors[:, :r].T


def svd(x: npt.ArrayLike, rank_tol: float = RANK_TOL) -> SvdResult:
    """
    Compute the thin SVD of `x` with a deterministic sign convention: the first
    component of each left singular vector whose magnitude exceeds machine precision
    is made nonnegative (the right vector is flipped with it).

    Parameters:
    - x: array-like
        Finite real matrix.
    - rank_tol: float, default=1e-10
        Relative threshold, in (0, 1), for the numerical rank.

    Returns:
    - SvdResult

    Raises:
    - DomainError if `rank_tol` is outside (0, 1).
    - NumericError if LAPACK fails to converge (both gesdd and gesvd are tried).
    """
    if not 0.0 < rank_tol < 1.0:
        raise DomainError(f"rank_tol must lie in (0, 1), got {rank_tol}")
    x = as_matrix(x)
    try:
        u, sigma, vt = scipy.linalg.svd(x, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            u, sigma, vt = scipy.linalg.svd(x, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise NumericError(
                f"SVD did not converge for a {x.shape} matrix",
                diagnostics={"shape": x.shape, "drivers": ["gesdd", "gesvd"], "reason": str(e)},
            ) from e

    v = vt.T
    eps = np.finfo(np.float64).eps
    for j in range(u.shape[1]):
        nonzero = np.flatnonzero(np.abs(u[:, j]) > eps)
        if nonzero.size and u[nonzero[0], j] < 0.0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]

    return SvdResult(singular_values=sigma, left_factors=u, right_factors=v, rank_tol=rank_tol)


def numerical_rank(x: npt.ArrayLike, rank_tol: float = RANK_TOL) -> int:
    return svd(x, rank_tol=rank_tol).numerical_rank


def log_delta_product(x: npt.ArrayLike, rank_tol: float = RANK_TOL) -> float:
    """Natural log of Δ(x), the product of the nonzero singular values."""
    result = svd(x, rank_tol=rank_tol)
    r = result.numerical_rank
    if r == 0:
        raise DomainError("Δ is undefined for the zero matrix")
    return float(np.sum(np.log(result.singular_values[:r])))


def delta_product(x: npt.ArrayLike, rank_tol: float = RANK_TOL) -> float:
    """
    Δ(x) = ∏_{i ≤ r} σ_i(x) over the numerical rank r, accumulated in the log domain.

    Raises:
    - DomainError if x has numerical rank 0.
    """
    return float(np.exp(log_delta_product(x, rank_tol=rank_tol)))
