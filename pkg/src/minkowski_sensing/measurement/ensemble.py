import json
import numpy as np
import numpy.typing as npt

from enum import Enum
from typing import Optional, Sequence
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, computed_field

from ..errors import DimensionError, DomainError
from ..linalg import as_matrix
from ..ms_logging import logger
from .sampling import RNG_ALGORITHM, make_rng, sample_uniform_ball


class EnsembleKind(str, Enum):
    DENSE = "dense"
    RANK_ONE = "rankone"


def _covering_radius(norms: np.ndarray) -> float:
    """Smallest radius bounding the given norms; 1 for an empty or all-zero ensemble."""
    radius = float(norms.max(initial=0.0))
    return radius if radius > 0.0 else 1.0


class MeasurementEnsemble(BaseModel):
    """
    k linear measurement functionals on m×n matrices.

    A dense ensemble stores matrices A_i (array of shape (k, m, n)); a rank-one ensemble
    stores factor pairs (a_i, b_i) with A_i = a_i b_iᵀ (arrays (k, m) and (k, n)).
    Seeded ensembles are regenerated from `(kind, m, n, k, s, seed)`; entries are never
    serialized. Ensembles built from explicit arrays carry `seed=None`.

    Attributes:
    - kind: EnsembleKind
    - m, n: int
        Matrix shape the ensemble measures.
    - k: int
        Number of measurements (0 gives the trivial map).
    - s: float
        Radius bound: ‖A_i‖₂ ≤ s (dense) or ‖a_i‖₂, ‖b_i‖₂ ≤ s (rank-one).
    - seed: Optional[int]
        64-bit seed for regeneration.
    - rng_algorithm: str
        Generator used for regeneration.
    """

    kind: EnsembleKind
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    k: int = Field(ge=0)
    s: float = Field(default=1.0, gt=0.0)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    rng_algorithm: str = RNG_ALGORITHM

    model_config = ConfigDict(frozen=True)

    _mats: Optional[np.ndarray] = PrivateAttr(default=None)
    _lefts: Optional[np.ndarray] = PrivateAttr(default=None)
    _rights: Optional[np.ndarray] = PrivateAttr(default=None)

    def model_post_init(self, __context) -> None:
        if self.seed is None:
            return
        if self.rng_algorithm != RNG_ALGORITHM:
            raise DomainError(f"Cannot regenerate entries drawn with `{self.rng_algorithm}`")
        rng = make_rng(self.seed)
        if self.kind == EnsembleKind.DENSE:
            draws = sample_uniform_ball(self.m * self.n, self.s, rng, size=self.k)
            self._mats = draws.reshape(self.k, self.m, self.n)
        else:
            self._lefts = sample_uniform_ball(self.m, self.s, rng, size=self.k)
            self._rights = sample_uniform_ball(self.n, self.s, rng, size=self.k)

    @classmethod
    def from_matrices(cls, mats: npt.ArrayLike, s: Optional[float] = None) -> "MeasurementEnsemble":
        """Dense ensemble from an explicit (k, m, n) stack."""
        mats = np.asarray(mats, dtype=np.float64)
        if mats.ndim != 3:
            raise DimensionError(f"Expected a (k, m, n) stack, got shape {mats.shape}")
        if s is None:
            s = _covering_radius(np.linalg.norm(mats.reshape(mats.shape[0], mats.shape[1] * mats.shape[2]), axis=1))
        ensemble = cls(kind=EnsembleKind.DENSE, m=mats.shape[1], n=mats.shape[2], k=mats.shape[0], s=s)
        ensemble._mats = mats
        return ensemble

    @classmethod
    def from_factors(
        cls, lefts: npt.ArrayLike, rights: npt.ArrayLike, s: Optional[float] = None
    ) -> "MeasurementEnsemble":
        """Rank-one ensemble from explicit (k, m) and (k, n) factor arrays."""
        lefts = np.asarray(lefts, dtype=np.float64)
        rights = np.asarray(rights, dtype=np.float64)
        if lefts.ndim != 2 or rights.ndim != 2 or lefts.shape[0] != rights.shape[0]:
            raise DimensionError(f"Factor arrays must be (k, m) and (k, n), got {lefts.shape} and {rights.shape}")
        if s is None:
            s = _covering_radius(np.concatenate([np.linalg.norm(lefts, axis=1), np.linalg.norm(rights, axis=1)]))
        ensemble = cls(kind=EnsembleKind.RANK_ONE, m=lefts.shape[1], n=rights.shape[1], k=lefts.shape[0], s=s)
        ensemble._lefts = lefts
        ensemble._rights = rights
        return ensemble

    @property
    def matrices(self) -> np.ndarray:
        if self.kind != EnsembleKind.DENSE:
            raise DomainError("Rank-one ensembles store factors; use `materialize()`")
        return self._mats

    @property
    def lefts(self) -> np.ndarray:
        if self.kind != EnsembleKind.RANK_ONE:
            raise DomainError("Dense ensembles have no factor vectors")
        return self._lefts

    @property
    def rights(self) -> np.ndarray:
        if self.kind != EnsembleKind.RANK_ONE:
            raise DomainError("Dense ensembles have no factor vectors")
        return self._rights

    @computed_field
    @property
    def storage_cost(self) -> int:
        """Number of stored reals: k·m·n for dense, k·(m+n) for rank-one."""
        if self.kind == EnsembleKind.DENSE:
            return self.k * self.m * self.n
        return self.k * (self.m + self.n)

    def materialize(self) -> np.ndarray:
        """All A_i as a (k, m, n) array."""
        if self.kind == EnsembleKind.DENSE:
            return self._mats
        return np.einsum("ki,kj->kij", self._lefts, self._rights)

    def _check_input(self, x: npt.ArrayLike) -> np.ndarray:
        x = as_matrix(x)
        if x.shape != (self.m, self.n):
            raise DimensionError(f"Ensemble measures {self.m}x{self.n} matrices, got {x.shape}")
        return x

    def apply(self, x: npt.ArrayLike) -> np.ndarray:
        """
        Measurement vector y with y_i = ⟨A_i, x⟩ (dense) or a_iᵀ x b_i (rank-one).

        Returns:
        - np.ndarray of length k.
        """
        x = self._check_input(x)
        if self.kind == EnsembleKind.DENSE:
            return np.tensordot(self._mats, x, axes=([1, 2], [0, 1]))
        # a_i · (x b_i) for every i at once
        return np.einsum("ki,ki->k", self._lefts, self._rights @ x.T)

    def apply_factored(self, u: npt.ArrayLike, v: npt.ArrayLike) -> np.ndarray:
        """Measure x = u vᵀ without forming x; u is (m, r), v is (n, r)."""
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if u.ndim != 2 or v.ndim != 2 or u.shape[0] != self.m or v.shape[0] != self.n or u.shape[1] != v.shape[1]:
            raise DimensionError(f"Factors must be ({self.m}, r) and ({self.n}, r), got {u.shape} and {v.shape}")
        if self.kind == EnsembleKind.DENSE:
            return np.einsum("kij,ir,jr->k", self._mats, u, v)
        return np.einsum("kr,kr->k", self._lefts @ u, self._rights @ v)

    def apply_batch(self, xs: npt.ArrayLike) -> np.ndarray:
        """Measure a (count, m, n) stack; returns (count, k)."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 3 or xs.shape[1:] != (self.m, self.n):
            raise DimensionError(f"Expected a (count, {self.m}, {self.n}) stack, got {xs.shape}")
        if self.kind == EnsembleKind.DENSE:
            return np.einsum("kij,cij->ck", self._mats, xs)
        return np.einsum("ki,cij,kj->ck", self._lefts, xs, self._rights)

    def adjoint(self, y: npt.ArrayLike) -> np.ndarray:
        """Σ_i y_i A_i as an (m, n) matrix."""
        y = self._check_vector(y)
        if self.kind == EnsembleKind.DENSE:
            return np.tensordot(y, self._mats, axes=(0, 0))
        return (self._lefts * y[:, None]).T @ self._rights

    def design_for_left(self, v: np.ndarray) -> np.ndarray:
        """
        Rows vec(A_i v), so that apply(u vᵀ) = design_for_left(v) @ vec(u) for u of shape (m, r).
        """
        if self.kind == EnsembleKind.DENSE:
            return np.einsum("kij,jr->kir", self._mats, v).reshape(self.k, self.m * v.shape[1])
        return np.einsum("ki,kr->kir", self._lefts, self._rights @ v).reshape(self.k, self.m * v.shape[1])

    def design_for_right(self, u: np.ndarray) -> np.ndarray:
        """
        Rows vec(A_iᵀ u), so that apply(u vᵀ) = design_for_right(u) @ vec(v) for v of shape (n, r).
        """
        if self.kind == EnsembleKind.DENSE:
            return np.einsum("kij,ir->kjr", self._mats, u).reshape(self.k, self.n * u.shape[1])
        return np.einsum("kj,kr->kjr", self._rights, self._lefts @ u).reshape(self.k, self.n * u.shape[1])

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> "MeasurementEnsemble":
        """
        Ensemble acting on the |rows|×|cols| submatrix: for x supported on rows×cols,
        self.apply(x) equals restrict(rows, cols).apply(x[rows][:, cols]).
        """
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self.kind == EnsembleKind.DENSE:
            return MeasurementEnsemble.from_matrices(self._mats[:, rows][:, :, cols], s=self.s)
        return MeasurementEnsemble.from_factors(self._lefts[:, rows], self._rights[:, cols], s=self.s)

    def _check_vector(self, y: npt.ArrayLike) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.shape != (self.k,):
            raise DimensionError(f"Expected a measurement vector of length {self.k}, got {y.shape}")
        return y

    def to_json(self) -> str:
        """JSON document {kind, m, n, k, s, seed, rng_algorithm}; entries are regenerated on load."""
        if self.seed is None:
            raise DomainError("Only seeded ensembles can be serialized")
        return self.model_dump_json(include={"kind", "m", "n", "k", "s", "seed", "rng_algorithm"})

    @classmethod
    def from_json(cls, document: str) -> "MeasurementEnsemble":
        return cls(**json.loads(document))


def sample_ensemble(kind: EnsembleKind, m: int, n: int, k: int, s: float = 1.0, seed: int = 0) -> MeasurementEnsemble:
    """
    Draw a seeded ensemble: dense matrices uniform on the mn-dimensional ball of radius s
    (via vec), or rank-one pairs with a_i, b_i uniform on the m- and n-balls.
    Equal arguments give bit-identical entries.
    """
    ensemble = MeasurementEnsemble(kind=EnsembleKind(kind), m=m, n=n, k=k, s=s, seed=seed)
    logger.debug(f"Sampled {ensemble.kind.value} ensemble m={m} n={n} k={k} s={s} seed={seed}")
    return ensemble


def apply(e: MeasurementEnsemble, x: npt.ArrayLike) -> np.ndarray:
    return e.apply(x)


def storage_cost(e: MeasurementEnsemble) -> int:
    return e.storage_cost

