import json
import numpy as np

from enum import Enum
from typing import Any, Dict, Optional
from typing_extensions import Self
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..constants import RIDGE


class Outcome(str, Enum):
    RECOVERED = "recovered"
    AMBIGUOUS = "ambiguous"
    NO_CANDIDATE = "nocandidate"
    NOT_CONVERGED = "notconverged"


class InitKind(str, Enum):
    RANDOM = "random"
    SPECTRAL = "spectral"


class AltMinOptions(BaseModel):
    """
    Settings for rank-constrained alternating least squares.

    Attributes:
    - r: int
        Target rank; r = 0 decodes to the zero matrix.
    - max_iters: int
        Iterations per restart, each one V-step and one U-step.
    - tol: float
        Relative residual tolerance, also the stall threshold on the relative residual decrease.
    - restarts: int
        Independent initializations; the lowest residual wins, ties go to the lowest index.
    - init: InitKind
        Random Gaussian or spectral (truncated SVD of Σ y_i A_i). With spectral init only the
        first restart is spectral, later ones are random.
    - success_rel_err: float
        Relative error against a planted matrix that counts as a success in experiment statistics.
    - seed: int
        Master seed for random initializations.
    - ridge: float
        Tikhonov term for the normal-equation fallback of a failed least-squares substep.
    """

    r: int = Field(ge=0)
    max_iters: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-10, gt=0.0, lt=1.0)
    restarts: int = Field(default=10, ge=1)
    init: InitKind = InitKind.RANDOM
    success_rel_err: float = Field(default=1e-4, gt=0.0)
    seed: int = Field(default=0, ge=0)
    ridge: float = Field(default=RIDGE, gt=0.0)


class DecodeResult(BaseModel):
    """
    Output of a decoder.

    `x_hat` holds the reconstruction for RECOVERED and the best iterate for NOT_CONVERGED;
    it is None otherwise. `residual` is ‖apply(e, x_hat) − y‖₂ (for NO_CANDIDATE and
    AMBIGUOUS, the smallest residual seen).
    """

    outcome: Outcome
    x_hat: Optional[np.ndarray] = Field(default=None, repr=False)
    residual: float = Field(ge=0.0)
    iterations: int = Field(default=0, ge=0)
    rel_error: Optional[float] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def check_payload(self) -> Self:
        needs_matrix = self.outcome in (Outcome.RECOVERED, Outcome.NOT_CONVERGED)
        if needs_matrix and self.x_hat is None:
            raise ValueError(f"Outcome `{self.outcome.value}` requires a matrix")
        if not needs_matrix and self.x_hat is not None:
            raise ValueError(f"Outcome `{self.outcome.value}` carries no matrix")
        return self

    @property
    def recovered(self) -> bool:
        return self.outcome == Outcome.RECOVERED

    def succeeded(self, success_rel_err: float) -> bool:
        """Planted-truth success: rel_error within `success_rel_err`, whatever the outcome label."""
        return self.rel_error is not None and self.rel_error <= success_rel_err

    def to_json(self) -> str:
        """{outcome, residual, rel_error, iterations, diagnostics}; the matrix itself is not written."""
        record = {
            "outcome": self.outcome.value,
            "residual": self.residual,
            "rel_error": self.rel_error,
            "iterations": self.iterations,
            "diagnostics": self.diagnostics,
        }
        return json.dumps(record, sort_keys=True, default=_to_builtin)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def relative_error(x_hat: Optional[np.ndarray], x_true: Optional[np.ndarray]) -> Optional[float]:
    """‖x_hat − x_true‖₂ / ‖x_true‖₂, or the absolute error when x_true is zero."""
    if x_hat is None or x_true is None:
        return None
    scale = float(np.linalg.norm(x_true))
    error = float(np.linalg.norm(x_hat - x_true))
    return error / scale if scale > 0.0 else error
