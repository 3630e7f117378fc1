import math
import numpy as np
import numpy.typing as npt

from typing import Tuple

from ..errors import DomainError
from ..linalg import as_matrix, check_same_shape
from ..measurement import EnsembleKind, MeasurementEnsemble


def perturbation_gap(e: MeasurementEnsemble, x: npt.ArrayLike, x_center: npt.ArrayLike) -> Tuple[float, float]:
    """
    Both sides of ‖y(X_c)‖₂ ≤ 2s²√k·ρ + ‖y(X)‖₂ with ρ = ‖X − X_c‖₂, for a rank-one
    ensemble whose factors lie in the ball of radius s. The inequality holds for every input.

    Returns:
    - (lhs, rhs)
    """
    if e.kind != EnsembleKind.RANK_ONE:
        raise DomainError("The perturbation inequality is stated for rank-one ensembles")
    x = as_matrix(x, "x")
    x_center = as_matrix(x_center, "x_center")
    check_same_shape(x, x_center)
    rho = float(np.linalg.norm(x - x_center))
    lhs = float(np.linalg.norm(e.apply(x_center)))
    rhs = 2.0 * e.s**2 * math.sqrt(e.k) * rho + float(np.linalg.norm(e.apply(x)))
    return lhs, rhs
