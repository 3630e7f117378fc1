import numpy as np

from scipy.special import gammaln

from ..errors import DomainError


def _check(k: int, s: float) -> None:
    if k < 0:
        raise DomainError(f"Dimension must be nonnegative, got {k}")
    if not s > 0.0:
        raise DomainError(f"Radius must be positive, got {s}")


def log_ball_volume(k: int, s: float = 1.0) -> float:
    """log V(k, s) = (k/2) log π + k log s − log Γ(k/2 + 1)."""
    _check(k, s)
    return 0.5 * k * np.log(np.pi) + k * np.log(s) - gammaln(0.5 * k + 1.0)


def ball_volume(k: int, s: float = 1.0) -> float:
    """
    Volume of the k-dimensional Euclidean ball of radius s,
    V(k, s) = π^{k/2} s^k / Γ(k/2 + 1), with V(0, s) = 1.
    """
    if k == 0:
        _check(k, s)
        return 1.0
    return float(np.exp(log_ball_volume(k, s)))


def log_sphere_area(k_minus_1: int, s: float = 1.0) -> float:
    _check(k_minus_1, s)
    k = k_minus_1 + 1
    return np.log(2.0) + 0.5 * k * np.log(np.pi) + k_minus_1 * np.log(s) - gammaln(0.5 * k)


def sphere_area(k_minus_1: int, s: float = 1.0) -> float:
    """
    Surface area A(k−1, s) = 2π^{k/2} s^{k−1} / Γ(k/2) of the boundary of the
    k-dimensional ball of radius s, where k = k_minus_1 + 1.
    """
    return float(np.exp(log_sphere_area(k_minus_1, s)))
