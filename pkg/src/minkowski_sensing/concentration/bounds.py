import math
import numpy as np
import pandas as pd
import numpy.typing as npt

from typing import Optional

from ..errors import DomainError
from ..linalg import as_matrix, ball_volume, log_ball_volume, sphere_area, svd
from ..ms_logging import logger


def _check_rank(r: int, m: int, n: int) -> None:
    if not 1 <= r <= min(m, n):
        raise DomainError(f"Need 1 <= r <= min(m, n), got r={r}, m={m}, n={n}")


def log_d_const(r: int, m: int, n: int) -> float:
    _check_rank(r, m, n)
    return (
        math.log(2.0)
        + log_ball_volume(n - r)
        + log_ball_volume(m - r)
        + log_ball_volume(r - 1)
        - log_ball_volume(m)
        - log_ball_volume(n)
    )


def d_const(r: int, m: int, n: int) -> float:
    """
    D_{r,m,n} = 2·V(n−r,1)·V(m−r,1)·V(r−1,1) / (V(m,1)·V(n,1)), evaluated with log-Gamma
    (V(0,1) = 1).
    """
    return math.exp(log_d_const(r, m, n))


def d_paper_bound(r: int, m: int, n: int) -> float:
    """The simplified constant 2^{(m+n)/2 − r}; compare against `d_const`, never substitute it."""
    _check_rank(r, m, n)
    return 2.0 ** ((m + n) / 2.0 - r)


def d_const_audit(max_dim: int = 12) -> pd.DataFrame:
    """
    d_const next to the simplified bound for every 1 ≤ r ≤ min(m, n) ≤ max_dim, with
    m, n ≤ max_dim. Column `holds` records whether d_const ≤ d_paper_bound.
    """
    rows = []
    for m in range(1, max_dim + 1):
        for n in range(1, max_dim + 1):
            for r in range(1, min(m, n) + 1):
                exact = d_const(r, m, n)
                simplified = d_paper_bound(r, m, n)
                rows.append(
                    {
                        "r": r,
                        "m": m,
                        "n": n,
                        "d_exact": exact,
                        "d_paper_bound": simplified,
                        "holds": exact <= simplified,
                    }
                )
    audit = pd.DataFrame(rows)
    violations = int((~audit["holds"]).sum())
    if violations:
        logger.warning(f"d_const exceeds 2^((m+n)/2-r) in {violations} of {len(audit)} cases")
    return audit


def ball_volume_audit(k_max: int = 20) -> pd.DataFrame:
    """
    V(k,1) against 2^{k/2} and 2^k for k = 1..k_max with the outcome of each strict
    inequality. The upper one is an equality at k = 1 and the lower one fails for k ≥ 5.
    """
    rows = []
    for k in range(1, k_max + 1):
        volume = ball_volume(k)
        lower, upper = 2.0 ** (k / 2.0), 2.0**k
        rows.append(
            {
                "k": k,
                "volume": volume,
                "lower": lower,
                "upper": upper,
                "lower_holds": lower < volume,
                "upper_holds": volume < upper,
            }
        )
    return pd.DataFrame(rows)


def _spectrum(x: npt.ArrayLike):
    result = svd(as_matrix(x))
    r = result.numerical_rank
    if r == 0:
        raise DomainError("Concentration bounds need a matrix of rank at least 1")
    log_delta = float(np.sum(np.log(result.singular_values[:r])))
    return r, result.sigma_max, log_delta


def f_bound(x: npt.ArrayLike, s: float, delta: float) -> float:
    """
    f(X, s, δ) = (1/Δ(X)) ·
        r = 1: 2/s² + (2/s²)·ln max(s²σ₁/δ, 1)
        r > 1: δ^{r−1}V(r,1)/s^{2r} + A(r−1,1)σ₁^{r−1}/(s²(r−1))

    Returns +inf for r = 1 and δ = 0 (the probability it bounds is then 0).
    """
    if not s > 0.0:
        raise DomainError(f"s must be positive, got {s}")
    if delta < 0.0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    r, sigma1, log_delta = _spectrum(x)
    inv_delta = math.exp(-log_delta)
    if r == 1:
        if delta == 0.0:
            logger.info("f is infinite for rank 1 at delta = 0")
            return math.inf
        return inv_delta * (2.0 / s**2) * (1.0 + math.log(max(s**2 * sigma1 / delta, 1.0)))
    first = delta ** (r - 1) * ball_volume(r) / s ** (2 * r)
    second = sphere_area(r - 1) * sigma1 ** (r - 1) / (s**2 * (r - 1))
    return inv_delta * (first + second)


def lemma_bound_single(x: npt.ArrayLike, s: float, delta: float, clip: bool = True) -> float:
    """
    δ·D_{r,m,n}·f(X,s,δ), the bound on P[|aᵀXb| ≤ δ]; clipped to [0, 1] unless `clip=False`.
    At δ = 0 the bound is 0 for every rank (its limit as δ → 0).
    """
    x = as_matrix(x)
    m, n = x.shape
    f_value = f_bound(x, s, delta)
    if delta == 0.0:
        return 0.0
    r, _, _ = _spectrum(x)
    raw = delta * d_const(r, m, n) * f_value
    if raw > 1.0:
        logger.debug(f"Single-measurement bound {raw:.4g} is vacuous at delta={delta:.4g}")
    return min(raw, 1.0) if clip else raw


def log_lemma_factor(x: npt.ArrayLike, s: float, delta: float) -> float:
    """log(δ·2^{(m+n)/2 − r}·f(X,s,δ)), the per-measurement factor of the k-fold bound."""
    x = as_matrix(x)
    m, n = x.shape
    if delta == 0.0:
        return -math.inf
    r, _, _ = _spectrum(x)
    return math.log(delta) + ((m + n) / 2.0 - r) * math.log(2.0) + math.log(f_bound(x, s, delta))


def log_lemma_bound_k(x: npt.ArrayLike, s: float, delta: float, k: int) -> float:
    """Unclipped log of δᵏ·2^{k(m+n)/2 − kr}·f(X,s,δ)ᵏ."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    return k * log_lemma_factor(x, s, delta)


def lemma_bound_k(x: npt.ArrayLike, s: float, delta: float, k: int) -> float:
    """
    min(1, δᵏ·2^{k(m+n)/2 − kr}·f(X,s,δ)ᵏ), bounding P[‖(a_iᵀXb_i)_i‖₂ ≤ δ] for k
    independent rank-one measurements. Evaluated in the log domain.
    """
    log_value = log_lemma_bound_k(x, s, delta, k)
    if log_value >= 0.0:
        return 1.0
    return math.exp(log_value)


def stratum_rank(x: npt.ArrayLike, level_bound: float) -> Optional[int]:
    """
    Rank r of x when x lies in the stratum {Δ(X) > 1/L, σ₁(X) < L, rank(X) = r} for
    L = `level_bound`, otherwise None.
    """
    result = svd(as_matrix(x))
    r = result.numerical_rank
    if r == 0:
        return None
    delta_product = float(np.prod(result.singular_values[:r]))
    if delta_product > 1.0 / level_bound and result.sigma_max < level_bound:
        return r
    return None


def stratum_g(level_bound: float, r: int, k: int, s: float, rho: float) -> float:
    """
    Stratum-uniform stand-in for f used by the covering argument:

        g = L(1 + 2s²√k) · { 2/s² + (2/s²)·ln max(s²L/ρ, 1)                           r = 1
                            { V(r,1)(ρ(1+2s²√k))^{r−1}/s^{2r} + A(r−1,1)L^{r−1}/(s²(r−1))  r > 1

    For x in the stratum of rank r and δ = ρ(1 + 2s²√k), ρ·g ≥ δ·f(x, s, δ).
    """
    if r < 1 or k < 1 or not (level_bound > 0.0 and s > 0.0 and rho > 0.0):
        raise DomainError(f"Invalid stratum parameters L={level_bound}, r={r}, k={k}, s={s}, rho={rho}")
    inflation = 1.0 + 2.0 * s**2 * math.sqrt(k)
    if r == 1:
        inner = (2.0 / s**2) * (1.0 + math.log(max(s**2 * level_bound / rho, 1.0)))
    else:
        inner = ball_volume(r) * (rho * inflation) ** (r - 1) / s ** (2 * r) + sphere_area(r - 1) * level_bound ** (
            r - 1
        ) / (s**2 * (r - 1))
    return level_bound * inflation * inner


def covering_union_bound(
    n_cover: int, rho: float, level_bound: float, r: int, k: int, s: float, m: int, n: int
) -> float:
    """
    min(1, 2^{k(m+n)/2 − kr}·N·ρᵏ·gᵏ): union bound over `n_cover` covering balls of the
    probability that some matrix of the stratum is annihilated by k rank-one measurements.
    """
    _check_rank(r, m, n)
    if n_cover < 1:
        raise DomainError(f"n_cover must be positive, got {n_cover}")
    g = stratum_g(level_bound, r, k, s, rho)
    log_value = k * ((m + n) / 2.0 - r) * math.log(2.0) + math.log(n_cover) + k * (math.log(rho) + math.log(g))
    return 1.0 if log_value >= 0.0 else math.exp(log_value)
