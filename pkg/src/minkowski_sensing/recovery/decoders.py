import itertools
import math
import numpy as np
import numpy.typing as npt
import scipy.linalg

from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..constants import AMBIGUITY_DISTANCE, COLLISION_TOL, DEFAULT_ENUMERATION_BUDGET
from ..errors import BudgetExceededError, DimensionError, DomainError
from ..executor.executors import ExecutorBase
from ..linalg import as_matrix, svd
from ..measurement import MeasurementEnsemble, derive_seed, make_rng
from ..ms_logging import logger
from ..support import SparseFactorSpec
from .result import AltMinOptions, DecodeResult, InitKind, Outcome, relative_error


def decode_enumerate(
    e: MeasurementEnsemble,
    y: npt.ArrayLike,
    candidates: Sequence[npt.ArrayLike],
    tol: float = COLLISION_TOL,
    x_true: Optional[npt.ArrayLike] = None,
) -> DecodeResult:
    """
    Decode over a finite candidate set: the unique candidate consistent with y up to `tol`.

    Parameters:
    - e: MeasurementEnsemble
    - y: np.ndarray
        Measurement vector of length e.k.
    - candidates: Sequence of (m, n) matrices
        Candidates are not deduplicated, so a repeated consistent candidate is ambiguous.
    - tol: float
        Residual threshold ‖apply(e, Z) − y‖₂ ≤ tol.
    - x_true: optional planted matrix for `rel_error`.

    Returns:
    - DecodeResult: RECOVERED, AMBIGUOUS or NO_CANDIDATE.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    if len(candidates) == 0:
        raise DomainError("decode_enumerate needs at least one candidate")
    stack = np.stack([as_matrix(c, "candidate") for c in candidates])
    if stack.shape[1:] != (e.m, e.n):
        raise DimensionError(f"Candidates must be {e.m}x{e.n}, got {stack.shape[1:]}")
    y = e._check_vector(y)

    residuals = np.linalg.norm(e.apply_batch(stack) - y[None, :], axis=1)
    hits = np.flatnonzero(residuals <= tol)
    diagnostics: Dict[str, Any] = {"consistent": int(hits.size), "candidates": len(candidates)}
    x_true = None if x_true is None else as_matrix(x_true, "x_true")

    if hits.size == 1:
        x_hat = stack[hits[0]]
        return DecodeResult(
            outcome=Outcome.RECOVERED,
            x_hat=x_hat,
            residual=float(residuals[hits[0]]),
            iterations=len(candidates),
            rel_error=relative_error(x_hat, x_true),
            diagnostics={**diagnostics, "index": int(hits[0])},
        )
    outcome = Outcome.AMBIGUOUS if hits.size > 1 else Outcome.NO_CANDIDATE
    return DecodeResult(
        outcome=outcome,
        residual=float(residuals.min()),
        iterations=len(candidates),
        diagnostics=diagnostics,
    )


def _least_squares(design: np.ndarray, target: np.ndarray, ridge: float, diagnostics: Dict[str, Any]) -> np.ndarray:
    """Minimum-norm least squares, with a ridge-regularized normal-equation fallback."""
    try:
        solution = scipy.linalg.lstsq(design, target, lapack_driver="gelsd")[0]
        if np.all(np.isfinite(solution)):
            return solution
    except (np.linalg.LinAlgError, ValueError) as exc:
        logger.debug(f"lstsq failed: {exc}")
    diagnostics["ridge_fallbacks"] = diagnostics.get("ridge_fallbacks", 0) + 1
    if diagnostics["ridge_fallbacks"] == 1:
        logger.warning(f"Least-squares substep failed; solving ridge normal equations with lambda={ridge}")
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    return scipy.linalg.solve(gram, design.T @ target, assume_a="pos")


def _initial_left(
    e: MeasurementEnsemble, y: np.ndarray, opts: AltMinOptions, restart: int, rng: np.random.Generator
) -> np.ndarray:
    if opts.init == InitKind.SPECTRAL and restart == 0:
        spectral = svd(e.adjoint(y))
        return spectral.left_factors[:, : opts.r] * np.sqrt(spectral.singular_values[: opts.r])
    scale = math.sqrt(float(np.linalg.norm(y))) / max(e.k, 1) ** 0.25
    return rng.standard_normal((e.m, opts.r)) * scale


def _altmin_restart(
    e: MeasurementEnsemble, y: np.ndarray, opts: AltMinOptions, restart: int, threshold: float
) -> Tuple[np.ndarray, np.ndarray, List[float], Dict[str, Any]]:
    """One restart: returns U, V, the residual history and per-restart diagnostics."""
    diagnostics: Dict[str, Any] = {"stop": "max_iters"}
    rng = make_rng(derive_seed(opts.seed, "altmin", restart))
    u = _initial_left(e, y, opts, restart, rng)
    v = np.zeros((e.n, opts.r))
    history: List[float] = []

    for _ in range(opts.max_iters):
        v = _least_squares(e.design_for_right(u), y, opts.ridge, diagnostics).reshape(e.n, opts.r)
        # move the scale into U so that V stays orthonormal; U Vᵀ is unchanged
        q, upper = np.linalg.qr(v)
        u, v = u @ upper.T, q
        u = _least_squares(e.design_for_left(v), y, opts.ridge, diagnostics).reshape(e.m, opts.r)

        residual = float(np.linalg.norm(e.apply_factored(u, v) - y))
        previous = history[-1] if history else None
        history.append(residual)
        if residual <= threshold:
            diagnostics["stop"] = "converged"
            break
        if previous is not None and previous - residual <= opts.tol * previous:
            diagnostics["stop"] = "stalled"
            break
    return u, v, history, diagnostics


def decode_altmin(
    e: MeasurementEnsemble,
    y: npt.ArrayLike,
    opts: AltMinOptions,
    x_true: Optional[npt.ArrayLike] = None,
) -> DecodeResult:
    """
    Rank-r alternating least squares for y = apply(e, U Vᵀ).

    Each iteration solves exactly for V given U, orthonormalizes V, then solves for U,
    so the residual never increases within a restart. A restart stops when the residual
    is at most tol·max(1, ‖y‖₂), when its relative decrease falls to tol or below, or
    after `max_iters`. Restarts run in index order and stop at the first converged one;
    otherwise the lowest residual wins.

    Returns:
    - DecodeResult: RECOVERED or NOT_CONVERGED with the best iterate. Diagnostics carry
      `residual_history`, `restarts_run`, `stop` and `ridge_fallbacks`.
    """
    y = e._check_vector(y)
    x_true = None if x_true is None else as_matrix(x_true, "x_true")
    if opts.r > min(e.m, e.n):
        raise DomainError(f"Rank {opts.r} exceeds min({e.m}, {e.n})")
    norm_y = float(np.linalg.norm(y))
    threshold = opts.tol * max(1.0, norm_y)

    if opts.r == 0:
        zero = np.zeros((e.m, e.n))
        outcome = Outcome.RECOVERED if norm_y <= opts.tol else Outcome.NOT_CONVERGED
        return DecodeResult(outcome=outcome, x_hat=zero, residual=norm_y, rel_error=relative_error(zero, x_true))

    best = None
    restarts_run = 0
    ridge_fallbacks = 0
    for restart in range(opts.restarts):
        u, v, history, diagnostics = _altmin_restart(e, y, opts, restart, threshold)
        restarts_run += 1
        ridge_fallbacks += diagnostics.get("ridge_fallbacks", 0)
        logger.debug(f"altmin restart {restart}: residual {history[-1]:.3e} after {len(history)} iterations")
        # strict comparison keeps the lowest restart index on ties
        if best is None or history[-1] < best[2][-1]:
            best = (u, v, history, diagnostics)
        if history[-1] <= threshold:
            break

    u, v, history, diagnostics = best
    x_hat = u @ v.T
    residual = history[-1]
    outcome = Outcome.RECOVERED if residual <= threshold else Outcome.NOT_CONVERGED
    return DecodeResult(
        outcome=outcome,
        x_hat=x_hat,
        residual=residual,
        iterations=len(history),
        rel_error=relative_error(x_hat, x_true),
        diagnostics={
            "residual_history": history,
            "restarts_run": restarts_run,
            "stop": diagnostics["stop"],
            "ridge_fallbacks": ridge_fallbacks,
            "init": opts.init.value,
        },
    )


def enumeration_size(m: int, n: int, l1: int, l2: int) -> int:
    """Number of column-support pairs C(m, l1)·C(n, l2)."""
    return math.comb(m, l1) * math.comb(n, l2)


def _decode_support(
    e: MeasurementEnsemble, y: np.ndarray, opts: AltMinOptions, rows: Tuple[int, ...], cols: Tuple[int, ...]
) -> DecodeResult:
    return decode_altmin(e.restrict(rows, cols), y, opts)


def decode_sparse_factor(
    e: MeasurementEnsemble,
    y: npt.ArrayLike,
    r: int,
    l1: int,
    l2: int,
    opts: Optional[AltMinOptions] = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    x_true: Optional[npt.ArrayLike] = None,
    executor: Optional[ExecutorBase] = None,
) -> DecodeResult:
    """
    Decoder for products X = X₁ᵀX₂ whose factors have l1 and l2 nonzero columns.

    Such an X vanishes outside rows S₁ and columns S₂ (|S₁| = l1, |S₂| = l2). Every support
    pair is tried with rank-r alternating minimization on the restricted ensemble, and
    successful reconstructions are embedded back into m×n. Reconstructions closer than
    1e-6 count as one.

    Parameters:
    - e: MeasurementEnsemble
    - y: np.ndarray
    - r, l1, l2: int
        Must satisfy r ≤ l1 < m/2 and r ≤ l2 ≤ n/2 − 1/r.
    - opts: AltMinOptions
        Rank is forced to r; branch b uses seed derive_seed(opts.seed, "support", b).
    - budget: int
        Maximum number of support pairs.
    - executor: optional executor for the branches; results are reduced in branch order.

    Raises:
    - BudgetExceededError if C(m, l1)·C(n, l2) > budget.
    """
    SparseFactorSpec(m=e.m, n=e.n, r=r, l1=l1, l2=l2)
    y = e._check_vector(y)
    x_true = None if x_true is None else as_matrix(x_true, "x_true")
    required = enumeration_size(e.m, e.n, l1, l2)
    if required > budget:
        logger.warning(f"Refusing sparse-factor enumeration: {required} support pairs exceed budget {budget}")
        raise BudgetExceededError(required, budget)

    opts = (opts or AltMinOptions(r=r)).model_copy(update={"r": r})
    supports = list(itertools.product(itertools.combinations(range(e.m), l1), itertools.combinations(range(e.n), l2)))
    tasks = [
        (e, y, opts.model_copy(update={"seed": derive_seed(opts.seed, "support", b)}), rows, cols)
        for b, (rows, cols) in enumerate(supports)
    ]
    if executor is None:
        branches = [_decode_support(*task) for task in tasks]
    else:
        result = executor.run(tasks, _decode_support)
        if not result.all_successful:
            raise result.failures[0][1]
        branches = result.successes

    distinct: List[Tuple[int, np.ndarray, float]] = []
    iterations = 0
    best_residual = math.inf
    for b, ((rows, cols), branch) in enumerate(zip(supports, branches)):
        iterations += branch.iterations
        best_residual = min(best_residual, branch.residual)
        if not branch.recovered:
            continue
        embedded = np.zeros((e.m, e.n))
        embedded[np.ix_(rows, cols)] = branch.x_hat
        if all(np.linalg.norm(embedded - other) > AMBIGUITY_DISTANCE for _, other, _ in distinct):
            distinct.append((b, embedded, branch.residual))

    diagnostics = {"supports": required, "distinct_solutions": len(distinct)}
    logger.info(f"Sparse-factor decode: {required} supports, {len(distinct)} distinct consistent reconstructions")
    if len(distinct) == 1:
        b, x_hat, residual = distinct[0]
        support_rows, support_cols = supports[b]
        return DecodeResult(
            outcome=Outcome.RECOVERED,
            x_hat=x_hat,
            residual=float(np.linalg.norm(e.apply(x_hat) - y)),
            iterations=iterations,
            rel_error=relative_error(x_hat, x_true),
            diagnostics={**diagnostics, "rows": list(support_rows), "cols": list(support_cols)},
        )
    if distinct:
        return DecodeResult(
            outcome=Outcome.AMBIGUOUS,
            residual=min(res for _, _, res in distinct),
            iterations=iterations,
            diagnostics=diagnostics,
        )
    return DecodeResult(
        outcome=Outcome.NO_CANDIDATE, residual=best_residual, iterations=iterations, diagnostics=diagnostics
    )
