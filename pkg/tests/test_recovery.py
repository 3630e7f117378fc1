import json
import numpy as np
import pytest
import scipy.linalg

from pydantic import ValidationError

from src.minkowski_sensing.errors import BudgetExceededError, DimensionError, DomainError
from src.minkowski_sensing.linalg import numerical_rank
from src.minkowski_sensing.measurement import EnsembleKind, derive_seed, sample_ensemble
from src.minkowski_sensing.recovery import (
    AltMinOptions,
    DecodeResult,
    InitKind,
    Outcome,
    decode_altmin,
    decode_enumerate,
    decode_sparse_factor,
    injectivity_probe,
)
from src.minkowski_sensing.support import LowRankSpec, PointCloudSpec, SparseFactorSpec, sample_support


def _planted_low_rank(m, n, r, seed):
    return sample_support(LowRankSpec(m=m, n=n, r=r), 1, seed)[0]


@pytest.fixture
def cloud():
    return list(np.random.default_rng(20).standard_normal((100, 3, 3)))


def test_enumerate_singleton_and_duplicate():
    e = sample_ensemble(EnsembleKind.DENSE, 2, 2, 1, seed=1)
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    y = e.apply(x)
    result = decode_enumerate(e, y, [x], x_true=x)
    assert result.outcome == Outcome.RECOVERED
    np.testing.assert_array_equal(result.x_hat, x)
    assert result.rel_error == 0.0
    assert decode_enumerate(e, y, [x, x.copy()]).outcome == Outcome.AMBIGUOUS
    missing = decode_enumerate(e, y + 1.0, [x])
    assert missing.outcome == Outcome.NO_CANDIDATE
    assert missing.x_hat is None


def test_enumerate_validation():
    e = sample_ensemble(EnsembleKind.DENSE, 2, 2, 1, seed=1)
    with pytest.raises(DomainError):
        decode_enumerate(e, np.zeros(1), [])
    with pytest.raises(DimensionError):
        decode_enumerate(e, np.zeros(1), [np.eye(3)])


def test_enumerate_recovers_finite_cloud(cloud):
    recovered = 0
    for trial in range(1000):
        e = sample_ensemble(EnsembleKind.DENSE, 3, 3, 1, seed=derive_seed(1, "cloud", trial))
        planted = trial % len(cloud)
        result = decode_enumerate(e, e.apply(cloud[planted]), cloud)
        # recomputing the residual condition confirms a unique consistent candidate
        residuals = [np.linalg.norm(e.apply(c) - e.apply(cloud[planted])) for c in cloud]
        if result.recovered:
            assert sum(res <= 1e-9 for res in residuals) == 1
            assert result.diagnostics["index"] == planted
            recovered += 1
    assert recovered >= 999


def test_injectivity_exhaustive_point_cloud(cloud):
    e = sample_ensemble(EnsembleKind.DENSE, 3, 3, 1, seed=4)
    spec = PointCloudSpec(points=cloud[:50])
    result = injectivity_probe(e, spec, trials=1, seed=0, exhaustive=True)
    assert result.pairs == 50 * 49 // 2
    assert result.collisions == 0
    min_gap, collisions = result
    assert min_gap > 0.0 and collisions == 0


def test_injectivity_empty_ensemble_collides_everywhere(cloud):
    e = sample_ensemble(EnsembleKind.DENSE, 3, 3, 0, seed=4)
    result = injectivity_probe(e, PointCloudSpec(points=cloud[:10]), trials=25, seed=1)
    assert result.collisions == 25
    assert result.min_gap == 0.0


def test_injectivity_low_rank_above_threshold():
    e = sample_ensemble(EnsembleKind.DENSE, 6, 6, 20, seed=5)
    result = injectivity_probe(e, LowRankSpec(m=6, n=6, r=1), trials=10_000, seed=2)
    assert result.pairs == 10_000
    assert result.collisions == 0


def test_injectivity_needs_distinct_points():
    e = sample_ensemble(EnsembleKind.DENSE, 2, 2, 1, seed=4)
    with pytest.raises(DomainError):
        injectivity_probe(e, PointCloudSpec(points=[np.eye(2)]), trials=3, seed=0)
    with pytest.raises(DomainError):
        injectivity_probe(e, PointCloudSpec(points=[np.eye(2)]), trials=0, seed=0)


def test_altmin_rank_zero():
    e = sample_ensemble(EnsembleKind.DENSE, 3, 3, 4, seed=1)
    zero = decode_altmin(e, np.zeros(4), AltMinOptions(r=0))
    assert zero.outcome == Outcome.RECOVERED
    np.testing.assert_array_equal(zero.x_hat, np.zeros((3, 3)))
    assert decode_altmin(e, np.ones(4), AltMinOptions(r=0)).outcome == Outcome.NOT_CONVERGED


def test_altmin_recovers_planted_rank_one():
    successes = 0
    for trial in range(40):
        e = sample_ensemble(EnsembleKind.DENSE, 8, 8, 30, seed=derive_seed(2, "e", trial))
        x = _planted_low_rank(8, 8, 1, derive_seed(2, "x", trial))
        y = e.apply(x)
        result = decode_altmin(e, y, AltMinOptions(r=1, seed=trial), x_true=x)
        if result.recovered:
            assert result.residual <= 1e-10 * max(1.0, np.linalg.norm(y))
            assert numerical_rank(result.x_hat) <= 1
        successes += result.succeeded(1e-4)
    assert successes >= 36


def test_rank_one_ensemble_parity():
    rates = {}
    for kind in (EnsembleKind.DENSE, EnsembleKind.RANK_ONE):
        successes = 0
        for trial in range(40):
            e = sample_ensemble(kind, 8, 8, 30, seed=derive_seed(3, "e", trial))
            x = _planted_low_rank(8, 8, 1, derive_seed(3, "x", trial))
            successes += decode_altmin(e, e.apply(x), AltMinOptions(r=1, seed=trial), x_true=x).succeeded(1e-4)
        rates[kind] = successes / 40
    assert abs(rates[EnsembleKind.DENSE] - rates[EnsembleKind.RANK_ONE]) <= 0.15


def test_altmin_residual_is_monotone():
    e = sample_ensemble(EnsembleKind.RANK_ONE, 6, 5, 40, seed=6)
    x = _planted_low_rank(6, 5, 2, 7)
    result = decode_altmin(e, e.apply(x), AltMinOptions(r=2, restarts=1, max_iters=300), x_true=x)
    history = np.asarray(result.diagnostics["residual_history"])
    assert len(history) == result.iterations
    assert np.all(np.diff(history) <= 1e-12 * history[0])


def test_altmin_scaling_equivariance():
    e = sample_ensemble(EnsembleKind.DENSE, 6, 6, 25, seed=8)
    x = _planted_low_rank(6, 6, 1, 9)
    opts = AltMinOptions(r=1, seed=4)
    base = decode_altmin(e, e.apply(x), opts, x_true=x)
    scaled = decode_altmin(e, e.apply(10.0 * x), opts, x_true=10.0 * x)
    assert base.recovered and scaled.recovered
    np.testing.assert_allclose(scaled.x_hat, 10.0 * base.x_hat, atol=1e-6)


def test_altmin_spectral_init():
    e = sample_ensemble(EnsembleKind.DENSE, 8, 8, 40, seed=10)
    x = _planted_low_rank(8, 8, 1, 11)
    result = decode_altmin(e, e.apply(x), AltMinOptions(r=1, init=InitKind.SPECTRAL), x_true=x)
    assert result.succeeded(1e-4)
    assert result.diagnostics["init"] == "spectral"


def test_altmin_ridge_fallback(monkeypatch):
    def failing_lstsq(*args, **kwargs):
        raise np.linalg.LinAlgError("forced")

    monkeypatch.setattr(scipy.linalg, "lstsq", failing_lstsq)
    e = sample_ensemble(EnsembleKind.DENSE, 5, 5, 20, seed=12)
    x = _planted_low_rank(5, 5, 1, 13)
    result = decode_altmin(e, e.apply(x), AltMinOptions(r=1, tol=1e-8), x_true=x)
    assert result.diagnostics["ridge_fallbacks"] > 0
    assert result.succeeded(1e-4)


def test_altmin_rank_too_large():
    e = sample_ensemble(EnsembleKind.DENSE, 2, 3, 4, seed=1)
    with pytest.raises(DomainError):
        decode_altmin(e, np.zeros(4), AltMinOptions(r=3))


def test_altmin_options_validation():
    with pytest.raises(ValidationError):
        AltMinOptions(r=1, tol=1.0)
    with pytest.raises(ValidationError):
        AltMinOptions(r=1, restarts=0)


@pytest.fixture
def fast_opts():
    return AltMinOptions(r=1, restarts=2, max_iters=100, seed=1)


def test_sparse_factor_zero_measurements(fast_opts):
    e = sample_ensemble(EnsembleKind.RANK_ONE, 6, 6, 4, seed=14)
    result = decode_sparse_factor(e, np.zeros(4), 1, 2, 2, fast_opts)
    assert result.outcome == Outcome.RECOVERED
    np.testing.assert_allclose(result.x_hat, np.zeros((6, 6)))
    assert result.diagnostics["supports"] == 225


def test_sparse_factor_recovers_below_manifold_dim(fast_opts):
    spec = SparseFactorSpec(m=6, n=6, r=1, l1=2, l2=2)
    successes = 0
    for trial in range(3):
        e = sample_ensemble(EnsembleKind.RANK_ONE, 6, 6, 6, seed=derive_seed(15, "e", trial))
        x = sample_support(spec, 1, derive_seed(15, "x", trial))[0]
        result = decode_sparse_factor(e, e.apply(x), 1, 2, 2, fast_opts, x_true=x)
        successes += result.succeeded(1e-6)
    assert successes >= 2


def test_sparse_factor_underdetermined_is_ambiguous(fast_opts):
    spec = SparseFactorSpec(m=6, n=6, r=1, l1=2, l2=2)
    e = sample_ensemble(EnsembleKind.RANK_ONE, 6, 6, 2, seed=16)
    x = sample_support(spec, 1, 17)[0]
    result = decode_sparse_factor(e, e.apply(x), 1, 2, 2, fast_opts, x_true=x)
    assert result.outcome == Outcome.AMBIGUOUS
    assert not result.succeeded(1e-6)


@pytest.fixture
def example1_opts():
    return AltMinOptions(r=1, restarts=3, max_iters=200, seed=3)


def _example1_outcomes(k, opts, trials=10):
    spec = SparseFactorSpec(m=8, n=8, r=1, l1=2, l2=2)
    results = []
    for trial in range(trials):
        e = sample_ensemble(EnsembleKind.RANK_ONE, 8, 8, k, seed=derive_seed(19, "e", k, trial))
        x = sample_support(spec, 1, derive_seed(19, "x", k, trial))[0]
        results.append(decode_sparse_factor(e, e.apply(x), 1, 2, 2, opts, x_true=x))
    return results


def test_example1_six_measurements_recover(example1_opts):
    # 6 rank-one measurements suffice for 8x8 products of 2-sparse factors, below (m+n-r)r = 15
    results = _example1_outcomes(6, example1_opts)
    recovered = [r for r in results if r.succeeded(1e-6)]
    assert len(recovered) >= 8
    assert all(r.outcome == Outcome.RECOVERED and r.diagnostics["supports"] == 784 for r in recovered)


def test_example1_two_measurements_are_ambiguous(example1_opts):
    results = _example1_outcomes(2, example1_opts)
    assert not any(r.succeeded(1e-6) for r in results)
    assert sum(r.outcome == Outcome.AMBIGUOUS for r in results) >= 8


def test_sparse_factor_budget_and_conditions(fast_opts):
    e = sample_ensemble(EnsembleKind.RANK_ONE, 8, 8, 6, seed=18)
    with pytest.raises(BudgetExceededError) as info:
        decode_sparse_factor(e, np.zeros(6), 1, 2, 2, fast_opts, budget=100)
    assert info.value.required == 28 * 28
    with pytest.raises(ValidationError):
        decode_sparse_factor(e, np.zeros(6), 1, 4, 2, fast_opts)


def test_decode_result_json():
    result = DecodeResult(outcome=Outcome.NOT_CONVERGED, x_hat=np.eye(2), residual=0.5, iterations=3)
    record = json.loads(result.to_json())
    assert record == {"outcome": "notconverged", "residual": 0.5, "rel_error": None, "iterations": 3, "diagnostics": {}}
    with pytest.raises(ValidationError):
        DecodeResult(outcome=Outcome.RECOVERED, residual=0.0)
    with pytest.raises(ValidationError):
        DecodeResult(outcome=Outcome.AMBIGUOUS, x_hat=np.eye(2), residual=0.0)
