import numpy as np
import pytest

from pydantic import ValidationError

from src.minkowski_sensing.errors import DimensionError, DomainError
from src.minkowski_sensing.measurement import (
    EnsembleKind,
    MeasurementEnsemble,
    derive_seed,
    make_rng,
    sample_ensemble,
    sample_uniform_ball,
    storage_cost,
)


@pytest.fixture
def x():
    return np.random.default_rng(3).standard_normal((4, 3))


@pytest.fixture(params=[EnsembleKind.DENSE, EnsembleKind.RANK_ONE])
def ensemble(request):
    return sample_ensemble(request.param, 4, 3, 7, s=1.5, seed=11)


def test_same_seed_gives_identical_entries():
    first = sample_ensemble(EnsembleKind.RANK_ONE, 5, 4, 6, seed=42)
    second = sample_ensemble(EnsembleKind.RANK_ONE, 5, 4, 6, seed=42)
    other = sample_ensemble(EnsembleKind.RANK_ONE, 5, 4, 6, seed=43)
    assert np.array_equal(first.lefts, second.lefts)
    assert np.array_equal(first.rights, second.rights)
    assert not np.array_equal(first.lefts, other.lefts)


def test_entries_respect_radius():
    dense = sample_ensemble(EnsembleKind.DENSE, 3, 3, 500, s=2.0, seed=1)
    assert np.all(np.linalg.norm(dense.matrices.reshape(500, -1), axis=1) <= 2.0)
    rank_one = sample_ensemble(EnsembleKind.RANK_ONE, 3, 5, 500, s=0.5, seed=1)
    assert np.all(np.linalg.norm(rank_one.lefts, axis=1) <= 0.5)
    assert np.all(np.linalg.norm(rank_one.rights, axis=1) <= 0.5)


def test_uniform_ball_radius_distribution():
    points = sample_uniform_ball(2, 1.0, make_rng(5), size=20000)
    # in the unit disc, P[|p| <= 1/2] = 1/4
    inner = np.mean(np.linalg.norm(points, axis=1) <= 0.5)
    assert inner == pytest.approx(0.25, abs=0.02)
    assert sample_uniform_ball(3, 1.0, make_rng(5)).shape == (3,)


@pytest.mark.parametrize("dim", [1, 3, 8])
def test_uniform_ball_moments(dim):
    points = sample_uniform_ball(dim, 1.0, make_rng(dim), size=50_000)
    np.testing.assert_allclose(points.mean(axis=0), np.zeros(dim), atol=0.015)
    # E|v|^2 = d/(d+2) on the unit ball
    assert np.mean(np.sum(points**2, axis=1)) == pytest.approx(dim / (dim + 2.0), abs=0.01)
    scaled = sample_uniform_ball(dim, 2.0, make_rng(dim), size=50_000)
    np.testing.assert_allclose(scaled, 2.0 * points, rtol=1e-12)


def test_apply_matches_definition(ensemble, x):
    y = ensemble.apply(x)
    mats = ensemble.materialize()
    expected = np.array([np.sum(a * x) for a in mats])
    np.testing.assert_allclose(y, expected, atol=1e-12)
    if ensemble.kind == EnsembleKind.RANK_ONE:
        expected = np.array([a @ x @ b for a, b in zip(ensemble.lefts, ensemble.rights)])
        np.testing.assert_allclose(y, expected, atol=1e-12)


def test_apply_is_linear(ensemble, x):
    z = np.ones((4, 3))
    np.testing.assert_allclose(ensemble.apply(2.0 * x - z), 2.0 * ensemble.apply(x) - ensemble.apply(z), atol=1e-12)


def test_apply_factored_and_batch(ensemble):
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal((4, 2)), rng.standard_normal((3, 2))
    np.testing.assert_allclose(ensemble.apply_factored(u, v), ensemble.apply(u @ v.T), atol=1e-12)
    stack = rng.standard_normal((5, 4, 3))
    batch = ensemble.apply_batch(stack)
    assert batch.shape == (5, 7)
    np.testing.assert_allclose(batch[2], ensemble.apply(stack[2]), atol=1e-12)


def test_adjoint_is_transpose(ensemble, x):
    y = np.random.default_rng(1).standard_normal(7)
    assert np.sum(ensemble.adjoint(y) * x) == pytest.approx(y @ ensemble.apply(x))


def test_design_matrices(ensemble):
    rng = np.random.default_rng(2)
    u, v = rng.standard_normal((4, 2)), rng.standard_normal((3, 2))
    y = ensemble.apply(u @ v.T)
    np.testing.assert_allclose(ensemble.design_for_left(v) @ u.ravel(), y, atol=1e-12)
    np.testing.assert_allclose(ensemble.design_for_right(u) @ v.ravel(), y, atol=1e-12)


def test_restrict_measures_submatrix(ensemble):
    rows, cols = [0, 2], [1, 2]
    block = np.array([[1.0, -2.0], [0.5, 3.0]])
    x = np.zeros((4, 3))
    x[np.ix_(rows, cols)] = block
    sub = ensemble.restrict(rows, cols)
    assert (sub.m, sub.n, sub.k) == (2, 2, 7)
    np.testing.assert_allclose(sub.apply(block), ensemble.apply(x), atol=1e-12)


def test_storage_cost():
    assert storage_cost(sample_ensemble(EnsembleKind.DENSE, 8, 8, 30)) == 30 * 64
    assert sample_ensemble(EnsembleKind.RANK_ONE, 8, 8, 30).storage_cost == 30 * 16


def test_empty_ensemble(x):
    empty = sample_ensemble(EnsembleKind.DENSE, 4, 3, 0)
    assert empty.apply(x).shape == (0,)
    assert empty.apply_batch(np.stack([x, x])).shape == (2, 0)


def test_shape_mismatch(ensemble):
    with pytest.raises(DimensionError):
        ensemble.apply(np.ones((3, 4)))
    with pytest.raises(DimensionError):
        ensemble.adjoint(np.ones(3))


def test_json_regenerates_entries(ensemble, x):
    restored = MeasurementEnsemble.from_json(ensemble.to_json())
    assert restored.to_json() == ensemble.to_json()
    np.testing.assert_array_equal(restored.apply(x), ensemble.apply(x))


def test_explicit_ensembles():
    mats = np.stack([np.eye(2), np.array([[0.0, 3.0], [0.0, 0.0]])])
    dense = MeasurementEnsemble.from_matrices(mats)
    assert dense.s == pytest.approx(3.0)
    np.testing.assert_allclose(dense.apply(np.array([[1.0, 2.0], [3.0, 4.0]])), [5.0, 6.0])
    with pytest.raises(DomainError):
        dense.to_json()
    with pytest.raises(DomainError):
        dense.lefts
    rank_one = MeasurementEnsemble.from_factors([[1.0, 0.0]], [[0.0, 2.0]])
    assert rank_one.apply(np.array([[1.0, 2.0], [3.0, 4.0]]))[0] == pytest.approx(4.0)


def test_invalid_parameters():
    with pytest.raises(ValidationError):
        sample_ensemble(EnsembleKind.DENSE, 0, 3, 2)
    with pytest.raises(ValidationError):
        sample_ensemble(EnsembleKind.DENSE, 2, 3, 2, s=0.0)


def test_derive_seed():
    seeds = {derive_seed(0, "phase", k, t) for k in range(10) for t in range(100)}
    assert len(seeds) == 1000
    assert derive_seed(5, "a", 1) == derive_seed(5, "a", 1)
    assert derive_seed(5, "a", 1) != derive_seed(6, "a", 1)
    assert 0 <= derive_seed(2**64 - 1, "x") < 2**64
