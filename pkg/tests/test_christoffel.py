import json
import logging

import numpy as np
import pytest

from errors import EmptySampleError
from estimators import ChristoffelSet, StageTimer, fit_christoffel, monomial_features, monomials
from estimators.christoffel import feature_count, monomial_exponents


def test_monomials_of_a_scalar():
    np.testing.assert_array_equal(monomials(3.0, 2), [1.0, 3.0, 9.0])


def test_monomials_graded_lexicographic():
    np.testing.assert_array_equal(monomials([2.0, 5.0], 1), [1.0, 2.0, 5.0])
    np.testing.assert_array_equal(monomials([2.0, 3.0], 2), [1.0, 2.0, 3.0, 4.0, 6.0, 9.0])
    assert monomial_exponents(2, 2) == [(), (0,), (1,), (0, 0), (0, 1), (1, 1)]


@pytest.mark.parametrize("n,k,expected", [(2, 10, 66), (1, 4, 5), (3, 3, 20), (7, 2, 36)])
def test_feature_count(n, k, expected):
    assert feature_count(n, k) == expected
    assert len(monomials(np.ones(n), k)) == expected


def test_feature_matrix_rows_match_single_points():
    points = np.random.default_rng(0).normal(size=(30, 3))
    Z = monomial_features(points, 4)
    for i in (0, 7, 29):
        np.testing.assert_array_equal(Z[i], monomials(points[i], 4))


def test_two_sample_hand_case():
    fitted = fit_christoffel(np.array([[-1.0], [1.0]]), k=1, rho=0.0, normalize=False)
    np.testing.assert_allclose(fitted.M_inv, np.eye(2), atol=1e-12)
    assert fitted.level == pytest.approx(2.0)
    np.testing.assert_allclose(fitted.evaluate(np.array([[0.0], [1.5]])), [1.0, 3.25])
    assert fitted.contains([0.0])
    assert fitted.contains([1.0])
    assert not fitted.contains([1.5])
    assert not fitted.contains([-1.01])


def test_ridge_keeps_hand_case_set():
    fitted = fit_christoffel(np.array([[-1.0], [1.0]]), k=1, rho=0.5, normalize=False)
    assert fitted.level == pytest.approx(2.0 / 1.5)
    assert fitted.contains([0.99])
    assert not fitted.contains([1.01])


def test_normalization_shifts_hand_case():
    fitted = fit_christoffel(np.array([[0.0], [2.0]]), k=1, rho=0.0, normalize=True)
    np.testing.assert_allclose(fitted.shift, [1.0])
    np.testing.assert_allclose(fitted.scale, [1.0])
    assert fitted.contains([1.9])
    assert not fitted.contains([2.1])


def test_identity_moment_matrix_gives_feature_norm():
    fitted = ChristoffelSet(k=2, M_inv=np.eye(6), level=10.0, rho=0.0, normalize=False,
                            shift=np.zeros(2), scale=np.ones(2))
    x = np.array([0.3, -1.2])
    assert fitted.evaluate(x.reshape(1, -1))[0] == pytest.approx(np.sum(monomials(x, 2) ** 2))


@pytest.mark.parametrize("k,rho,normalize", [(2, 1e-4, True), (4, 0.0, True), (3, 1e-4, False), (6, 1e-4, True)])
def test_training_samples_are_members(k, rho, normalize):
    rng = np.random.default_rng(k)
    points = np.column_stack([rng.normal(size=400), rng.gamma(2.0, size=400)])
    fitted = fit_christoffel(points, k=k, rho=rho, normalize=normalize)
    assert fitted.contains_many(points).all()
    for x in points[:25]:
        assert fitted.contains(x)
    assert fitted.level == pytest.approx(np.max(fitted.evaluate(points)))


def test_far_points_are_outside():
    points = np.random.default_rng(1).normal(size=(500, 2))
    fitted = fit_christoffel(points, k=4, rho=1e-4)
    assert not fitted.contains([10.0, 10.0])
    assert fitted.contains([0.0, 0.0])


def test_normalized_fit_is_affine_invariant():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(300, 2))
    scale, shift = np.array([100.0, 0.01]), np.array([-5.0, 7.0])
    fitted = fit_christoffel(points, k=3, rho=0.0)
    moved = fit_christoffel(points * scale + shift, k=3, rho=0.0)
    queries = rng.normal(size=(50, 2)) * 2.0
    np.testing.assert_allclose(moved.evaluate(queries * scale + shift), fitted.evaluate(queries), rtol=1e-6)


def test_doubling_samples_keeps_level_comparable():
    rng = np.random.default_rng(11)
    small = fit_christoffel(rng.normal(size=(2000, 2)), k=3)
    large = fit_christoffel(rng.normal(size=(4000, 2)), k=3)
    assert 0.25 < large.level / small.level < 4.0


def test_constant_coordinate_warns(caplog):
    points = np.column_stack([np.random.default_rng(0).normal(size=100), np.full(100, 2.0)])
    with caplog.at_level(logging.WARNING, logger="estimators.christoffel"):
        fitted = fit_christoffel(points, k=2, rho=1e-4)
    assert "zero standard deviation" in caplog.text
    assert fitted.scale[1] == 1.0
    assert fitted.contains_many(points).all()


def test_rank_deficient_moments_with_pseudo_inverse():
    points = np.column_stack([np.linspace(-1.0, 1.0, 50), np.linspace(-1.0, 1.0, 50)])
    fitted = fit_christoffel(points, k=2, rho=0.0, normalize=False)
    assert fitted.contains_many(points).all()
    np.testing.assert_allclose(fitted.M_inv, fitted.M_inv.T, atol=1e-9)


def test_stage_timer_records_fit_stages():
    timer = StageTimer()
    fit_christoffel(np.random.default_rng(0).normal(size=(50, 2)), k=2, timer=timer)
    assert list(timer.totals()) == [
        "apply polynomial mapping to data",
        "construct moment matrix",
        "(pseudo)invert moment matrix",
        "compute level parameter",
    ]
    assert timer.total() >= 0.0


def test_serialization_keeps_verdicts():
    rng = np.random.default_rng(5)
    points = rng.normal(size=(200, 2))
    fitted = fit_christoffel(points, k=3)
    data = json.loads(json.dumps(fitted.to_dict()))
    assert data["method"] == "christoffel"
    restored = ChristoffelSet.from_dict(data)
    queries = np.vstack([points, rng.normal(size=(200, 2)) * 3.0])
    np.testing.assert_array_equal(restored.contains_many(queries), fitted.contains_many(queries))


def test_invalid_inputs():
    with pytest.raises(EmptySampleError):
        fit_christoffel(np.empty((0, 2)), k=2)
    with pytest.raises(ValueError):
        fit_christoffel(np.ones((5, 1)), k=2, rho=-1.0)
    with pytest.raises(ValueError):
        ChristoffelSet(k=2, M_inv=np.eye(5), level=1.0, rho=0.0, normalize=False,
                       shift=np.zeros(2), scale=np.ones(2))
