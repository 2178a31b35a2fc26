import math

import numpy as np
import pytest

from errors import BoundsTooSmallError, DimensionError, ReachestError
from estimators import PNormBall
from models.run_config import ChristoffelMethod, PNormMethod
from models.unsafe import CylinderPredicate, GoalClause, HalfspacePredicate
from ode_sim import SampleSet, SystemSpec, sample_system
from reachset import (
    ReachEstimate,
    ReachTube,
    ScalarField,
    Verdict,
    check_goals,
    check_unsafe,
    contains,
    default_bounds,
    evaluate_lattice,
    fit_reach,
    fit_tube,
    grid_contour,
    holes,
    interval_of,
    iso_dim,
)
from reachset import _grid_check

AXIS_POINTS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def _unit_disk() -> ReachEstimate:
    return ReachEstimate(
        estimate=PNormBall(A=np.eye(2), b=np.zeros(2), p=2.0),
        dims=(0, 1),
        sample_lo=np.array([-1.0, -1.0]),
        sample_hi=np.array([1.0, 1.0]),
    )


def _hand_christoffel() -> ReachEstimate:
    samples = SampleSet(terminal=np.array([[-1.0], [1.0]]), seed=0)
    return fit_reach(samples, ChristoffelMethod(k=1, rho=0.0, normalize=False))


def _spec(dynamics, intervals, t1=1.0, parts=101):
    return SystemSpec(state_dim=len(intervals), t0=0.0, t1=t1, parts=parts, dynamics=dynamics,
                      init_intervals=intervals)


def test_fitted_ball_membership():
    e = fit_reach(SampleSet(terminal=AXIS_POINTS, seed=0), PNormMethod())
    assert e.dims == (0, 1)
    assert contains(e, [0.5, 0.5])
    assert not contains(e, [1.0, 1.0])
    np.testing.assert_array_equal(e.sample_lo, [-1.0, -1.0])
    np.testing.assert_array_equal(e.sample_hi, [1.0, 1.0])


def test_fitted_christoffel_membership():
    e = _hand_christoffel()
    assert e.contains([0.0])
    assert not e.contains([1.5])
    assert e.method == "christoffel"


def test_iso_dim_keeps_original_indices():
    rng = np.random.default_rng(0)
    samples = SampleSet(terminal=rng.normal(size=(10, 4)), seed=3,
                        full=rng.normal(size=(10, 5, 4)), times=np.linspace(0.0, 1.0, 5))
    projected = iso_dim(samples, [1, 3])
    assert projected.dims == (1, 3)
    np.testing.assert_array_equal(projected.terminal, samples.terminal[:, [1, 3]])
    assert projected.full.shape == (10, 5, 2)
    again = iso_dim(projected, [1])
    assert again.dims == (3,)
    np.testing.assert_array_equal(again.terminal[:, 0], samples.terminal[:, 3])


@pytest.mark.parametrize("dims", [[], [2, 1], [1, 1], [4], [-1]])
def test_iso_dim_rejects_bad_indices(dims):
    samples = SampleSet(terminal=np.zeros((3, 4)), seed=0)
    with pytest.raises(DimensionError):
        iso_dim(samples, dims)


def test_estimate_dims_must_match():
    with pytest.raises(DimensionError):
        ReachEstimate(estimate=PNormBall(A=np.eye(2), b=np.zeros(2), p=2.0), dims=(0,),
                      sample_lo=np.zeros(2), sample_hi=np.ones(2))


def test_tube_of_constant_dynamics_repeats_one_slice():
    spec = _spec(lambda x, t, d: 0.0, ((0.0, 1.0), (2.0, 3.0)), parts=11)
    samples = sample_system(spec, 50, seed=0, keep_full=True)
    tube = fit_tube(samples, PNormMethod(p="inf"))
    assert len(tube.slices) == 11
    first = tube.slices[0].estimate
    for s in tube.slices[1:]:
        np.testing.assert_array_equal(s.estimate.A, first.A)
        np.testing.assert_array_equal(s.estimate.b, first.b)


def test_tube_of_exponential_growth():
    spec = _spec(lambda x, t, d: x, ((1.0, 2.0),))
    samples = sample_system(spec, 40, seed=1, keep_full=True)
    tube = fit_tube(samples, PNormMethod(p="inf"), workers=3)
    lo, hi = tube.band(0)
    np.testing.assert_allclose(lo, samples.full[:, :, 0].min(axis=0), rtol=1e-9)
    np.testing.assert_allclose(hi, samples.full[:, :, 0].max(axis=0), rtol=1e-9)
    assert hi[-1] / hi[0] == pytest.approx(math.e, rel=1e-8)
    assert lo[-1] / lo[0] == pytest.approx(math.e, rel=1e-8)


def test_last_tube_slice_is_the_terminal_fit():
    spec = _spec(lambda x, t, d: -x, ((0.0, 1.0), (-1.0, 1.0)), parts=21)
    samples = sample_system(spec, 30, seed=2, keep_full=True)
    method = PNormMethod(p="inf")
    tube = fit_tube(samples, method)
    terminal = fit_reach(samples, method)
    np.testing.assert_array_equal(tube.slices[-1].estimate.A, terminal.estimate.A)
    np.testing.assert_array_equal(tube.slices[-1].estimate.b, terminal.estimate.b)


def test_tube_needs_full_trajectories():
    samples = SampleSet(terminal=AXIS_POINTS, seed=0)
    with pytest.raises(ReachestError):
        fit_tube(samples, PNormMethod())


def test_tube_round_trip_through_dict():
    spec = _spec(lambda x, t, d: -x, ((1.0, 2.0),), parts=6)
    tube = fit_tube(sample_system(spec, 10, seed=0, keep_full=True), PNormMethod(p="inf"))
    restored = ReachTube.from_dict(tube.to_dict())
    np.testing.assert_array_equal(restored.times, tube.times)
    assert restored.dims == (0,)
    np.testing.assert_array_equal(restored.band(0)[1], tube.band(0)[1])


def test_grid_contour_values():
    f = grid_contour(_unit_disk(), bounds=[(-2.0, 2.0), (-2.0, 2.0)], grid_n=5)
    assert f.values.shape == (5, 5)
    assert f.values[2, 2] == 0.0
    assert f.values[0, 0] == pytest.approx(2.0 * math.sqrt(2.0))
    assert f.values[4, 2] == pytest.approx(2.0)
    assert f.member_mask.sum() == 5
    rows = f.rows()
    assert rows.shape == (25, 5)
    np.testing.assert_array_equal(rows[0], [0, 0, -2.0, -2.0, f.values[0, 0]])


def test_grid_contour_rejects_one_dimension():
    with pytest.raises(DimensionError):
        grid_contour(_hand_christoffel())


def test_bounds_must_cover_samples():
    with pytest.raises(BoundsTooSmallError):
        evaluate_lattice(_unit_disk(), bounds=[(-0.5, 0.5), (-2.0, 2.0)])
    with pytest.raises(DimensionError):
        evaluate_lattice(_unit_disk(), bounds=[(-2.0, 2.0)])


def test_default_bounds_cover_the_ball():
    bounds = default_bounds(_unit_disk())
    for lo, hi in bounds:
        assert lo <= -1.5 and hi >= 1.5


def _field(values) -> ScalarField:
    n = values.shape[0]
    return ScalarField(axes=(np.arange(float(n)),) * 2, values=values, threshold=1.0, slack=0.0,
                       bounds=[(0.0, n - 1.0)] * 2, grid_n=n, dims=(0, 1))


def test_enclosed_outside_point_is_a_hole():
    values = np.full((5, 5), 2.0)
    values[1:4, 1:4] = 0.0
    values[2, 2] = 2.0
    found = holes(_field(values))
    assert len(found) == 1
    np.testing.assert_array_equal(found[0], [[2, 2]])


def test_convex_set_has_no_holes():
    assert holes(evaluate_lattice(_unit_disk(), grid_n=50)) == []


def test_interval_of_ball_is_exact():
    lo, hi = interval_of(_unit_disk(), 1)
    assert lo == pytest.approx(-1.0, abs=1e-5)
    assert hi == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(DimensionError):
        interval_of(_unit_disk(), 2)


def test_interval_of_christoffel_set():
    lo, hi = interval_of(_hand_christoffel(), 0)
    assert lo == pytest.approx(-1.0, abs=0.005)
    assert hi == pytest.approx(1.0, abs=0.005)
    assert lo <= -1.0 and hi >= 1.0


def test_exact_halfspace_check():
    clear = check_unsafe(_unit_disk(), HalfspacePredicate(coefficients=[1.0, 0.0], offset=2.0))
    assert clear.verdict == Verdict.CLEAR
    assert clear.exact

    hit = check_unsafe(_unit_disk(), HalfspacePredicate(coefficients=[1.0, 0.0], offset=0.5))
    assert hit.verdict == Verdict.INTERSECTS
    assert hit.exact
    np.testing.assert_allclose(hit.witness, [1.0, 0.0], atol=1e-5)


@pytest.mark.parametrize("offset", [0.5, 0.9, 1.2, 2.0])
def test_exact_and_grid_checks_agree(offset):
    predicate = HalfspacePredicate(coefficients=[1.0, 0.0], offset=offset)
    exact = check_unsafe(_unit_disk(), predicate)
    grid = _grid_check(_unit_disk(), predicate, None, 201)
    assert exact.verdict == grid.verdict


def test_halfspace_on_christoffel_uses_the_lattice():
    e = _hand_christoffel()
    hit = check_unsafe(e, HalfspacePredicate(coefficients=[1.0], offset=0.5))
    assert hit.verdict == Verdict.INTERSECTS
    assert not hit.exact
    assert e.contains(hit.witness) and hit.witness[0] >= 0.5
    assert check_unsafe(e, HalfspacePredicate(coefficients=[1.0], offset=2.0)).verdict == Verdict.CLEAR


def test_coarse_lattice_cannot_clear():
    e = _hand_christoffel()
    report = check_unsafe(e, HalfspacePredicate(coefficients=[1.0], offset=2.0), grid_n=32)
    assert report.verdict == Verdict.UNKNOWN


def test_cylinder_check():
    near = CylinderPredicate(axis=2, cross=(0, 1), center=(2.0, 0.0), radius=1.5)
    hit = check_unsafe(_unit_disk(), near, grid_n=64)
    assert hit.verdict == Verdict.INTERSECTS
    assert _unit_disk().contains(hit.witness)
    assert near.is_unsafe(hit.witness.reshape(1, -1), (0, 1))[0]

    far = CylinderPredicate(axis=2, cross=(0, 1), center=(3.0, 0.0), radius=1.5)
    assert check_unsafe(_unit_disk(), far, grid_n=64).verdict == Verdict.CLEAR
    assert check_unsafe(_unit_disk(), far, grid_n=10).verdict == Verdict.UNKNOWN


def test_halfspace_on_uncovered_state():
    with pytest.raises(DimensionError):
        check_unsafe(_unit_disk(), HalfspacePredicate(coefficients=[0.0, 0.0, 1.0], offset=0.0))


def test_tube_check_reports_first_crossing():
    spec = _spec(lambda x, t, d: x, ((1.0, 2.0),))
    tube = fit_tube(sample_system(spec, 40, seed=4, keep_full=True), PNormMethod(p="inf"))
    report = check_unsafe(tube, HalfspacePredicate(coefficients=[1.0], offset=4.0))
    _, hi = tube.band(0)
    assert report.verdict == Verdict.INTERSECTS
    assert report.time_index == int(np.argmax(hi >= 4.0))
    assert tube.times[report.time_index] > math.log(2.0)

    clear = check_unsafe(tube, HalfspacePredicate(coefficients=[1.0], offset=10.0))
    assert clear.verdict == Verdict.CLEAR
    assert clear.exact


def test_goals_on_decaying_tube():
    spec = _spec(lambda x, t, d: -x, ((1.0, 2.0),), t1=2.0, parts=201)
    tube = fit_tube(sample_system(spec, 50, seed=0, keep_full=True), PNormMethod(p="inf"))
    goals = [
        GoalClause(dim=0, upper=2.0),
        GoalClause(dim=0, lower=0.5),
        GoalClause(dim=0, upper=1.0, after=1.5),
        GoalClause(dim=0, lower=0.1, at=1.0),
        GoalClause(dim=0, upper=1.0, after=5.0),
    ]
    results = check_goals(tube, goals)
    assert [r.passed for r in results] == [True, False, True, True, False]
    assert results[1].worst_time == pytest.approx(2.0)
    assert results[1].worst_value < 0.5
    assert results[4].worst_time is None
    assert results[1].to_dict()["clause"] == "x1 >= 0.5 always"
