import numpy as np
import pytest
from hypothesis import given, strategies as st

from stit.geometry import ConvexPolytope, volume
from stit.measures import HyperplaneMeasureSpec
from stit.mnw import (continue_mnw, rescale_tessellation, run_mnw, run_with_checkpoints,
                      surface_totals)

ISO2 = HyperplaneMeasureSpec.isotropic(2)
ISO3 = HyperplaneMeasureSpec.isotropic(3)
AXIS2 = HyperplaneMeasureSpec.axis_aligned(2)
AXIS3 = HyperplaneMeasureSpec.axis_aligned(3)

CASES = [
    (ConvexPolytope.cube(2, 3.0), ISO2, 2.0, "auto"),
    (ConvexPolytope.disk(2.0, 40), AXIS2, 2.0, "auto"),
    (ConvexPolytope.cube(2, 3.0), ISO2, 2.0, "python"),
    (ConvexPolytope.cube(3, 2.0), AXIS3, 2.0, "auto"),
    (ConvexPolytope.cube(3, 2.0), ISO3, 2.0, "python"),
    (ConvexPolytope.ball(1.5, 1), ISO3, 2.0, "python"),
    (ConvexPolytope.cube(4, 1.0), HyperplaneMeasureSpec.axis_aligned(4), 2.0, "auto"),
]


def check_partition(state):
    W = state.window
    assert state.n_cells == state.n_facets + 1
    assert sum(volume(c) for c in state.cells) == pytest.approx(volume(W), rel=1e-9)
    assert np.all(np.diff(state.births) >= 0)
    assert np.all(state.births <= state.horizon)
    assert np.all(state.leaf_deaths > state.horizon)
    for k, rec in enumerate(state.maximal_polytopes):
        assert rec.measure == pytest.approx(volume(rec.facet), rel=1e-9, abs=1e-12)
        if W.ambient_dimension <= 3:
            assert W.contains(rec.facet.vertices, tol=1e-9).all()


@pytest.mark.parametrize("window, spec, t, engine", CASES)
def test_partition_invariants(window, spec, t, engine):
    state = run_mnw(window, spec, t, np.random.default_rng(1), engine)
    assert state.n_facets > 0
    check_partition(state)


def test_zero_horizon_leaves_window_whole():
    state = run_mnw(ConvexPolytope.cube(2), ISO2, 0.0, np.random.default_rng(0))
    assert state.n_facets == 0 and state.n_cells == 1
    assert volume(state.cells[0]) == pytest.approx(1.0)


def test_same_seed_same_tessellation():
    a = run_mnw(ConvexPolytope.cube(2, 4.0), ISO2, 1.0, np.random.default_rng(7))
    b = run_mnw(ConvexPolytope.cube(2, 4.0), ISO2, 1.0, np.random.default_rng(7))
    np.testing.assert_array_equal(a.births, b.births)
    np.testing.assert_array_equal(a.offsets, b.offsets)


def test_compiled_and_python_engines_agree_draw_for_draw():
    W = ConvexPolytope.cube(2, 4.0)
    a = run_mnw(W, ISO2, 1.5, np.random.default_rng(3))
    b = run_mnw(W, ISO2, 1.5, np.random.default_rng(3), engine="python")
    assert a.engine == "polygon" and b.engine == "python"
    np.testing.assert_allclose(a.births, b.births, rtol=1e-12)
    np.testing.assert_allclose(a.measures, b.measures, rtol=1e-9)


def test_continuation_extends_without_touching_history():
    rng = np.random.default_rng(11)
    early = run_mnw(ConvexPolytope.cube(2, 4.0), ISO2, 0.5, rng)
    late = continue_mnw(early, 1.0, rng)
    np.testing.assert_array_equal(late.births[:early.n_facets], early.births)
    check_partition(late)
    assert continue_mnw(late, 1.0, rng) is late
    with pytest.raises(ValueError, match="time reversal"):
        continue_mnw(late, 0.5, rng)


def test_checkpoints_are_nested():
    snaps = run_with_checkpoints(ConvexPolytope.cube(3, 2.0), AXIS3, [0.5, 1.0, 2.0],
                                 np.random.default_rng(2))
    counts = [s.n_facets for s in snaps]
    assert counts == sorted(counts)
    with pytest.raises(ValueError, match="unsorted"):
        run_with_checkpoints(ConvexPolytope.cube(2), ISO2, [1.0, 0.5], np.random.default_rng(0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        run_mnw(ConvexPolytope.cube(2), ISO2, -1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        run_mnw(ConvexPolytope.cube(4), HyperplaneMeasureSpec.isotropic(4), 1.0,
                np.random.default_rng(0))


@given(st.integers(0, 10**6), st.floats(0.2, 5.0))
def test_rescaling_scales_facets(seed, c):
    state = run_mnw(ConvexPolytope.cube(2, 2.0), ISO2, 1.0, np.random.default_rng(seed))
    big = rescale_tessellation(state, c)
    np.testing.assert_allclose(big.measures, c * state.measures)
    assert volume(big.window) == pytest.approx(c * c * volume(state.window))
    check_partition(big)


def test_surface_totals_follow_one_trajectory():
    W = ConvexPolytope.cube(2, 3.0)
    times = [0.25, 0.5, 1.0]
    totals = surface_totals(W, ISO2, times, np.random.default_rng(5))
    state = run_mnw(W, ISO2, 1.0, np.random.default_rng(5))
    expected = [state.measures[state.births <= t].sum() for t in times]
    np.testing.assert_allclose(totals, expected)


@pytest.mark.parametrize("window, spec", [(ConvexPolytope.cube(2), ISO2),
                                          (ConvexPolytope.cube(3), AXIS3)])
def test_mean_total_surface(window, spec):
    rng = np.random.default_rng(21)
    x = np.array([surface_totals(window, spec, [1.0], rng)[0] for _ in range(4000)])
    assert abs(x.mean() - spec.surface_density * volume(window)) < 4 * x.std() / np.sqrt(len(x))


def test_python_and_box_engines_share_the_law():
    # both sides against the exact value 2.22297 for the axis-aligned unit cube at t = 1
    W = ConvexPolytope.cube(3)
    rng = np.random.default_rng(8)
    py = np.array([run_mnw(W, AXIS3, 1.0, rng, engine="python").measures.sum()
                   for _ in range(3000)])
    box = np.array([surface_totals(W, AXIS3, [1.0], rng)[0] for _ in range(20000)])
    for x in (py, box):
        assert abs(x.var(ddof=1) - 2.222973373438416) < 4 * np.sqrt(2 / len(x)) * 2.3
