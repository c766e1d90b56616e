import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from stit.geometry import ConvexPolytope
from stit.measures import (HyperplaneMeasureSpec, capacity, mean_width, sample_hitting,
                           sample_hitting_many, segment_capacity)


def test_isotropic_capacities_are_mean_widths():
    iso2, iso3 = HyperplaneMeasureSpec.isotropic(2), HyperplaneMeasureSpec.isotropic(3)
    assert capacity(iso2, ConvexPolytope.cube(2)) == pytest.approx(4 / np.pi)
    assert capacity(iso2, ConvexPolytope.disk(2.0, 4096)) == pytest.approx(4.0, rel=1e-6)
    assert capacity(iso3, ConvexPolytope.cube(3)) == pytest.approx(1.5)
    assert capacity(HyperplaneMeasureSpec.isotropic(3, 2.0), ConvexPolytope.cube(3)) == pytest.approx(3.0)
    assert capacity(iso3, ConvexPolytope.ball(1.0, 4)) == pytest.approx(2.0, rel=2e-3)


def test_flat_polygon_mean_width_is_quarter_perimeter():
    square = ConvexPolytope(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0.0]]), 2)
    assert mean_width(square) == pytest.approx(1.0)


def test_axis_capacity_sums_extents():
    spec = HyperplaneMeasureSpec.axis_aligned(3)
    np.testing.assert_allclose(spec.axis_rates(), 1.0)
    assert capacity(spec, ConvexPolytope.box([0, 0, 0], [1, 2, 3])) == pytest.approx(6.0)


def test_segment_capacity_values():
    x = np.zeros(2)
    y = np.array([3.0, 4.0])
    assert segment_capacity(HyperplaneMeasureSpec.isotropic(2), x, y) == pytest.approx(10 / np.pi)
    assert segment_capacity(HyperplaneMeasureSpec.axis_aligned(2), x, y) == pytest.approx(7.0)
    assert segment_capacity(HyperplaneMeasureSpec.isotropic(3), np.zeros(3),
                            np.array([0, 0, 2.0])) == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [
    dict(dimension=2, kind="mystery"),
    dict(dimension=2, kind="isotropic", scale=0.0),
    dict(dimension=2, kind="discrete_directions", directions=[[1, 0], [0, 1]], weights=[0.5, 0.6]),
    dict(dimension=2, kind="discrete_directions", directions=[[1, 0], [2, 0]], weights=[0.5, 0.5]),
])
def test_invalid_specs_rejected(bad):
    with pytest.raises(ValueError):
        HyperplaneMeasureSpec(**bad)


def test_dict_round_trip():
    spec = HyperplaneMeasureSpec.discrete([[1, 1], [1, -1], [0, 1]], [0.2, 0.3, 0.5], 2.5)
    back = HyperplaneMeasureSpec.from_dict(spec.to_dict())
    np.testing.assert_allclose(back.directions, spec.directions)
    assert back.scale == spec.scale and back.kind == spec.kind


def test_isotropic_is_not_axis_parallel():
    with pytest.raises(ValueError):
        HyperplaneMeasureSpec.isotropic(2).axis_rates()


@pytest.mark.parametrize("spec, P", [
    (HyperplaneMeasureSpec.isotropic(2), ConvexPolytope.cube(2)),
    (HyperplaneMeasureSpec.isotropic(3), ConvexPolytope.cube(3)),
    (HyperplaneMeasureSpec.axis_aligned(3), ConvexPolytope.box([0, 0, 0], [1, 2, 0.5])),
    (HyperplaneMeasureSpec.discrete([[1, 2], [3, -1]], [0.4, 0.6]), ConvexPolytope.disk(1.0, 64)),
])
def test_hit_frequency_of_inner_segment_matches_capacity_ratio(spec, P):
    rng = np.random.default_rng(99)
    c = P.vertices.mean(axis=0)
    x = c + 0.6 * (P.vertices[0] - c)
    y = c + 0.8 * (P.vertices[len(P.vertices) // 2] - c)
    n = 40000
    normals, offsets = sample_hitting_many(spec, P, n, rng)
    lo = np.minimum(normals @ x, normals @ y)
    hi = np.maximum(normals @ x, normals @ y)
    hits = np.sum((lo <= offsets) & (offsets <= hi))
    p = float(segment_capacity(spec, x, y) / capacity(spec, P))
    assert stats.binomtest(int(hits), n, p).pvalue > 1e-4


@given(st.integers(0, 10**6), st.sampled_from(["iso2", "iso3", "axis3"]))
def test_sampled_hyperplanes_meet_the_body(seed, kind):
    rng = np.random.default_rng(seed)
    d = 2 if kind == "iso2" else 3
    spec = HyperplaneMeasureSpec.axis_aligned(3) if kind == "axis3" else HyperplaneMeasureSpec.isotropic(d)
    P = ConvexPolytope.from_hull(rng.uniform(-1, 1, (10, d)))
    normals, offsets = sample_hitting_many(spec, P, 50, rng)
    proj = normals @ P.vertices.T
    assert np.all(proj.min(axis=1) <= offsets + 1e-12)
    assert np.all(offsets <= proj.max(axis=1) + 1e-12)
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0)


@given(st.integers(0, 10**6), st.floats(0.05, 20.0), st.sampled_from([2, 3]))
def test_capacity_is_homogeneous_and_translation_invariant(seed, c, d):
    rng = np.random.default_rng(seed)
    P = ConvexPolytope.from_hull(rng.uniform(-1, 1, (10, d)))
    for spec in (HyperplaneMeasureSpec.isotropic(d), HyperplaneMeasureSpec.axis_aligned(d)):
        assert capacity(spec, P.scaled(c)) == pytest.approx(c * capacity(spec, P), rel=1e-9)
    shifted = ConvexPolytope.from_hull(P.vertices + rng.normal(size=d))
    iso = HyperplaneMeasureSpec.isotropic(d)
    assert capacity(iso, shifted) == pytest.approx(capacity(iso, P), rel=1e-9)


def test_single_sample_is_hyperplane(rng):
    H = sample_hitting(HyperplaneMeasureSpec.isotropic(2), ConvexPolytope.cube(2), rng)
    assert H.normal.shape == (2,)
