import json
import math

import numpy as np
import pytest

from stit.cli import main
from stit.geometry import ConvexPolytope
from stit.harness import ExperimentConfig, default_config, replicate, run_experiment, stream
from stit.harness.render import parse_svg_segments, render, render_obj, render_svg
from stit.harness.results import ExperimentResult, check, load_result, numeric_diff
from stit.harness.serialize import load_tessellation, save_tessellation, tessellation_from_dict, tessellation_to_dict
from stit.measures import HyperplaneMeasureSpec
from stit.mnw import run_mnw


def draw(rng):
    return [rng.random(), rng.normal()]


def test_streams_are_keyed():
    a = stream(1, "x", 0).random()
    assert a == stream(1, "x", 0).random()
    assert a != stream(1, "y", 0).random()
    assert a != stream(1, "x", 1).random()
    assert a != stream(2, "x", 0).random()


def test_replication_ignores_worker_count():
    one = replicate(draw, 37, 5, "demo", workers=1)
    many = replicate(draw, 37, 5, "demo", workers=3)
    np.testing.assert_array_equal(one, many)
    assert one.shape == (37, 2)


def test_config_from_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('name = "increment_clt"\nR_list = [8.0, 16.0]\nreplications = 100\n'
                    '[measure]\nkind = "axis_aligned"\n')
    cfg = ExperimentConfig.from_toml(path)
    assert cfg.R_list == [8.0, 16.0] and cfg.make_spec().is_axis_parallel
    assert cfg.make_window().is_box


@pytest.mark.parametrize("bad", [dict(replications=1), dict(R_list=[16.0, 8.0]),
                                 dict(colour="red")])
def test_config_validation(bad):
    with pytest.raises((ValueError, TypeError)):
        ExperimentConfig.from_dict({"name": "x", **bad})


def test_windows_and_functionals_from_config():
    cfg = ExperimentConfig("x", dimension=3, window={"kind": "ball", "size": 2.0},
                           functional={"kind": "indicator", "directions": [[0, 0, 1]]})
    assert cfg.make_window().intrinsic_dimension == 3
    np.testing.assert_allclose(cfg.make_functional()(np.eye(3)), [0, 0, 1])
    with pytest.raises(ValueError):
        ExperimentConfig("x", dimension=4, window={"kind": "ball"}).make_window()


def test_result_round_trip_and_recheck(tmp_path):
    res = ExperimentResult("demo", {"a": 1}, seed=3)
    res.tests["small"] = check(0.5, "<", 1.0)
    res.tests["aside"] = check(2.0, "<", 1.0, role="diagnostic")
    res.statistics["v"] = {"x": np.float64(1.5), "arr": np.arange(3), "bad": float("nan")}
    res.samples["s"] = np.arange(6.0).reshape(3, 2)
    path = res.save(tmp_path)
    data = load_result(path)
    assert data["passed"] is True and data["schema_version"] == 1
    assert res.recheck() == {"small": True, "aside": False}
    assert np.loadtxt(tmp_path / "demo__s.csv", delimiter=",").shape == (3, 2)
    other = json.loads(json.dumps(data))
    other["wall_clock_seconds"] = 99.0
    assert numeric_diff(data, other) == []
    other["statistics"]["v"]["x"] = 1.5000001
    assert numeric_diff(data, other) == ["/statistics/v/x"]


def planar_state(t, seed=0):
    return run_mnw(ConvexPolytope.cube(2), HyperplaneMeasureSpec.isotropic(2), t,
                   np.random.default_rng(seed))


def test_svg_of_empty_tessellation_is_outline():
    svg = render_svg(planar_state(0.0))
    assert svg.count("<polygon") == 1 and parse_svg_segments(svg) == []


def test_svg_of_one_split_has_two_polygons():
    rng = np.random.default_rng(1)
    while True:
        state = planar_state(float(rng.uniform(0.2, 3.0)), int(rng.integers(1 << 30)))
        if state.n_facets == 1:
            break
    svg = render_svg(state)
    assert svg.count("<polygon") == 2 and len(parse_svg_segments(svg)) == 1


def test_svg_round_trip_recovers_segments():
    state = planar_state(6.0, 3)
    size = 500.0
    segs = parse_svg_segments(render_svg(state, size=size, color_by_birth=True))
    got = sorted(tuple(round(v, 4) for v in s) for s in segs)
    want = []
    for rec in state.maximal_polytopes:
        (x1, y1), (x2, y2) = rec.facet.vertices * size
        want.append(tuple(round(v, 4) for v in (x1, size - y1, x2, size - y2)))
    assert got == sorted(want)


def test_obj_lists_window_and_facets():
    state = run_mnw(ConvexPolytope.cube(3), HyperplaneMeasureSpec.axis_aligned(3), 2.0,
                    np.random.default_rng(0))
    text = render_obj(state)
    assert sum(line.startswith("f ") for line in text.splitlines()) == 6 + state.n_facets
    with pytest.raises(ValueError):
        render_obj(planar_state(1.0))
    with pytest.raises(ValueError):
        render(state, "png")


@pytest.mark.parametrize("window, spec", [
    (ConvexPolytope.cube(2, 3.0), HyperplaneMeasureSpec.isotropic(2)),
    (ConvexPolytope.cube(3, 2.0), HyperplaneMeasureSpec.axis_aligned(3)),
    (ConvexPolytope.ball(2.0, 1), HyperplaneMeasureSpec.isotropic(3)),
])
def test_serialization_round_trip(tmp_path, window, spec):
    state = run_mnw(window, spec, 1.5, np.random.default_rng(2))
    path = tmp_path / "t.json"
    save_tessellation(state, path)
    back = load_tessellation(path)
    np.testing.assert_allclose(back.births, state.births)
    np.testing.assert_allclose(back.measures, state.measures)
    assert back.n_cells == state.n_cells
    assert tessellation_to_dict(back)["cells"] == tessellation_to_dict(state)["cells"]
    with pytest.raises(ValueError):
        tessellation_from_dict({"format": "other"})


def test_cli_round_trip(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["simulate", "--dim", "2", "--t", "3", "--seed", "1", "--out", str(out)]) == 0
    assert main(["render", "--in", str(out), "--format", "svg"]) == 0
    assert (tmp_path / "t.svg").exists()
    capsys.readouterr()
    assert main(["exact", "--quantity", "tau"]) == 0
    assert json.loads(capsys.readouterr().out)["R=64"]["s=1"] == pytest.approx(1.0)
    cfg = tmp_path / "e.toml"
    cfg.write_text('name = "mean_surface"\nreplications = 200\n')
    assert main(["experiment", "mean_surface", "--config", str(cfg), "--out",
                 str(tmp_path / "res")]) == 0
    assert (tmp_path / "res" / "mean_surface.json").exists()


# degenerate experiment settings with known answers

def test_mean_surface_at_time_zero():
    res = run_experiment("mean_surface", default_config("mean_surface", t=0.0, replications=50))
    assert res.passed and res.statistics["surface"]["mean"] == 0.0


def test_martingale_without_elapsed_time():
    cfg = default_config("martingale", t=0.5, replications=200,
                         options={"base_states": 30, "continuations": 3, "compensator_states": 20})
    res = run_experiment("martingale", cfg)
    assert res.statistics["conditional_mean_slope"]["slope"] == pytest.approx(1.0)


def test_martingale_with_zero_weight():
    cfg = default_config("martingale", replications=100, functional={"kind": "constant", "value": 0.0},
                         options={"base_states": 20, "continuations": 2, "compensator_states": 5,
                                  "s_grid_points": 3})
    res = run_experiment("martingale", cfg)
    assert res.passed
    assert res.statistics["quadratic_variation"]["sample_variance"] == 0.0


def test_increment_from_the_end_is_degenerate():
    cfg = default_config("increment_clt", s0=1.0, checkpoints=[], R_list=[4.0], replications=100)
    res = run_experiment("increment_clt", cfg)
    assert np.all(res.samples["increments_R=4"] == 0)
    assert res.statistics["R=4"] == {"degenerate": True}


def test_unit_scaling_is_identity_in_law():
    res = run_experiment("scaling", default_config("scaling", t=1.0, replications=400))
    assert res.tests["two_sample_ks_surface"]["value"] > 1e-3


def test_variance_experiment_at_time_zero():
    cfg = default_config("variance_exact", t=0.0, replications=20)
    assert run_experiment("variance_exact", cfg).passed


def test_non_gaussian_records_normalization():
    cfg = default_config("non_gaussian", R_list=[0.0, 2.0], replications=10000)
    res = run_experiment("non_gaussian", cfg)
    assert res.statistics["R=0"]["variance"] == 0.0
    assert "R^-(d-1)" in res.metadata["normalization"]
    assert math.isfinite(res.references["limit_variance"]["value"])
