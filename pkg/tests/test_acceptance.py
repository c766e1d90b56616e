"""Full-scale acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -s``.
"""
import time

import numpy as np
import pytest

from stit.functionals import section_power_sums
from stit.geometry import ConvexPolytope, Hyperplane, intersect_with_hyperplane, random_direction, split, volume
from stit.harness import default_config, run_experiment
from stit.harness.results import numeric_diff
from stit.measures import HyperplaneMeasureSpec, capacity
from stit.mnw import run_mnw

pytestmark = pytest.mark.acceptance

REPORT = []
WORKERS = 4


def report(number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    REPORT.append(line)
    print(line)
    return ok


def show(test):
    return f"{test['value']:.4g} {test['op']} {test['threshold']:.4g}"


@pytest.fixture(scope="module")
def increment_run():
    start = time.perf_counter()
    res = run_experiment("increment_clt", default_config("increment_clt"), workers=8)
    return res, time.perf_counter() - start


def test_criterion_01_mean_surface():
    res = run_experiment("mean_surface", default_config("mean_surface"), workers=WORKERS)
    s = res.statistics["surface"]
    ok = res.tests["mean_within_3_stderr"]["passed"] and res.wall_clock_seconds < 120
    report(1, "mean total edge length", ok,
           f"mean {s['mean']:.5f} +- {s['stderr']:.5f} vs 1, |z| = "
           f"{res.tests['mean_within_3_stderr']['value']:.2f}, {res.wall_clock_seconds:.0f} s")
    assert ok


def test_criterion_02_exact_variance():
    res = run_experiment("variance_exact", default_config("variance_exact"), workers=WORKERS)
    t = res.tests["variance_matches_exact"]
    ok = t["passed"] and res.wall_clock_seconds < 300
    report(2, "exact variance, axis-aligned square", ok,
           f"sample {res.statistics['surface']['variance']:.4f} vs "
           f"{res.references['variance']['value']:.6f}, deviation {show(t)}")
    assert ok


def test_criterion_03_martingale():
    res = run_experiment("martingale", default_config("martingale"), workers=WORKERS)
    slope = res.statistics["conditional_mean_slope"]
    qv = res.statistics["quadratic_variation"]
    ok = res.passed and res.wall_clock_seconds < 600
    report(3, "martingale and quadratic variation", ok,
           f"slope {slope['slope']:.4f} +- {slope['stderr']:.4f}; Var {qv['sample_variance']:.4f} "
           f"vs integrated compensator {qv['integrated_compensator']:.4f}")
    assert ok


def test_criterion_04_increment_clt(increment_run):
    res, elapsed = increment_run
    ks, cov = res.tests["endpoint_ks_R=32"], res.tests["covariance_R=32"]
    ok = ks["passed"] and cov["passed"] and elapsed < 900
    report(4, "increment CLT at R=32", ok,
           f"KS p {ks['value']:.4g} vs N(0, pi ln 2); covariance max |z| {cov['value']:.2f} "
           f"(finite-R model: KS p {res.tests['endpoint_ks_finite_R_R=32']['value']:.3g}, "
           f"max |z| {res.tests['covariance_finite_R_R=32']['value']:.2f})")
    assert ok


def test_criterion_05_isotropic_constants():
    disk = run_experiment("limit_constant", default_config("limit_constant"), workers=WORKERS)
    ball_cfg = default_config("limit_constant", dimension=3, R_list=[16.0], replications=32,
                              window={"kind": "ball", "size": 1.0, "resolution": 3},
                              options={"tolerance": 0.10})
    ball = run_experiment("limit_constant", ball_cfg, workers=WORKERS)
    d2, d3 = disk.tests["relative_error"], ball.tests["relative_error"]
    ok = d2["passed"] and d3["passed"]
    report(5, "isotropic limit constants", ok,
           f"disk R=64 rel. error {d2['value']:.3f} (<= 0.05); ball R=16 rel. error "
           f"{d3['value']:.3f} (<= 0.10), finite-R expectation "
           f"{ball.references['finite_R_expectation']['value'] / ball.references['limit_constant']['value']:.3f}"
           f" of the limit")
    assert ok


def test_criterion_06_planar_total_length():
    res = run_experiment("total_length_2d", default_config("total_length_2d"), workers=WORKERS)
    ratios = [res.statistics[f"R={R:g}"]["normalized_variance"] / np.pi for R in (8, 16, 32, 64)]
    names = ("normalized_variance_increasing", "within_factor_of_limit", "endpoint_ks_R=64")
    ok = all(res.tests[n]["passed"] for n in names) and res.wall_clock_seconds < 1800
    report(6, "planar total length", ok,
           "Var/(R^2 log R) / pi = " + ", ".join(f"{r:.3f}" for r in ratios)
           + f"; endpoint KS p {res.tests['endpoint_ks_R=64']['value']:.3g}")
    assert ok


def test_criterion_07_non_gaussian():
    res = run_experiment("non_gaussian", default_config("non_gaussian"), workers=WORKERS)
    t = res.tests
    ok = res.passed and res.wall_clock_seconds < 2700
    s16 = res.statistics["R=16"]
    report(7, "non-Gaussian limit in d=3", ok,
           f"monotone {t['variance_increasing']['passed']}; Var(16) {s16['variance']:.3f} vs "
           f"{res.references['limit_variance']['value']:.3f} ({show(t['variance_near_limit'])}); "
           f"KS p {t['normality_rejected']['value']:.2g}; upper tail p "
           f"{t['upper_tail_heavier']['value']:.3g}, log ratio {t['upper_tail_heavier']['log_ratio']:.2f}, "
           f"skewness {s16['skewness']:.3f}")
    assert ok


def test_criterion_08_scaling():
    res = run_experiment("scaling", default_config("scaling"), workers=WORKERS)
    ok = res.passed
    report(8, "scaling property", ok,
           f"surface KS p {res.tests['two_sample_ks_surface']['value']:.3g}, cell count KS p "
           f"{res.tests['two_sample_ks_cell_count']['value']:.3g}")
    assert ok


N_CASES = 10_000


def _random_bodies(rng, count):
    out = []
    for i in range(count):
        d = 2 + i % 2
        out.append(ConvexPolytope.from_hull(rng.uniform(-1, 1, (8 + 4 * d, d)) * rng.uniform(0.1, 10)))
    return out


def _random_cut(P, rng):
    u = random_direction(rng, P.ambient_dimension)
    proj = P.vertices @ u
    return Hyperplane(u, proj.min() + (proj.max() - proj.min()) * rng.uniform(0.01, 0.99))


def test_criterion_09_geometry_properties():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    bodies = _random_bodies(rng, 200)
    failures = {}

    bad = 0
    for i in range(N_CASES):
        P = bodies[i % len(bodies)]
        plus, minus, face = split(P, _random_cut(P, rng))
        bad += abs(volume(plus) + volume(minus) - volume(P)) > 1e-9 * volume(P) or volume(face) <= 0
    failures["split additivity"] = bad

    bad = 0
    cases = [(ConvexPolytope.cube(2, 2.0), HyperplaneMeasureSpec.isotropic(2)),
             (ConvexPolytope.disk(1.0, 12), HyperplaneMeasureSpec.axis_aligned(2)),
             (ConvexPolytope.cube(3, 1.5), HyperplaneMeasureSpec.axis_aligned(3))]
    states = []
    for i in range(N_CASES):
        W, spec = cases[i % 3]
        st = run_mnw(W, spec, rng.uniform(0.0, 3.0), rng)
        if i < 1000:
            states.append(st)
        vol = sum(volume(c) for c in st.cells)
        bad += (st.n_cells != st.n_facets + 1 or abs(vol - volume(W)) > 1e-9 * volume(W)
                or np.any(np.diff(st.births) < 0) or np.any(st.births > st.horizon)
                or np.any(st.leaf_deaths <= st.horizon))
    failures["partition invariants"] = bad

    bad = 0
    per_state = N_CASES // len(states)
    for st in states:
        cuts = [_random_cut(st.window, rng) for _ in range(per_state)]
        totals = section_power_sums(st, [H.normal for H in cuts], [H.offset for H in cuts])[:, 1]
        full = np.array([volume(intersect_with_hyperplane(st.window, H)) for H in cuts])
        bad += int(np.sum(np.abs(totals - full) > 1e-9 * np.maximum(full, 1.0)))
    failures["section partition"] = bad

    bad = 0
    base = {}
    for i in range(N_CASES):
        k = i % len(bodies)
        P = bodies[k]
        d = P.ambient_dimension
        scale = rng.uniform(0.5, 2) if i % 2 else None
        spec = HyperplaneMeasureSpec.isotropic(d, scale) if scale else HyperplaneMeasureSpec.axis_aligned(d)
        if (k, i % 2) not in base:
            unit = HyperplaneMeasureSpec.isotropic(d) if scale else spec
            base[k, i % 2] = capacity(unit, P)
        want = rng.uniform(0.01, 100) * (scale or 1.0)
        c = want / (scale or 1.0)
        bad += abs(capacity(spec, P.scaled(c)) - want * base[k, i % 2]) > 1e-9 * want * base[k, i % 2]
    failures["capacity homogeneity"] = bad

    elapsed = time.perf_counter() - start
    ok = sum(failures.values()) == 0 and elapsed < 60
    report(9, "geometry property suite", ok,
           ", ".join(f"{k} {v} failures" for k, v in failures.items())
           + f" over {N_CASES} cases each, {elapsed:.0f} s")
    assert ok


def test_criterion_10_determinism(increment_run):
    reference, _ = increment_run
    base = reference.to_dict()
    diffs = {}
    for workers in (1, 4):
        res = run_experiment("increment_clt", default_config("increment_clt"), workers=workers)
        diffs[workers] = numeric_diff(base, res.to_dict())
    ok = not any(diffs.values())
    report(10, "determinism across workers", ok,
           "; ".join(f"{w} vs 8 workers: {len(d)} differing fields" for w, d in diffs.items()))
    assert ok
