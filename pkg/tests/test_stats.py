import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sps

from stit.stats import (MomentAccumulator, anderson_darling_normal, bonferroni, ks_normal,
                        ks_two_sample, process_covariance_check, upper_tail_excess,
                        variance_stderr)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_finalize_matches_scipy(rng):
    x = rng.gamma(2.0, size=5000)
    s = MomentAccumulator.from_samples(x).finalize()
    assert s["mean"] == pytest.approx(x.mean())
    assert s["variance"] == pytest.approx(x.var(ddof=1))
    assert s["skewness"] == pytest.approx(sps.skew(x))
    assert s["excess_kurtosis"] == pytest.approx(sps.kurtosis(x))
    assert s["min"] == x.min() and s["max"] == x.max()


def test_streaming_equals_batch(rng):
    x = rng.normal(size=300)
    acc = MomentAccumulator()
    for v in x:
        acc.update(v)
    batch = MomentAccumulator.from_samples(x)
    for key in ("mean", "m2", "m3", "m4"):
        assert getattr(acc, key) == pytest.approx(getattr(batch, key), rel=1e-9, abs=1e-9)


@given(arrays(float, st.integers(2, 60), elements=finite),
       arrays(float, st.integers(2, 60), elements=finite))
def test_merge_equals_concatenation(a, b):
    merged = MomentAccumulator.from_samples(a) + MomentAccumulator.from_samples(b)
    whole = MomentAccumulator.from_samples(np.concatenate([a, b]))
    assert merged.count == whole.count
    scale = max(1.0, np.abs(np.concatenate([a, b])).max())
    assert merged.mean == pytest.approx(whole.mean, abs=1e-9 * scale)
    assert merged.m2 == pytest.approx(whole.m2, rel=1e-7, abs=1e-6 * scale ** 2)
    assert merged.m3 == pytest.approx(whole.m3, rel=1e-6, abs=1e-5 * scale ** 3)
    assert merged.m4 == pytest.approx(whole.m4, rel=1e-6, abs=1e-5 * scale ** 4)


def test_constant_samples_have_no_shape():
    s = MomentAccumulator.from_samples(np.full(10, 3.0)).finalize()
    assert s["variance"] == 0 and not s["shape_defined"]
    with pytest.raises(ValueError, match="insufficient count"):
        MomentAccumulator.from_samples([1.0]).finalize()


def test_variance_stderr_of_normal(rng):
    x = rng.normal(size=20000)
    assert variance_stderr(x) == pytest.approx(np.sqrt(2 / len(x)), rel=0.05)


def test_normality_tests(rng):
    x = rng.normal(1.0, 2.0, size=5000)
    assert ks_normal(x, 1.0, 4.0)["p_value"] > 1e-3
    assert ks_normal(x, 0.0, 4.0)["p_value"] < 1e-6
    assert anderson_darling_normal(x, 1.0, 4.0) < 4.0
    assert anderson_darling_normal(rng.exponential(size=5000), 1.0, 1.0) > 10.0
    with pytest.raises(ValueError, match="degenerate"):
        ks_normal(x, 0.0, 0.0)
    with pytest.raises(ValueError):
        ks_normal(x[:10], 0.0, 1.0)


def test_two_sample(rng):
    assert ks_two_sample(rng.normal(size=3000), rng.normal(size=3000))["p_value"] > 1e-3
    assert ks_two_sample(rng.normal(size=3000), rng.normal(0.3, size=3000))["p_value"] < 1e-6


def test_brownian_covariance_check(rng):
    times = np.array([0.25, 0.5, 0.75, 1.0])
    steps = rng.normal(size=(4000, 4)) * np.sqrt(0.25)
    paths = np.cumsum(steps, axis=1)
    good = process_covariance_check(paths, min, times)
    assert good["max_deviation"] < 4.0
    bad = process_covariance_check(paths, lambda s, t: 1.3 * min(s, t), times)
    assert bad["max_deviation"] > 5.0
    with pytest.raises(ValueError, match="grid mismatch"):
        process_covariance_check(paths, min, times[:3])


def test_tail_excess(rng):
    heavy = rng.standard_t(4, size=50000)
    out = upper_tail_excess(heavy, 3.0)
    assert out["log_ratio"] > 0 and out["p_value"] < 1e-3
    light = rng.uniform(size=50000)
    assert upper_tail_excess(light, 3.0)["exceedances"] == 0
    with pytest.raises(ValueError):
        upper_tail_excess(heavy[:100], 3.0)


def test_bonferroni():
    assert bonferroni(0.01, 4) == 0.0025
