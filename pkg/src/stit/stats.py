"""Mergeable streaming moments and the hypothesis tests used by experiments.

All tests are deterministic functions of their input arrays.
"""
from __future__ import annotations

from math import log, sqrt

import numpy as np
from scipy import stats as _st


class MomentAccumulator:
    """Running count, mean, central moment sums up to order four, min and max.

    Two accumulators combine with ``+`` using the pairwise update formulas, so
    partial results from workers can be reduced in any tree shape.
    """

    __slots__ = ("count", "mean", "m2", "m3", "m4", "min", "max")

    def __init__(self, count=0, mean=0.0, m2=0.0, m3=0.0, m4=0.0, lo=np.inf, hi=-np.inf):
        self.count = int(count)
        self.mean = float(mean)
        self.m2 = float(m2)
        self.m3 = float(m3)
        self.m4 = float(m4)
        self.min = float(lo)
        self.max = float(hi)

    @classmethod
    def from_samples(cls, samples) -> "MomentAccumulator":
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mu = x.mean()
        dev = x - mu
        d2 = dev * dev
        return cls(x.size, mu, d2.sum(), (d2 * dev).sum(), (d2 * d2).sum(), x.min(), x.max())

    def update(self, x: float) -> "MomentAccumulator":
        n1 = self.count
        n = n1 + 1
        delta = x - self.mean
        dn = delta / n
        dn2 = dn * dn
        term = delta * dn * n1
        self.mean += dn
        self.m4 += term * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * self.m2 - 4 * dn * self.m3
        self.m3 += term * dn * (n - 2) - 3 * dn * self.m2
        self.m2 += term
        self.count = n
        self.min = min(self.min, x)
        self.max = max(self.max, x)
        return self

    def __add__(self, other: "MomentAccumulator") -> "MomentAccumulator":
        na, nb = self.count, other.count
        if na == 0:
            return other.copy()
        if nb == 0:
            return self.copy()
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (self.m3 + other.m3 + d2 * delta * na * nb * (na - nb) / n ** 2
              + 3 * delta * (na * other.m2 - nb * self.m2) / n)
        m4 = (self.m4 + other.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / n ** 3
              + 6 * d2 * (na * na * other.m2 + nb * nb * self.m2) / n ** 2
              + 4 * delta * (na * other.m3 - nb * self.m3) / n)
        return MomentAccumulator(n, mean, m2, m3, m4, min(self.min, other.min),
                                 max(self.max, other.max))

    merge = __add__

    def copy(self) -> "MomentAccumulator":
        return MomentAccumulator(self.count, self.mean, self.m2, self.m3, self.m4,
                                 self.min, self.max)

    def finalize(self) -> dict:
        n = self.count
        if n < 2:
            raise ValueError("insufficient count")
        var = self.m2 / (n - 1)
        shape_ok = self.m2 > 0
        skew = sqrt(n) * self.m3 / self.m2 ** 1.5 if shape_ok else float("nan")
        kurt = n * self.m4 / self.m2 ** 2 - 3.0 if shape_ok and n >= 4 else float("nan")
        return {"count": n, "mean": self.mean, "variance": var, "skewness": skew,
                "excess_kurtosis": kurt, "stderr": sqrt(var / n), "min": self.min,
                "max": self.max, "shape_defined": bool(shape_ok)}


def variance_stderr(samples) -> float:
    """Standard error of the unbiased sample variance from the fourth moment."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    dev = x - x.mean()
    m2 = np.mean(dev ** 2)
    m4 = np.mean(dev ** 4)
    return sqrt(max(m4 - (n - 3) / (n - 1) * m2 * m2, 0.0) / n)


def ks_normal(samples, mean: float, variance: float) -> dict:
    """One-sample Kolmogorov-Smirnov test against ``N(mean, variance)``."""
    x = np.asarray(samples, dtype=float)
    if not variance > 0:
        raise ValueError("degenerate variance")
    if len(x) < 50:
        raise ValueError("need at least 50 samples")
    res = _st.kstest(x, "norm", args=(mean, sqrt(variance)), method="asymp")
    return {"statistic": float(res.statistic), "p_value": float(res.pvalue)}


def ks_two_sample(a, b) -> dict:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 50 or len(b) < 50:
        raise ValueError("need at least 50 samples on each side")
    res = _st.ks_2samp(a, b, method="asymp")
    return {"statistic": float(res.statistic), "p_value": float(res.pvalue)}


def anderson_darling_normal(samples, mean: float, variance: float) -> float:
    """Anderson-Darling statistic against a fully specified normal law."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    z = _st.norm.cdf(x, loc=mean, scale=sqrt(variance))
    z = np.clip(z, 1e-300, 1 - 1e-16)
    i = np.arange(1, n + 1)
    return float(-n - np.mean((2 * i - 1) * (np.log(z) + np.log1p(-z[::-1]))))


def process_covariance_check(trajectories, model_covariance, times) -> dict:
    """Compare the empirical covariance of process values on a time grid with
    ``model_covariance(s, t)``.

    Each entry is standardized by the sampling error of the corresponding
    product moment; ``max_deviation`` is the largest absolute standardized
    deviation.
    """
    X = np.asarray(trajectories, dtype=float)
    times = np.asarray(times, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(times):
        raise ValueError("grid mismatch between trajectories and times")
    n = X.shape[0]
    if n < 1000:
        raise ValueError("need at least 1000 trajectories")
    dev = X - X.mean(axis=0)
    emp = dev.T @ dev / (n - 1)
    model = np.array([[model_covariance(s, t) for t in times] for s in times])
    prod = dev[:, :, None] * dev[:, None, :]
    se = prod.std(axis=0, ddof=1) / sqrt(n)
    diff = emp - model
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.inf))
    return {"max_deviation": float(np.max(np.abs(z))), "standardized": z,
            "empirical": emp, "model": model}


def upper_tail_excess(samples, threshold_sigmas: float) -> dict:
    """Empirical ``P(X > mean + k sd)`` against the Gaussian tail.

    ``log_ratio > 0`` means a heavier upper tail; ``p_value`` is the one-sided
    binomial probability of at least the observed exceedance count under the
    Gaussian tail.
    """
    x = np.asarray(samples, dtype=float)
    if threshold_sigmas <= 0:
        raise ValueError("threshold must be positive")
    if len(x) < 10_000:
        raise ValueError("need at least 10^4 samples")
    n = len(x)
    cut = x.mean() + threshold_sigmas * x.std(ddof=1)
    hits = int(np.sum(x > cut))
    gauss = float(_st.norm.sf(threshold_sigmas))
    emp = hits / n
    return {"empirical_tail": emp, "gaussian_tail": gauss, "exceedances": hits,
            "log_ratio": log(emp / gauss) if hits else float("-inf"),
            "p_value": float(_st.binom.sf(hits - 1, n, gauss))}


def bonferroni(alpha: float, m: int) -> float:
    return alpha / max(int(m), 1)
