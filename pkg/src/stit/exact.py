"""Reference moments computed by quadrature and closed forms.

The variance of the centred facet functional at time ``t`` in a window ``W``
is the triple integral over hitting hyperplanes ``H`` and pairs ``x, y`` in
``W ∩ H`` of ``zeta(n_H)**2 * (1 - exp(-t L)) / L`` with ``L`` the capacity
of the segment ``[x, y]``.  Writing ``y = x + rho * v`` in polar coordinates
inside ``H`` turns the radial part into a closed form, leaving an integral
over the direction of ``H``, the base point ``x`` in ``W`` and the in-plane
direction ``v``; that remaining integral is done by randomly shifted Sobol
points.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from math import factorial, gamma, log, pi

import numpy as np
from scipy.special import exp1
from scipy.stats import qmc

from .functionals import FaceFunctional, estimate_a_phi2, section_power_sums
from .geometry import ConvexPolytope
from .measures import HyperplaneMeasureSpec, sample_hitting_many
from .mnw import run_mnw

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class IntegratorConfig:
    """Sobol sample count per shift, shift count and the singular shell radius."""

    n_points: int = 1 << 14
    shell: float = 0.0
    shell_correction: bool = True
    n_shifts: int = 10
    seed: int = 20240101

    def __post_init__(self):
        if self.n_points < 1000:
            raise ValueError("n_points must be at least 1000")
        if self.shell < 0:
            raise ValueError("shell radius must be nonnegative")
        if self.n_shifts < 2:
            raise ValueError("need at least two random shifts for an error estimate")


def _shifted_sobol(dim: int, cfg: IntegratorConfig):
    m = int(np.ceil(np.log2(cfg.n_points)))
    base = qmc.Sobol(dim, scramble=False).random_base2(m)
    shifts = np.random.Generator(np.random.Philox(cfg.seed)).random((cfg.n_shifts, dim))
    for s in shifts:
        yield (base + s) % 1.0


def _ein(x):
    """Entire exponential integral ``int_0^x (1 - exp(-s)) / s ds``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.5
    xs = x[small]
    term = xs.copy()
    acc = xs.copy()
    for k in range(2, 20):
        term = -term * xs / k
        acc += term / k
    out[small] = acc
    xl = x[~small]
    out[~small] = exp1(xl) + np.log(xl) + EULER_GAMMA
    return out


def _variance_kernel(d: int, t: float):
    """Radial integral of ``rho**(d-2) (1 - exp(-t c rho)) / (c rho)`` on ``[0, r]``."""
    if d == 2:
        return lambda r, c: _ein(t * c * r) / c
    if d == 3:
        def kernel(r, c):
            a = t * c * r
            frac = np.where(a < 1e-4, a / 2 - a * a / 6 + a ** 3 / 24,
                            1.0 + np.expm1(-a) / np.where(a > 0, a, 1.0))
            return r * frac / c
        return kernel
    raise ValueError("polar reduction implemented for d = 2, 3")


def _compensator_kernel(d: int, s: float):
    """Radial integral of ``rho**(d-2) exp(-s c rho)`` on ``[0, r]``."""
    if d == 2:
        if s == 0:
            return lambda r, c: r
        return lambda r, c: -np.expm1(-s * c * r) / (s * c)
    if d == 3:
        if s == 0:
            return lambda r, c: 0.5 * r * r
        def kernel(r, c):
            a = s * c * r
            return (1.0 - np.exp(-a) * (1.0 + a)) / (s * c) ** 2
        return kernel
    raise ValueError("polar reduction implemented for d = 2, 3")


def _orthonormal_frame(u):
    helper = np.where(np.abs(u[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    return e1, np.cross(u, e1)


def _exit_distance(x, v, a, b):
    """Distance from ``x`` along unit ``v`` to the boundary of ``{a y <= b}``."""
    slack = b[None, :] - x @ a.T
    speed = v @ a.T
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(speed > 1e-15, slack / speed, np.inf)
    return np.maximum(r.min(axis=1), 0.0)


def _polar_integral(spec: HyperplaneMeasureSpec, W: ConvexPolytope, phi: FaceFunctional,
                    kernel, cfg: IntegratorConfig):
    d = W.ambient_dimension
    if d not in (2, 3) or W.intrinsic_dimension != d:
        raise ValueError("exact moments support full-dimensional windows in d = 2, 3")
    a, b = W.halfspaces()
    lo = W.vertices.min(axis=0)
    span = W.vertices.max(axis=0) - lo
    box_volume = float(np.prod(span))
    if spec.is_discrete:
        groups = [(w, u) for w, u in zip(spec.weights, spec.directions)]
        dir_dims = 0
    else:
        groups = [(1.0, None)]
        dir_dims = d - 1
    values = []
    for pts in _shifted_sobol(dir_dims + d + (d - 2), cfg):
        total = 0.0
        for weight, fixed in groups:
            n = len(pts)
            if fixed is not None:
                u = np.repeat(fixed[None, :], n, axis=0)
            elif d == 2:
                ang = pi * pts[:, 0]
                u = np.column_stack([np.cos(ang), np.sin(ang)])
            else:
                z = 1.0 - 2.0 * pts[:, 0]
                r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
                ang = 2.0 * pi * pts[:, 1]
                u = np.column_stack([r * np.cos(ang), r * np.sin(ang), z])
            x = lo + span * pts[:, dir_dims:dir_dims + d]
            inside = np.all(x @ a.T <= b + 1e-12, axis=1)
            if d == 2:
                v = np.column_stack([-u[:, 1], u[:, 0]])
                arc = 1.0
            else:
                e1, e2 = _orthonormal_frame(u)
                th = pi * pts[:, -1][:, None]
                v = np.cos(th) * e1 + np.sin(th) * e2
                arc = pi
            c = spec.unit_segment_capacity(v)
            radial = kernel(_exit_distance(x, v, a, b), c) + kernel(_exit_distance(x, -v, a, b), c)
            f = phi(u) ** 2 * np.where(inside, radial, 0.0) * arc
            total += weight * float(f.mean()) * box_volume
        values.append(spec.scale * total)
    values = np.array(values)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def variance_exact(spec: HyperplaneMeasureSpec, W: ConvexPolytope, t: float,
                   phi: FaceFunctional, cfg: IntegratorConfig = IntegratorConfig()):
    """Variance of the centred ``sigma_phi`` at time ``t``: ``(value, error)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if cfg.shell != 0:
        raise ValueError("the variance integrand is bounded; shell radius must be 0")
    if t == 0:
        return 0.0, 0.0
    return _polar_integral(spec, W, phi, _variance_kernel(W.ambient_dimension, t), cfg)


def expected_compensator(spec: HyperplaneMeasureSpec, W: ConvexPolytope, s: float,
                         phi: FaceFunctional, cfg: IntegratorConfig = IntegratorConfig()):
    """Mean of the section compensator for ``phi**2`` at time ``s``.

    This is the time derivative of :func:`variance_exact`.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    return _polar_integral(spec, W, phi, _compensator_kernel(W.ambient_dimension, s), cfg)


def shell_correction(rates, sides, eps: float) -> float:
    """Integral of ``1 / sum_i rates_i |x_i - y_i|`` over pairs in the box with
    that sum below ``eps``."""
    rates = np.asarray(rates, dtype=float)
    sides = np.asarray(sides, dtype=float)
    m = len(rates)
    if np.any(eps / rates > sides):
        raise ValueError("shell radius too large for the box")
    total = 0.0
    for k in range(m + 1):
        for subset in combinations(range(m), k):
            rest = [j for j in range(m) if j not in subset]
            p = m + k - 1
            total += ((-1) ** k * np.prod(sides[rest]) * np.prod(1.0 / rates[list(subset)])
                      * eps ** p / (p * factorial(p)))
    return 2 ** m * float(np.prod(1.0 / rates)) * total


def xi_variance(spec: HyperplaneMeasureSpec, W: ConvexPolytope, phi: FaceFunctional,
                cfg: IntegratorConfig = IntegratorConfig(shell=1e-3)):
    """Variance of the non-Gaussian large-time limit of the centred surface
    functional for a box window and an axis-parallel measure, ``d >= 3``."""
    d = W.ambient_dimension
    if d < 3:
        raise ValueError("integral diverges only in d=2 increments context; "
                         "Ξ defined for d>2")
    if not (spec.is_axis_parallel and W.is_box):
        raise ValueError("xi_variance supports box windows with an axis-parallel measure")
    rates = spec.axis_rates()
    sides = W.bounds[1] - W.bounds[0]
    eps = cfg.shell
    values = []
    m = d - 1
    for pts in _shifted_sobol(2 * m, cfg):
        total = 0.0
        for j in range(d):
            zeta2 = float(phi(np.eye(d)[j:j + 1])[0] ** 2)
            if rates[j] == 0 or zeta2 == 0:
                continue
            others = [i for i in range(d) if i != j]
            lam = rates[others]
            side = sides[others]
            gap = np.abs(pts[:, :m] - pts[:, m:]) * side
            cap = gap @ lam
            with np.errstate(divide="ignore"):
                f = np.where(cap >= eps, 1.0 / cap, 0.0)
            inner = float(f.mean()) * float(np.prod(side)) ** 2
            if eps > 0 and cfg.shell_correction:
                inner += shell_correction(lam, side, eps)
            total += rates[j] * sides[j] * zeta2 * inner
        values.append(total)
    values = np.array(values)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def v_w_isotropic(d: int, vol_W: float, zeta_square_mean: float) -> float:
    """Limit constant of the normalized compensator for the isotropic measure."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return (vol_W * 2 ** (d - 1) * pi ** (d - 1.5) * gamma((d + 1) / 2) ** (d - 1)
            * gamma(d / 2) ** (2 - d) * zeta_square_mean)


def v_w_samples(spec: HyperplaneMeasureSpec, W: ConvexPolytope, phi: FaceFunctional, R: float,
                replications: int, rng, n_hyperplanes: int = 200) -> dict:
    """Per-replication values of ``R**-d`` times the section compensator of
    ``Y(1, R W)``, with the mean number of section cells met."""
    d = W.ambient_dimension
    WR = W.scaled(R)
    stats = np.empty(replications)
    cells_met = np.empty(replications)
    for i in range(replications):
        state = run_mnw(WR, spec, 1.0, rng)
        est, _ = estimate_a_phi2(state, spec, phi, n_hyperplanes, rng)
        stats[i] = est / R ** d
        cells_met[i] = _mean_section_cells(state, spec, rng)
    return {"values": stats, "section_cells": cells_met}


def _mean_section_cells(state, spec, rng, n: int = 20) -> float:
    normals, offsets = sample_hitting_many(spec, state.window, n, rng)
    return float(section_power_sums(state, normals, offsets)[:, 0].mean())


def v_w_empirical(spec: HyperplaneMeasureSpec, W: ConvexPolytope, phi: FaceFunctional, R: float,
                  replications: int, rng, n_hyperplanes: int = 200):
    """Estimate of the limit constant from ``Y(1, R W)``: ``(estimate, std_error)``."""
    if replications < 2:
        raise ValueError("need at least two replications")
    out = v_w_samples(spec, W, phi, R, replications, rng, n_hyperplanes)
    values = out["values"]
    if np.all(values == 0) and phi.bound > 0 and np.all(out["section_cells"] == 0):
        raise ValueError("zero sections")
    if out["section_cells"].mean() < 10:
        warnings.warn("sections contain fewer than 10 cells on average; increase R")
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(replications))


def increment_variance_profile(V: float, s0: float, t: float, d: int) -> float:
    """``V * int_{s0}^{t} s**(1-d) ds``."""
    if s0 <= 0:
        raise ValueError("diverges at 0")
    if t < s0:
        raise ValueError("need s0 <= t")
    if d == 2:
        return V * log(t / s0)
    return V * (s0 ** (2 - d) - t ** (2 - d)) / (d - 2)


def tau(s: float, R: float) -> float:
    """Time change ``R**(s-1) * (log R)**(1-s)``."""
    if R <= np.e:
        raise ValueError("R must exceed e")
    return float(np.exp((log(R) - log(log(R))) * (s - 1.0)))
