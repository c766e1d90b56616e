"""Monte Carlo experiments checking the limit theory against simulation.

Each experiment takes an :class:`ExperimentConfig` and a worker count and
returns an :class:`ExperimentResult`. Results depend only on the config,
never on ``workers``.
"""
from __future__ import annotations

import time
from dataclasses import replace
from functools import partial
from math import log, sqrt

import numpy as np
from scipy.integrate import simpson

from .. import stats
from ..exact import (expected_compensator, increment_variance_profile, tau, v_w_isotropic,
                     v_w_samples, variance_exact, xi_variance)
from ..functionals import estimate_a_phi2, sigma_phi
from ..geometry import volume
from ..mnw import continue_mnw, rescale_tessellation, run_mnw, surface_totals
from .config import ExperimentConfig, make_functional
from .parallel import replicate
from .results import ExperimentResult, check, reference


# -- picklable replication tasks -------------------------------------------

def _surface_task(rng, window, spec, times, functional):
    phi = make_functional(functional)
    return surface_totals(window, spec, times, rng, None if phi.is_unit else phi)


def _martingale_task(rng, window, spec, s0, t, functional, continuations):
    phi = make_functional(functional)
    base = run_mnw(window, spec, s0, rng)
    out = [sigma_phi(base, phi)]
    for _ in range(continuations):
        out.append(sigma_phi(continue_mnw(base, t, rng), phi))
    return out


def _compensator_task(rng, window, spec, s, functional, n_hyperplanes):
    phi = make_functional(functional)
    state = run_mnw(window, spec, s, rng)
    return estimate_a_phi2(state, spec, phi, n_hyperplanes, rng)[0]


def _limit_constant_task(rng, window, spec, functional, R, n_hyperplanes):
    phi = make_functional(functional)
    out = v_w_samples(spec, window, phi, R, 1, rng, n_hyperplanes)
    return [out["values"][0], out["section_cells"][0]]


def _rescaled_task(rng, window, spec, t):
    state = rescale_tessellation(run_mnw(window, spec, t, rng), t)
    return [state.measures.sum(), state.n_cells]


def _direct_task(rng, window, spec, t):
    state = run_mnw(window.scaled(t), spec, 1.0, rng)
    return [state.measures.sum(), state.n_cells]


# -- helpers ---------------------------------------------------------------

def _summary(x) -> dict:
    return stats.MomentAccumulator.from_samples(x).finalize()


def _limit_constant(cfg: ExperimentConfig, spec, window, phi, workers) -> tuple:
    """``(value, error, provenance)`` of the normalized compensator limit."""
    if spec.kind == "isotropic":
        zbar = phi.sphere_mean_square(cfg.dimension)
        return v_w_isotropic(cfg.dimension, volume(window), zbar) * spec.scale, 0.0, "closed form"
    R = float(cfg.options.get("limit_R", 32.0))
    reps = int(cfg.options.get("limit_replications", 200))
    rows = replicate(partial(_limit_constant_task, window=window, spec=spec,
                             functional=cfg.functional, R=R,
                             n_hyperplanes=int(cfg.options.get("hyperplanes", 200))),
                     reps, cfg.seed, f"{cfg.name}/limit", workers)
    v = rows[:, 0]
    return float(v.mean()), float(v.std(ddof=1) / sqrt(reps)), f"simulation at R={R:g}"


def _variance_check(sample_var, sample_err, ref, ref_err, rel=0.05, role="criterion"):
    combined = sqrt(sample_err ** 2 + ref_err ** 2)
    return check(abs(sample_var - ref), "<=", max(rel * abs(ref), 3 * combined), role=role,
                 relative_deviation=(sample_var - ref) / ref if ref else 0.0)


# -- experiments -----------------------------------------------------------

def exp_mean_surface(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    spec, window = cfg.make_spec(), cfg.make_window()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    x = replicate(partial(_surface_task, window=window, spec=spec, times=[cfg.t],
                          functional={"kind": "constant", "value": 1.0}),
                  cfg.replications, cfg.seed, cfg.name, workers)[:, 0]
    s = _summary(x)
    ref = cfg.t * volume(window) * spec.surface_density
    res.statistics["surface"] = s
    res.references["mean"] = reference(ref, 0.0, "exact formula")
    dev = abs(s["mean"] - ref)
    z = dev / s["stderr"] if s["stderr"] > 0 else (0.0 if dev == 0 else np.inf)
    res.tests["mean_within_3_stderr"] = check(z, "<=", 3.0)
    res.samples["surface"] = x
    return res


def exp_variance_exact(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    x = replicate(partial(_surface_task, window=window, spec=spec, times=[cfg.t],
                          functional=cfg.functional),
                  cfg.replications, cfg.seed, cfg.name, workers)[:, 0]
    s = _summary(x)
    s["variance_stderr"] = stats.variance_stderr(x)
    ref, err = variance_exact(spec, window, cfg.t, phi, cfg.make_integrator())
    res.statistics["surface"] = s
    res.references["variance"] = reference(ref, err, "quasi-Monte Carlo")
    res.tests["variance_matches_exact"] = _variance_check(s["variance"], s["variance_stderr"],
                                                          ref, err)
    res.samples["surface"] = x
    return res


def exp_martingale(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    opt = cfg.options
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    integ = cfg.make_integrator()

    # conditional means of continuations against the base value
    base_states = int(opt.get("base_states", 1000))
    conts = int(opt.get("continuations", 100))
    rows = replicate(partial(_martingale_task, window=window, spec=spec, s0=cfg.s0, t=cfg.t,
                             functional=cfg.functional, continuations=conts),
                     base_states, cfg.seed, f"{cfg.name}/conditional", workers)
    xb, yb = rows[:, 0], rows[:, 1:].mean(axis=1)
    if np.ptp(xb) == 0:
        slope, slope_err = (1.0, 0.0) if np.allclose(yb, xb) else (np.nan, np.nan)
    else:
        fit = np.polyfit(xb - xb.mean(), yb, 1, cov=True)
        slope, slope_err = float(fit[0][0]), float(sqrt(fit[1][0, 0]))
    res.statistics["conditional_mean_slope"] = {"slope": slope, "stderr": slope_err,
                                                "base_states": base_states,
                                                "continuations": conts}
    res.tests["conditional_mean_slope"] = check(abs(slope - 1.0), "<=",
                                                float(opt.get("slope_tolerance", 0.05)))
    res.samples["conditional"] = np.column_stack([xb, yb])

    # quadratic variation: Var at t against the integrated compensator
    x = replicate(partial(_surface_task, window=window, spec=spec, times=[cfg.t],
                          functional=cfg.functional),
                  cfg.replications, cfg.seed, f"{cfg.name}/variance", workers)[:, 0]
    var, var_err = float(np.var(x, ddof=1)), stats.variance_stderr(x)
    grid = np.linspace(0.0, cfg.t, int(opt.get("s_grid_points", 11)))
    comp_states = int(opt.get("compensator_states", 200))
    means, errs = [], []
    for i, s in enumerate(grid):
        c = replicate(partial(_compensator_task, window=window, spec=spec, s=float(s),
                              functional=cfg.functional,
                              n_hyperplanes=int(opt.get("hyperplanes", 50))),
                      comp_states, cfg.seed, f"{cfg.name}/compensator/{i}", workers)[:, 0]
        means.append(c.mean())
        errs.append(c.std(ddof=1) / sqrt(comp_states))
    means, errs = np.array(means), np.array(errs)
    if cfg.t > 0:
        integral = float(simpson(means, x=grid))
        # Simpson weights by differentiating the rule at unit vectors
        w = np.array([simpson(np.eye(len(grid))[k], x=grid) for k in range(len(grid))])
        integral_err = float(sqrt(np.sum((w * errs) ** 2)))
    else:
        integral, integral_err = 0.0, 0.0
    res.statistics["quadratic_variation"] = {
        "sample_variance": var, "sample_variance_stderr": var_err,
        "integrated_compensator": integral, "integrated_compensator_stderr": integral_err,
        "s_grid": grid, "compensator_means": means, "compensator_stderr": errs}
    rel = abs(var / integral - 1.0) if integral > 0 else (0.0 if var == 0 else np.inf)
    res.tests["quadratic_variation_identity"] = check(
        rel, "<=", float(opt.get("qv_tolerance", 0.05)))

    ref, ref_err = variance_exact(spec, window, cfg.t, phi, integ)
    comp = [expected_compensator(spec, window, float(s), phi, integ)[0] for s in grid]
    res.references["variance"] = reference(ref, ref_err, "quasi-Monte Carlo")
    res.references["integrated_expected_compensator"] = reference(
        float(simpson(comp, x=grid)) if cfg.t > 0 else 0.0, ref_err,
        "quasi-Monte Carlo with Simpson rule")
    res.samples["surface"] = x
    return res


def exp_increment_clt(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Increment process ``R**(-d/2) (Sigma(s) - Sigma(s0))`` on ``s0 <= s <= t``."""
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    d = cfg.dimension
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    grid = np.unique(np.array(cfg.checkpoints or np.linspace(cfg.s0, cfg.t, 5), dtype=float))
    if grid[0] != cfg.s0 or grid[-1] != cfg.t:
        raise ValueError("checkpoints must run from s0 to t")
    V, V_err, prov = _limit_constant(cfg, spec, window, phi, workers)
    res.references["limit_constant"] = reference(V, V_err, prov)
    integ = cfg.make_integrator()
    later = grid[1:]
    for R in cfg.R_list:
        tag = f"R={R:g}"
        WR = window.scaled(R)
        sig = replicate(partial(_surface_task, window=WR, spec=spec, times=grid,
                                functional=cfg.functional),
                        cfg.replications, cfg.seed, f"{cfg.name}/{tag}", workers)
        sig = sig - sig.mean(axis=0)
        inc = (sig[:, 1:] - sig[:, :1]) * R ** (-d / 2)
        res.samples[f"increments_{tag}"] = inc
        if len(later) == 0:
            res.statistics[tag] = {"degenerate": True}
            continue
        end = inc[:, -1]
        res.statistics[tag] = {"endpoint": _summary(end)}
        limit_var = increment_variance_profile(V, cfg.s0, cfg.t, d)
        ks = stats.ks_normal(end, 0.0, limit_var)
        res.tests[f"endpoint_ks_{tag}"] = check(ks["p_value"], ">", cfg.alpha,
                                                statistic=ks["statistic"],
                                                model_variance=limit_var)
        cov = stats.process_covariance_check(
            inc, lambda a, b: increment_variance_profile(V, cfg.s0, min(a, b), d), later)
        res.statistics[tag]["covariance"] = cov
        res.tests[f"covariance_{tag}"] = check(cov["max_deviation"], "<", 3.0)

        # finite-R model from exact variances of the martingale at each checkpoint
        exact_var = np.array([variance_exact(spec, WR, float(s), phi, integ)[0] for s in grid])
        fin = (exact_var - exact_var[0]) / R ** d
        lookup = dict(zip(later.tolist(), fin[1:].tolist()))
        res.references[f"finite_R_increment_variance_{tag}"] = {
            "times": later, "value": fin[1:], "provenance": "quasi-Monte Carlo"}
        ks_f = stats.ks_normal(end, 0.0, fin[-1])
        res.tests[f"endpoint_ks_finite_R_{tag}"] = check(ks_f["p_value"], ">", cfg.alpha,
                                                         role="diagnostic",
                                                         statistic=ks_f["statistic"])
        cov_f = stats.process_covariance_check(inc, lambda a, b: lookup[min(a, b)], later)
        res.tests[f"covariance_finite_R_{tag}"] = check(cov_f["max_deviation"], "<", 3.0,
                                                        role="diagnostic")
    return res


def exp_total_length_2d(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Total edge length on the log time scale ``tau(s, R)``, planar windows."""
    if cfg.dimension != 2:
        raise ValueError("total length experiment is planar")
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    grid = np.array(cfg.checkpoints or [0.0, 0.25, 0.5, 0.75, 1.0], dtype=float)
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError("checkpoints must run from 0 to 1")
    V, V_err, prov = _limit_constant(cfg, spec, window, phi, workers)
    res.references["limit_constant"] = reference(V, V_err, prov)
    integ = cfg.make_integrator()
    ratios = []
    for R in cfg.R_list:
        tag = f"R={R:g}"
        WR = window.scaled(R)
        times = np.array([tau(s, R) for s in grid])
        sig = replicate(partial(_surface_task, window=WR, spec=spec, times=times,
                                functional=cfg.functional),
                        cfg.replications, cfg.seed, f"{cfg.name}/{tag}", workers)
        norm = R * sqrt(log(R))
        L = (sig - sig.mean(axis=0)) / norm
        res.samples[f"process_{tag}"] = L
        end = L[:, -1]
        ratio = float(np.var(end, ddof=1))
        ratio_err = stats.variance_stderr(end)
        exact_end, exact_err = variance_exact(spec, WR, 1.0, phi, integ)
        exact_ratio = exact_end / norm ** 2
        ratios.append(ratio)
        share = float(np.var(L[:, 0], ddof=1) / ratio)
        res.statistics[tag] = {"normalized_variance": ratio,
                               "normalized_variance_stderr": ratio_err,
                               "correction_variance_share": share, "times": times}
        res.references[f"normalized_variance_{tag}"] = reference(
            exact_ratio, exact_err / norm ** 2, "quasi-Monte Carlo")
        ks = stats.ks_normal(end, 0.0, exact_ratio)
        res.tests[f"endpoint_ks_{tag}"] = check(
            ks["p_value"], ">", cfg.alpha, role="diagnostic", statistic=ks["statistic"],
            model="normal with exact finite-R variance")
        ks_lim = stats.ks_normal(end, 0.0, V)
        res.tests[f"endpoint_ks_limit_{tag}"] = check(
            ks_lim["p_value"], ">", cfg.alpha, role="diagnostic", statistic=ks_lim["statistic"],
            model="normal with limit variance")
        cov = stats.process_covariance_check(L, lambda a, b: V * min(a, b), grid)
        res.tests[f"covariance_{tag}"] = check(cov["max_deviation"], "<", 3.0,
                                               role="diagnostic")
    last = f"R={cfg.R_list[-1]:g}"
    res.tests[f"endpoint_ks_{last}"]["role"] = "criterion"
    steps = np.diff(ratios)
    res.tests["normalized_variance_increasing"] = check(
        float(steps.min()) if len(steps) else 0.0, ">", 0.0 if len(steps) else -1.0)
    res.tests["within_factor_of_limit"] = check(max(ratios[-1] / V, V / ratios[-1]), "<=",
                                                float(cfg.options.get("limit_factor", 1.5)))
    return res


def exp_non_gaussian(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Centred surface totals of ``Y(R, W)`` for an axis-parallel measure, ``d >= 3``.

    By scaling this has the law of ``R**-(d-1)`` times the centred total of
    ``Y(1, R W)``.
    """
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    res.metadata["normalization"] = ("statistic is the centred total of Y(R, W), equal in law "
                                     "to R^-(d-1) times the centred total of Y(1, R W)")
    Rs = np.array(cfg.R_list, dtype=float)
    sig = replicate(partial(_surface_task, window=window, spec=spec, times=Rs,
                            functional=cfg.functional),
                    cfg.replications, cfg.seed, cfg.name, workers)
    sig = sig - sig.mean(axis=0)
    res.samples["centred_totals"] = sig
    integ = cfg.make_integrator()
    variances = []
    for j, R in enumerate(Rs):
        tag = f"R={R:g}"
        s = _summary(sig[:, j])
        s["variance_stderr"] = stats.variance_stderr(sig[:, j])
        variances.append(s["variance"])
        res.statistics[tag] = s
        ref, err = variance_exact(spec, window, float(R), phi, integ)
        res.references[f"variance_{tag}"] = reference(ref, err, "quasi-Monte Carlo")
    xi_cfg = replace(integ, shell=float(cfg.options.get("xi_shell", 1e-3)),
                     n_points=int(cfg.options.get("xi_points", 2 ** 16)))
    xi, xi_err = xi_variance(spec, window, phi, xi_cfg)
    res.references["limit_variance"] = reference(xi, xi_err, "quasi-Monte Carlo")
    steps = np.diff(variances)
    res.tests["variance_increasing"] = check(float(steps.min()) if len(steps) else 0.0, ">",
                                             0.0 if len(steps) else -1.0)
    last = res.statistics[f"R={Rs[-1]:g}"]
    res.tests["variance_near_limit"] = _variance_check(last["variance"], last["variance_stderr"],
                                                       xi, xi_err, rel=0.10)
    end = sig[:, -1]
    ks = stats.ks_normal(end, float(end.mean()), float(np.var(end, ddof=1)))
    res.tests["normality_rejected"] = check(ks["p_value"], "<",
                                            float(cfg.options.get("reject_p", 1e-3)),
                                            statistic=ks["statistic"])
    tail = stats.upper_tail_excess(end, float(cfg.options.get("tail_sigmas", 3.0)))
    res.statistics["upper_tail"] = tail
    res.tests["upper_tail_heavier"] = check(tail["p_value"], "<", cfg.alpha,
                                            log_ratio=tail["log_ratio"])
    return res


def exp_scaling(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Rescaled ``Y(t, W)`` against ``Y(1, t W)`` in distribution."""
    spec, window = cfg.make_spec(), cfg.make_window()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    a = replicate(partial(_rescaled_task, window=window, spec=spec, t=cfg.t),
                  cfg.replications, cfg.seed, f"{cfg.name}/rescaled", workers)
    b = replicate(partial(_direct_task, window=window, spec=spec, t=cfg.t),
                  cfg.replications, cfg.seed, f"{cfg.name}/direct", workers)
    for k, label in enumerate(("surface", "cell_count")):
        res.statistics[label] = {"rescaled": _summary(a[:, k]), "direct": _summary(b[:, k])}
        ks = stats.ks_two_sample(a[:, k], b[:, k])
        res.tests[f"two_sample_ks_{label}"] = check(ks["p_value"], ">", cfg.alpha,
                                                    statistic=ks["statistic"])
    res.samples["rescaled"] = a
    res.samples["direct"] = b
    return res


def exp_limit_constant(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Normalized section compensator of ``Y(1, R W)`` against its isotropic limit."""
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    res = ExperimentResult(cfg.name, cfg.to_dict(), seed=cfg.seed)
    R = float(cfg.R_list[-1]) if cfg.R_list else 64.0
    rows = replicate(partial(_limit_constant_task, window=window, spec=spec,
                             functional=cfg.functional, R=R,
                             n_hyperplanes=int(cfg.options.get("hyperplanes", 200))),
                     cfg.replications, cfg.seed, cfg.name, workers)
    est, err = float(rows[:, 0].mean()), float(rows[:, 0].std(ddof=1) / sqrt(len(rows)))
    res.statistics["estimate"] = {"value": est, "stderr": err, "R": R,
                                  "mean_section_cells": float(rows[:, 1].mean())}
    ref = v_w_isotropic(cfg.dimension, volume(window), phi.sphere_mean_square(cfg.dimension))
    ref *= spec.scale
    res.references["limit_constant"] = reference(ref, 0.0, "closed form")
    finite, finite_err = expected_compensator(spec, window.scaled(R), 1.0, phi,
                                              cfg.make_integrator())
    res.references["finite_R_expectation"] = reference(finite / R ** cfg.dimension,
                                                       finite_err / R ** cfg.dimension,
                                                       "quasi-Monte Carlo")
    res.tests["relative_error"] = check(abs(est / ref - 1.0), "<=",
                                        float(cfg.options.get("tolerance", 0.05)))
    res.samples["estimates"] = rows
    return res


EXPERIMENTS = {
    "mean_surface": exp_mean_surface,
    "variance_exact": exp_variance_exact,
    "martingale": exp_martingale,
    "increment_clt": exp_increment_clt,
    "total_length_2d": exp_total_length_2d,
    "non_gaussian": exp_non_gaussian,
    "scaling": exp_scaling,
    "limit_constant": exp_limit_constant,
}

DEFAULTS = {
    "mean_surface": dict(dimension=2, t=1.0),
    "variance_exact": dict(dimension=2, measure={"kind": "axis_aligned"}, t=1.0),
    "martingale": dict(dimension=2, measure={"kind": "axis_aligned"}, s0=0.5, t=1.0),
    "increment_clt": dict(dimension=2, s0=0.5, t=1.0, R_list=[8.0, 32.0],
                          checkpoints=[0.5, 0.625, 0.75, 0.875, 1.0]),
    "total_length_2d": dict(dimension=2, R_list=[8.0, 16.0, 32.0, 64.0],
                            checkpoints=[0.0, 0.25, 0.5, 0.75, 1.0]),
    "non_gaussian": dict(dimension=3, measure={"kind": "axis_aligned"},
                         R_list=[4.0, 8.0, 16.0]),
    "scaling": dict(dimension=2, t=2.0),
    "limit_constant": dict(dimension=2, window={"kind": "ball", "size": 1.0},
                           R_list=[64.0], replications=40),
}


def default_config(name: str, **overrides) -> ExperimentConfig:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}")
    return ExperimentConfig.from_dict({"name": name, **DEFAULTS[name], **overrides})


def run_experiment(name: str, cfg: ExperimentConfig | None = None,
                   workers: int = 1) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}")
    cfg = cfg or default_config(name)
    start = time.perf_counter()
    res = EXPERIMENTS[name](cfg, workers)
    res.wall_clock_seconds = time.perf_counter() - start
    if cfg.output:
        res.save(cfg.output)
    return res
