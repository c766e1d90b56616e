"""Command line entry point: ``stit simulate|render|exact|experiment``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np
import tomli

from .exact import tau, v_w_empirical, v_w_isotropic, variance_exact, xi_variance
from .geometry import volume
from .harness.config import ExperimentConfig, make_spec, make_window
from .harness.experiments import EXPERIMENTS, default_config, run_experiment
from .harness.render import render
from .harness.serialize import load_tessellation, save_tessellation
from .mnw import run_mnw


def _simulate(args) -> int:
    spec = make_spec({"kind": args.measure}, args.dim)
    window = make_window({"kind": args.window, "size": args.size}, args.dim)
    state = run_mnw(window, spec, args.t, np.random.default_rng(args.seed))
    save_tessellation(state, args.out)
    print(json.dumps({"facets": state.n_facets, "cells": state.n_cells,
                      "total_surface": float(state.measures.sum()), "out": args.out}))
    return 0


def _render(args) -> int:
    state = load_tessellation(args.input)
    out = args.out or args.input.rsplit(".", 1)[0] + "." + args.format
    kwargs = {"color_by_birth": args.color} if args.format == "svg" else {}
    render(state, args.format, out, **kwargs)
    print(out)
    return 0


def _exact(args) -> int:
    data = {}
    if args.config:
        with open(args.config, "rb") as fh:
            data = tomli.load(fh)
    data.setdefault("name", "exact")
    cfg = ExperimentConfig.from_dict(data)
    spec, window, phi = cfg.make_spec(), cfg.make_window(), cfg.make_functional()
    integ = cfg.make_integrator()
    if args.quantity == "variance":
        value, err = variance_exact(spec, window, cfg.t, phi, integ)
        out = {"variance": value, "error": err, "t": cfg.t}
    elif args.quantity == "xi":
        if integ.shell == 0:
            integ = replace(integ, shell=1e-3)
        value, err = xi_variance(spec, window, phi, integ)
        out = {"xi_variance": value, "error": err}
    elif args.quantity == "vw":
        if spec.kind == "isotropic":
            value = v_w_isotropic(cfg.dimension, volume(window),
                                  phi.sphere_mean_square(cfg.dimension)) * spec.scale
            out = {"limit_constant": value, "provenance": "closed form"}
        else:
            R = cfg.R_list[-1] if cfg.R_list else 32.0
            value, err = v_w_empirical(spec, window, phi, R, cfg.replications,
                                       np.random.default_rng(cfg.seed))
            out = {"limit_constant": value, "error": err, "provenance": f"simulation at R={R:g}"}
    else:
        grid = cfg.checkpoints or [0.0, 0.5, 1.0]
        out = {f"R={R:g}": {f"s={s:g}": tau(s, R) for s in grid} for R in (cfg.R_list or [64.0])}
    print(json.dumps(out, indent=2))
    return 0


def _experiment(args) -> int:
    cfg = ExperimentConfig.from_toml(args.config) if args.config else default_config(args.name)
    if cfg.name != args.name:
        cfg = cfg.with_updates(name=args.name)
    if args.out:
        cfg = cfg.with_updates(output=args.out)
    res = run_experiment(args.name, cfg, workers=args.workers)
    for key, t in res.tests.items():
        print(f"{'PASS' if t['passed'] else 'FAIL'} [{t['role']}] {key}: "
              f"{t['value']:.6g} {t['op']} {t['threshold']:.6g}")
    print(f"overall: {'PASS' if res.passed else 'FAIL'} ({res.wall_clock_seconds:.1f} s)")
    return 0 if res.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one tessellation and save it as JSON")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--measure", choices=["isotropic", "axis_aligned"], default="isotropic")
    s.add_argument("--window", choices=["box", "ball"], default="box")
    s.add_argument("--size", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_simulate)

    r = sub.add_parser("render", help="draw a saved tessellation")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--format", choices=["svg", "obj"], default="svg")
    r.add_argument("--out")
    r.add_argument("--color", action="store_true", help="colour segments by birth time")
    r.set_defaults(func=_render)

    e = sub.add_parser("exact", help="reference values as JSON")
    e.add_argument("--quantity", choices=["variance", "xi", "vw", "tau"], required=True)
    e.add_argument("--config")
    e.set_defaults(func=_exact)

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    x.add_argument("name", choices=sorted(EXPERIMENTS))
    x.add_argument("--config")
    x.add_argument("--out")
    x.add_argument("--workers", type=int, default=1)
    x.set_defaults(func=_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
