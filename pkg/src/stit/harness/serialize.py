"""JSON round trip for tessellation states."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..geometry import ConvexPolytope, Hyperplane
from ..measures import HyperplaneMeasureSpec
from ..mnw import Tessellation

FORMAT = "stit-tessellation"
VERSION = 1


def polytope_to_dict(P: ConvexPolytope) -> dict:
    out = {"vertices": P.vertices.tolist(), "intrinsic_dimension": P.intrinsic_dimension}
    if P.faces is not None:
        out["faces"] = [list(f) for f in P.faces]
    if P.bounds is not None and P.intrinsic_dimension == P.ambient_dimension:
        out["bounds"] = [P.bounds[0].tolist(), P.bounds[1].tolist()]
    if P.carrier is not None:
        out["carrier"] = {"normal": P.carrier.normal.tolist(), "offset": P.carrier.offset}
    return out


def polytope_from_dict(data: dict) -> ConvexPolytope:
    if "bounds" in data:
        return ConvexPolytope.box(*data["bounds"])
    carrier = data.get("carrier")
    carrier = Hyperplane(np.asarray(carrier["normal"]), carrier["offset"]) if carrier else None
    faces = tuple(tuple(f) for f in data["faces"]) if "faces" in data else None
    return ConvexPolytope(np.asarray(data["vertices"], dtype=float),
                          int(data["intrinsic_dimension"]), faces, carrier)


def tessellation_to_dict(state: Tessellation) -> dict:
    return {
        "format": FORMAT, "version": VERSION, "dimension": state.dimension,
        "horizon": state.horizon, "engine": state.engine, "redraws": state.redraws,
        "measure": state.spec.to_dict(), "window": polytope_to_dict(state.window),
        "maximal_polytopes": [
            {"split_cell": int(state.split_cells[k]), "birth_time": float(state.births[k]),
             "normal": state.normals[k].tolist(), "offset": float(state.offsets[k]),
             "measure": float(state.measures[k]),
             "geometry": polytope_to_dict(state.facet_polytope(k))}
            for k in range(state.n_facets)],
        "cells": [{"id": int(i), "death_time": float(t), "geometry": polytope_to_dict(P)}
                  for i, t, P in zip(state.leaf_ids, state.leaf_deaths, state.cells)],
    }


def tessellation_from_dict(data: dict) -> Tessellation:
    """Rebuild a state; the result always uses the general engine layout."""
    if data.get("format") != FORMAT or data.get("version") != VERSION:
        raise ValueError("not a supported tessellation document")
    d = int(data["dimension"])
    recs = data["maximal_polytopes"]
    facets = {
        "cell": np.array([r["split_cell"] for r in recs], dtype=np.int64),
        "birth": np.array([r["birth_time"] for r in recs], dtype=float),
        "normal": np.array([r["normal"] for r in recs], dtype=float).reshape(-1, d),
        "offset": np.array([r["offset"] for r in recs], dtype=float),
        "measure": np.array([r["measure"] for r in recs], dtype=float),
        "geometry": [polytope_from_dict(r["geometry"]) for r in recs],
    }
    cells = data["cells"]
    leaves = {
        "id": np.array([c["id"] for c in cells], dtype=np.int64),
        "death": np.array([c["death_time"] for c in cells], dtype=float),
        "geometry": [polytope_from_dict(c["geometry"]) for c in cells],
    }
    return Tessellation(polytope_from_dict(data["window"]),
                        HyperplaneMeasureSpec.from_dict(data["measure"]), data["horizon"],
                        "python", facets, leaves, None, data.get("redraws", 0))


def save_tessellation(state: Tessellation, path) -> None:
    Path(path).write_text(json.dumps(tessellation_to_dict(state)))


def load_tessellation(path) -> Tessellation:
    return tessellation_from_dict(json.loads(Path(path).read_text()))
