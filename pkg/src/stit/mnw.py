"""Continuous-time recursive cell division (MNW construction).

Every live cell ``c`` carries an exponential lifetime with rate equal to the
capacity of ``c``; when it dies it is cut by a hyperplane drawn from the
normalized hitting law and both halves start fresh clocks.  Three engines
share one event semantics:

``polygon``  compiled, planar windows, any measure
``box``      compiled, box windows under an axis-parallel measure, any d
``python``   pure Python on top of :mod:`stit.geometry`, d = 2 and 3

Cell ids encode the split tree: the window is cell 0 and facet ``k`` divides
its cell into ``2k + 1`` (the side the normal points to) and ``2k + 2``.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .geometry import (TOL, ConvexPolytope, Hyperplane, diameter, intersect_with_hyperplane,
                       split, volume)
from .measures import HyperplaneMeasureSpec, capacity, sample_hitting


@dataclass(frozen=True)
class MaxPolytopeRecord:
    facet: ConvexPolytope
    birth_time: float
    normal: np.ndarray
    measure: float


class Tessellation:
    """State of the division process in a window at time ``horizon``.

    Facet data live in parallel arrays ordered by birth time; leaf cells are
    kept in the engine's raw layout and only turned into
    :class:`ConvexPolytope` objects on demand.
    """

    def __init__(self, window, spec, horizon, engine, facets, leaves, seed_trace=None,
                 redraws=0):
        self.window = window
        self.spec = spec
        self.horizon = float(horizon)
        self.engine = engine
        self.split_cells = facets["cell"]
        self.births = facets["birth"]
        self.normals = facets["normal"]
        self.offsets = facets["offset"]
        self.measures = facets["measure"]
        self._facet_geometry = facets["geometry"]
        self.leaf_ids = leaves["id"]
        self.leaf_deaths = leaves["death"]
        self._leaf_geometry = leaves["geometry"]
        self.seed_trace = seed_trace
        self.redraws = int(redraws)
        self._cells: Optional[list] = None
        self._records: Optional[list] = None

    @property
    def dimension(self) -> int:
        return self.window.ambient_dimension

    @property
    def n_facets(self) -> int:
        return len(self.births)

    @property
    def n_cells(self) -> int:
        return len(self.leaf_ids)

    @property
    def pending(self) -> list:
        """Scheduled ``(death_time, cell_id)`` pairs of the live cells."""
        return sorted(zip(self.leaf_deaths.tolist(), self.leaf_ids.tolist()))

    @property
    def cells(self) -> list:
        if self._cells is None:
            self._cells = [_leaf_polytope(self.engine, self._leaf_geometry, i)
                           for i in range(self.n_cells)]
        return self._cells

    @property
    def maximal_polytopes(self) -> list:
        if self._records is None:
            self._records = [
                MaxPolytopeRecord(self.facet_polytope(k), float(self.births[k]),
                                  self.normals[k], float(self.measures[k]))
                for k in range(self.n_facets)]
        return self._records

    def facet_polytope(self, k: int) -> ConvexPolytope:
        H = Hyperplane(self.normals[k], self.offsets[k])
        g = self._facet_geometry
        if self.engine == "polygon":
            return ConvexPolytope.segment(g[k, 0], g[k, 1], carrier=H)
        if self.engine == "box":
            return intersect_with_hyperplane(ConvexPolytope.box(g[0][k], g[1][k]), H)
        return g[k]

    def split_of(self) -> np.ndarray:
        """Facet index splitting each cell id, -1 for live cells."""
        out = np.full(2 * self.n_facets + 1, -1, dtype=np.int64)
        out[self.split_cells] = np.arange(self.n_facets)
        return out


# engines ----------------------------------------------------------------------

def _engine_for(window: ConvexPolytope, spec: HyperplaneMeasureSpec, engine: str) -> str:
    if engine not in ("auto", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    if window.is_box and spec.is_axis_parallel and (engine == "auto" or window.ambient_dimension > 3):
        return "box"
    if engine == "auto" and window.ambient_dimension == 2:
        return "polygon"
    if window.ambient_dimension > 3:
        raise ValueError("d > 3 requires a box window and an axis-parallel measure")
    return "python"


def _tolerance(window: ConvexPolytope) -> float:
    return TOL * max(1.0, diameter(window))


def _run_engine(engine, window, spec, leaves, horizon, facet_base, rng):
    tol = _tolerance(window)
    ids, deaths, geom = leaves["id"], leaves["death"], leaves["geometry"]
    if engine == "polygon":
        verts, starts = geom
        iso = spec.kind == "isotropic"
        dirs = np.zeros((1, 2)) if iso else spec.directions
        weights = np.ones(1) if iso else spec.weights
        out = _kernels.polygon_mnw(verts, starts[:-1], np.diff(starts), ids, deaths,
                                   float(horizon), facet_base, iso, dirs, weights,
                                   float(spec.scale), tol, rng)
        cell, birth, normal, offset, ends, l_ids, l_deaths, l_verts, l_starts, redraws = out
        measure = np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)
        facets = dict(cell=cell, birth=birth, normal=normal, offset=offset,
                      measure=measure, geometry=ends)
        return facets, dict(id=l_ids, death=l_deaths, geometry=(l_verts, l_starts)), redraws
    if engine == "box":
        lo, hi = geom
        out = _kernels.box_mnw(lo, hi, ids, deaths, float(horizon), facet_base,
                               spec.axis_rates(), tol, rng)
        cell, birth, axis, offset, f_lo, f_hi, l_ids, l_deaths, l_lo, l_hi, redraws = out
        d = lo.shape[1]
        ext = f_hi - f_lo
        ext[np.arange(len(axis)), axis] = 1.0
        facets = dict(cell=cell, birth=birth, normal=np.eye(d)[axis], offset=offset,
                      measure=np.prod(ext, axis=1), geometry=(f_lo, f_hi))
        return facets, dict(id=l_ids, death=l_deaths, geometry=(l_lo, l_hi)), redraws
    return _python_engine(spec, leaves, horizon, facet_base, rng, tol)


def _python_engine(spec, leaves, horizon, facet_base, rng, tol):
    heap = [(float(t), int(i), P) for t, i, P in zip(leaves["death"], leaves["id"],
                                                      leaves["geometry"])]
    heapq.heapify(heap)
    rows = []
    redraws = 0
    while heap and heap[0][0] <= horizon:
        t, cid, P = heapq.heappop(heap)
        while True:
            H = sample_hitting(spec, P, rng)
            try:
                plus, minus, face = split(P, H, tol)
                break
            except ValueError:
                redraws += 1
        k = facet_base + len(rows)
        rows.append((cid, t, H.normal, H.offset, volume(face), face))
        for child_id, child in ((2 * k + 1, plus), (2 * k + 2, minus)):
            heapq.heappush(heap, (t + rng.exponential() / capacity(spec, child), child_id, child))
    d = spec.dimension
    heap.sort(key=lambda item: item[1])
    facets = dict(
        cell=np.array([r[0] for r in rows], dtype=np.int64),
        birth=np.array([r[1] for r in rows], dtype=float),
        normal=np.array([r[2] for r in rows], dtype=float).reshape(-1, d),
        offset=np.array([r[3] for r in rows], dtype=float),
        measure=np.array([r[4] for r in rows], dtype=float),
        geometry=[r[5] for r in rows])
    out_leaves = dict(id=np.array([h[1] for h in heap], dtype=np.int64),
                      death=np.array([h[0] for h in heap], dtype=float),
                      geometry=[h[2] for h in heap])
    return facets, out_leaves, redraws


def _window_leaves(engine, window, death):
    ids = np.zeros(1, dtype=np.int64)
    deaths = np.array([death], dtype=float)
    if engine == "polygon":
        v = np.ascontiguousarray(window.vertices, dtype=float)
        geom = (v, np.array([0, len(v)], dtype=np.int64))
    elif engine == "box":
        geom = (window.bounds[0][None, :].astype(float), window.bounds[1][None, :].astype(float))
    else:
        geom = [window]
    return dict(id=ids, death=deaths, geometry=geom)


def _leaf_polytope(engine, geom, i) -> ConvexPolytope:
    if engine == "polygon":
        verts, starts = geom
        return ConvexPolytope(verts[starts[i]:starts[i + 1]].copy(), 2)
    if engine == "box":
        return ConvexPolytope.box(geom[0][i], geom[1][i])
    return geom[i]


def _concat_geometry(engine, a, b):
    if engine == "polygon":
        return np.concatenate([a, b])
    if engine == "box":
        return (np.concatenate([a[0], b[0]]), np.concatenate([a[1], b[1]]))
    return list(a) + list(b)


# public operations ------------------------------------------------------------

def run_mnw(window: ConvexPolytope, spec: HyperplaneMeasureSpec, horizon: float, rng,
            engine: str = "auto") -> Tessellation:
    """Simulate the division process in ``window`` up to time ``horizon``."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if window.intrinsic_dimension != window.ambient_dimension or volume(window) <= 0:
        raise ValueError("window must have interior points")
    rate = capacity(spec, window)
    if not np.isfinite(rate) or rate <= 0:
        raise ValueError("window capacity must be finite and positive")
    kind = _engine_for(window, spec, engine)
    trace = rng.bit_generator.state
    leaves = _window_leaves(kind, window, rng.exponential() / rate)
    facets, leaves, redraws = _run_engine(kind, window, spec, leaves, horizon, 0, rng)
    return Tessellation(window, spec, horizon, kind, facets, leaves, trace, redraws)


def continue_mnw(state: Tessellation, new_horizon: float, rng) -> Tessellation:
    """Resume ``state`` from its scheduled deaths up to ``new_horizon``."""
    if new_horizon < state.horizon:
        raise ValueError("time reversal")
    if new_horizon == state.horizon:
        return state
    leaves = dict(id=state.leaf_ids, death=state.leaf_deaths, geometry=state._leaf_geometry)
    facets, leaves, redraws = _run_engine(state.engine, state.window, state.spec, leaves,
                                          new_horizon, state.n_facets, rng)
    merged = dict(
        cell=np.concatenate([state.split_cells, facets["cell"]]),
        birth=np.concatenate([state.births, facets["birth"]]),
        normal=np.concatenate([state.normals, facets["normal"]]),
        offset=np.concatenate([state.offsets, facets["offset"]]),
        measure=np.concatenate([state.measures, facets["measure"]]),
        geometry=_concat_geometry(state.engine, state._facet_geometry, facets["geometry"]))
    return Tessellation(state.window, state.spec, new_horizon, state.engine, merged, leaves,
                        state.seed_trace, state.redraws + redraws)


def run_with_checkpoints(window: ConvexPolytope, spec: HyperplaneMeasureSpec, times, rng,
                         engine: str = "auto") -> list:
    """Snapshots of one trajectory at each of the ascending ``times``."""
    times = [float(t) for t in times]
    if not times:
        return []
    if any(b < a for a, b in zip(times, times[1:])) or times[0] < 0:
        raise ValueError("unsorted times")
    snaps = [run_mnw(window, spec, times[0], rng, engine)]
    for t in times[1:]:
        snaps.append(continue_mnw(snaps[-1], t, rng))
    return snaps


def rescale_tessellation(state: Tessellation, factor: float) -> Tessellation:
    """Scale all geometry by ``factor``; birth times are unchanged."""
    if not factor > 0:
        raise ValueError("factor must be positive")
    d = state.dimension
    g = state._facet_geometry
    l = state._leaf_geometry
    if state.engine == "polygon":
        fg = g * factor
        lg = (l[0] * factor, l[1])
    elif state.engine == "box":
        fg = (g[0] * factor, g[1] * factor)
        lg = (l[0] * factor, l[1] * factor)
    else:
        fg = [P.scaled(factor) for P in g]
        lg = [P.scaled(factor) for P in l]
    facets = dict(cell=state.split_cells, birth=state.births, normal=state.normals,
                  offset=state.offsets * factor, measure=state.measures * factor ** (d - 1),
                  geometry=fg)
    leaves = dict(id=state.leaf_ids, death=state.leaf_deaths, geometry=lg)
    return Tessellation(state.window.scaled(factor), state.spec, state.horizon, state.engine,
                        facets, leaves, state.seed_trace, state.redraws)


def surface_totals(window: ConvexPolytope, spec: HyperplaneMeasureSpec, times, rng,
                   weights=None) -> np.ndarray:
    """Total facet (d-1)-volume at each ascending time along one trajectory.

    ``weights`` optionally maps facet normals to per-facet multipliers.
    Uses the allocation-light box kernel when it applies.
    """
    times = np.asarray(times, dtype=float)
    if window.is_box and spec.is_axis_parallel and weights is None:
        return _kernels.box_surface_totals(window.bounds[0].astype(float),
                                           window.bounds[1].astype(float),
                                           spec.axis_rates(), times, rng)
    state = run_mnw(window, spec, float(times[-1]), rng)
    m = state.measures if weights is None else state.measures * weights(state.normals)
    csum = np.concatenate([[0.0], np.cumsum(m)])
    return csum[np.searchsorted(state.births, times, side="right")]
