"""Facet functionals ``phi(f) = vol_{d-1}(f) * zeta(normal of f)`` and
hyperplane sections of tessellations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .geometry import ConvexPolytope, Hyperplane, intersect_with_hyperplane, plane_basis, volume
from .measures import HyperplaneMeasureSpec, capacity, sample_hitting_many
from .mnw import Tessellation


@dataclass(frozen=True)
class FaceFunctional:
    """Direction weight ``zeta``, evaluated on arrays of unit normals.

    ``zeta`` must be even (``zeta(-u) == zeta(u)``) and bounded by ``bound``;
    the bound is checked on every evaluation.
    """

    name: str
    zeta: Callable[[np.ndarray], np.ndarray]
    bound: float
    is_unit: bool = False

    def __call__(self, normals) -> np.ndarray:
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        values = np.asarray(self.zeta(normals), dtype=float)
        if values.size and np.max(np.abs(values)) > self.bound * (1 + 1e-12):
            raise ValueError(f"functional {self.name!r} exceeds its bound {self.bound}")
        return values

    @classmethod
    def constant(cls, value: float = 1.0) -> "FaceFunctional":
        value = float(value)
        return cls(f"constant({value:g})", lambda u: np.full(len(u), value), abs(value),
                   is_unit=value == 1.0)

    @classmethod
    def indicator(cls, directions, tol: float = 1e-9) -> "FaceFunctional":
        """1 on normals parallel (up to sign) to one of ``directions``."""
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]

        def zeta(u):
            return (np.max(np.abs(u @ dirs.T), axis=1) >= 1.0 - tol).astype(float)

        return cls("indicator", zeta, 1.0)

    @classmethod
    def tabulated(cls, directions, values) -> "FaceFunctional":
        """Value of the nearest tabulated direction, ignoring orientation."""
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
        vals = np.asarray(values, dtype=float)
        if len(vals) != len(dirs):
            raise ValueError("one value per tabulated direction")

        def zeta(u):
            return vals[np.argmax(np.abs(u @ dirs.T), axis=1)]

        return cls("tabulated", zeta, float(np.max(np.abs(vals))))

    def sphere_mean_square(self, d: int, n: int = 20000) -> float:
        """Mean of ``zeta**2`` under the uniform law on the unit sphere."""
        if self.name.startswith("constant"):
            return float(self(np.eye(d)[:1])[0] ** 2)
        return float(np.mean(self(_sphere_grid(d, n)) ** 2))


def _sphere_grid(d: int, n: int) -> np.ndarray:
    if d == 2:
        ang = np.pi * (np.arange(n) + 0.5) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        # Fibonacci lattice
        k = np.arange(n) + 0.5
        z = 1.0 - 2.0 * k / n
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5 ** 0.5) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError("sphere averages supported for d = 2, 3")


def sigma_phi(state: Tessellation, phi: FaceFunctional) -> float:
    if state.n_facets == 0:
        return 0.0
    return float(np.dot(state.measures, phi(state.normals)))


def sigma_phi_path(state: Tessellation, phi: FaceFunctional, times) -> np.ndarray:
    """``sigma_phi`` of the coupled earlier states at each time in ``times``."""
    if state.n_facets == 0:
        return np.zeros(len(times))
    csum = np.concatenate([[0.0], np.cumsum(state.measures * phi(state.normals))])
    return csum[np.searchsorted(state.births, np.asarray(times, dtype=float), side="right")]


def exact_mean(state: Tessellation, phi: FaceFunctional) -> float:
    """Mean of the total facet volume; only known for ``zeta == 1``."""
    if not phi.is_unit:
        raise ValueError("no exact mean available")
    return state.horizon * volume(state.window) * state.spec.surface_density


def centred_sigma(state: Tessellation, phi: FaceFunctional, mean_source) -> float:
    """``sigma_phi`` minus ``mean_source``, which is a number or ``"exact"``."""
    if isinstance(mean_source, str):
        if mean_source != "exact":
            raise ValueError(f"unknown mean source {mean_source!r}")
        mean_source = exact_mean(state, phi)
    return sigma_phi(state, phi) - float(mean_source)


def centre_batch(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values - values.mean(axis=0)


def max_facet_value(state: Tessellation, phi: FaceFunctional) -> float:
    if state.n_facets == 0:
        return 0.0
    return float(np.max(state.measures * phi(state.normals)))


def section_tessellation(state: Tessellation, H: Hyperplane) -> list:
    """Cells of the tessellation induced on ``H`` inside the window."""
    if intersect_with_hyperplane(state.window, H) is None:
        return []
    out = []
    for cell in state.cells:
        piece = intersect_with_hyperplane(cell, H)
        if piece is not None and volume(piece) > 0:
            out.append(piece)
    return out


def section_power_sums(state: Tessellation, normals, offsets) -> np.ndarray:
    """For each hyperplane: section cell count, total and squared volumes.

    Walks the split tree instead of the leaf list, so the cost scales with
    the number of cells actually met.
    """
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    d = state.dimension
    W = state.window
    if state.engine == "box" and d > 3:
        return _box_section_sums(state, normals, offsets)
    a, b = W.halfspaces()
    split_of = state.split_of()
    f_normals = np.ascontiguousarray(state.normals).reshape(-1, d)
    if d == 2:
        return _kernels.section_line_sums(normals, offsets, a, b, split_of, f_normals,
                                          state.offsets)
    if d == 3:
        basis = [plane_basis(n) for n in normals]
        e1 = np.array([e[0] for e in basis]).reshape(-1, 3)
        e2 = np.array([e[1] for e in basis]).reshape(-1, 3)
        bound = float(np.max(np.linalg.norm(W.vertices, axis=1)))
        tol = 1e-12 * max(1.0, bound)
        return _kernels.section_plane_sums(normals, offsets, e1, e2, a, b, bound, split_of,
                                           f_normals, state.offsets, tol)
    raise ValueError("sections in d > 3 need the box engine")


def _box_section_sums(state, normals, offsets):
    lo, hi = state._leaf_geometry
    out = np.zeros((len(normals), 3))
    for h, (n, c) in enumerate(zip(normals, offsets)):
        j = int(np.argmax(np.abs(n)))
        if abs(abs(n[j]) - 1.0) > 1e-12:
            raise ValueError("box sections need axis-parallel hyperplanes")
        c = c * n[j]
        hit = (lo[:, j] <= c) & (c < hi[:, j])
        ext = np.delete(hi[hit] - lo[hit], j, axis=1)
        vol = np.prod(ext, axis=1)
        out[h] = (len(vol), vol.sum(), np.dot(vol, vol))
    return out


def estimate_a_phi2(state: Tessellation, spec: HyperplaneMeasureSpec, phi: FaceFunctional,
                    n_samples: int, rng):
    """Monte Carlo value of the section compensator for ``phi**2``.

    Returns ``(estimate, std_error)`` from ``n_samples`` hitting hyperplanes.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    cap = capacity(spec, state.window)
    if cap <= 0:
        raise ValueError("zero window capacity")
    normals, offsets = sample_hitting_many(spec, state.window, n_samples, rng)
    vals = cap * phi(normals) ** 2 * section_power_sums(state, normals, offsets)[:, 2]
    err = float(vals.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else float("nan")
    return float(vals.mean()), err
