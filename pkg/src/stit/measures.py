"""Translation-invariant hyperplane measures.

A measure is stored as ``scale * sigma(du) dr`` where ``r`` runs over the whole
real line and ``sigma`` is a probability distribution on unsigned unit
directions.  With this convention the Poisson hyperplane process (and the
STIT tessellation) driven by ``t * Lambda`` has surface density ``t * scale``,
so the isotropic measure with ``scale = 1`` has unit surface density.  The
capacity of a convex body ``K`` is ``scale * E_sigma[width(K, u)]``.

The axis-parallel measure (one unit-rate family of hyperplanes orthogonal to
each coordinate axis) is the discrete case with weights ``1/d`` and
``scale = d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi, sqrt
from typing import Optional

import numpy as np

from .geometry import ConvexPolytope, Hyperplane, diameter, surface_area

KINDS = ("isotropic", "axis_aligned", "discrete_directions")


@dataclass(frozen=True, eq=False)
class HyperplaneMeasureSpec:
    dimension: int
    kind: str
    directions: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "isotropic":
            return
        u = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if u.shape[1] != self.dimension or len(u) != len(w):
            raise ValueError("directions and weights do not match the dimension")
        u = u / np.linalg.norm(u, axis=1)[:, None]
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if np.linalg.matrix_rank(u) < self.dimension:
            raise ValueError("degenerate measure: directions do not span the space")
        object.__setattr__(self, "directions", u)
        object.__setattr__(self, "weights", w)

    @classmethod
    def isotropic(cls, d: int, scale: float = 1.0) -> "HyperplaneMeasureSpec":
        return cls(d, "isotropic", scale=scale)

    @classmethod
    def axis_aligned(cls, d: int) -> "HyperplaneMeasureSpec":
        return cls(d, "axis_aligned", np.eye(d), np.full(d, 1.0 / d), float(d))

    @classmethod
    def discrete(cls, directions, weights, scale: float = 1.0) -> "HyperplaneMeasureSpec":
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        return cls(u.shape[1], "discrete_directions", u, weights, scale)

    @property
    def is_discrete(self) -> bool:
        return self.kind != "isotropic"

    @property
    def is_axis_parallel(self) -> bool:
        """True when every direction is a coordinate axis."""
        if not self.is_discrete:
            return False
        return bool(np.all(np.isclose(np.abs(self.directions).max(axis=1), 1.0, atol=1e-12)))

    @property
    def surface_density(self) -> float:
        """Mean facet (d-1)-volume per unit volume born per unit time."""
        return self.scale

    def axis_rates(self) -> np.ndarray:
        """Per-axis hyperplane rates for an axis-parallel measure."""
        if not self.is_axis_parallel:
            raise ValueError("measure is not axis-parallel")
        rates = np.zeros(self.dimension)
        for u, w in zip(self.directions, self.weights):
            rates[int(np.argmax(np.abs(u)))] += self.scale * w
        return rates

    def unit_segment_capacity(self, u) -> np.ndarray:
        """Capacity of unit segments with directions ``u`` (shape (..., d))."""
        u = np.asarray(u, dtype=float)
        if self.kind == "isotropic":
            norm = np.linalg.norm(u, axis=-1)
            return self.scale * _mean_abs_cos(self.dimension) * norm / np.where(norm > 0, norm, 1.0)
        return self.scale * np.abs(u @ self.directions.T) @ self.weights

    def to_dict(self) -> dict:
        out = {"dimension": self.dimension, "kind": self.kind, "scale": self.scale}
        if self.is_discrete:
            out["directions"] = self.directions.tolist()
            out["weights"] = self.weights.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "HyperplaneMeasureSpec":
        kind = data["kind"]
        d = int(data["dimension"])
        if kind == "isotropic":
            return cls.isotropic(d, float(data.get("scale", 1.0)))
        if kind == "axis_aligned":
            return cls.axis_aligned(d)
        return cls(d, kind, data["directions"], data["weights"], float(data.get("scale", 1.0)))


def _mean_abs_cos(d: int) -> float:
    """E|<u, e_1>| for u uniform on the unit sphere of R^d."""
    return gamma(d / 2.0) / (sqrt(pi) * gamma((d + 1) / 2.0))


def mean_width(P: ConvexPolytope) -> float:
    """Mean width of ``P`` over uniformly distributed directions."""
    d = P.ambient_dimension
    k = P.intrinsic_dimension
    v = P.vertices
    if len(v) < 2 or k == 0:
        return 0.0
    if P.bounds is not None:
        return float(np.sum(P.bounds[1] - P.bounds[0])) * _mean_abs_cos(d)
    if k == 1:
        return float(np.linalg.norm(v[1] - v[0])) * _mean_abs_cos(d)
    if d == 2:
        return surface_area(P) / pi
    if d == 3:
        if k == 2:
            perimeter = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum()
            return float(perimeter) / 4.0
        return _mean_width_solid(P)
    raise ValueError("mean width supported for d = 2, 3 and boxes")


def _mean_width_solid(P: ConvexPolytope) -> float:
    # sum over edges of length times exterior dihedral angle, over 4 pi
    v = P.vertices
    normals = []
    edge_faces: dict = {}
    for k, f in enumerate(P.faces):
        pts = v[list(f)]
        n = np.cross(pts, np.roll(pts, -1, axis=0)).sum(axis=0)
        normals.append(n / np.linalg.norm(n))
        for a, b in zip(f, f[1:] + f[:1]):
            edge_faces.setdefault((min(a, b), max(a, b)), []).append(k)
    total = 0.0
    for (a, b), fs in edge_faces.items():
        if len(fs) != 2:
            continue
        c = float(np.clip(np.dot(normals[fs[0]], normals[fs[1]]), -1.0, 1.0))
        total += np.linalg.norm(v[a] - v[b]) * np.arccos(c)
    return total / (4.0 * pi)


def capacity(spec: HyperplaneMeasureSpec, P: ConvexPolytope) -> float:
    """Measure of the set of hyperplanes hitting ``P``."""
    if P.ambient_dimension != spec.dimension:
        raise ValueError("dimension mismatch between measure and polytope")
    if spec.kind == "isotropic":
        return spec.scale * mean_width(P)
    proj = P.vertices @ spec.directions.T
    return spec.scale * float((proj.max(axis=0) - proj.min(axis=0)) @ spec.weights)


def segment_capacity(spec: HyperplaneMeasureSpec, x, y):
    """Capacity of the closed segment ``[x, y]``; vectorized over leading axes."""
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if spec.kind == "isotropic":
        return spec.scale * _mean_abs_cos(spec.dimension) * np.linalg.norm(diff, axis=-1)
    return spec.scale * (np.abs(diff @ spec.directions.T) @ spec.weights)


def sample_hitting(spec: HyperplaneMeasureSpec, P: ConvexPolytope, rng) -> Hyperplane:
    """One hyperplane from the normalized restriction of ``spec`` to ``[P]``."""
    normals, offsets = sample_hitting_many(spec, P, 1, rng)
    return Hyperplane(normals[0], offsets[0])


def sample_hitting_many(spec: HyperplaneMeasureSpec, P: ConvexPolytope, n: int, rng):
    """``n`` independent hitting hyperplanes as ``(normals, offsets)`` arrays."""
    if capacity(spec, P) <= 0:
        raise ValueError("cell cannot be hit")
    v = P.vertices
    if spec.is_discrete:
        proj = v @ spec.directions.T
        lo, hi = proj.min(axis=0), proj.max(axis=0)
        p = spec.weights * (hi - lo)
        j = rng.choice(len(p), size=n, p=p / p.sum())
        offsets = lo[j] + rng.random(n) * (hi - lo)[j]
        return spec.directions[j].copy(), offsets
    if spec.dimension == 2:
        return _sample_isotropic_planar(P, n, rng)
    return _sample_isotropic_rejection(P, n, rng)


def _sample_isotropic_planar(P: ConvexPolytope, n: int, rng):
    # A line hitting a convex polygon crosses exactly two boundary edges, so
    # picking an edge proportional to its length and then a line hitting that
    # edge yields the normalized isotropic law on [P] without rejection.
    v = P.vertices
    if P.intrinsic_dimension == 1:
        starts, ends = v[:1], v[1:2]
    else:
        starts, ends = v, np.roll(v, -1, axis=0)
    edge = ends - starts
    lengths = np.linalg.norm(edge, axis=1)
    cum = np.cumsum(lengths)
    k = np.minimum(np.searchsorted(cum, rng.random(n) * cum[-1], side="right"), len(cum) - 1)
    point = starts[k] + rng.random(n)[:, None] * edge[k]
    beta = np.arctan2(edge[k, 1], edge[k, 0])
    theta = beta + np.arcsin(2.0 * rng.random(n) - 1.0)
    normals = np.column_stack([np.cos(theta), np.sin(theta)])
    return normals, np.einsum("ij,ij->i", point, normals)


def _sample_isotropic_rejection(P: ConvexPolytope, n: int, rng):
    # P contains a segment of length diam(P), so the acceptance rate is at
    # least E|<u, e_1>| (1/2 for d = 3)
    v = P.vertices
    d = v.shape[1]
    bound = diameter(P)
    normals = np.empty((0, d))
    lows = np.empty(0)
    widths = np.empty(0)
    while len(normals) < n:
        m = 2 * (n - len(normals)) + 8
        u = rng.standard_normal((m, d))
        u /= np.linalg.norm(u, axis=1)[:, None]
        proj = v @ u.T
        lo, hi = proj.min(axis=0), proj.max(axis=0)
        ok = rng.random(m) * bound < hi - lo
        normals = np.vstack([normals, u[ok]])
        lows = np.concatenate([lows, lo[ok]])
        widths = np.concatenate([widths, (hi - lo)[ok]])
    normals, lows, widths = normals[:n], lows[:n], widths[:n]
    return normals, lows + rng.random(n) * widths
