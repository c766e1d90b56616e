"""Convex polytope primitives.

Cells are stored by their vertices plus explicit combinatorics: an ordered
counter-clockwise loop in the plane, a list of outward oriented faces in space
and, for axis-aligned boxes in any dimension, their coordinate bounds.  Splits
are done by halfspace traversal of that combinatorial structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """The set ``{x : <x, normal> = offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.ndim != 1 or abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("hyperplane normal must be a unit vector")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def through(cls, point, normal) -> "Hyperplane":
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(n, float(np.dot(point, n)))

    @property
    def dimension(self) -> int:
        return self.normal.shape[0]

    @property
    def axis(self) -> Optional[int]:
        """Index ``j`` if the normal is ``+-e_j``, else None."""
        j = int(np.argmax(np.abs(self.normal)))
        if abs(abs(self.normal[j]) - 1.0) <= 1e-12:
            return j
        return None

    def signed_distance(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.normal - self.offset

    def scaled(self, factor: float) -> "Hyperplane":
        return Hyperplane(self.normal, self.offset * factor)


@dataclass(frozen=True, eq=False)
class ConvexPolytope:
    """Bounded convex polytope of intrinsic dimension ``k`` in ``R^d``.

    ``vertices`` is an ``(n, d)`` array.  For ``k == 2`` the vertices form an
    ordered loop (counter-clockwise when ``d == 2``).  Solids in ``R^3`` carry
    ``faces``, each a loop of vertex indices ordered counter-clockwise seen
    from outside.  Axis-aligned boxes carry ``bounds = (lo, hi)``; lower
    dimensional pieces carry the ``carrier`` hyperplane they lie in.
    """

    vertices: np.ndarray
    intrinsic_dimension: int
    faces: Optional[tuple] = None
    carrier: Optional[Hyperplane] = None
    bounds: Optional[tuple] = field(default=None, repr=False)

    @property
    def ambient_dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_box(self) -> bool:
        return self.bounds is not None

    # constructors ---------------------------------------------------------

    @classmethod
    def polygon(cls, vertices) -> "ConvexPolytope":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least three planar vertices")
        if _shoelace(v) < 0:
            v = v[::-1].copy()
        return cls(v, 2)

    @classmethod
    def segment(cls, a, b, carrier: Optional[Hyperplane] = None) -> "ConvexPolytope":
        return cls(np.array([a, b], dtype=float), 1, carrier=carrier)

    @classmethod
    def box(cls, lo, hi) -> "ConvexPolytope":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise ValueError("box needs lo < hi componentwise")
        d = lo.shape[0]
        if d == 1:
            return cls(np.array([lo, hi]), 1, bounds=(lo, hi))
        if d == 2:
            v = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
            return cls(v, 2, bounds=(lo, hi))
        if d == 3:
            v = np.array([[x, y, z] for z in (lo[2], hi[2]) for y in (lo[1], hi[1])
                          for x in (lo[0], hi[0])])
            faces = ((0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4),
                     (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5))
            return cls(v, 3, faces=faces, bounds=(lo, hi))
        corners = np.array(list(product(*zip(lo, hi))), dtype=float)
        return cls(corners, d, bounds=(lo, hi))

    @classmethod
    def cube(cls, d: int, side: float = 1.0) -> "ConvexPolytope":
        return cls.box(np.zeros(d), np.full(d, float(side)))

    @classmethod
    def polyhedron(cls, vertices, faces) -> "ConvexPolytope":
        v = np.asarray(vertices, dtype=float)
        faces = tuple(tuple(int(i) for i in f) for f in faces)
        if _polyhedron_volume(v, faces) < 0:
            faces = tuple(f[::-1] for f in faces)
        return cls(v, 3, faces=faces)

    @classmethod
    def from_hull(cls, points) -> "ConvexPolytope":
        """Convex hull of a planar or spatial point set."""
        from scipy.spatial import ConvexHull

        pts = np.asarray(points, dtype=float)
        hull = ConvexHull(pts)
        if pts.shape[1] == 2:
            return cls.polygon(pts[hull.vertices])
        if pts.shape[1] != 3:
            raise ValueError("hull construction supports d = 2, 3")
        keep = hull.vertices
        index = {int(k): i for i, k in enumerate(keep)}
        groups: dict = {}
        for simplex, eq in zip(hull.simplices, hull.equations):
            key = tuple(np.round(eq, 9))
            groups.setdefault(key, (eq[:3], set()))[1].update(int(i) for i in simplex)
        faces = []
        for normal, members in groups.values():
            ids = sorted(members)
            loop = _order_loop(pts[ids], normal)
            faces.append(tuple(index[ids[i]] for i in loop))
        return cls.polyhedron(pts[keep], faces)

    @classmethod
    def regular_polygon(cls, n: int, radius: float = 1.0, center=(0.0, 0.0)) -> "ConvexPolytope":
        ang = 2.0 * np.pi * np.arange(n) / n
        v = np.column_stack([np.cos(ang), np.sin(ang)]) * radius + np.asarray(center, float)
        return cls.polygon(v)

    @classmethod
    def disk(cls, radius: float = 1.0, n: int = 256) -> "ConvexPolytope":
        """Inscribed regular ``n``-gon approximating a disk."""
        return cls.regular_polygon(n, radius)

    @classmethod
    def ball(cls, radius: float = 1.0, subdivisions: int = 2) -> "ConvexPolytope":
        """Inscribed subdivided icosahedron approximating a ball."""
        return cls.from_hull(_icosphere(subdivisions) * radius)

    # transforms -----------------------------------------------------------

    def scaled(self, factor: float) -> "ConvexPolytope":
        carrier = self.carrier.scaled(factor) if self.carrier is not None else None
        bounds = None
        if self.bounds is not None:
            bounds = (self.bounds[0] * factor, self.bounds[1] * factor)
        return ConvexPolytope(self.vertices * factor, self.intrinsic_dimension,
                              self.faces, carrier, bounds)

    def halfspaces(self):
        """Outer description ``A x <= b`` of a full-dimensional polytope."""
        d = self.ambient_dimension
        if self.intrinsic_dimension != d:
            raise ValueError("halfspaces need a full-dimensional polytope")
        if self.bounds is not None:
            eye = np.eye(d)
            return np.vstack([eye, -eye]), np.concatenate([self.bounds[1], -self.bounds[0]])
        if d == 2:
            v = self.vertices
            e = np.roll(v, -1, axis=0) - v
            a = np.column_stack([e[:, 1], -e[:, 0]])
            a /= np.linalg.norm(a, axis=1)[:, None]
            return a, np.einsum("ij,ij->i", a, v)
        if d == 3:
            a = np.array([_newell(self.vertices[list(f)]) for f in self.faces])
            a /= np.linalg.norm(a, axis=1)[:, None]
            b = np.array([a[k] @ self.vertices[f[0]] for k, f in enumerate(self.faces)])
            return a, b
        raise ValueError("unsupported polytope")

    def contains(self, points, tol: float = TOL) -> np.ndarray:
        a, b = self.halfspaces()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ a.T <= b + tol, axis=1)

    def edges(self) -> np.ndarray:
        """Vertex index pairs of all edges (planar loops and solids)."""
        k = self.intrinsic_dimension
        n = len(self.vertices)
        if k == 1:
            return np.array([[0, 1]])
        if k == 2:
            i = np.arange(n)
            return np.column_stack([i, (i + 1) % n])
        if k == 3 and self.faces is not None:
            seen = set()
            for f in self.faces:
                for a, b in zip(f, f[1:] + f[:1]):
                    seen.add((min(a, b), max(a, b)))
            return np.array(sorted(seen))
        raise ValueError("edge list unavailable for this polytope")


# basic measurements ---------------------------------------------------------

def support_function(P: ConvexPolytope, u) -> float:
    """Largest value of ``<v, u>`` over the vertices of ``P``."""
    if len(P.vertices) == 0:
        raise ValueError("empty polytope")
    return float(np.max(P.vertices @ np.asarray(u, dtype=float)))


def width(P: ConvexPolytope, u) -> float:
    proj = P.vertices @ np.asarray(u, dtype=float)
    return float(proj.max() - proj.min())


def diameter(P: ConvexPolytope) -> float:
    v = P.vertices
    if len(v) < 2:
        return 0.0
    if P.bounds is not None:
        return float(np.linalg.norm(P.bounds[1] - P.bounds[0]))
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def volume(P: ConvexPolytope) -> float:
    """Intrinsic volume of dimension ``P.intrinsic_dimension``."""
    k = P.intrinsic_dimension
    if P.bounds is not None:
        ext = P.bounds[1] - P.bounds[0]
        pos = ext[ext > TOL]
        return float(np.prod(pos)) if len(pos) >= k else 0.0
    v = P.vertices
    if k == 0:
        return 1.0
    if k == 1:
        return float(np.linalg.norm(v[-1] - v[0])) if len(v) == 2 else diameter(P)
    if k == 2:
        if P.ambient_dimension == 2:
            return abs(_shoelace(v))
        return 0.5 * float(np.linalg.norm(_newell(v)))
    if k == 3 and P.faces is not None:
        return max(_polyhedron_volume(v, P.faces), 0.0)
    raise ValueError("volume unsupported for this polytope")


def surface_area(P: ConvexPolytope) -> float:
    """Boundary (d-1)-volume of a full-dimensional polytope."""
    d = P.ambient_dimension
    if d == 2:
        v = P.vertices
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())
    if d == 3:
        return float(sum(0.5 * np.linalg.norm(_newell(P.vertices[list(f)])) for f in P.faces))
    raise ValueError("surface area supported for d = 2, 3")


def centroid(P: ConvexPolytope) -> np.ndarray:
    return P.vertices.mean(axis=0)


# splitting ------------------------------------------------------------------

def split(P: ConvexPolytope, H: Hyperplane, tol: float = TOL):
    """Cut ``P`` by ``H``.

    Returns ``(plus, minus, interface)`` where ``plus`` lies in
    ``<x, normal> >= offset``.  Raises ValueError("non-splitting hyperplane")
    when ``H`` does not meet the interior of ``P``.
    """
    d = P.ambient_dimension
    if P.intrinsic_dimension != d:
        raise ValueError("only full-dimensional cells can be split")
    if P.bounds is not None and H.axis is not None:
        return _split_box(P, H, tol)
    if d == 2:
        return _split_polygon(P, H, tol)
    if d == 3 and P.faces is not None:
        return _split_polyhedron(P, H, tol)
    raise ValueError("split in d > 3 supports axis-aligned boxes and hyperplanes only")


def intersect_with_hyperplane(P: ConvexPolytope, H: Hyperplane, tol: float = TOL):
    """``P`` intersected with ``H`` as a (d-1)-polytope, or None if thinner."""
    d = P.ambient_dimension
    if P.bounds is not None and H.axis is not None:
        j = H.axis
        c = H.offset * H.normal[j]
        lo, hi = P.bounds
        if c < lo[j] - tol or c > hi[j] + tol:
            return None
        return _box_facet(lo, hi, j, min(max(c, lo[j]), hi[j]), H)
    s = _classify(P.vertices, H, tol)
    if s.max() < 0 or s.min() > 0:
        return None
    pts = _section_points(P, s)
    if d == 2:
        if len(pts) < 2:
            return None
        direction = np.array([-H.normal[1], H.normal[0]])
        t = pts @ direction
        a, b = pts[np.argmin(t)], pts[np.argmax(t)]
        if np.linalg.norm(b - a) <= tol:
            return None
        return ConvexPolytope.segment(a, b, carrier=H)
    if d == 3:
        if len(pts) < 3:
            return None
        loop = _order_loop(pts, H.normal)
        poly = _dedupe_loop(pts[loop], tol)
        if len(poly) < 3 or 0.5 * np.linalg.norm(_newell(poly)) <= tol * tol:
            return None
        return ConvexPolytope(poly, 2, carrier=H)
    raise ValueError("hyperplane sections in d > 3 support boxes only")


def _classify(vertices, H, tol):
    s = vertices @ H.normal - H.offset
    s[np.abs(s) <= tol] = 0.0
    return s


def _section_points(P, s):
    v = P.vertices
    on = v[s == 0.0]
    e = P.edges()
    si, sj = s[e[:, 0]], s[e[:, 1]]
    cross = si * sj < 0
    a, b = v[e[cross, 0]], v[e[cross, 1]]
    lam = (si[cross] / (si[cross] - sj[cross]))[:, None]
    return np.vstack([on, a + lam * (b - a)])


def _split_box(P, H, tol):
    j = H.axis
    c = H.offset * H.normal[j]
    lo, hi = P.bounds
    if c - lo[j] <= tol or hi[j] - c <= tol:
        raise ValueError("non-splitting hyperplane")
    lo_up, hi_down = lo.copy(), hi.copy()
    lo_up[j] = c
    hi_down[j] = c
    upper = ConvexPolytope.box(lo_up, hi)
    lower = ConvexPolytope.box(lo, hi_down)
    plus, minus = (upper, lower) if H.normal[j] > 0 else (lower, upper)
    return plus, minus, _box_facet(lo, hi, j, c, H)


def _box_facet(lo, hi, j, c, H):
    flo, fhi = lo.copy(), hi.copy()
    flo[j] = fhi[j] = c
    d = len(lo)
    if d == 1:
        return ConvexPolytope(flo[None, :], 0, carrier=H, bounds=(flo, fhi))
    axes = [k for k in range(d) if k != j]
    corners = []
    if d == 3:
        # ordered loop so the facet is also a valid planar polygon
        a, b = axes
        for x, y in ((lo[a], lo[b]), (hi[a], lo[b]), (hi[a], hi[b]), (lo[a], hi[b])):
            p = flo.copy()
            p[a], p[b] = x, y
            corners.append(p)
    else:
        for combo in product(*[(lo[k], hi[k]) for k in axes]):
            p = flo.copy()
            p[axes] = combo
            corners.append(p)
    return ConvexPolytope(np.array(corners), d - 1, carrier=H, bounds=(flo, fhi))


def _split_polygon(P, H, tol):
    v = P.vertices
    s = _classify(v, H, tol)
    if s.max() <= 0 or s.min() >= 0:
        raise ValueError("non-splitting hyperplane")
    plus, minus, cut = [], [], []
    n = len(v)
    for i in range(n):
        j = (i + 1) % n
        if s[i] >= 0:
            plus.append(v[i])
        if s[i] <= 0:
            minus.append(v[i])
        if s[i] == 0:
            cut.append(v[i])
        if s[i] * s[j] < 0:
            p = v[i] + s[i] / (s[i] - s[j]) * (v[j] - v[i])
            plus.append(p)
            minus.append(p)
            cut.append(p)
    a, b = cut[0], cut[-1]
    return (ConvexPolytope(np.array(plus), 2), ConvexPolytope(np.array(minus), 2),
            ConvexPolytope.segment(a, b, carrier=H))


def _split_polyhedron(P, H, tol):
    v = P.vertices
    s = _classify(v, H, tol)
    if s.max() <= 0 or s.min() >= 0:
        raise ValueError("non-splitting hyperplane")
    points = list(v)
    cut_index: dict = {}

    def crossing(i, j):
        key = (i, j) if i < j else (j, i)
        k = cut_index.get(key)
        if k is None:
            p = v[i] + s[i] / (s[i] - s[j]) * (v[j] - v[i])
            k = len(points)
            points.append(p)
            cut_index[key] = k
        return k

    plus_faces, minus_faces = [], []
    for f in P.faces:
        pf, mf = [], []
        m = len(f)
        for a in range(m):
            i, j = f[a], f[(a + 1) % m]
            if s[i] >= 0:
                pf.append(i)
            if s[i] <= 0:
                mf.append(i)
            if s[i] * s[j] < 0:
                k = crossing(i, j)
                pf.append(k)
                mf.append(k)
        if len(pf) >= 3:
            plus_faces.append(pf)
        if len(mf) >= 3:
            minus_faces.append(mf)
    pts = np.array(points)
    cap = [i for i in range(len(v)) if s[i] == 0] + list(cut_index.values())
    order = _order_loop(pts[cap], H.normal)
    cap_loop = [cap[i] for i in order]
    plus_faces.append(cap_loop[::-1])   # outward normal -n
    minus_faces.append(cap_loop)        # outward normal +n
    interface = ConvexPolytope(pts[cap_loop], 2, carrier=H)
    return _compact(pts, plus_faces), _compact(pts, minus_faces), interface


def _compact(points, faces):
    used = sorted({i for f in faces for i in f})
    remap = {old: new for new, old in enumerate(used)}
    return ConvexPolytope(points[used], 3,
                          faces=tuple(tuple(remap[i] for i in f) for f in faces))


# small helpers --------------------------------------------------------------

def plane_basis(normal):
    """Two unit vectors spanning the orthogonal complement of ``normal`` in R^3."""
    n = np.asarray(normal, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def _order_loop(points, normal):
    """Indices ordering coplanar points counter-clockwise around ``normal``."""
    e1, e2 = plane_basis(normal)
    q = points - points.mean(axis=0)
    return np.argsort(np.arctan2(q @ e2, q @ e1), kind="stable")


def _dedupe_loop(loop, tol):
    keep = [0]
    for i in range(1, len(loop)):
        if np.linalg.norm(loop[i] - loop[keep[-1]]) > tol:
            keep.append(i)
    if len(keep) > 1 and np.linalg.norm(loop[keep[-1]] - loop[keep[0]]) <= tol:
        keep.pop()
    return loop[keep]


def _shoelace(v) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _newell(v) -> np.ndarray:
    nxt = np.roll(v, -1, axis=0)
    return np.cross(v, nxt).sum(axis=0)


def _polyhedron_volume(v, faces) -> float:
    total = 0.0
    for f in faces:
        p0 = v[f[0]]
        for a in range(1, len(f) - 1):
            total += np.dot(p0, np.cross(v[f[a]], v[f[a + 1]]))
    return float(total) / 6.0


def _icosphere(subdivisions: int) -> np.ndarray:
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9),
             (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2),
             (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10),
             (8, 6, 7), (9, 8, 1)]
    pts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in verts]
    for _ in range(subdivisions):
        cache: dict = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = pts[i] + pts[j]
                pts.append(m / np.linalg.norm(m))
                cache[key] = len(pts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(pts)


def random_direction(rng, d: int) -> np.ndarray:
    g = rng.standard_normal(d)
    return g / np.linalg.norm(g)

