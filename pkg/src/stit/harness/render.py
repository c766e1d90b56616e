"""SVG export of planar tessellations and OBJ export of spatial ones."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from ..mnw import Tessellation

_SVG_NS = "http://www.w3.org/2000/svg"


def _ramp(x: float) -> str:
    # blue (early) to red (late)
    r = int(round(255 * x))
    return f"#{r:02x}30{255 - r:02x}"


def render_svg(state: Tessellation, size: float = 600.0, color_by_birth: bool = False) -> str:
    """Cells as polygons and maximal segments as lines with a ``data-birth`` attribute."""
    if state.dimension != 2:
        raise ValueError("SVG output needs a planar tessellation")
    lo = state.window.vertices.min(axis=0)
    span = float(np.max(state.window.vertices.max(axis=0) - lo))
    scale = size / span

    def xy(p):
        # flip y so the picture is upright
        return (p[0] - lo[0]) * scale, size - (p[1] - lo[1]) * scale

    root = ET.Element("svg", xmlns=_SVG_NS, width=f"{size:g}", height=f"{size:g}",
                      viewBox=f"0 0 {size:g} {size:g}")
    cells = ET.SubElement(root, "g", {"class": "cells", "fill": "none", "stroke": "#888"})
    for P in state.cells:
        pts = " ".join(f"{x:.6f},{y:.6f}" for x, y in map(xy, P.vertices))
        ET.SubElement(cells, "polygon", points=pts)
    lines = ET.SubElement(root, "g", {"class": "facets", "stroke": "black"})
    horizon = state.horizon if state.horizon > 0 else 1.0
    for rec in state.maximal_polytopes:
        (x1, y1), (x2, y2) = map(xy, rec.facet.vertices)
        attrs = {"x1": f"{x1:.6f}", "y1": f"{y1:.6f}", "x2": f"{x2:.6f}", "y2": f"{y2:.6f}",
                 "data-birth": repr(rec.birth_time)}
        if color_by_birth:
            attrs["stroke"] = _ramp(min(rec.birth_time / horizon, 1.0))
        ET.SubElement(lines, "line", attrs)
    return ET.tostring(root, encoding="unicode")


def parse_svg_segments(text: str) -> list:
    """Line endpoints from :func:`render_svg` output, in SVG coordinates."""
    root = ET.fromstring(text)
    out = []
    for el in root.iter(f"{{{_SVG_NS}}}line"):
        out.append(tuple(float(el.get(k)) for k in ("x1", "y1", "x2", "y2")))
    return out


def render_obj(state: Tessellation) -> str:
    """Maximal polygons as OBJ faces in group ``facets``, window faces in ``window``."""
    if state.dimension != 3:
        raise ValueError("OBJ output needs a spatial tessellation")
    lines = ["# STIT tessellation", f"# horizon {state.horizon!r}"]
    count = 0

    def polygon(verts):
        nonlocal count
        lines.extend(f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in verts)
        lines.append("f " + " ".join(str(count + i + 1) for i in range(len(verts))))
        count += len(verts)

    lines.append("g window")
    W = state.window
    for f in W.faces:
        polygon(W.vertices[list(f)])
    lines.append("g facets")
    for rec in state.maximal_polytopes:
        polygon(rec.facet.vertices)
    return "\n".join(lines) + "\n"


def render(state: Tessellation, fmt: str, path=None, **kwargs) -> str:
    if fmt == "svg":
        text = render_svg(state, **kwargs)
    elif fmt == "obj":
        text = render_obj(state)
    else:
        raise ValueError(f"unsupported format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
