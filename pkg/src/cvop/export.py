"""SVG and OFF output of approximation results.

Outer and inner sets are unbounded, so both are cut to a bounded piece
first: by the slab ``w_bar @ y <= beta + alpha`` when the run had one, else
by the bounding box of the vertices scaled by two about its center.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DimensionUnsupported
from .geometry import Halfspace, Polyhedron, VRep, add_halfspace, dd_enumerate
from .reports import inner_of, outer_of

SVG_SIZE = 400
MIN_HALF_WIDTH = 1.0


def _box(points) -> tuple:
    lo, hi = points.min(axis=0), points.max(axis=0)
    center = 0.5 * (lo + hi)
    half = np.maximum(hi - lo, 2 * MIN_HALF_WIDTH)
    return center - half, center + half


def box_halfspaces(lo, hi) -> list:
    q = len(lo)
    eye = np.eye(q)
    return ([Halfspace(eye[i], lo[i]) for i in range(q)]
            + [Halfspace(-eye[i], -hi[i]) for i in range(q)])


def truncate(poly: Polyhedron, caps) -> Polyhedron:
    for h in caps:
        poly = add_halfspace(poly, h)
    return poly


def _caps(data: dict, outer: Polyhedron, inner: VRep):
    pts = np.vstack([outer.vertices, inner.vertices])
    lo, hi = _box(pts)
    slab = data.get("slab")
    if slab:
        w = np.asarray(slab["w_bar"], dtype=float)
        return [Halfspace(-w, -(slab["beta"] + slab["alpha"]))], (lo, hi)
    return box_halfspaces(lo, hi), (lo, hi)


def polytope_faces(poly: Polyhedron, tol: float = 1e-9) -> list:
    """Facets of a bounded 3-d polytope as vertex index cycles, outward oriented."""
    if not poly.is_bounded() or poly.dim != 3:
        raise DimensionUnsupported("faces need a bounded polytope in R^3")
    V = poly.vertices
    nv = V.shape[0]
    center = V.mean(axis=0)
    faces, seen = [], set()
    for i, h in enumerate(poly.halfspaces):
        idx = [k for k in range(nv) if i in poly.incidence[k]]
        key = frozenset(idx)
        if len(idx) < 3 or key in seen:
            continue
        P = V[idx]
        c = P.mean(axis=0)
        if np.linalg.matrix_rank(P - c, tol=1e-9) < 2:
            continue
        seen.add(key)
        n = -h.normal  # outward
        u = P[0] - c
        u /= np.linalg.norm(u)
        w = np.cross(n, u)
        ang = np.arctan2((P - c) @ w, (P - c) @ u)
        order = [idx[j] for j in np.argsort(ang)]
        if np.dot(np.cross(V[order[1]] - V[order[0]], V[order[2]] - V[order[0]]), c - center) < 0:
            order.reverse()
        faces.append(order)
    return faces


def euler_characteristic(nv: int, faces) -> int:
    edges = set()
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    return nv - len(edges) + len(faces)


def to_off(poly: Polyhedron) -> str:
    faces = polytope_faces(poly)
    V = poly.vertices
    chi = euler_characteristic(len(V), faces)
    if chi != 2:
        raise ValueError(f"mesh has Euler characteristic {chi}")
    nedges = len(V) + len(faces) - 2
    lines = ["OFF", f"{len(V)} {len(faces)} {nedges}"]
    lines += [" ".join(format(float(x), ".10g") for x in v) for v in V]
    lines += [" ".join(str(k) for k in [len(f)] + f) for f in faces]
    return "\n".join(lines) + "\n"


def export_off(data: dict) -> str:
    """Bounded part of the outer approximation of a ``q = 3`` report."""
    if int(data["q"]) != 3:
        raise DimensionUnsupported(f"OFF export needs q = 3, report has q = {data['q']}")
    outer, inner = outer_of(data), inner_of(data)
    caps, _ = _caps(data, outer, inner)
    return to_off(truncate(outer, caps))


def _polygon(points) -> np.ndarray:
    hull = ConvexHull(points)
    return points[hull.vertices]


def _truncated_inner(inner: VRep, caps, reach: float) -> np.ndarray:
    """Vertices of ``(conv G + cone R)`` cut by ``caps``, via a hull of far points."""
    R = inner.rays
    dirs = [R.sum(axis=0)] + list(R)
    pts = np.vstack([inner.vertices] + [inner.vertices + reach * d for d in dirs])
    hull = ConvexHull(pts)
    halfspaces = [Halfspace(-eq[:-1], eq[-1]) for eq in hull.equations]
    return dd_enumerate(halfspaces + list(caps)).vertices


def export_svg(data: dict) -> str:
    """Outer polygon, inner polygon and their generators of a ``q = 2`` report."""
    if int(data["q"]) != 2:
        raise DimensionUnsupported(f"SVG export needs q = 2, report has q = {data['q']}")
    outer, inner = outer_of(data), inner_of(data)
    lo, hi = _box(np.vstack([outer.vertices, inner.vertices]))
    caps = box_halfspaces(lo, hi)
    outer_poly = truncate(outer, caps).vertices
    span = float(np.max(hi - lo))
    inner_poly = _polygon(_truncated_inner(inner, caps, 4 * span))

    scale = SVG_SIZE / span

    def xy(p):
        return (p[0] - lo[0]) * scale, SVG_SIZE - (p[1] - lo[1]) * scale

    def pts(P):
        return " ".join("%.4f,%.4f" % xy(p) for p in P)

    outer_poly = _polygon(outer_poly)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" '
        f'height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<polygon class="outer" points="{pts(outer_poly)}" fill="#cfe2f3" stroke="#1f4e79"/>',
        f'<polygon class="inner" points="{pts(inner_poly)}" fill="#f4cccc" stroke="#990000"/>',
    ]
    for v in outer.vertices:
        x, y = xy(v)
        parts.append(f'<circle class="outer-vertex" cx="{x:.4f}" cy="{y:.4f}" r="3" fill="#1f4e79"/>')
    for g in inner.vertices:
        x, y = xy(g)
        parts.append(f'<circle class="inner-generator" cx="{x:.4f}" cy="{y:.4f}" r="2" fill="#990000"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export(data: dict, fmt: str) -> str:
    if fmt == "svg":
        return export_svg(data)
    if fmt == "off":
        return export_off(data)
    raise ValueError(f"unknown format {fmt!r}")
