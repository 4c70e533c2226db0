"""Polyhedra with both representations, maintained by double description.

A polyhedron ``{y | A y >= b}`` is homogenized to the cone
``{(y, t) | A y - b t >= 0, t >= 0}``.  Extreme rays of that cone with
``t > 0`` are the vertices, those with ``t = 0`` the recession rays.  Each
generator carries a boolean row of the constraints it is tight on: column 0
is the ``t >= 0`` row, column ``i + 1`` is halfspace ``i``.  Adding a halfspace is one
double-description step: generators are split by the sign of their slack and
each adjacent (+, -) pair contributes a new generator on the hyperplane.
Adjacency uses the combinatorial test, so degenerate cuts need no
perturbation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateNormal, EmptyError, LinealityError

TOL_FEAS = 1e-7
TOL_VERTEX = 1e-8


@dataclass(frozen=True, eq=False)
class Halfspace:
    """The set ``{y | normal @ y >= offset}``, stored with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float).reshape(-1)
        norm = np.linalg.norm(normal)
        if not norm > 1e-12:
            raise DegenerateNormal("halfspace normal is zero")
        object.__setattr__(self, "normal", normal / norm)
        object.__setattr__(self, "offset", float(self.offset) / float(norm))

    def slack(self, y) -> float:
        return float(self.normal @ np.asarray(y, dtype=float) - self.offset)

    def __repr__(self):
        return f"Halfspace(normal={self.normal.tolist()}, offset={self.offset!r})"


@dataclass(frozen=True, eq=False)
class VRep:
    """Vertices and unit recession rays, one per row."""

    vertices: np.ndarray
    rays: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        R = np.asarray(self.rays, dtype=float)
        q = V.shape[1] if V.ndim == 2 and V.size else (R.shape[1] if R.ndim == 2 and R.size else 0)
        object.__setattr__(self, "vertices", V.reshape(-1, q) if q else V.reshape(0, 0))
        object.__setattr__(self, "rays", R.reshape(-1, q) if q else R.reshape(0, 0))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1] if self.vertices.size else self.rays.shape[1]


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """H-representation plus the V-representation computed from it.

    ``incidence[i]`` lists the halfspaces tight at the i-th generator,
    vertices first, then rays.  ``redundant`` is set on the value returned
    by :func:`add_halfspace` when the cut did not remove anything.
    """

    halfspaces: tuple
    vrep: VRep
    incidence: tuple
    redundant: bool = False
    _gens: np.ndarray = dataclasses.field(default=None, repr=False)
    _inc: np.ndarray = dataclasses.field(default=None, repr=False)
    tol_feas: float = dataclasses.field(default=TOL_FEAS, repr=False)
    tol_vertex: float = dataclasses.field(default=TOL_VERTEX, repr=False)

    @property
    def dim(self) -> int:
        return self._gens.shape[1] - 1

    @property
    def vertices(self) -> np.ndarray:
        return self.vrep.vertices

    @property
    def rays(self) -> np.ndarray:
        return self.vrep.rays

    @property
    def A(self) -> np.ndarray:
        return np.array([h.normal for h in self.halfspaces])

    @property
    def b(self) -> np.ndarray:
        return np.array([h.offset for h in self.halfspaces])

    def slacks(self, y) -> np.ndarray:
        return self.A @ np.asarray(y, dtype=float) - self.b

    def is_bounded(self) -> bool:
        return self.vrep.rays.shape[0] == 0


def _homog_row(h: Halfspace) -> np.ndarray:
    return np.append(h.normal, -h.offset)


def _normalize(gen, is_ray):
    if is_ray:
        y = gen[:-1]
        out = np.zeros_like(gen)
        out[:-1] = y / np.linalg.norm(y)
        return out
    return gen / gen[-1]


def _polish(gen, mask, A, b):
    """Re-solve a vertex from its tight halfspaces to curb error build-up."""
    idx = np.flatnonzero(mask[1:])
    q = A.shape[1]
    if len(idx) < q:
        return gen
    M = A[idx]
    if np.linalg.matrix_rank(M) < q:
        return gen
    y, *_ = np.linalg.lstsq(M, b[idx], rcond=None)
    if np.max(np.abs(y - gen[:-1])) > 1e-6 * (1 + np.max(np.abs(y))):
        return gen
    return np.append(y, 1.0)


def _merge(gens, inc, is_ray, tol):
    """Collapse generators closer than ``tol`` (l-inf), uniting incidences."""
    n = gens.shape[0]
    alive = np.ones(n, dtype=bool)
    for i in range(n):
        if not alive[i]:
            continue
        close = np.max(np.abs(gens[i + 1:] - gens[i]), axis=1) <= tol
        close &= is_ray[i + 1:] == is_ray[i]
        close &= alive[i + 1:]
        if close.any():
            j = np.flatnonzero(close) + i + 1
            inc[i] |= inc[j].any(axis=0)
            alive[j] = False
    return gens[alive], inc[alive]


def _dd_step(gens, inc, row, col, q, tol_feas, tol_vertex, A=None, b=None):
    """Intersect the cone spanned by ``gens`` with ``{x | row @ x >= 0}``.

    ``inc`` is the boolean generator-by-constraint incidence matrix and
    ``col`` the column of the new constraint.  Returns
    ``(gens, inc, redundant)``.
    """
    s = gens @ row
    pos = np.flatnonzero(s > tol_feas)
    neg = np.flatnonzero(s < -tol_feas)
    zero = np.abs(s) <= tol_feas
    inc = inc.copy()
    inc[zero, col] = True
    if neg.size == 0:
        return gens, inc, True
    new_g, new_i = [], []
    if pos.size:
        common = inc[pos][:, None, :] & inc[neg][None, :, :]
        pi, ni = np.nonzero(common.sum(axis=2) >= q - 1)
        if pi.size:
            C = common[pi, ni].astype(float)
            # a third generator tight on everything the pair shares means the
            # pair is not adjacent
            outside = C @ (~inc).astype(float).T
            ok = (outside < 0.5).sum(axis=1) == 2
            for a, c, cm in zip(pos[pi[ok]], neg[ni[ok]], common[pi[ok], ni[ok]]):
                g = s[a] * gens[c] - s[c] * gens[a]
                is_ray = bool(cm[0])
                g = _normalize(g, is_ray)
                m = cm.copy()
                m[col] = True
                if not is_ray and A is not None:
                    g = _polish(g, m, A, b)
                new_g.append(g)
                new_i.append(m)
    kept = np.flatnonzero(s >= -tol_feas)
    G = np.vstack([gens[kept]] + ([np.array(new_g)] if new_g else []))
    I = np.vstack([inc[kept]] + ([np.array(new_i)] if new_i else []))
    if G.shape[0] == 0:
        raise EmptyError("cut removes every generator")
    # only generators on the new hyperplane can coincide after rounding
    on = I[:, col]
    Gm, Im = _merge(G[on], I[on], I[on, 0].copy(), tol_vertex)
    G = np.vstack([G[~on], Gm])
    I = np.vstack([I[~on], Im])
    if I[:, 0].all():
        raise EmptyError("no vertex survives the cut")
    return G, I, False


def _sort_generators(gens, inc):
    """Vertices first, each block in lexicographic order of rounded coordinates."""
    keys = np.round(gens[:, :-1], 9)
    order = np.lexsort(tuple(keys[:, i] for i in reversed(range(keys.shape[1]))) + (inc[:, 0],))
    return gens[order], inc[order]


def _build(halfspaces, gens, inc, redundant, tol_feas, tol_vertex):
    gens, inc = _sort_generators(gens, inc)
    is_ray = inc[:, 0]
    vrep = VRep(gens[~is_ray, :-1], gens[is_ray, :-1])
    incidence = tuple(frozenset((np.flatnonzero(r[1:])).tolist()) for r in inc)
    return Polyhedron(tuple(halfspaces), vrep, incidence, redundant, gens, inc,
                      tol_feas, tol_vertex)


def dd_enumerate(halfspaces, tol_feas: float = TOL_FEAS, tol_vertex: float = TOL_VERTEX) -> Polyhedron:
    """Compute vertices and recession rays of ``{y | normal_i @ y >= offset_i}``.

    Raises
    ------
    LinealityError
        If the normals do not span R^q (the set would contain a line).
    EmptyError
        If the intersection is empty.
    """
    halfspaces = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
    if not halfspaces:
        raise ValueError("need at least one halfspace")
    q = halfspaces[0].normal.size
    A = np.array([h.normal for h in halfspaces])
    b = np.array([h.offset for h in halfspaces])
    if np.linalg.matrix_rank(A, tol=1e-10) < q:
        raise LinealityError("halfspace normals do not span R^%d" % q)
    rows = np.vstack([np.append(np.zeros(q), 1.0)] + [_homog_row(h) for h in halfspaces])
    basis = [0]
    for i in range(1, len(rows)):
        if len(basis) == q + 1:
            break
        if np.linalg.matrix_rank(rows[basis + [i]], tol=1e-10) > len(basis):
            basis.append(i)
    inv = np.linalg.inv(rows[basis])
    inc = np.zeros((q + 1, len(rows)), dtype=bool)
    gens = np.empty((q + 1, q + 1))
    for k, j in enumerate(basis):
        inc[k, basis] = True
        inc[k, j] = False
        gens[k] = _normalize(inv[:, k], bool(inc[k, 0]))
    in_basis = set(basis)
    for i in range(1, len(rows)):
        if i not in in_basis:
            gens, inc, _ = _dd_step(gens, inc, rows[i], i, q, tol_feas, tol_vertex, A, b)
    if inc[:, 0].all():
        raise EmptyError("polyhedron has no vertex")
    return _build(halfspaces, gens, inc, False, tol_feas, tol_vertex)


def add_halfspace(poly: Polyhedron, h: Halfspace) -> Polyhedron:
    """Return ``poly`` intersected with ``h`` by one incremental DD step.

    When no generator is cut the input is returned with ``redundant=True``
    and without recording ``h``.
    """
    if not isinstance(h, Halfspace):
        h = Halfspace(*h)
    halfspaces = poly.halfspaces + (h,)
    A = np.array([x.normal for x in halfspaces])
    b = np.array([x.offset for x in halfspaces])
    inc = np.hstack([poly._inc, np.zeros((poly._inc.shape[0], 1), dtype=bool)])
    gens, inc, redundant = _dd_step(poly._gens, inc, _homog_row(h), inc.shape[1] - 1,
                                    poly.dim, poly.tol_feas, poly.tol_vertex, A, b)
    if redundant:
        return dataclasses.replace(poly, redundant=True)
    return _build(halfspaces, gens, inc, False, poly.tol_feas, poly.tol_vertex)


def contains(poly: Polyhedron, y, tol: float = TOL_FEAS) -> bool:
    """True iff every halfspace slack of ``y`` is at least ``-tol``."""
    return bool(np.all(poly.slacks(y) >= -tol))


def recession_rays(poly: Polyhedron) -> np.ndarray:
    """Generators of the recession cone (the V-rep rays)."""
    return poly.vrep.rays


def brute_force_vertices(halfspaces, tol: float = TOL_FEAS) -> np.ndarray:
    """Vertices by solving every q-subset of boundary hyperplanes.

    Exponential; meant as a test oracle for small systems.
    """
    halfspaces = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
    A = np.array([h.normal for h in halfspaces])
    b = np.array([h.offset for h in halfspaces])
    q = A.shape[1]
    found = []
    for idx in combinations(range(len(halfspaces)), q):
        M = A[list(idx)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        y = np.linalg.solve(M, b[list(idx)])
        if np.all(A @ y - b >= -tol) and not any(np.max(np.abs(y - f)) <= 1e-7 for f in found):
            found.append(y)
    return np.array(found).reshape(-1, q)


def same_point_sets(P, Q, tol: float) -> bool:
    """Mutual l-inf matching of two point sets."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape[0] != Q.shape[0]:
        return False
    if P.shape[0] == 0:
        return True
    D = np.max(np.abs(P[:, None, :] - Q[None, :, :]), axis=2)
    return bool(np.all(D.min(axis=1) <= tol) and np.all(D.min(axis=0) <= tol))


# text dump format

def _fmt_row(values) -> str:
    return " ".join(format(float(x), ".17g") for x in values)


def dumps(poly: Polyhedron) -> str:
    """Text dump: ``H:`` rows ``a1 .. aq b`` (a.y >= b), then ``V:`` and ``R:``."""
    lines = ["H:"]
    lines += [_fmt_row(np.append(h.normal, h.offset)) for h in poly.halfspaces]
    lines += vrep_dumps(poly.vrep).splitlines()
    return "\n".join(lines) + "\n"


def vrep_dumps(vrep: VRep) -> str:
    lines = ["V:"]
    lines += [_fmt_row(v) for v in vrep.vertices]
    lines.append("R:")
    lines += [_fmt_row(r) for r in vrep.rays]
    return "\n".join(lines) + "\n"


def _parse_sections(text: str) -> dict:
    sections, current = {}, None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line in ("H:", "V:", "R:"):
            current = line[0]
            sections[current] = []
            continue
        if current is None:
            raise ValueError(f"data before section header: {line!r}")
        sections[current].append([float(x) for x in line.split()])
    return sections


def loads(text: str, tol_feas: float = TOL_FEAS, tol_vertex: float = TOL_VERTEX) -> Polyhedron:
    """Rebuild a polyhedron from the ``H:`` block of a text dump."""
    rows = _parse_sections(text).get("H", [])
    return dd_enumerate([Halfspace(r[:-1], r[-1]) for r in rows], tol_feas, tol_vertex)


def vrep_loads(text: str) -> VRep:
    sec = _parse_sections(text)
    V, R = sec.get("V", []), sec.get("R", [])
    q = len(V[0]) if V else (len(R[0]) if R else 0)
    return VRep(np.array(V).reshape(-1, q), np.array(R).reshape(-1, q))
