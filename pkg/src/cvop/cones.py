"""Polyhedral ordering cones given by generators of C and of its dual C+."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import ConeError, LinealityError, NotPointed, NotSolid, UnknownName
from .geometry import Halfspace, dd_enumerate
from .norms import dual_norm

_DUALITY_TOL = 1e-9


def _unit_rows(G) -> np.ndarray:
    G = np.atleast_2d(np.asarray(G, dtype=float))
    norms = np.linalg.norm(G, axis=1)
    if np.any(norms <= 1e-12):
        raise ConeError("zero generator")
    return G / norms[:, None]


def dual_cone(generators) -> np.ndarray:
    """Unit generators of ``{w | w @ g >= 0 for every generator g}``.

    Raises NotSolid when the generators do not span R^q and NotPointed when
    the dual comes out lower dimensional.
    """
    G = _unit_rows(generators)
    q = G.shape[1]
    try:
        poly = dd_enumerate([Halfspace(g, 0.0) for g in G], tol_feas=1e-10)
    except LinealityError as exc:
        raise NotSolid("generators do not span R^%d" % q) from exc
    R = poly.rays
    if R.shape[0] < q or np.linalg.matrix_rank(R, tol=1e-10) < q:
        raise NotPointed("dual cone is not full dimensional")
    return R


def in_cone(generators, y, tol: float = 1e-9) -> bool:
    """Membership of ``y`` in cone(generators) by nonnegative least squares."""
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    y = np.asarray(y, dtype=float)
    _, resid = nnls(G.T, y)
    return resid <= tol * max(1.0, np.linalg.norm(y))


def same_cone(G1, G2, tol: float = 1e-9) -> bool:
    """True when each generator set lies in the cone of the other."""
    return all(in_cone(G2, g, tol) for g in _unit_rows(G1)) and \
        all(in_cone(G1, g, tol) for g in _unit_rows(G2))


@dataclass(frozen=True, eq=False)
class OrderingCone:
    """A solid, pointed polyhedral cone C with the generators of C+."""

    primal_generators: np.ndarray
    dual_generators: np.ndarray
    name: str = ""

    def __post_init__(self):
        P = _unit_rows(self.primal_generators)
        D = _unit_rows(self.dual_generators)
        object.__setattr__(self, "primal_generators", P)
        object.__setattr__(self, "dual_generators", D)
        q = P.shape[1]
        if D.shape[1] != q:
            raise ConeError("primal and dual generators differ in dimension")
        if D.shape[0] < q or np.linalg.matrix_rank(D) < q:
            raise NotPointed("dual generators do not span R^%d" % q)
        if np.linalg.matrix_rank(P) < q:
            raise NotSolid("primal generators do not span R^%d" % q)
        if np.min(D @ P.T) < -_DUALITY_TOL:
            raise ConeError("primal and dual generators are not mutually dual")
        if not same_cone(dual_cone(P), D, 1e-7):
            raise ConeError("dual generators do not generate the dual cone")
        # the generator sum lies in the relative interior of a cone
        if np.min(D @ P.sum(axis=0)) <= _DUALITY_TOL:
            raise NotSolid("no interior point found")
        if np.min(P @ D.sum(axis=0)) <= _DUALITY_TOL:
            raise NotPointed("cone contains a line")

    @property
    def q(self) -> int:
        return self.primal_generators.shape[1]

    @property
    def J(self) -> int:
        return self.dual_generators.shape[0]

    @classmethod
    def from_primal(cls, generators, name=""):
        return cls(generators, dual_cone(generators), name)

    @classmethod
    def from_dual(cls, generators, name=""):
        return cls(dual_cone(generators), generators, name)

    @classmethod
    def orthant(cls, q: int):
        eye = np.eye(q)
        return cls(eye, eye, "orthant")

    def contains(self, y, tol: float = _DUALITY_TOL) -> bool:
        return bool(np.all(self.dual_generators @ np.asarray(y, dtype=float) >= -tol))

    def to_dict(self) -> dict:
        if self.name in BUILTIN_CONES or self.name == "orthant":
            return {"name": self.name, "q": self.q}
        return {"primal": self.primal_generators.tolist(),
                "dual": self.dual_generators.tolist()}


def leq_C(cone: OrderingCone, y1, y2, tol: float = _DUALITY_TOL) -> bool:
    """``y1 <=_C y2``, i.e. ``y2 - y1`` in C."""
    return cone.contains(np.asarray(y2, dtype=float) - np.asarray(y1, dtype=float), tol)


def reference_direction(cone: OrderingCone, p) -> np.ndarray:
    """Sum of the dual generators scaled to unit dual norm."""
    s = cone.dual_generators.sum(axis=0)
    return s / dual_norm(s, p)


BUILTIN_CONES = {
    "C1": [[1, 2], [2, 1]],
    "C2": [[2, -1], [-1, 2]],
    "C3": [[4, 2, 2], [2, 4, 2], [4, 0, 2], [1, 0, 2], [0, 1, 2], [0, 4, 2]],
    "C4": [[-1, -1, 3], [2, 2, -1], [1, 0, 0], [0, -1, 2], [-1, 0, 2], [0, 1, 0]],
}


def builtin(name: str, q: int | None = None) -> OrderingCone:
    """Resolve "orthant" (needs ``q``) or one of "C1".."C4"."""
    if name == "orthant":
        if q is None:
            raise ValueError("orthant needs a dimension")
        return OrderingCone.orthant(q)
    if name not in BUILTIN_CONES:
        raise UnknownName(name)
    cone = OrderingCone.from_primal(BUILTIN_CONES[name], name)
    if q is not None and cone.q != q:
        raise ConeError(f"cone {name} has dimension {cone.q}, problem needs {q}")
    return cone


def cone_from_dict(data, q: int | None = None) -> OrderingCone:
    """Build a cone from ``{"primal": ...}``, ``{"dual": ...}``, or a name."""
    if isinstance(data, str):
        return builtin(data, q)
    if "name" in data:
        return builtin(data["name"], data.get("q", q))
    if "primal" in data and "dual" in data:
        return OrderingCone(data["primal"], data["dual"])
    if "primal" in data:
        return OrderingCone.from_primal(data["primal"])
    if "dual" in data:
        return OrderingCone.from_dual(data["dual"])
    raise ConeError("cone file needs a 'primal' or 'dual' entry")


def load_cone(path, q: int | None = None) -> OrderingCone:
    with open(path, encoding="utf-8") as fh:
        return cone_from_dict(json.load(fh), q)
