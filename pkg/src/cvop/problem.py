"""Convex vector optimization problems with quadratic data.

A problem is ``minimize Gamma(x)`` with respect to the cone order, subject
to ``g_i(x) <= 0`` and a finite box.  Every component of ``Gamma`` and every
``g_i`` is a :class:`~cvop.quadratic.QuadraticFunction`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cones import OrderingCone, cone_from_dict
from .errors import CVOPError, UnknownName
from .quadratic import QuadraticFunction
from .solver import ConvexProgram, phase1


@dataclass
class ConvexityReport:
    passed: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    n: int
    q: int
    objectives: tuple
    constraints: tuple
    lower: np.ndarray
    upper: np.ndarray
    cone: OrderingCone
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.n,)).copy()
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(self.objectives) != self.q:
            raise CVOPError(f"expected {self.q} objectives, got {len(self.objectives)}")
        for f in self.objectives + self.constraints:
            if f.dim != self.n:
                raise CVOPError("function dimension does not match n")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise CVOPError("box must be finite with lower < upper")
        if self.cone.q != self.q:
            raise CVOPError("cone dimension does not match q")
        object.__setattr__(self, "_Qs", np.array([f.Q for f in self.objectives]))
        object.__setattr__(self, "_Bs", np.array([f.b for f in self.objectives]))
        object.__setattr__(self, "_cs", np.array([f.c for f in self.objectives]))
        object.__setattr__(self, "_interior", None)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("kij,i,j->k", self._Qs, x, x) + self._Bs @ x + self._cs

    def jacobian(self, x) -> np.ndarray:
        return self._Qs @ np.asarray(x, dtype=float) + self._Bs

    def constraint_values(self, x) -> np.ndarray:
        return np.array([g(x) for g in self.constraints])

    def is_feasible(self, x, tol: float = 1e-7) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            return False
        return all(g(x) <= tol for g in self.constraints)

    def weighted_objective(self, w) -> QuadraticFunction:
        """The scalar function ``x -> w @ Gamma(x)``."""
        w = np.asarray(w, dtype=float)
        return QuadraticFunction(np.tensordot(w, self._Qs, axes=1), w @ self._Bs, float(w @ self._cs))

    def interior_point(self) -> np.ndarray:
        """A strictly feasible point, computed once and cached."""
        if self._interior is None:
            prog = ConvexProgram(np.zeros(self.n), list(self.constraints), self.lower, self.upper)
            object.__setattr__(self, "_interior", phase1(prog))
        return self._interior.copy()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "q": self.q,
            "objectives": [f.to_dict() for f in self.objectives],
            "constraints": [g.to_dict() for g in self.constraints],
            "box": {"lo": self.lower.tolist(), "hi": self.upper.tolist()},
            "cone": self.cone.to_dict(),
        }


def evaluate(problem: ProblemSpec, x) -> np.ndarray:
    return problem.evaluate(x)


def jacobian(problem: ProblemSpec, x) -> np.ndarray:
    return problem.jacobian(x)


def interior_point(problem: ProblemSpec) -> np.ndarray:
    return problem.interior_point()


def check_c_convexity(problem: ProblemSpec, tol: float = 1e-9) -> ConvexityReport:
    """PSD test of ``sum_i w_i Q_i`` for each dual generator, and of each constraint."""
    failures = []
    for j, w in enumerate(problem.cone.dual_generators):
        H = np.tensordot(w, problem._Qs, axes=1)
        scale = max(1.0, np.max(np.abs(H)))
        lam = np.linalg.eigvalsh(H)[0] if problem.n else 0.0
        if lam < -tol * scale:
            failures.append({"kind": "objective", "index": j, "generator": w.tolist(),
                             "min_eigenvalue": float(lam)})
    for i, g in enumerate(problem.constraints):
        lam = g.min_eigenvalue()
        if lam < -tol * max(1.0, np.max(np.abs(g.Q))):
            failures.append({"kind": "constraint", "index": i, "min_eigenvalue": float(lam)})
    return ConvexityReport(not failures, failures)


# catalog

def _ball_example(q: int, cone: OrderingCone) -> ProblemSpec:
    eye = np.eye(q)
    objectives = [QuadraticFunction.linear(eye[i]) for i in range(q)]
    # 0.5*||x - e||^2 - 0.5 <= 0
    ball = QuadraticFunction(eye, -np.ones(q), q / 2.0 - 0.5)
    return ProblemSpec(q, q, objectives, [ball], np.zeros(q), 2 * np.ones(q), cone, f"ex8.1-q{q}")


def _location_example(cone: OrderingCone) -> ProblemSpec:
    anchors = np.array([[1.0, 1.0], [2.0, 3.0], [4.0, 2.0]])
    objectives = [QuadraticFunction(2 * np.eye(2), -2 * a, float(a @ a)) for a in anchors]
    line = QuadraticFunction.linear([1.0, 2.0], -10.0)
    return ProblemSpec(2, 3, objectives, [line], [0.0, 0.0], [10.0, 4.0], cone, "ex8.2")


_B_HAT = np.array([[0.0, 10.0, 120.0], [80.0, -448.0, 80.0], [-448.0, 80.0, 80.0]])


def _shifted_norm_example(n: int, cone: OrderingCone, name: str) -> ProblemSpec:
    reps = n // 3
    objectives = [QuadraticFunction(2 * np.eye(n), np.tile(b, reps), 0.0) for b in _B_HAT]
    ball = QuadraticFunction(np.eye(n), np.zeros(n), -50.0)
    return ProblemSpec(n, 3, objectives, [ball], np.zeros(n), 10 * np.ones(n), cone, name)


CATALOG = ("ex8.1-q2", "ex8.1-q3", "ex8.1-q4", "ex8.2", "ex8.3a", "ex8.3b")


def catalog(name: str, cone: OrderingCone | None = None) -> ProblemSpec:
    """Benchmark problems by name; the cone defaults to the nonnegative orthant."""
    if name not in CATALOG:
        raise UnknownName(name)
    if name.startswith("ex8.1-q"):
        q = int(name[-1])
        return _ball_example(q, cone or OrderingCone.orthant(q))
    cone = cone or OrderingCone.orthant(3)
    if name == "ex8.2":
        return _location_example(cone)
    return _shifted_norm_example(3 if name == "ex8.3a" else 9, cone, name)


def problem_from_dict(data: dict) -> ProblemSpec:
    n, q = int(data["n"]), int(data["q"])
    objectives = [QuadraticFunction.from_dict(f) for f in data["objectives"]]
    constraints = [QuadraticFunction.from_dict(g) for g in data.get("constraints", [])]
    box = data["box"]
    cone = cone_from_dict(data.get("cone", "orthant"), q)
    return ProblemSpec(n, q, objectives, constraints, box["lo"], box["hi"], cone, data.get("name", ""))


def load_problem(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def resolve_problem(ref: str, cone: OrderingCone | None = None) -> ProblemSpec:
    """Catalog name or path to a problem file."""
    if ref in CATALOG:
        return catalog(ref, cone)
    problem = load_problem(ref)
    if cone is not None:
        problem = ProblemSpec(problem.n, problem.q, problem.objectives, problem.constraints,
                              problem.lower, problem.upper, cone, problem.name)
    return problem
