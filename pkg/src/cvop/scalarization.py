"""Weighted-sum and norm-minimizing scalarizations.

The norm-minimizing problem for a point ``v`` is::

    minimize ||z||_p  subject to  w_j @ (Gamma(x) - z - v) <= 0  for every dual generator w_j,
                                  x feasible

Its optimal value is the distance from ``v`` to the upper image and its
cone-constraint multipliers give a dual vector ``w`` that defines a
supporting halfspace of the upper image through ``v + z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNormal, DualDegenerate, InfeasibleError
from .geometry import Halfspace
from .norms import dual_norm, parse_p
from .problem import ProblemSpec
from .quadratic import QuadraticFunction
from .solver import ConvexProgram, phase1, solve

ZERO_TOL = 1e-7
# below this distance the solver answer is double-checked by a membership test
MEMBERSHIP_CHECK = 1e-4


@dataclass
class WeightedSumResult:
    w: np.ndarray
    x: np.ndarray
    value: float
    gamma: np.ndarray


@dataclass
class ScalarizationResult:
    """Solution of the norm-minimizing problem at ``v``.

    ``y_v = v + z_v`` is a weakly minimal point of the upper image whenever
    ``v`` is not interior; ``w_v`` lies in the dual cone with dual norm at
    most one.
    """

    v: np.ndarray
    p: float
    x_v: np.ndarray
    z_v: np.ndarray
    w_v: np.ndarray
    distance: float
    gamma_x: np.ndarray
    residuals: dict = field(default_factory=dict)
    newton_steps: int = 0
    interior: bool = False

    @property
    def y_v(self) -> np.ndarray:
        return self.v + self.z_v


def _cone_rows(problem: ProblemSpec, v, m: int, z_index):
    """``w_j @ (Gamma(x) - z - v) <= 0`` as quadratics over ``m`` variables."""
    n = problem.n
    rows = []
    for w in problem.cone.dual_generators:
        f = problem.weighted_objective(w)
        Q = np.zeros((m, m))
        Q[:n, :n] = f.Q
        b = np.zeros(m)
        b[:n] = f.b
        if z_index is not None:
            b[z_index] = -w
        rows.append(QuadraticFunction(Q, b, f.c - float(w @ v)))
    return rows


def _bounds(problem: ProblemSpec, m: int):
    lo = np.full(m, -np.inf)
    hi = np.full(m, np.inf)
    lo[:problem.n] = problem.lower
    hi[:problem.n] = problem.upper
    return lo, hi


def weighted_sum(problem: ProblemSpec, w, tol: float = 1e-8) -> WeightedSumResult:
    """Minimize ``w @ Gamma(x)`` over the feasible set.

    Solved in epigraph form ``min r s.t. w @ Gamma(x) <= r``.
    """
    w = np.asarray(w, dtype=float)
    n = problem.n
    m = n + 1
    f = problem.weighted_objective(w).embed(m, np.arange(n))
    epi = QuadraticFunction(f.Q, f.b - np.eye(m)[n], f.c)
    cons = [epi] + [g.embed(m, np.arange(n)) for g in problem.constraints]
    lo, hi = _bounds(problem, m)
    cost = np.zeros(m)
    cost[n] = 1.0
    x0 = problem.interior_point()
    u0 = np.append(x0, float(w @ problem.evaluate(x0)) + 1.0)
    sol = solve(ConvexProgram(cost, cons, lo, hi), tol=tol, x0=u0)
    x = sol.primal[:n]
    gamma = problem.evaluate(x)
    return WeightedSumResult(w, x, float(w @ gamma), gamma)


def _membership_point(problem: ProblemSpec, v):
    """A feasible ``x`` with ``Gamma(x)`` strictly below ``v`` in the cone order, or None."""
    n = problem.n
    cons = _cone_rows(problem, v, n, None) + list(problem.constraints)
    try:
        return phase1(ConvexProgram(np.zeros(n), cons, problem.lower, problem.upper))
    except InfeasibleError:
        return None


def norm_min(problem: ProblemSpec, v, p, tol: float = 1e-8) -> ScalarizationResult:
    """Distance from ``v`` to the upper image with primal and dual solutions."""
    p = parse_p(p)
    v = np.asarray(v, dtype=float)
    n, q = problem.n, problem.q
    cone = problem.cone
    iz = np.arange(n, n + q)
    if p == 2.0:
        naux = 1
    elif p == 1.0:
        naux = q
    else:
        naux = 1
    m = n + q + naux
    ia = np.arange(n + q, m)
    cons = _cone_rows(problem, v, m, iz)
    ncone = len(cons)
    cons += [g.embed(m, np.arange(n)) for g in problem.constraints]
    eye = np.eye(m)
    if p == 2.0:
        # 0.5*||z||^2 - 0.5*s <= 0
        Q = np.zeros((m, m))
        Q[iz, iz] = 1.0
        cons.append(QuadraticFunction(Q, -0.5 * eye[ia[0]], 0.0))
    elif p == 1.0:
        for i in range(q):
            cons.append(QuadraticFunction.linear(eye[iz[i]] - eye[ia[i]]))
            cons.append(QuadraticFunction.linear(-eye[iz[i]] - eye[ia[i]]))
    else:
        for i in range(q):
            cons.append(QuadraticFunction.linear(eye[iz[i]] - eye[ia[0]]))
            cons.append(QuadraticFunction.linear(-eye[iz[i]] - eye[ia[0]]))
    cost = np.zeros(m)
    cost[ia] = 1.0
    lo, hi = _bounds(problem, m)

    # strictly feasible start: shift z so Gamma(x0) - z - v points into -Int C
    x0 = problem.interior_point()
    z0 = problem.evaluate(x0) - v + cone.primal_generators.sum(axis=0)
    if p == 2.0:
        a0 = [float(z0 @ z0) + 1.0]
    elif p == 1.0:
        a0 = np.abs(z0) + 1.0
    else:
        a0 = [float(np.max(np.abs(z0))) + 1.0]
    u0 = np.concatenate([x0, z0, a0])

    sol = solve(ConvexProgram(cost, cons, lo, hi), tol=tol, x0=u0)
    x = sol.primal[:n]
    z = sol.primal[iz]
    lam = np.maximum(sol.multipliers[:ncone], 0.0)
    w = lam @ cone.dual_generators
    dist = float(np.linalg.norm(z, ord=p))
    interior = False

    if dist <= MEMBERSHIP_CHECK:
        xin = _membership_point(problem, v)
        if xin is not None:
            return ScalarizationResult(v, p, xin, np.zeros(q), np.zeros(q), 0.0,
                                       problem.evaluate(xin), sol.residuals,
                                       sol.newton_steps, True)
        # boundary points: the solver converges slowly there, but a strictly
        # dominated point within ZERO_TOL / 2 certifies a zero distance
        c = cone.primal_generators.sum(axis=0)
        c = c / np.linalg.norm(c, ord=p)
        xb = _membership_point(problem, v + 0.5 * ZERO_TOL * c)
        if xb is not None:
            return ScalarizationResult(v, p, xb, np.zeros(q), np.zeros(q), 0.0,
                                       problem.evaluate(xb), sol.residuals,
                                       sol.newton_steps, False)
    if dist <= ZERO_TOL:
        dist = 0.0
        z = np.zeros(q)
    if p == 2.0 and dist > ZERO_TOL:
        w = z / dist
    else:
        dn = dual_norm(w, p)
        if dn > 1.0:
            w = w / dn
    if dist > ZERO_TOL and np.linalg.norm(w) <= ZERO_TOL:
        raise DualDegenerate(f"zero dual vector at distance {dist:.3g} for v={v.tolist()}")
    return ScalarizationResult(v, p, x, z, w, dist, problem.evaluate(x), sol.residuals,
                               sol.newton_steps, interior)


def supporting_halfspace(result: ScalarizationResult) -> Halfspace:
    """``{y | w_v @ y >= w_v @ Gamma(x_v)}``, which contains the upper image."""
    w = result.w_v
    if np.linalg.norm(w) <= ZERO_TOL:
        raise DegenerateNormal("dual vector is zero")
    return Halfspace(w, float(w @ result.gamma_x))


def lp_halfspace_from_z(result: ScalarizationResult, p=None) -> Halfspace:
    """Supporting halfspace with normal ``sign(z_i) * |z_i|**(p-1)``.

    For ``p = 1`` zero components of ``z`` contribute zero; if that leaves a
    zero normal the multiplier-based dual vector is used instead.
    """
    p = parse_p(result.p if p is None else p)
    if p == np.inf:
        raise ValueError("no z-based normal for p = inf")
    z = result.z_v
    scale = np.max(np.abs(z))
    if scale <= ZERO_TOL:
        raise DegenerateNormal("z_v is zero")
    if p == 1.0:
        normal = np.where(np.abs(z) > ZERO_TOL, np.sign(z), 0.0)
    else:
        normal = np.sign(z) * (np.abs(z) / scale) ** (p - 1)
    if np.linalg.norm(normal) <= ZERO_TOL:
        return supporting_halfspace(result)
    return Halfspace(normal, float(normal @ result.gamma_x))
