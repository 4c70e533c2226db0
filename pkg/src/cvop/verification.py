"""Independent checks of approximation runs.

Nothing here uses the barrier solver: distances are recomputed with
scipy's SLSQP from several starting points, and points of the upper image
are produced by sampling feasible decisions and adding cone elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import SamplingStarved
from .norms import parse_p
from .problem import ProblemSpec

MIN_ACCEPTANCE = 1e-4


@dataclass
class SampleCloud:
    """Points ``Gamma(x) + c`` of the upper image with their witnesses."""

    points: np.ndarray
    xs: np.ndarray
    cs: np.ndarray
    seed: int

    @property
    def count(self) -> int:
        return self.points.shape[0]


def sample_upper_image(problem: ProblemSpec, count: int, seed: int = 0,
                       radius: float = 1.0, batch: int = 10000) -> SampleCloud:
    """Rejection-sample feasible ``x`` in the box and add random cone elements.

    The cone part is ``sum_j u_j g_j`` over the primal generators with
    ``u_j`` uniform on ``[0, radius]``.
    """
    rng = np.random.default_rng(seed)
    n, q = problem.n, problem.q
    if count <= 0:
        return SampleCloud(np.empty((0, q)), np.empty((0, n)), np.empty((0, q)), seed)
    kept, drawn = [], 0
    while sum(len(k) for k in kept) < count:
        X = rng.uniform(problem.lower, problem.upper, size=(batch, n))
        drawn += batch
        ok = np.ones(batch, dtype=bool)
        for g in problem.constraints:
            vals = 0.5 * np.einsum("ki,ij,kj->k", X, g.Q, X) + X @ g.b + g.c
            ok &= vals <= 0.0
        kept.append(X[ok])
        accepted = sum(len(k) for k in kept)
        if accepted / drawn < MIN_ACCEPTANCE:
            raise SamplingStarved(f"acceptance rate {accepted / drawn:.2g} after {drawn} draws")
    X = np.vstack(kept)[:count]
    G = problem.cone.primal_generators
    U = rng.uniform(0.0, radius, size=(count, G.shape[0]))
    C = U @ G
    Y = np.array([problem.evaluate(x) for x in X]) + C
    return SampleCloud(Y, X, C, seed)


def _slsqp_distance(problem: ProblemSpec, v, p, x0, u0):
    """One local solve of ``min ||Gamma(x) + G'u - v||_p`` over feasible x, u >= 0."""
    n, q = problem.n, problem.q
    G = problem.cone.primal_generators
    J = G.shape[0]
    cons = []
    for g in problem.constraints:
        cons.append({"type": "ineq", "fun": (lambda y, g=g: -g(y[:n])),
                     "jac": (lambda y, g=g: np.concatenate([-g.gradient(y[:n]),
                                                            np.zeros(y.size - n)]))})
    bounds = [(lo, hi) for lo, hi in zip(problem.lower, problem.upper)] + [(0.0, None)] * J

    def residual(y):
        return problem.evaluate(y[:n]) + G.T @ y[n:n + J] - v

    def residual_jac(y):
        return np.hstack([problem.jacobian(y[:n]), G.T])

    if p == 2.0:
        y0 = np.concatenate([x0, u0])
        # SLSQP stops early on badly scaled objectives
        scale = 1.0 / max(1.0, float(residual(y0) @ residual(y0)))

        def f(y):
            r = residual(y)
            return 0.5 * scale * (r @ r), scale * (residual_jac(y).T @ r)
        res = minimize(f, y0, jac=True, bounds=bounds, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 500})
        return float(np.linalg.norm(residual(res.x)))
    # epigraph form for the nonsmooth norms
    k = q if p == 1.0 else 1
    y0 = np.concatenate([x0, u0, np.full(k, np.max(np.abs(residual(np.concatenate([x0, u0])))) + 1)])
    bounds = bounds + [(None, None)] * k
    m = y0.size
    sel = np.arange(q) if p == 1.0 else np.zeros(q, dtype=int)

    def epi(y):
        r = residual(y[:n + J])
        t = y[n + J:][sel]
        return np.concatenate([t - r, t + r])

    def epi_jac(y):
        R = residual_jac(y[:n + J])
        T = np.zeros((q, k))
        T[np.arange(q), sel] = 1.0
        top = np.hstack([-R, T])
        bot = np.hstack([R, T])
        return np.vstack([top, bot])

    cons = cons + [{"type": "ineq", "fun": epi, "jac": epi_jac}]
    cost = np.zeros(m)
    cost[n + J:] = 1.0 / max(1.0, float(y0[-1]))
    res = minimize(lambda y: (cost @ y, cost), y0, jac=True, bounds=bounds, constraints=cons,
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    y = res.x.copy()
    x = np.clip(y[:n], problem.lower, problem.upper)
    u = np.maximum(y[n:n + J], 0.0)
    if not problem.is_feasible(x, 1e-9):
        return np.inf
    return float(np.linalg.norm(problem.evaluate(x) + G.T @ u - v, ord=p))


def oracle_distance(problem: ProblemSpec, v, p, restarts: int = 32, seed: int = 0) -> float:
    """Distance from ``v`` to the upper image by multi-start SLSQP.

    Each local result is re-evaluated at a feasible point, so the value is
    an upper bound on the true distance up to the constraint tolerance.
    """
    p = parse_p(p)
    v = np.asarray(v, dtype=float)
    rng = np.random.default_rng(seed)
    J = problem.cone.primal_generators.shape[0]
    cloud = sample_upper_image(problem, max(restarts - 1, 0), seed=seed) if restarts > 1 else None
    starts = [problem.interior_point()]
    if cloud is not None:
        starts += list(cloud.xs)
    best = np.inf
    for x0 in starts[:max(restarts, 1)]:
        u0 = rng.uniform(0.0, 0.1, size=J)
        try:
            d = _slsqp_distance(problem, v, p, x0, u0)
        except (ValueError, np.linalg.LinAlgError):
            continue
        best = min(best, d)
    return best


def ball_orthant_distance(v, center, radius: float = 1.0) -> float:
    """Euclidean distance from ``v`` to ``ball(center, radius) + R^q_+``.

    By duality the distance is ``max(0, ||(center - v)_+|| - radius)``.
    """
    gap = np.maximum(np.asarray(center, dtype=float) - np.asarray(v, dtype=float), 0.0)
    return max(0.0, float(np.linalg.norm(gap)) - radius)


@dataclass
class Certificate:
    passed: bool
    violations: list = field(default_factory=list)
    checked: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "violations": self.violations, "checked": self.checked}


def certify(report, problem: ProblemSpec, cloud: SampleCloud, restarts: int = 4,
            contain_tol: float = 1e-6, rel_tol: float = 1e-3, primal_tol: float = 1e-6) -> Certificate:
    """Check a run against independent data.

    (i) every cloud point lies in the outer set; (ii) the oracle distance of
    every final vertex agrees with the reported one; (iii) every recorded
    scalarization is primal feasible and its supporting halfspace contains
    the cloud.
    """
    violations = []
    outer = report.outer
    if cloud.count:
        slack = cloud.points @ outer.A.T - outer.b
        worst = slack.min(axis=1)
        for i in np.flatnonzero(worst < -contain_tol):
            violations.append({"check": "containment", "point": cloud.points[i].tolist(),
                               "slack": float(worst[i])})
    p = report.config.p
    for v, d in zip(report.final_vertices, report.final_distances):
        od = oracle_distance(problem, v, p, restarts=restarts)
        if abs(od - d) > rel_tol * (1.0 + d):
            violations.append({"check": "oracle_distance", "vertex": v.tolist(),
                               "reported": float(d), "oracle": float(od)})
    D = problem.cone.dual_generators
    for rec in report.scalarizations:
        r = rec.result
        gap = D @ (r.y_v - r.gamma_x)
        if np.min(gap) < -primal_tol:
            violations.append({"check": "primal_feasibility", "vertex": r.v.tolist(),
                               "gap": float(np.min(gap))})
        if np.linalg.norm(r.w_v) > 1e-7 and cloud.count:
            w = r.w_v / np.linalg.norm(r.w_v)
            s = cloud.points @ w - w @ r.gamma_x
            if np.min(s) < -contain_tol:
                violations.append({"check": "halfspace_validity", "vertex": r.v.tolist(),
                                   "slack": float(np.min(s))})
    checked = {"cloud_points": cloud.count, "vertices": len(report.final_vertices),
               "scalarizations": len(report.scalarizations)}
    return Certificate(not violations, violations, checked)
