"""Outer and inner polyhedral approximation of the upper image.

Two cutting-plane loops are provided.  Both start from the weighted-sum
solutions for the dual cone generators, repeatedly enumerate the vertices
of the current outer polyhedron, compute each vertex's distance to the
upper image, and cut off a vertex farther than ``epsilon`` with the
supporting halfspace from its dual solution.

``run_algorithm1`` enumerates the outer polyhedron itself.
``run_algorithm2`` first cuts every initial vertex that is too far, then
enumerates the outer polyhedron intersected with a bounding slab
``{y | w_bar @ y <= beta + alpha}``.  The slab keeps the enumerated region
compact and is never part of the returned outer set.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .cones import reference_direction
from .errors import CVOPError, DimensionTooLarge, IterationLimit
from .geometry import (TOL_FEAS, TOL_VERTEX, Halfspace, Polyhedron, VRep,
                       add_halfspace, dd_enumerate)
from .norms import p_label, parse_p
from .problem import ProblemSpec
from .quadratic import QuadraticFunction
from .scalarization import (ScalarizationResult, norm_min, supporting_halfspace,
                            weighted_sum)
from .solver import DEFAULT_MAX_NEWTON, ConvexProgram, solve

logger = logging.getLogger(__name__)

MAX_BOX_DIM = 20


@dataclass
class RunConfig:
    """Parameters of one approximation run.

    ``keep_cut_minimizers`` adds the minimizer of every scalarized vertex to
    the solution set, including vertices that get cut.  With ``False`` only
    vertices within ``epsilon`` contribute, which gives smaller sets.
    """

    epsilon: float
    p: float = 2.0
    variant: str = "alg1"
    vertex_rule: str = "first"
    alpha_margin: float = 0.1
    max_iterations: int = 10000
    tol_feas: float = TOL_FEAS
    tol_vertex: float = TOL_VERTEX
    solver_tol: float = 1e-8
    keep_cut_minimizers: bool = True

    def __post_init__(self):
        self.epsilon = float(self.epsilon)
        self.p = parse_p(self.p)
        if str(self.variant) in ("1", "alg1"):
            self.variant = "alg1"
        elif str(self.variant) in ("2", "alg2"):
            self.variant = "alg2"
        else:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.vertex_rule not in ("first", "farthest"):
            raise ValueError(f"unknown vertex rule {self.vertex_rule!r}")
        if not self.epsilon > 10 * self.solver_tol:
            raise ValueError("epsilon must exceed ten times the solver tolerance")
        if not self.alpha_margin > 0:
            raise ValueError("alpha_margin must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon, "p": p_label(self.p), "variant": self.variant,
            "vertex_rule": self.vertex_rule, "alpha_margin": self.alpha_margin,
            "max_iterations": self.max_iterations, "tol_feas": self.tol_feas,
            "tol_vertex": self.tol_vertex, "solver_tol": self.solver_tol,
            "keep_cut_minimizers": self.keep_cut_minimizers,
        }


@dataclass
class SlabInfo:
    w_bar: np.ndarray
    beta: float
    alpha: float
    delta_h: float
    halfspace: Halfspace


@dataclass
class SolveReport:
    """Result of a run.

    ``outer`` is the returned outer approximation; ``enumerated`` is the
    polyhedron whose vertices were checked last (the outer set itself, or its
    intersection with the slab).  ``final_vertices`` and ``final_distances``
    refer to ``enumerated``.
    """

    problem: str
    config: RunConfig
    solution_set: list
    outer: Polyhedron
    enumerated: Polyhedron
    inner_vrep: VRep
    final_vertices: np.ndarray
    final_distances: np.ndarray
    stats: dict
    certified_bound: float
    certified: bool
    bound_history: list = field(default_factory=list)
    scalarizations: list = field(default_factory=list)
    slab: SlabInfo | None = None
    initial: Polyhedron | None = None

    @property
    def cardinality(self) -> int:
        return len(self.solution_set)

    @property
    def images(self) -> np.ndarray:
        q = self.outer.dim
        return np.array([g for _, g in self.solution_set]).reshape(-1, q)


@dataclass
class _Record:
    vertex: np.ndarray
    result: ScalarizationResult
    round: int
    cut: bool = False


class _Run:
    """Mutable state shared by both algorithms."""

    def __init__(self, problem: ProblemSpec, config: RunConfig):
        self.problem = problem
        self.config = config
        self.solutions = []
        self.records = []
        self._known = np.empty((0, problem.q))
        self.opt = 0
        self.en = 0
        self.cuts = 0
        self.rounds = 0
        self.t_opt = 0.0
        self.t_en = 0.0
        self.t0 = time.perf_counter()
        self.bound_history = []

    def add_solution(self, x):
        x = np.asarray(x, dtype=float)
        for xs, _ in self.solutions:
            if np.max(np.abs(xs - x)) <= 1e-9:
                return
        self.solutions.append((x.copy(), self.problem.evaluate(x)))

    def weighted_sum(self, w):
        t = time.perf_counter()
        res = weighted_sum(self.problem, w, self.config.solver_tol)
        self.t_opt += time.perf_counter() - t
        self.opt += 1
        return res

    def lookup(self, v):
        if self._known.shape[0] == 0:
            return None
        d = np.max(np.abs(self._known - v), axis=1)
        i = int(np.argmin(d))
        return self.records[i] if d[i] <= self.config.tol_vertex else None

    def scalarize(self, v) -> _Record:
        t = time.perf_counter()
        res = norm_min(self.problem, v, self.config.p, self.config.solver_tol)
        self.t_opt += time.perf_counter() - t
        self.opt += 1
        rec = _Record(np.array(v, dtype=float), res, self.rounds)
        self.records.append(rec)
        self._known = np.vstack([self._known, rec.vertex])
        if self.config.keep_cut_minimizers or res.distance <= self.config.epsilon:
            self.add_solution(res.x_v)
        return rec

    def enumerate(self, fn, *args) -> Polyhedron:
        t = time.perf_counter()
        poly = fn(*args)
        self.t_en += time.perf_counter() - t
        return poly

    def cut(self, poly: Polyhedron, rec: _Record) -> Polyhedron:
        h = supporting_halfspace(rec.result)
        t = time.perf_counter()
        new = add_halfspace(poly, h)
        self.t_en += time.perf_counter() - t
        rec.cut = True
        self.cuts += 1
        return new

    def stats(self) -> dict:
        return {
            "opt_count": self.opt, "en_count": self.en, "iterations": self.cuts,
            "rounds": self.rounds, "t_opt": self.t_opt, "t_en": self.t_en,
            "t_total": time.perf_counter() - self.t0,
        }


def initialize(problem: ProblemSpec, p=2.0, solver_tol: float = 1e-8, run: _Run | None = None):
    """Weighted-sum solves for every dual generator and the initial outer set.

    Returns ``(X_0, P_out_0, V_0, opt_count)``.
    """
    X0, halfspaces = [], []
    for w in problem.cone.dual_generators:
        res = run.weighted_sum(w) if run else weighted_sum(problem, w, solver_tol)
        X0.append(res.x)
        halfspaces.append(Halfspace(w, res.value))
    if run:
        P0 = run.enumerate(dd_enumerate, halfspaces, run.config.tol_feas, run.config.tol_vertex)
    else:
        P0 = dd_enumerate(halfspaces)
    return X0, P0, P0.vertices.copy(), len(X0)


def compute_beta(problem: ProblemSpec, w_bar) -> float:
    """Upper bound on ``w_bar @ Gamma(x)`` over the feasible set.

    ``w_bar @ Gamma`` is convex, so its maximum over the enclosing box is
    attained at one of the ``2**n`` box corners.
    """
    n = problem.n
    if n > MAX_BOX_DIM:
        raise DimensionTooLarge(f"box has 2**{n} corners")
    f = problem.weighted_objective(w_bar)
    corners = np.array(list(itertools.product(*zip(problem.lower, problem.upper))))
    vals = 0.5 * np.einsum("ki,ij,kj->k", corners, f.Q, corners) + corners @ f.b + f.c
    return float(np.max(vals))


def build_S(problem: ProblemSpec, V0, distances, config: RunConfig) -> SlabInfo:
    """Slab ``{w_bar @ y <= beta + alpha}`` for the second algorithm."""
    w_bar = reference_direction(problem.cone, config.p)
    beta = compute_beta(problem, w_bar)
    V0 = np.atleast_2d(np.asarray(V0, dtype=float))
    delta_h = float(np.max(distances)) if len(distances) else 0.0
    excess = float(np.max(np.maximum(V0 @ w_bar - beta, 0.0))) if V0.size else 0.0
    alpha = excess + delta_h + config.alpha_margin * max(1.0, delta_h)
    h = Halfspace(-w_bar, -(beta + alpha))
    return SlabInfo(w_bar, beta, alpha, delta_h, h)


def _loop(run: _Run, working: Polyhedron, slab: Halfspace | None):
    """Cut until every enumerated vertex is within epsilon.

    Returns ``(working, enumerated)``.
    """
    config = run.config
    eps = config.epsilon
    while True:
        if run.cuts >= config.max_iterations:
            raise IterationLimit(f"no termination after {run.cuts} cuts")
        enumerated = working if slab is None else run.enumerate(add_halfspace, working, slab)
        run.en += 1
        run.rounds += 1
        V = enumerated.vertices
        chosen = None
        complete = True
        if config.vertex_rule == "first":
            for v in V:
                rec = run.lookup(v) or run.scalarize(v)
                if rec.result.distance > eps:
                    chosen = rec
                    complete = False
                    break
        else:
            recs = [run.lookup(v) or run.scalarize(v) for v in V]
            best = max(recs, key=lambda r: r.result.distance)
            run.bound_history.append(best.result.distance)
            if best.result.distance > eps:
                chosen = best
        if chosen is None:
            if config.vertex_rule == "first" and complete:
                run.bound_history.append(max(run.lookup(v).result.distance for v in V))
            return working, enumerated
        working = run.cut(working, chosen)
        if working.redundant:
            raise CVOPError("supporting halfspace does not cut off its vertex")


def _finish(run: _Run, working, enumerated, slab_info=None, initial=None) -> SolveReport:
    problem, config = run.problem, run.config
    V = enumerated.vertices
    dists = np.array([run.lookup(v).result.distance for v in V])
    bound = float(np.max(dists)) if dists.size else 0.0
    report = SolveReport(
        problem=problem.name, config=config, solution_set=list(run.solutions),
        outer=working, enumerated=enumerated, inner_vrep=inner_vrep(problem, run.solutions),
        final_vertices=V.copy(), final_distances=dists, stats=run.stats(),
        certified_bound=bound, certified=bound <= config.epsilon,
        bound_history=list(run.bound_history), scalarizations=run.records,
        slab=slab_info, initial=initial)
    logger.info("%s %s eps=%g p=%s: |X|=%d opt=%d en=%d bound=%.3g", problem.name,
                config.variant, config.epsilon, p_label(config.p), report.cardinality,
                run.opt, run.en, bound)
    return report


def _partial(run: _Run, working, exc):
    try:
        enumerated = working
        V = enumerated.vertices
        known = [run.lookup(v) for v in V]
        dists = np.array([r.result.distance if r else np.inf for r in known])
        rep = SolveReport(run.problem.name, run.config, list(run.solutions), working, enumerated,
                          inner_vrep(run.problem, run.solutions), V.copy(), dists, run.stats(),
                          float(np.max(dists)) if dists.size else np.inf, False,
                          list(run.bound_history), run.records)
    except Exception:  # the partial report is best effort only
        rep = None
    exc.report = rep
    return exc


def run_algorithm1(problem: ProblemSpec, config: RunConfig) -> SolveReport:
    """Cutting-plane loop on the outer approximation itself."""
    run = _Run(problem, config)
    X0, P0, _, _ = initialize(problem, config.p, config.solver_tol, run)
    for x in X0:
        run.add_solution(x)
    working = P0
    try:
        working, enumerated = _loop(run, working, None)
    except IterationLimit as exc:
        raise _partial(run, working, exc)
    return _finish(run, working, enumerated, initial=P0)


def run_algorithm2(problem: ProblemSpec, config: RunConfig) -> SolveReport:
    """Initial refinement over the first vertices, then the slab-bounded loop."""
    run = _Run(problem, config)
    X0, P0, V0, _ = initialize(problem, config.p, config.solver_tol, run)
    for x in X0:
        run.add_solution(x)
    run.en += 1
    run.rounds += 1
    recs = [run.scalarize(v) for v in V0]
    working = P0
    for rec in recs:
        if rec.result.distance > config.epsilon:
            h = supporting_halfspace(rec.result)
            t = time.perf_counter()
            new = add_halfspace(working, h)
            run.t_en += time.perf_counter() - t
            rec.cut = True
            if not new.redundant:
                working = new
                run.cuts += 1
    info = build_S(problem, V0, [r.result.distance for r in recs], config)
    try:
        working, enumerated = _loop(run, working, info.halfspace)
    except IterationLimit as exc:
        raise _partial(run, working, exc)
    return _finish(run, working, enumerated, info, initial=P0)


def run(problem: ProblemSpec, config: RunConfig) -> SolveReport:
    if config.variant == "alg1":
        return run_algorithm1(problem, config)
    return run_algorithm2(problem, config)


def inner_vrep(problem: ProblemSpec, solutions) -> VRep:
    """Generators of ``conv Gamma(X) + C``: the images and the cone generators."""
    q = problem.q
    pts = np.array([g for _, g in solutions]).reshape(-1, q)
    return VRep(pts, problem.cone.primal_generators.copy())


def _distance_subset(v, G, R, p, tol):
    """Distance from ``v`` to ``conv G + cone R`` and a dual vector at the optimum.

    The last row of ``G`` is the base point of the parametrization.
    """
    N, q = G.shape
    J = R.shape[0]
    # point = G[-1] + sum_i mu_i (G[i] - G[-1]) + R' nu, with mu >= 0, sum mu <= 1
    D = (G[:-1] - G[-1]).T  # q x (N-1)
    k = N - 1 + J
    M = np.hstack([D, R.T])  # residual r = r0 - M @ c
    # shift the base by the best nonnegative ray combination so that r0 is
    # small and the quadratic form below does not cancel
    nu0 = nnls(R.T, v - G[-1])[0] if J else np.zeros(0)
    r0 = v - G[-1] - R.T @ nu0
    naux = 1 if p != 1.0 else q
    m = k + naux
    ia = np.arange(k, m)
    eye = np.eye(m)
    cons = []
    Mfull = np.zeros((q, m))
    Mfull[:, :k] = M
    if p == 2.0:
        # 0.5*||r0 - M c||^2 - 0.5*s <= 0
        Q = Mfull.T @ Mfull
        b = -Mfull.T @ r0 - 0.5 * eye[ia[0]]
        cons.append(QuadraticFunction(0.5 * (Q + Q.T), b, 0.5 * float(r0 @ r0)))
    else:
        for i in range(q):
            t = eye[ia[i]] if p == 1.0 else eye[ia[0]]
            cons.append(QuadraticFunction.linear(-Mfull[i] - t, r0[i]))
            cons.append(QuadraticFunction.linear(Mfull[i] - t, -r0[i]))
    if N > 1:
        simplex = np.zeros(m)
        simplex[:N - 1] = 1.0
        cons.append(QuadraticFunction.linear(simplex, -1.0))
    lo = np.full(m, -np.inf)
    lo[:k] = 0.0
    lo[N - 1:k] = -nu0
    c0 = np.zeros(m)
    c0[:N - 1] = 0.01 / N
    c0[N - 1:k] = 0.01
    res0 = r0 - M @ c0[:k]
    if p == 2.0:
        c0[ia] = float(res0 @ res0) + 1.0
    elif p == 1.0:
        c0[ia] = np.abs(res0) + 1.0
    else:
        c0[ia] = np.max(np.abs(res0)) + 1.0
    cost = np.zeros(m)
    cost[ia] = 1.0
    # centering steps per barrier stage grow with the number of rows
    sol = solve(ConvexProgram(cost, cons, lo, None), tol=tol, x0=c0,
                max_newton=DEFAULT_MAX_NEWTON + 10 * m)
    c = np.maximum(sol.primal[:k], lo[:k])
    z = r0 - M @ c
    if p == 2.0:
        w = z / max(np.linalg.norm(z), 1e-300)
    else:
        lam = sol.multipliers[:2 * q]
        w = lam[0::2] - lam[1::2]
    return float(np.linalg.norm(z, ord=p)), v - z, w


def distance_to_inner(v, inner: VRep, p=2.0, max_generators: int | None = None,
                      tol: float = 1e-9) -> float:
    """Distance from ``v`` to ``conv(inner.vertices) + cone(inner.rays)``.

    Generators are added in rounds: a small program over the points nearest
    to ``v`` is solved, then the points that violate its optimality condition
    join.  With ``max_generators`` only that many nearest points are
    considered and the result is an upper bound on the true distance.
    """
    p = parse_p(p)
    v = np.asarray(v, dtype=float)
    G = np.asarray(inner.vertices, dtype=float)
    R = np.asarray(inner.rays, dtype=float).reshape(-1, G.shape[1])
    if G.shape[0] == 0:
        raise ValueError("inner set has no vertices")
    order = np.argsort(np.linalg.norm(G - v, axis=1))
    if max_generators is not None:
        order = order[:max_generators]
    q = G.shape[1]
    batch = 2 * q + 2
    active = list(order[:batch])
    while True:
        # the nearest point goes last and serves as base, keeping the residual small
        d, y, w = _distance_subset(v, G[active[::-1]], R, p, tol)
        if d <= tol:
            return d
        rest = np.setdiff1d(order, active)
        if rest.size == 0:
            return d
        gain = G[rest] @ w - y @ w
        viol = rest[gain > 1e-9 * (1.0 + abs(y @ w))]
        if viol.size == 0:
            return d
        worst = viol[np.argsort(-(G[viol] @ w))][:batch]
        active.extend(int(i) for i in worst)


def hausdorff_report(report: SolveReport, max_generators: int | None = None) -> dict:
    """Distances of the final vertices to the upper image and to the inner set.

    On a certified run ``outer_vs_truth <= outer_vs_inner <= epsilon``.
    """
    p = report.config.p
    truth = float(np.max(report.final_distances)) if report.final_distances.size else 0.0
    inner = 0.0
    for v in report.final_vertices:
        inner = max(inner, distance_to_inner(v, report.inner_vrep, p, max_generators))
    return {"outer_vs_truth": truth, "outer_vs_inner": inner}
