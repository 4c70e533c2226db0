"""Log-barrier interior-point method for convex QCQPs with a linear cost.

Programs have the form::

    minimize    c @ u
    subject to  g_i(u) <= 0,   i = 1..k
                lower <= u <= upper      (optional)

where every ``g_i`` is a convex :class:`~cvop.quadratic.QuadraticFunction`.
The solver follows the central path with damped Newton steps and recovers
Lagrange multipliers as ``mu / -g_i(u)`` at the last barrier iterate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, MaxIterations, NumericalError
from .quadratic import QuadraticFunction

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_NEWTON = 200
RIDGE = 1e-12


@dataclass(eq=False)
class ConvexProgram:
    """Linear objective over convex quadratic inequality constraints."""

    objective: np.ndarray
    constraints: list[QuadraticFunction] = field(default_factory=list)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        m = self.objective.size
        for g in self.constraints:
            if g.dim != m:
                raise ValueError(f"constraint has {g.dim} variables, expected {m}")
            if not g.is_convex():
                raise ValueError("constraint Hessian is not positive semidefinite")
        if self.lower is not None:
            self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (m,)).copy()
        if self.upper is not None:
            self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (m,)).copy()
        self._stack()

    @property
    def m(self) -> int:
        return self.objective.size

    @property
    def n_user(self) -> int:
        return len(self.constraints)

    def _stack(self):
        m = self.m
        Q, B, c = [], [], []
        for g in self.constraints:
            Q.append(g.Q)
            B.append(g.b)
            c.append(g.c)
        # finite bounds become linear rows after the user constraints
        eye = np.eye(m)
        if self.lower is not None:
            for i in np.flatnonzero(np.isfinite(self.lower)):
                Q.append(np.zeros((m, m)))
                B.append(-eye[i])
                c.append(self.lower[i])
        if self.upper is not None:
            for i in np.flatnonzero(np.isfinite(self.upper)):
                Q.append(np.zeros((m, m)))
                B.append(eye[i])
                c.append(-self.upper[i])
        k = len(c)
        self._Q = np.array(Q).reshape(k, m, m)
        self._B = np.array(B).reshape(k, m)
        self._c = np.array(c, dtype=float)
        self._quad = np.flatnonzero(np.any(self._Q != 0, axis=(1, 2)))

    @property
    def n_rows(self) -> int:
        return self._c.size

    def values(self, u) -> np.ndarray:
        """All constraint values, bound rows included."""
        g = self._B @ u + self._c
        if self._quad.size:
            Qq = self._Q[self._quad]
            g[self._quad] += 0.5 * np.einsum("kij,i,j->k", Qq, u, u)
        return g

    def jacobian(self, u) -> np.ndarray:
        D = self._B.copy()
        if self._quad.size:
            D[self._quad] += self._Q[self._quad] @ u
        return D

    def start_point(self) -> np.ndarray:
        """Box midpoint where both bounds are finite, else 0 or a unit offset."""
        u = np.zeros(self.m)
        lo = np.full(self.m, -np.inf) if self.lower is None else self.lower
        hi = np.full(self.m, np.inf) if self.upper is None else self.upper
        both = np.isfinite(lo) & np.isfinite(hi)
        u[both] = 0.5 * (lo[both] + hi[both])
        only_lo = np.isfinite(lo) & ~np.isfinite(hi)
        u[only_lo] = lo[only_lo] + 1.0
        only_hi = ~np.isfinite(lo) & np.isfinite(hi)
        u[only_hi] = hi[only_hi] - 1.0
        return u


@dataclass
class KKTSolution:
    """Primal point, multipliers and KKT residuals of a solved program.

    ``multipliers`` holds one entry per user constraint; multipliers of the
    variable bounds are kept separately in ``bound_multipliers``.
    """

    primal: np.ndarray
    multipliers: np.ndarray
    objective_value: float
    residuals: dict
    bound_multipliers: np.ndarray
    newton_steps: int


def _newton_center(program, u, t, cost, max_steps, grad_tol, early_stop=None, dec_tol=0.0):
    """Minimize ``t*cost@u - sum(log(-g(u)))`` from a strictly feasible ``u``.

    Stops when the gradient norm is below ``grad_tol`` or half the squared
    Newton decrement is below ``dec_tol``.  Returns the new point and the
    number of Newton steps taken.
    """
    steps = 0
    while True:
        g = program.values(u)
        D = program.jacobian(u)
        r = 1.0 / (-g)
        grad = t * cost + D.T @ r
        H = (D.T * r**2) @ D
        if program._quad.size:
            H += np.einsum("k,kij->ij", r[program._quad], program._Q[program._quad])
        if np.linalg.norm(grad) <= grad_tol:
            return u, steps
        if steps >= max_steps:
            raise MaxIterations(f"Newton budget exhausted ({steps} steps)")
        try:
            delta = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            try:
                ridge = RIDGE * max(1.0, float(np.max(np.abs(np.diag(H)))))
                delta = np.linalg.solve(H + ridge * np.eye(H.shape[0]), -grad)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("singular Newton system") from exc
        if not np.all(np.isfinite(delta)):
            raise NumericalError("non-finite Newton direction")
        decrement = -grad @ delta
        steps += 1
        if decrement < 0:
            # numerically indefinite system; fall back to gradient direction
            delta = -grad / max(np.linalg.norm(grad), 1e-300)
            decrement = -grad @ delta
        if 0.5 * decrement <= max(dec_tol, 1e-14 * max(1.0, abs(t * cost @ u))):
            return u, steps
        f0 = t * cost @ u - np.sum(np.log(-g))
        alpha = 1.0
        while True:
            trial = u + alpha * delta
            gt = program.values(trial)
            if np.all(gt < 0):
                ft = t * cost @ trial - np.sum(np.log(-gt))
                if ft <= f0 - 0.25 * alpha * decrement:
                    break
            alpha *= 0.5
            if alpha < 1e-20:
                # no progress possible at this precision
                return u, steps
        u = trial
        if early_stop is not None and early_stop(u):
            return u, steps


def _barrier(program, u, tol, max_newton, mu0=1.0, early_stop=None, stage_cap=60):
    """Follow the central path until the gap bound ``k / t`` is below ``tol``.

    If a late stage cannot be centered within ``stage_cap`` steps (this
    happens on degenerate programs once function values lose precision)
    the last centered iterate is returned; the caller finishes with
    primal-dual steps.
    """
    cost = program.objective
    k = max(program.n_rows, 1)
    stage_cap = max(stage_cap, k)
    t = 1.0 / mu0
    steps = 0
    scale = 1.0 + np.linalg.norm(cost)
    centered = None
    while True:
        final = k / t <= tol
        # at the last stage the stationarity residual is |grad| / t
        grad_tol = (0.1 * tol * scale * t) if final else (1e-3 * t * scale)
        dec_tol = 1e-10 if final else 1e-5
        budget = max_newton - steps
        if centered is not None:
            budget = min(budget, stage_cap)
        try:
            u_new, used = _newton_center(program, u, t, cost, budget, grad_tol,
                                         early_stop, dec_tol)
        except (MaxIterations, NumericalError):
            if centered is not None and k / centered[1] <= 1e-4:
                logger.debug("centering stalled at t=%.1e, keeping t=%.1e", t, centered[1])
                return centered[0], centered[1], steps
            raise
        u = u_new
        steps += used
        if early_stop is not None and early_stop(u):
            return u, t, steps
        if final:
            return u, t, steps
        centered = (u, t)
        t *= 10.0


def _kkt_residual(program, u, lam, mu):
    g = program.values(u)
    D = program.jacobian(u)
    r_d = program.objective + D.T @ lam
    r_c = lam * (-g) - mu
    return g, D, r_d, r_c


def _refine(program, u, lam, mu, max_steps=6):
    """Primal-dual Newton steps on the perturbed KKT system at fixed ``mu``.

    The barrier line search works on function values of size ``t * c@u`` and
    stalls once those lose precision; the KKT residuals do not suffer from
    that cancellation, so a few steps here recover accurate multipliers.
    """
    g, D, r_d, r_c = _kkt_residual(program, u, lam, mu)
    best = np.linalg.norm(r_d) + np.linalg.norm(r_c)
    for _ in range(max_steps):
        HL = np.zeros((program.m, program.m))
        if program._quad.size:
            HL = np.einsum("k,kij->ij", lam[program._quad], program._Q[program._quad])
        s = -g
        M = HL + (D.T * (lam / s)) @ D
        rhs = -r_d + D.T @ (r_c / s)
        try:
            du = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            try:
                du = np.linalg.solve(M + RIDGE * np.eye(program.m), rhs)
            except np.linalg.LinAlgError:
                break
        dlam = (-r_c + lam * (D @ du)) / s
        # fraction to the boundary on both lam and -g
        alpha = 1.0
        neg = dlam < 0
        if np.any(neg):
            alpha = min(alpha, 0.99 * np.min(-lam[neg] / dlam[neg]))
        while alpha > 1e-8 and np.any(program.values(u + alpha * du) >= 0):
            alpha *= 0.5
        if alpha <= 1e-8:
            break
        u_new, lam_new = u + alpha * du, lam + alpha * dlam
        g_new, D_new, rd_new, rc_new = _kkt_residual(program, u_new, lam_new, mu)
        score = np.linalg.norm(rd_new) + np.linalg.norm(rc_new)
        if not score < best:
            break
        u, lam, g, D, r_d, r_c, best = u_new, lam_new, g_new, D_new, rd_new, rc_new, score
        if np.linalg.norm(r_d) <= 1e-14 * (1 + np.linalg.norm(program.objective)):
            break
    return u, lam


def _continue_path(program, u, lam, mu, mu_min=1e-15, max_rounds=20):
    """Drive the complementarity target from ``mu`` towards ``mu_min``.

    Where strict complementarity fails the primal error of a barrier iterate
    scales like ``sqrt(mu)``; shrinking ``mu`` with primal-dual steps is cheap
    and removes most of that error.
    """
    for _ in range(max_rounds):
        if mu <= mu_min:
            break
        mu = max(mu * 0.1, mu_min)
        u, lam = _refine(program, u, lam, mu, max_steps=10)
    return u, lam


def phase1(program: ConvexProgram, tol: float = 1e-8, max_newton: int = DEFAULT_MAX_NEWTON) -> np.ndarray:
    """Find a strictly feasible point of ``program``.

    Minimizes an auxiliary slack ``s`` subject to ``g_i(u) <= s`` starting at
    the box midpoint, stopping as soon as every constraint has slack of at
    least one half (or at the optimum).

    Raises
    ------
    InfeasibleError
        If the optimal slack is not below ``-1e-10``.
    """
    u0 = program.start_point()
    g0 = program.values(u0)
    if g0.size == 0 or np.max(g0) < -1e-6:
        return u0
    m = program.m
    Q, B, c = program._Q, program._B, program._c
    rows = []
    for i in range(c.size):
        Qi = np.zeros((m + 1, m + 1))
        Qi[:m, :m] = Q[i]
        rows.append(QuadraticFunction(Qi, np.append(B[i], -1.0), c[i]))
    # floor s >= -1 keeps the auxiliary problem bounded below
    rows.append(QuadraticFunction.linear(np.append(np.zeros(m), -1.0), -1.0))
    aux = ConvexProgram(np.append(np.zeros(m), 1.0), rows)
    start = np.append(u0, np.max(g0) + 1.0)

    def good_enough(w):
        return w[-1] < -0.5

    try:
        w, _, _ = _barrier(aux, start, tol, max_newton, early_stop=good_enough)
    except MaxIterations:
        raise InfeasibleError("phase 1 did not converge") from None
    u = w[:m]
    if np.max(program.values(u)) >= -1e-10:
        raise InfeasibleError(f"no strictly feasible point (max slack {-np.max(program.values(u)):.3g})")
    return u


def solve(program: ConvexProgram, tol: float = DEFAULT_TOL, x0=None,
          max_newton: int = DEFAULT_MAX_NEWTON) -> KKTSolution:
    """Solve ``program`` to duality gap ``tol``.

    Parameters
    ----------
    program : ConvexProgram
    tol : float
        Target for the barrier gap ``k * mu`` and the KKT residuals.
    x0 : array, optional
        Strictly feasible start; :func:`phase1` is used when omitted or when
        ``x0`` is not strictly feasible.
    max_newton : int
        Budget of Newton steps over all barrier stages.
    """
    if x0 is not None:
        u = np.asarray(x0, dtype=float).copy()
        if program.n_rows and np.max(program.values(u)) >= 0:
            u = phase1(program, max_newton=max_newton)
    else:
        u = phase1(program, max_newton=max_newton)
    if program.n_rows == 0:
        if np.any(program.objective):
            raise NumericalError("unconstrained linear program is unbounded")
        return KKTSolution(u, np.zeros(0), 0.0,
                           {"stationarity": 0.0, "primal_feas": 0.0, "complementarity": 0.0},
                           np.zeros(0), 0)
    # first barrier weight matched to the objective scale so the initial
    # centering does not need many damped steps
    mu0 = max(1.0, abs(float(program.objective @ u)))
    u, t, steps = _barrier(program, u, tol, max_newton, mu0=mu0)
    g = program.values(u)
    lam = 1.0 / (t * -g)
    u, lam = _refine(program, u, lam, 1.0 / t)
    u, lam = _continue_path(program, u, lam, 1.0 / t)
    g = program.values(u)
    D = program.jacobian(u)
    stat = float(np.linalg.norm(program.objective + D.T @ lam))
    res = {
        "stationarity": stat,
        "primal_feas": float(np.max(g)),
        "complementarity": float(np.sum(lam * np.abs(g))),
    }
    nu = program.n_user
    logger.debug("barrier solve: %d Newton steps, residuals %s", steps, res)
    return KKTSolution(u, lam[:nu], float(program.objective @ u), res, lam[nu:], steps)
