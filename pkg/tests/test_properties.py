import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from cvop.cones import (BUILTIN_CONES, OrderingCone, builtin, dual_cone, in_cone, leq_C,
                        same_cone)
from cvop.geometry import (Halfspace, add_halfspace, brute_force_vertices, contains,
                           dd_enumerate, same_point_sets)
from cvop.problem import CATALOG, catalog

seeds = st.integers(0, 2**32 - 1)


def random_hrep(seed, q=None, k=None):
    rng = np.random.default_rng(seed)
    q = q or int(rng.integers(2, 5))
    k = k or int(rng.integers(q, 13))
    A = rng.normal(size=(k, q))
    y0 = rng.normal(size=q)
    b = A @ y0 - rng.uniform(0, 1, size=k)
    return [Halfspace(a, c) for a, c in zip(A, b)], q


def spans(hs, q):
    return np.linalg.matrix_rank(np.array([h.normal for h in hs])) == q


@given(seeds)
def test_dd_matches_brute_force(seed):
    hs, q = random_hrep(seed)
    assume(spans(hs, q))
    P = dd_enumerate(hs)
    assert same_point_sets(P.vertices, brute_force_vertices(hs), 1e-7)
    for r in P.rays:
        assert np.all(P.A @ r >= -1e-7)


@given(seeds)
def test_incremental_equals_from_scratch(seed):
    hs, q = random_hrep(seed)
    assume(spans(hs[:q + 1], q))
    P = dd_enumerate(hs[:q + 1])
    for h in hs[q + 1:]:
        new = add_halfspace(P, h)
        if not new.redundant:
            for v in new.vertices:
                assert contains(P, v, 1e-7)
            P = new
    Q = dd_enumerate(hs)
    assert same_point_sets(P.vertices, Q.vertices, 1e-7)
    assert same_point_sets(P.rays, Q.rays, 1e-7)


@given(seeds)
def test_incidence_soundness(seed):
    hs, q = random_hrep(seed)
    assume(spans(hs, q))
    P = dd_enumerate(hs)
    for v, inc in zip(P.vertices, P.incidence):
        assert len(inc) >= q
        assert np.all(np.abs(P.slacks(v)[list(inc)]) <= 1e-7)


@given(seeds, st.sampled_from(sorted(BUILTIN_CONES) + ["orthant2", "orthant3"]))
def test_cuts_keep_the_recession_cone(seed, name):
    C = OrderingCone.orthant(int(name[-1])) if name.startswith("orthant") else builtin(name)
    rng = np.random.default_rng(seed)
    P = dd_enumerate([Halfspace(w, 0.0) for w in C.dual_generators])
    for _ in range(8):
        w = rng.uniform(0, 1, size=C.J) @ C.dual_generators
        v = P.vertices[rng.integers(len(P.vertices))]
        new = add_halfspace(P, Halfspace(w, w @ v + rng.uniform(0.01, 1)))
        P = new if not new.redundant else P
    assert same_cone(P.rays, C.primal_generators, 1e-7)


@given(seeds)
def test_duality_involution(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(2, 5))
    # random pointed solid cone around the all-ones direction
    G = np.ones(q) + rng.uniform(-0.6, 0.6, size=(q + int(rng.integers(0, 4)), q))
    assume(np.linalg.matrix_rank(G) == q)
    D = dual_cone(G)
    assert same_cone(dual_cone(D), G, 1e-9)
    assert np.min(D @ G.T) >= -1e-9


def test_leq_matches_componentwise():
    rng = np.random.default_rng(0)
    C = OrderingCone.orthant(3)
    for _ in range(1000):
        a, b = rng.integers(-2, 3, size=(2, 3)).astype(float)
        assert leq_C(C, a, b) == bool(np.all(a <= b))


@given(seeds, st.sampled_from(CATALOG))
def test_jacobian_finite_differences(seed, name):
    P = catalog(name)
    rng = np.random.default_rng(seed)
    x = rng.uniform(P.lower, P.upper)
    h = 1e-6 * (P.upper - P.lower)
    J = P.jacobian(x)
    Jfd = np.column_stack([(P.evaluate(x + h[i] * e) - P.evaluate(x - h[i] * e)) / (2 * h[i])
                           for i, e in enumerate(np.eye(P.n))])
    assert np.allclose(J, Jfd, rtol=1e-6, atol=1e-6 * (1 + np.abs(J).max()))


@given(seeds, st.sampled_from(CATALOG))
def test_scalarized_objectives_are_convex(seed, name):
    P = catalog(name)
    rng = np.random.default_rng(seed)
    X1, X2 = rng.uniform(P.lower, P.upper, size=(2, 50, P.n))
    for w in P.cone.dual_generators:
        f = P.weighted_objective(w)
        for a, b in zip(X1, X2):
            scale = 1 + abs(f(a)) + abs(f(b))
            assert f(0.5 * (a + b)) <= 0.5 * (f(a) + f(b)) + 1e-9 * scale


def test_cone_membership_of_generators():
    for name in BUILTIN_CONES:
        C = builtin(name)
        for g in C.primal_generators:
            assert in_cone(C.primal_generators, g)
