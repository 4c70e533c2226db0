"""Acceptance gate.

Every test records its cases with the ``criterion`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.  Runs are cached for the
session, so criteria 4, 5, 7, 8 and 9 share the same solves.
"""

import time

import numpy as np
import pytest

from cvop.approximation import RunConfig, distance_to_inner, run
from cvop.cones import same_cone
from cvop.geometry import Halfspace, add_halfspace, dd_enumerate, same_point_sets
from cvop.norms import dual_norm
from cvop.problem import catalog
from cvop.scalarization import norm_min, weighted_sum
from cvop.verification import oracle_distance, sample_upper_image

R2 = np.sqrt(2.0)

# (problem, epsilon values, norms)
CERT_PROBLEMS = [
    ("ex8.1-q2", (0.05, 0.01), ("1", "2", "inf")),
    ("ex8.1-q3", (0.05, 0.01), ("1", "2", "inf")),
    ("ex8.2", (0.05, 0.01), ("1", "2", "inf")),
]
CERT_CASES = [(name, eps, p, alg) for name, epss, ps in CERT_PROBLEMS
              for eps in epss for p in ps for alg in (1, 2)]

# reference counts (|X|, Opt, En); None where no value is published
REF_BALL_Q3 = {  # ex8.1-q3
    (0.05, "1", 1): (33, 52, 20), (0.05, "1", 2): (42, 59, 17),
    (0.05, "2", 1): (29, 45, 17), (0.05, "2", 2): (44, 61, 17),
    (0.05, "inf", 1): (21, 34, 14), (0.05, "inf", 2): (37, 51, 13),
    (0.01, "1", 1): (175, 262, 88), (0.01, "1", 2): (161, 235, 73),
    (0.01, "2", 1): (128, 196, 69), (0.01, "2", 2): (145, 209, 64),
    (0.01, "inf", 1): (93, 145, 53), (0.01, "inf", 2): (107, 154, 47),
}
REF_LOCATION = {  # ex8.2
    (0.05, "1", 1): (188, 310, 87), (0.05, "1", 2): (157, 233, 70),
    (0.05, "2", 1): (145, 225, 76), (0.05, "2", 2): (141, 206, 64),
    (0.01, "1", 1): None, (0.01, "1", 2): (772, 1187, 340),
    (0.01, "2", 1): (869, 1421, 311), (0.01, "2", 2): (655, 957, 279),
}
REF_CONES = {  # ex8.1-q2, l2 norm
    ("C1", 0.005, 1): (19, 34, 16), ("C1", 0.005, 2): (21, 36, 15),
    ("C2", 0.005, 1): (6, 9, 4), ("C2", 0.005, 2): (8, 11, 3),
    ("C1", 0.001, 1): (37, 69, 32), ("C1", 0.001, 2): (36, 67, 31),
    ("C2", 0.001, 1): (10, 17, 8), ("C2", 0.001, 2): (12, 19, 7),
}
CONE_RUNS = ([("ex8.1-q2", c, eps) for c in ("C1", "C2") for eps in (0.005, 0.001)]
             + [("ex8.1-q3", c, eps) for c in ("C3", "C4") for eps in (0.05, 0.01)])


def _id(case):
    return "-".join(str(x) for x in case)


# criterion 1

def test_c1_exact_run_eps_half(criterion):
    t = time.perf_counter()
    r = run(catalog("ex8.1-q2"), RunConfig(0.5, 2, "alg1"))
    dt = time.perf_counter() - t
    counts = (r.cardinality, r.stats["opt_count"], r.stats["en_count"])
    ok = (counts == (3, 3, 1) and abs(r.certified_bound - (R2 - 1)) <= 1e-4 and dt < 5)
    criterion(1, "ex8.1-q2 eps=0.5", ok, f"counts={counts} bound={r.certified_bound} t={dt:.2f}")
    assert ok


# criterion 2

def test_c2_exact_run_eps_03(criterion):
    t = time.perf_counter()
    r = run(catalog("ex8.1-q2"), RunConfig(0.3, 2, "alg1"))
    dt = time.perf_counter() - t
    cuts = r.outer.halfspaces[2:]
    n = cuts[0].normal if cuts else np.zeros(2)
    angle = float(np.arccos(np.clip(n @ (np.ones(2) / R2), -1, 1)))
    ok = (len(cuts) == 1 and r.stats["iterations"] == 1 and angle <= 1e-4
          and abs(cuts[0].offset - 0.41421) <= 1e-4
          and abs(r.certified_bound - 0.08239) <= 5e-4 and r.cardinality == 5 and dt < 5)
    criterion(2, "ex8.1-q2 eps=0.3", ok,
              f"cuts={len(cuts)} angle={angle:.2e} bound={r.certified_bound} |X|={r.cardinality}")
    assert ok


# criterion 3

def test_c3_oblique_cut_fixture(criterion):
    orthant = [Halfspace(e, 0.0) for e in np.eye(3)]
    P = add_halfspace(dd_enumerate(orthant), Halfspace([1, 1, 0.1], 0.68))
    ok_v = same_point_sets(P.vertices, [[0.68, 0, 0], [0, 0.68, 0], [0, 0, 6.8]], 1e-6)
    ws = weighted_sum(catalog("ex8.1-q3"), [1, 1, 0.1])
    ok_ws = np.allclose(ws.gamma, [0.2947, 0.2947, 0.9295], atol=1e-3)
    ok = ok_v and ok_ws
    criterion(3, "cut vertices and weighted sum", ok, f"gamma={ws.gamma}")
    assert ok


# criterion 4

@pytest.mark.parametrize("case", CERT_CASES, ids=_id)
def test_c4_certification(case, runs, criterion):
    name, eps, p, alg = case
    t = time.perf_counter()
    report, problem, _ = runs(name, eps, p, alg)
    failures = []
    if not report.certified:
        failures.append(f"not certified (bound {report.certified_bound})")
    cloud = sample_upper_image(problem, 1000, seed=2024)
    slack = cloud.points @ report.outer.A.T - report.outer.b
    if slack.size and slack.min() < -1e-6:
        failures.append(f"sample outside outer set (slack {slack.min():.2e})")
    worst_oracle = worst_inner = 0.0
    for v in report.final_vertices:
        # both values are upper bounds of the true distances
        od = oracle_distance(problem, v, p, restarts=4)
        di = distance_to_inner(v, report.inner_vrep, p)
        worst_oracle, worst_inner = max(worst_oracle, od), max(worst_inner, di)
    if worst_oracle > eps + 1e-3:
        failures.append(f"oracle distance {worst_oracle:.4g}")
    if worst_inner > eps + 1e-3:
        failures.append(f"inner distance {worst_inner:.4g}")
    dt = time.perf_counter() - t
    if dt > 600:
        failures.append(f"runtime {dt:.0f}s")
    criterion(4, _id(case), not failures, "; ".join(failures))
    assert not failures, failures


# criterion 5

def _band(ours, ref):
    return all(r / 3 <= o <= 3 * r for o, r in zip(ours, ref))


def _counts(report):
    return report.cardinality, report.stats["opt_count"], report.stats["en_count"]


BAND_CASES = ([("table1", "ex8.1-q3", None) + k for k in REF_BALL_Q3]
              + [("table2", "ex8.2", None) + k for k, v in REF_LOCATION.items() if v]
              + [("table4", "ex8.1-q2", k[0], k[1], "2", k[2]) for k in REF_CONES])


@pytest.mark.parametrize("case", BAND_CASES, ids=_id)
def test_c5_count_bands(case, runs, criterion):
    table, name, cone, eps, p, alg = case
    ref = {"table1": REF_BALL_Q3, "table2": REF_LOCATION}[table][(eps, p, alg)] if cone is None \
        else REF_CONES[(cone, eps, alg)]
    report, _, _ = runs(name, eps, p, alg, cone)
    ours = _counts(report)
    ok = report.certified and _band(ours, ref)
    criterion(5, _id(case), ok, f"ours={ours} reference={ref}")
    assert ok, (ours, ref)


# criterion 6

def _interior_points(problem, rng, count):
    cloud = sample_upper_image(problem, count, seed=int(rng.integers(1 << 30)))
    c = problem.cone.primal_generators.sum(axis=0)
    return cloud.points + 0.05 * c


def test_c6_scalarization_suite(runs, criterion):
    rng = np.random.default_rng(7)
    solves = 0
    failures = []
    clouds = {}
    for name, epss, ps in CERT_PROBLEMS:
        problem = catalog(name)
        clouds[name] = sample_upper_image(problem, 100, seed=11).points
        for eps in epss:
            for p in ps:
                for alg in (1, 2):
                    report, _, _ = runs(name, eps, p, alg)
                    recs = report.scalarizations
                    idx = np.unique(np.linspace(0, len(recs) - 1, min(len(recs), 16)).astype(int))
                    for i in idx:
                        solves += 1
                        failures += _check_result(problem, recs[i].result, clouds[name])
        for p in ("1", "2", "inf"):
            for v in _interior_points(problem, rng, 10):
                r = norm_min(problem, v, p)
                solves += 1
                if r.distance > 1e-7:
                    failures.append(f"{name} interior v={v} distance {r.distance:.2e}")
    ok = solves >= 500 and not failures
    criterion(6, f"{solves} solves", ok, "; ".join(failures[:5]))
    assert solves >= 500
    assert not failures, failures[:10]


def _check_result(problem, r, cloud):
    out = []
    w, d, p = r.w_v, r.distance, r.p
    D = problem.cone.dual_generators
    tag = f"{problem.name} p={p} v={np.round(r.v, 6).tolist()}"
    if np.min(D @ (r.y_v - r.gamma_x)) < -1e-6:
        out.append(f"{tag}: primal infeasible")
    if np.linalg.norm(w) == 0:
        if d > 1e-7:
            out.append(f"{tag}: zero dual at distance {d}")
        return out
    if np.min(problem.cone.primal_generators @ w) < -1e-7:
        out.append(f"{tag}: w_v not in the dual cone")
    if dual_norm(w, p) > 1 + 1e-7:
        out.append(f"{tag}: dual norm {dual_norm(w, p)}")
    ws = weighted_sum(problem, w)
    gap = abs(d - (ws.value - w @ r.v))
    if gap > 1e-6 * (1 + d):
        out.append(f"{tag}: duality gap {gap:.2e}")
    n = w / np.linalg.norm(w)
    slack = cloud @ n - n @ r.gamma_x
    if slack.min() < -1e-6:
        out.append(f"{tag}: halfspace slack {slack.min():.2e}")
    if p == 2.0 and d > 1e-7:
        z = r.z_v / np.linalg.norm(r.z_v)
        angle = np.arccos(np.clip(z @ n, -1, 1))
        if angle > 1e-4:
            out.append(f"{tag}: normal/z angle {angle:.2e}")
    return out


# criterion 7

def _random_hrep(rng):
    q = int(rng.integers(2, 5))
    k = int(rng.integers(q, 13))
    while True:
        A = rng.normal(size=(k, q))
        if np.linalg.matrix_rank(A) == q:
            break
    y0 = rng.normal(size=q)
    b = A @ y0 - rng.uniform(0, 1, size=k)
    return [Halfspace(a, c) for a, c in zip(A, b)]


def test_c7_random_hreps(criterion):
    from cvop.geometry import brute_force_vertices
    rng = np.random.default_rng(77)
    bad = 0
    for _ in range(200):
        hs = _random_hrep(rng)
        P = dd_enumerate(hs)
        if not same_point_sets(P.vertices, brute_force_vertices(hs), 1e-7):
            bad += 1
    criterion(7, "200 random H-reps", bad == 0, f"{bad} mismatches")
    assert bad == 0


@pytest.mark.parametrize("case", CERT_CASES, ids=_id)
def test_c7_replay_cuts(case, runs, criterion):
    report, problem, _ = runs(*case)
    hs = report.outer.halfspaces
    J = problem.cone.J
    P = dd_enumerate(hs[:J])
    bad = []
    for k in range(J, len(hs)):
        P = add_halfspace(P, hs[k])
        Q = dd_enumerate(hs[:k + 1])
        if P.redundant or not (same_point_sets(P.vertices, Q.vertices, 1e-7)
                               and same_point_sets(P.rays, Q.rays, 1e-7)):
            bad.append(k)
    criterion(7, _id(case), not bad, f"{len(hs) - J} cuts, mismatch at {bad[:5]}")
    assert not bad


# criterion 8

@pytest.mark.parametrize("case", CERT_CASES, ids=_id)
def test_c8_recession_identity(case, runs, criterion):
    report, problem, _ = runs(*case)
    ok = same_cone(report.outer.rays, problem.cone.primal_generators, 1e-7)
    criterion(8, _id(case), ok, f"rays={report.outer.rays.tolist()}")
    assert ok


# criterion 9

ALG2_CASES = ([c for c in CERT_CASES if c[3] == 2]
              + [(name, eps, "2", 2, cone) for name, cone, eps in CONE_RUNS])


@pytest.mark.parametrize("case", ALG2_CASES, ids=_id)
def test_c9_algorithm2_terminates_inside_slab(case, runs, criterion):
    report, problem, _ = runs(*case)
    s = report.slab
    worst = max(float(s.w_bar @ rec.vertex - (s.beta + s.alpha)) for rec in report.scalarizations)
    ok = (report.certified and report.stats["iterations"] <= 10000
          and worst <= report.config.tol_feas)
    criterion(9, _id(case), ok, f"max slab excess {worst:.2e}")
    assert ok


# criterion 10

FARTHEST = [("ex8.1-q2", 0.01, "2", 1), ("ex8.1-q2", 0.01, "2", 2),
            ("ex8.1-q3", 0.05, "2", 1), ("ex8.1-q3", 0.05, "2", 2),
            ("ex8.2", 0.05, "2", 1)]


@pytest.mark.parametrize("case", FARTHEST, ids=_id)
def test_c10_farthest_rule_monotone(case, criterion):
    name, eps, p, alg = case
    r = run(catalog(name), RunConfig(eps, p, alg, vertex_rule="farthest"))
    h = np.array(r.bound_history)
    worst = float(np.max(np.diff(h))) if h.size > 1 else 0.0
    ok = r.certified and worst <= 1e-9 and h.size == r.stats["rounds"] - (alg == 2)
    criterion(10, _id(case), ok, f"largest increase {worst:.2e} over {h.size} rounds")
    assert ok
