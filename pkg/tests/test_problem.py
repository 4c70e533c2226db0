import json

import numpy as np
import pytest

from cvop.cones import OrderingCone, builtin
from cvop.errors import InfeasibleError, UnknownName
from cvop.problem import (CATALOG, ProblemSpec, catalog, check_c_convexity, load_problem,
                          problem_from_dict)
from cvop.quadratic import QuadraticFunction


def test_disc_example_identity():
    P = catalog("ex8.1-q3")
    x = np.array([0.3, 1.2, 0.7])
    assert np.allclose(P.evaluate(x), x)
    assert np.allclose(P.jacobian(x), np.eye(3))
    assert P.constraints[0](np.ones(3)) == pytest.approx(-0.5)
    assert P.constraints[0](np.array([0.0, 1.0, 1.0])) == pytest.approx(0.0)


def test_location_example():
    P = catalog("ex8.2")
    assert np.allclose(P.evaluate([1, 1]), [0, 5, 10])
    assert np.allclose(P.constraints[0].b, [1, 2])
    assert P.constraints[0].c == -10


def test_shifted_norm_example():
    P = catalog("ex8.3a")
    assert np.allclose(P.evaluate(np.zeros(3)), 0)
    assert np.allclose(P.objectives[0].b, [0, 10, 120])
    Q = catalog("ex8.3b")
    assert Q.n == 9
    assert np.allclose(Q.objectives[0].b, np.tile([0, 10, 120], 3))


def test_catalog_valid():
    for name in CATALOG:
        P = catalog(name)
        assert check_c_convexity(P)
        x0 = P.interior_point()
        assert np.all(P.constraint_values(x0) < 0)
        assert np.all((x0 > P.lower) & (x0 < P.upper))


def test_interior_point_disc():
    x0 = catalog("ex8.1-q2").interior_point()
    assert catalog("ex8.1-q2").constraints[0](x0) < -0.1


def test_non_convex_fails():
    cone = OrderingCone.orthant(2)
    f1 = QuadraticFunction(np.array([[2.0]]), [0.0], 0.0)
    f2 = QuadraticFunction(np.array([[-2.0]]), [0.0], 0.0)
    P = ProblemSpec(1, 2, [f1, f2], [], [-1], [1], cone)
    rep = check_c_convexity(P)
    assert not rep
    assert rep.failures[0]["generator"] == [0.0, 1.0]


def test_cone_changes_convexity_verdict():
    assert check_c_convexity(catalog("ex8.1-q2", builtin("C2")))


def test_empty_feasible_set():
    cone = OrderingCone.orthant(1)
    cons = [QuadraticFunction.linear([1.0], 1.0), QuadraticFunction.linear([-1.0], 1.0)]
    P = ProblemSpec(1, 1, [QuadraticFunction.linear([1.0])], cons, [-5], [5], cone)
    with pytest.raises(InfeasibleError):
        P.interior_point()


def test_unknown_name():
    with pytest.raises(UnknownName):
        catalog("ex9")


def test_round_trip_file(tmp_path):
    P = catalog("ex8.2")
    path = tmp_path / "p.json"
    path.write_text(json.dumps(P.to_dict()))
    Q = load_problem(path)
    x = np.array([2.0, 1.5])
    assert np.allclose(P.evaluate(x), Q.evaluate(x))
    R = problem_from_dict(catalog("ex8.1-q2", builtin("C1")).to_dict())
    assert R.cone.name == "C1"
