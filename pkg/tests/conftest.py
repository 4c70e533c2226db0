import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQ2 = np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# shared run cache and per-criterion result lines for the acceptance suite

from cvop.approximation import RunConfig, run  # noqa: E402
from cvop.cones import builtin  # noqa: E402
from cvop.problem import catalog  # noqa: E402

_RUNS = {}
_TIMES = {}
_CRITERIA = {}


def cached_run(name, eps, p, alg, cone=None, **kw):
    """Run once per session; returns ``(report, problem, seconds)``."""
    key = (name, cone, eps, str(p), alg, tuple(sorted(kw.items())))
    if key not in _RUNS:
        import time
        problem = catalog(name, builtin(cone) if cone else None)
        t = time.perf_counter()
        report = run(problem, RunConfig(eps, p, alg, **kw))
        _TIMES[key] = time.perf_counter() - t
        _RUNS[key] = (report, problem)
    report, problem = _RUNS[key]
    return report, problem, _TIMES[key]


@pytest.fixture(scope="session")
def runs():
    return cached_run


@pytest.fixture(scope="session")
def criterion():
    """``criterion(k, case, ok, detail)`` records one checked case of criterion k."""
    def record(k, case, ok, detail=""):
        _CRITERIA.setdefault(k, []).append((case, bool(ok), detail))
        return ok
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    """A criterion test that crashes before recording counts as a failed case."""
    before = sum(len(v) for v in _CRITERIA.values())
    outcome = yield
    name = item.originalname or item.name
    if outcome.excinfo is None or not name.startswith("test_c"):
        return
    if sum(len(v) for v in _CRITERIA.values()) == before:
        k = int(name[len("test_c"):].split("_")[0])
        case = item.callspec.id if hasattr(item, "callspec") else name
        _CRITERIA.setdefault(k, []).append((case, False, outcome.excinfo[0].__name__))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        cases = _CRITERIA[k]
        bad = [c for c in cases if not c[1]]
        status = "PASS" if not bad else "FAIL"
        line = f"criterion {k}: {status} ({len(cases) - len(bad)}/{len(cases)} cases)"
        if bad:
            line += " failing: " + "; ".join(f"{c[0]} {c[2]}" for c in bad[:5])
        terminalreporter.write_line(line)
