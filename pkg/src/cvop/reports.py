"""JSON serialization of solve reports.

Geometry is embedded as the text dumps of :mod:`cvop.geometry`.  Keys are
sorted and floats are written with ``repr``, so two runs with the same
inputs give identical files apart from the timing fields.
"""

from __future__ import annotations

import json

import numpy as np

from .approximation import SolveReport
from .geometry import Polyhedron, VRep, dumps, loads, vrep_dumps, vrep_loads

TIMING_FIELDS = ("t_opt", "t_en", "t_total")


def status_of(report: SolveReport) -> str:
    return "certified" if report.certified else "uncertified"


def report_to_dict(report: SolveReport, problem=None) -> dict:
    slab = None
    if report.slab is not None:
        s = report.slab
        slab = {"w_bar": s.w_bar.tolist(), "beta": s.beta, "alpha": s.alpha,
                "delta_h": s.delta_h}
    return {
        "problem": report.problem,
        "problem_data": problem.to_dict() if problem is not None else None,
        "q": report.outer.dim,
        "config": report.config.to_dict(),
        "solution_set": [{"x": x.tolist(), "gamma": g.tolist()} for x, g in report.solution_set],
        "outer": dumps(report.outer),
        "enumerated": dumps(report.enumerated),
        "inner": vrep_dumps(report.inner_vrep),
        "final_vertices": np.asarray(report.final_vertices).tolist(),
        "final_distances": np.asarray(report.final_distances).tolist(),
        "certified_bound": report.certified_bound,
        "certified": bool(report.certified),
        "status": status_of(report),
        "stats": dict(report.stats),
        "bound_history": [float(b) for b in report.bound_history],
        "slab": slab,
    }


def dumps_report(report: SolveReport, problem=None) -> str:
    return json.dumps(report_to_dict(report, problem), indent=2, sort_keys=True) + "\n"


def write_report(path, report: SolveReport, problem=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report, problem))


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    for key in ("q", "outer", "inner"):
        if key not in data:
            raise ValueError(f"report is missing {key!r}")
    return data


def outer_of(data: dict) -> Polyhedron:
    return loads(data["outer"])


def inner_of(data: dict) -> VRep:
    return vrep_loads(data["inner"])


def strip_timings(data: dict) -> dict:
    """Copy of a report dict without wall-clock fields."""
    out = dict(data)
    out["stats"] = {k: v for k, v in data.get("stats", {}).items() if k not in TIMING_FIELDS}
    return out
