"""JSON problem files.

    {
      "name": "my-problem",
      "dim": 2, "n": 40, "m": 3,
      "dynamics": [{"kind": "constant", "coef": 2.0}, ...],
      "boundary": {"preset": "example2"}
                | {"values": [[phase-0 values per boundary node], ...]},
      "exact": {"preset": "example2"}            (optional)
    }

Explicit boundary values are listed per phase in row-major boundary-node
order and fix the resolution ``n``.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import benchmarks
from .dynamics import from_config
from .errors import ProblemDefinitionError, SegsolveError
from .problem import NodeTable, ProblemSpec


def _need(d: dict, key: str):
    try:
        return d[key]
    except KeyError:
        raise ProblemDefinitionError(f"problem config is missing {key!r}") from None


def problem_from_dict(d: dict, n: int | None = None) -> ProblemSpec:
    """Build a problem; ``n`` overrides the resolution in the file."""
    if not isinstance(d, dict):
        raise ProblemDefinitionError("problem config must be a JSON object")
    dim = int(d.get("dim", 2))
    n = int(_need(d, "n")) if n is None else int(n)
    m = int(_need(d, "m"))
    try:
        dynamics = tuple(from_config(c) for c in _need(d, "dynamics"))
        src = _need(d, "boundary")
        if "preset" in src:
            try:
                boundary = benchmarks.BOUNDARY_PRESETS[src["preset"]]
            except KeyError:
                raise ProblemDefinitionError(
                    f"unknown boundary preset {src['preset']!r}; known: {sorted(benchmarks.BOUNDARY_PRESETS)}"
                ) from None
            preset = src["preset"]
        elif "values" in src:
            boundary = tuple(NodeTable(v, dim, n) for v in src["values"])
            preset = None
        else:
            raise ProblemDefinitionError("boundary needs either 'preset' or 'values'")
        exact = None
        if d.get("exact"):
            try:
                exact = benchmarks.EXACT_PRESETS[d["exact"]["preset"]]
            except (KeyError, TypeError):
                raise ProblemDefinitionError(f"unknown exact-solution entry {d['exact']!r}") from None
        return ProblemSpec(name=str(d.get("name", "config")), m=m, dim=dim, n=n,
                           boundary=boundary, dynamics=dynamics, exact=exact, preset=preset)
    except ProblemDefinitionError:
        raise
    except SegsolveError as exc:
        raise ProblemDefinitionError(str(exc)) from exc


def problem_to_dict(problem: ProblemSpec) -> dict:
    d = {
        "name": problem.name,
        "dim": problem.dim,
        "n": problem.n,
        "m": problem.m,
        "dynamics": [dyn.to_config() for dyn in problem.dynamics],
    }
    if problem.preset is not None:
        d["boundary"] = {"preset": problem.preset}
    elif all(isinstance(b, NodeTable) and b.grid == problem.grid for b in problem.boundary):
        d["boundary"] = {"values": [list(b.values) for b in problem.boundary]}
    else:
        tables = [NodeTable.from_array(problem.grid, phi) for phi in problem.boundary_values()]
        d["boundary"] = {"values": [t.values for t in tables]}
    if problem.exact is not None:
        names = [k for k, v in benchmarks.EXACT_PRESETS.items() if v == problem.exact]
        if not names:
            raise ProblemDefinitionError(f"exact solution of {problem.name!r} has no preset id")
        d["exact"] = {"preset": names[0]}
    return d


def load_problem(path, n: int | None = None) -> ProblemSpec:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemDefinitionError(f"{path}: not valid JSON ({exc})") from None
    return problem_from_dict(data, n)


def save_problem(problem: ProblemSpec, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")
