"""Command-line front end: ``segsolve {solve,table,validate,probe,refine}``.

Exit codes: 0 ok, 1 IO error, 2 problem-definition error, 3 numerical error,
4 a validation suite found a violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, benchmarks
from .config import load_problem
from .dynamics import Dynamics, builtin, validate as validate_dynamics
from .errors import InternalConsistencyError, NumericalError, ValidationError
from .grid import UniformGrid, write_csv
from .oracle import oracle_agrees, random_problem
from .solver import SolveConfig, solve
from .twophase import TwoPhaseProblem, monotonicity_probe, refinement_study

EXIT_OK, EXIT_IO, EXIT_PROBLEM, EXIT_NUMERICAL, EXIT_FAILED = 0, 1, 2, 3, 4


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _problem(args, default: str | None = None):
    if args.config:
        return load_problem(args.config, args.n)
    return benchmarks.get(args.problem or default, args.n)


def _add_source(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--problem", help=f"registered problem: {', '.join(sorted(benchmarks.REGISTRY))}")
    src.add_argument("--config", help="JSON problem file")
    p.add_argument("--n", type=int, help="cells per side (overrides the problem default)")


def _nonmonotone() -> Dynamics:
    return Dynamics(
        f=lambda p, s: -np.asarray(s, dtype=float),
        F=lambda p, s: -0.5 * np.asarray(s, dtype=float) ** 2,
        name="decreasing", nonneg=False, monotone=False,
    )


# --- commands -------------------------------------------------------------------

def cmd_solve(args) -> int:
    problem = _problem(args)
    cfg = SolveConfig(
        max_iterations=args.iters, residual_tol=args.tol, audit_every=args.audit_every,
        record_energy=args.record_energy, sweep=args.sweep, threads=args.threads,
        reaction=args.reaction,
    )
    state, report = solve(problem, cfg)
    out = _out_dir(args)
    g = problem.grid
    for l in range(problem.m):
        write_csv(out / f"u_{l + 1}.csv", g, state.values[l])
    write_csv(out / "w.csv", g, state.total())
    summary = {"problem": problem.name, "n": problem.n, "m": problem.m}
    summary.update(report.to_dict())
    _dump(out / "report.json", summary)
    _dump(out / "meta.json", {"wall_time": report.wall_time, "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
                              "version": __version__})
    print(f"{problem.name}: N={problem.n} iterations={report.iterations} residual={report.residual:.3e}")
    return EXIT_OK


def cmd_table(args) -> int:
    problem = _problem(args)
    if problem.exact is None:
        raise ValidationError(f"problem {problem.name!r} has no exact solution")
    ns = benchmarks.FULL_N if args.full else (args.n_list or benchmarks.DESK_N)
    tab = benchmarks.table(problem, ns=ns, rules=args.rules, threads=args.threads)
    out = _out_dir(args)
    (out / "table.txt").write_text(tab.to_text())
    _dump(out / "table.json", tab.to_dict())
    sys.stdout.write(tab.to_text())
    return EXIT_OK


def _probe_problems(n: int, inject: bool):
    grid_problem = TwoPhaseProblem.from_spec(benchmarks.example1(n))
    pairs = [
        ("example1", grid_problem.f1, grid_problem.f2),
        ("constant(2)", builtin("constant", 2.0), builtin("constant", 2.0)),
        ("weighted_abs(10)", builtin("weighted_abs", 10.0), builtin("weighted_abs", 10.0)),
    ]
    if inject:
        pairs.append(("decreasing (injected)", _nonmonotone(), _nonmonotone()))
    return [(name, TwoPhaseProblem(grid_problem.grid, grid_problem.g, f1, f2)) for name, f1, f2 in pairs]


def cmd_validate(args) -> int:
    findings = {}

    grid = UniformGrid(2, 8)
    dyn_reports = []
    for d in (builtin("zero"), builtin("constant", 2.0), builtin("weighted_abs", 10.0),
              builtin("weighted_sqrt", 40.0)):
        dyn_reports.append(validate_dynamics(d, grid).to_dict())
    dyn_ok = all(r["ok"] for r in dyn_reports)
    findings["dynamics"] = {"ok": dyn_ok, "reports": dyn_reports}
    print(f"dynamics: {'pass' if dyn_ok else 'FAIL'} ({len(dyn_reports)} catalog entries)")

    runs = []
    for i in range(args.instances):
        seed = args.seed * 1000 + i
        p = random_problem(seed)
        _, ag = oracle_agrees(p, tol=1e-7, energy_tol=1e-9)
        runs.append({"seed": seed, "n": p.n, "m": p.m, **ag.to_dict()})
    statuses = [r["status"] for r in runs]
    oracle_ok = "disagree" not in statuses
    findings["oracle"] = {"ok": oracle_ok, "agree": statuses.count("agree"),
                          "inconclusive": statuses.count("inconclusive"), "runs": runs}
    print(f"oracle: {'pass' if oracle_ok else 'FAIL'} ({statuses.count('agree')}/{len(runs)} agree)")

    probes = []
    for name, tp in _probe_problems(16, args.inject_nonmonotone):
        rep = monotonicity_probe(tp, args.trials, args.seed)
        probes.append({"dynamics": name, **rep.to_dict()})
        print(f"probe {name}: {'pass' if rep.ok else 'FAIL'} ({rep.violation_count} violations "
              f"in {rep.checks} checks)")
    probe_ok = all(p["ok"] for p in probes)
    findings["probe"] = {"ok": probe_ok, "runs": probes}

    ok = dyn_ok and oracle_ok and probe_ok
    findings["ok"] = ok
    _dump(_out_dir(args) / "validate.json", findings)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_probe(args) -> int:
    problem = _problem(args, default="example1")
    tp = TwoPhaseProblem.from_spec(problem)
    if args.inject_nonmonotone:
        tp = TwoPhaseProblem(tp.grid, tp.g, _nonmonotone(), _nonmonotone(), name=tp.name)
    rep = monotonicity_probe(tp, args.trials, args.seed)
    out = _out_dir(args)
    _dump(out / "probe.json", rep.to_dict())
    (out / "probe.txt").write_text(rep.to_text())
    sys.stdout.write(rep.to_text())
    return EXIT_OK if rep.ok else EXIT_FAILED


def cmd_refine(args) -> int:
    problem = _problem(args)
    if problem.m == 2 and problem.exact is None:
        problem = TwoPhaseProblem.from_spec(problem)

    def rule(n):
        return SolveConfig(max_iterations=max(2000, args.budget_factor * n * n),
                           residual_tol=args.tol, threads=args.threads, reaction=args.reaction)

    tab = refinement_study(problem, args.n_list, rule)
    out = _out_dir(args)
    (out / "refine.txt").write_text(tab.to_text())
    _dump(out / "refine.json", tab.to_dict())
    sys.stdout.write(tab.to_text())
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="segsolve", description="Finite-difference solver for segregated multi-phase states.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem and write the fields")
    _add_source(p)
    p.add_argument("--iters", type=int, default=1000, help="iteration budget M")
    p.add_argument("--tol", type=float, default=0.0, help="stop once the scheme residual is at most this")
    p.add_argument("--sweep", choices=("jacobi", "gauss_seidel"), default="jacobi")
    p.add_argument("--reaction", choices=("explicit", "implicit"), default="explicit",
                   help="evaluate f at the old (default) or the new node value")
    p.add_argument("--audit-every", type=int, default=0)
    p.add_argument("--record-energy", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="error table R_{N,M} against the exact solution")
    _add_source(p)
    p.add_argument("--n-list", type=_int_list)
    p.add_argument("--rules", type=_int_list, default=list(benchmarks.M_RULES), help="M = rule * N")
    p.add_argument("--full", action="store_true", help="all resolutions up to N=320 (slow)")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("validate", help="dynamics checks, oracle sweep and monotonicity probes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=12)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--inject-nonmonotone", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("probe", help="degenerate-ellipticity probe of a two-phase problem")
    _add_source(p, required=False)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-nonmonotone", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("refine", help="refinement study over nested grids")
    _add_source(p)
    p.add_argument("--n-list", type=_int_list, default=[10, 20, 40])
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--budget-factor", type=int, default=8, help="iteration cap is factor * N^2")
    p.add_argument("--reaction", choices=("explicit", "implicit"), default="explicit")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_refine)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROBLEM
    except (NumericalError, InternalConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
