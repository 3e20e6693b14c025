"""The two-phase case as a scalar problem for w = u^1 - u^2.

The solution is computed by the m-phase iteration; the min-max operator

    G(x, r, lap) = min(-lap + f1(x, r), max(-lap - f2(x, -r), r))

is evaluated independently as a residual check. Dynamics enter G through
their odd extension, so for w < 0 a solved state gives
G = min(f2(x, |w|) - f1(x, |w|), 0), which vanishes only where f2 >= f1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import MultiPhaseState
from .errors import ValidationError
from .grid import GridFunction, UniformGrid, laplacian_field
from .problem import NodeTable, ProblemSpec
from .solver import SolveConfig, SolveReport, solve


@dataclass(frozen=True)
class TwoPhaseProblem:
    """Signed boundary data ``g`` (interior entries must be zero) and two dynamics.

    ``g_fn``, when given, is the callable ``g`` was sampled from, which lets
    the problem be rebuilt at another resolution.
    """

    grid: UniformGrid
    g: GridFunction
    f1: object
    f2: object
    name: str = "twophase"
    g_fn: Callable | None = field(default=None, repr=False)
    exact: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.g.grid != self.grid:
            raise ValidationError("boundary data live on a different grid")
        if np.any(self.g.values[self.grid.interior] != 0):
            raise ValidationError("g must vanish at interior nodes")

    @classmethod
    def from_function(cls, dim: int, n: int, g_fn, f1, f2, name: str = "twophase", exact=None) -> TwoPhaseProblem:
        grid = UniformGrid(dim, n)
        g = np.zeros(grid.shape)
        mask = grid.boundary_mask
        pts = tuple(c[mask] for c in grid.mesh)
        g[mask] = np.broadcast_to(np.asarray(g_fn(*pts), dtype=float), pts[0].shape)
        return cls(grid, GridFunction(grid, g), f1, f2, name=name, g_fn=g_fn, exact=exact)

    def with_n(self, n: int) -> TwoPhaseProblem:
        if self.g_fn is None:
            raise ValidationError(f"problem {self.name!r} was built from node values and cannot be resampled")
        return TwoPhaseProblem.from_function(self.grid.dim, n, self.g_fn, self.f1, self.f2, self.name, self.exact)

    def to_spec(self) -> ProblemSpec:
        """The equivalent two-phase problem with phi^1 = g^+ and phi^2 = g^-."""
        g = self.g.values
        return ProblemSpec(
            name=self.name, m=2, dim=self.grid.dim, n=self.grid.n,
            boundary=(NodeTable.from_array(self.grid, np.maximum(g, 0.0)),
                      NodeTable.from_array(self.grid, np.maximum(-g, 0.0))),
            dynamics=(self.f1, self.f2),
        )

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> TwoPhaseProblem:
        if spec.m != 2:
            raise ValidationError(f"need a two-phase problem, got m={spec.m}")
        phi = spec.boundary_values()
        grid = spec.grid
        b1, b2 = spec.boundary

        def g_fn(*x):
            return np.asarray(b1(*x), dtype=float) - np.asarray(b2(*x), dtype=float)

        return cls(grid, GridFunction(grid, phi[0] - phi[1]), *spec.dynamics, name=spec.name, g_fn=g_fn)


def minmax_G(x, r, lap, f1, f2, p=None):
    """min(-lap + f1(x, r), max(-lap - f2(x, -r), r)), vectorized over r and lap.

    ``p`` is the gradient slot of the general form; the operator does not use it.
    """
    r = np.asarray(r, dtype=float)
    lap = np.asarray(lap, dtype=float)
    a = -lap + np.asarray(f1(x, r), dtype=float)
    b = np.maximum(-lap - np.asarray(f2(x, -r), dtype=float), r)
    out = np.minimum(a, b)
    return float(out) if out.ndim == 0 else out


def residual_field(problem: TwoPhaseProblem, u: GridFunction) -> np.ndarray:
    """G(x, u, L_h u) at interior nodes."""
    g = problem.grid
    if u.grid != g:
        raise ValidationError("grid function lives on a different grid")
    mask = g.boundary_mask
    if not np.array_equal(u.values[mask], problem.g.values[mask]):
        bad = np.argwhere(mask & (u.values != problem.g.values))[0]
        raise ValidationError(f"u differs from g at boundary node {tuple(int(i) for i in bad)}")
    lap = laplacian_field(u.values, g.dim, g.h)
    return minmax_G(g.interior_mesh, u.values[g.interior], lap, problem.f1.f, problem.f2.f)


def discrete_residual(problem: TwoPhaseProblem, u: GridFunction) -> float:
    """max over interior nodes of |G(x, u, L_h u)|."""
    res = residual_field(problem, u)
    return float(np.max(np.abs(res))) if res.size else 0.0


def scalar_energy(problem: TwoPhaseProblem, w: GridFunction) -> float:
    """-1/2 (L_h v, v) + sum F1(v+) + sum F2(v-) - (L_h g, v) with v = w on the interior, 0 on the boundary."""
    g = problem.grid
    v = np.zeros(g.shape)
    v[g.interior] = w.values[g.interior]
    lap_v = laplacian_field(v, g.dim, g.h)
    lap_g = laplacian_field(problem.g.values, g.dim, g.h)
    vi = v[g.interior]
    prim = np.sum(problem.f1.F(g.mesh, np.maximum(v, 0.0))) + np.sum(problem.f2.F(g.mesh, np.maximum(-v, 0.0)))
    return float(-0.5 * np.sum(lap_v * vi) + prim - np.sum(lap_g * vi))


def solve_twophase(problem: TwoPhaseProblem, config: SolveConfig = SolveConfig(),
                   callback=None) -> tuple[GridFunction, SolveReport]:
    state, report = solve(problem.to_spec(), config, callback=callback)
    w = GridFunction(problem.grid, state.signed())
    report.extras["minmax_residual"] = discrete_residual(problem, w)
    return w, report


def split(problem: TwoPhaseProblem, w: GridFunction) -> MultiPhaseState:
    """The two-phase state (w^+, w^-) carrying the boundary data of ``problem``."""
    spec = problem.to_spec()
    values = np.stack([np.maximum(w.values, 0.0), np.maximum(-w.values, 0.0)])
    return MultiPhaseState(problem.grid, values, spec.boundary_values())


# --- monotonicity probe ------------------------------------------------------

@dataclass(frozen=True)
class ProbeViolation:
    trial: int
    node: tuple[int, ...]
    variable: str
    base: float
    diffs: tuple[float, ...]
    delta: float
    before: float
    after: float

    def to_dict(self) -> dict:
        return dict(self.__dict__, node=list(self.node), diffs=list(self.diffs))


@dataclass
class ProbeReport:
    trials: int
    seed: int
    checks: int
    violation_count: int
    witnesses: list[ProbeViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "checks": self.checks,
            "violations": self.violation_count,
            "ok": self.ok,
            "witnesses": [v.to_dict() for v in self.witnesses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"{'trials':>12}{'checks':>12}{'violations':>12}",
                 f"{self.trials:>12}{self.checks:>12}{self.violation_count:>12}"]
        for v in self.witnesses:
            lines.append(f"  trial {v.trial} node {v.node} d/d{v.variable}: {v.before:.6g} -> {v.after:.6g}")
        return "\n".join(lines) + "\n"


def _scheme(problem, pts, u, diffs):
    # F^i[u_i, u_i - u_j] with -L_h u = sum_j (u_i - u_j) / h^2
    h = problem.grid.h
    return minmax_G(pts, u, -diffs.sum(axis=1) / (h * h), problem.f1.f, problem.f2.f)


def monotonicity_probe(problem: TwoPhaseProblem, trials: int, seed: int = 0,
                       max_witnesses: int = 20) -> ProbeReport:
    """Check that the scheme is nondecreasing in the node value and in each difference.

    Every trial draws an interior node, a base value, K differences and one
    nonnegative increment per variable, then compares F before and after
    each single increment. Draws come from a counter-based generator keyed
    by ``seed``, so results do not depend on how the trials are batched.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    g = problem.grid
    K, h2 = g.K, g.h * g.h
    rng = np.random.Generator(np.random.Philox(key=seed))
    inner = np.argwhere(g.interior_mask)
    nodes = inner[rng.integers(0, len(inner), trials)]
    pts = tuple(g.axis[nodes[:, k]] for k in range(g.dim))
    u = rng.uniform(-2.0, 2.0, trials)
    u[rng.random(trials) < 0.1] = 0.0
    diffs = h2 * rng.uniform(-3.0, 3.0, (trials, K))
    steps = rng.uniform(0.0, 1.0, (trials, K + 1))
    tiny = rng.random((trials, K + 1)) < 0.1
    steps[tiny] *= 1e-6
    steps[:, 1:] *= 3.0 * h2

    before = _scheme(problem, pts, u, diffs)
    after_all = np.empty((trials, K + 1))
    after_all[:, 0] = _scheme(problem, pts, u + steps[:, 0], diffs)
    for j in range(K):
        d = diffs.copy()
        d[:, j] += steps[:, j + 1]
        after_all[:, j + 1] = _scheme(problem, pts, u, d)
    bad_mask = after_all < before[:, None]

    witnesses = []
    for t, j in np.argwhere(bad_mask)[:max_witnesses]:
        witnesses.append(ProbeViolation(
            trial=int(t), node=tuple(int(i) for i in nodes[t]),
            variable="u" if j == 0 else f"d{j}",
            base=float(u[t]), diffs=tuple(float(v) for v in diffs[t]),
            delta=float(steps[t, j]), before=float(before[t]), after=float(after_all[t, j]),
        ))
    return ProbeReport(trials, seed, trials * (K + 1), int(bad_mask.sum()), witnesses)


# --- refinement ----------------------------------------------------------------

@dataclass
class ConvergenceTable:
    problem: str
    ns: tuple[int, ...]
    errors: tuple[float, ...]
    rates: tuple[float | None, ...]
    reference: str
    iterations: tuple[int, ...] = ()
    residuals: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "reference": self.reference,
            "N": list(self.ns),
            "error": list(self.errors),
            "log2_ratio": list(self.rates),
            "iterations": list(self.iterations),
            "residual": list(self.residuals),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        def cell(v):
            return f"{'-':>12}" if v is None else f"{v:>12.3e}"

        lines = [f"{'':>12}" + "".join(f"{'N=' + str(n):>12}" for n in self.ns),
                 f"{'error':>12}" + "".join(cell(e) for e in self.errors),
                 f"{'log2 ratio':>12}" + "".join(f"{'-':>12}" if r is None else f"{r:>12.3f}"
                                                 for r in (None,) + tuple(self.rates))]
        return "\n".join(lines) + "\n"


def default_rule(n: int) -> SolveConfig:
    # Jacobi contracts like 1 - c/n^2; 8 n^2 sweeps reach roundoff on the square
    return SolveConfig(max_iterations=max(2000, 8 * n * n), residual_tol=1e-13)


def _family(problem):
    if callable(problem) and not isinstance(problem, (ProblemSpec, TwoPhaseProblem)):
        return problem
    return problem.with_n


def _solved_field(p, config):
    if isinstance(p, TwoPhaseProblem):
        w, rep = solve_twophase(p, config)
        exact = None if p.exact is None else np.broadcast_to(p.exact(*p.grid.mesh), p.grid.shape)
        return w.values, exact, rep
    state, rep = solve(p, config)
    exact = None if p.exact is None else p.exact_values().sum(axis=0)
    return state.total(), exact, rep


def refinement_study(problem, ns, config=default_rule) -> ConvergenceTable:
    """Max-norm errors over a sequence of nested grids.

    ``problem`` is a ProblemSpec, a TwoPhaseProblem, or a callable ``n -> problem``.
    ``config`` is a SolveConfig or a callable ``n -> SolveConfig``. Errors
    are against the exact solution when one is known, otherwise against the
    finest grid sampled at the coarse nodes (the finest entry is then omitted).
    """
    ns = tuple(int(n) for n in ns)
    if len(ns) < 3:
        raise ValidationError(f"need at least three resolutions, got {ns}")
    if list(ns) != sorted(set(ns)):
        raise ValidationError(f"resolutions must be strictly increasing, got {ns}")
    for a, b in zip(ns, ns[1:]):
        if b % a:
            raise ValidationError(f"grids N={a} and N={b} are not nested")
    build = _family(problem)
    rule = config if callable(config) else (lambda n: config)

    fields, exacts, its, res, name = [], [], [], [], None
    for n in ns:
        p = build(n)
        name = p.name
        f, ex, rep = _solved_field(p, rule(n))
        fields.append(f)
        exacts.append(ex)
        its.append(rep.iterations)
        res.append(rep.residual)

    if all(e is not None for e in exacts):
        reference = "exact"
        errors = [float(np.max(np.abs(f - e))) for f, e in zip(fields, exacts)]
        kept = ns
    else:
        reference = "finest"
        fine, nf = fields[-1], ns[-1]
        errors = []
        for f, n in zip(fields[:-1], ns[:-1]):
            step = nf // n
            sub = fine[(slice(None, None, step),) * fine.ndim]
            errors.append(float(np.max(np.abs(f - sub))))
        kept = ns[:-1]
    rates = []
    for a, b in zip(errors, errors[1:]):
        rates.append(float(np.log2(a / b)) if a > 0 and b > 0 else None)
    return ConvergenceTable(name, tuple(kept), tuple(errors), tuple(rates), reference,
                            tuple(its[:len(kept)]), tuple(res[:len(kept)]))


__all__ = [
    "TwoPhaseProblem", "minmax_G", "residual_field", "discrete_residual", "scalar_energy",
    "solve_twophase", "split", "ProbeViolation", "ProbeReport", "monotonicity_probe",
    "ConvergenceTable", "default_rule", "refinement_study",
]
