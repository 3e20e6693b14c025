"""Synchronous (Jacobi) fixed-point iteration for the m-phase scheme.

Each sweep computes every new interior value from the previous iterate only.
Disjointness of the phases and the bounds 0 <= u^l <= max phi^l are
guaranteed at every iterate, so a breach aborts the run as a bug.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import MultiPhaseState, audit, bind, energy, fixed_point_map
from .errors import (
    InternalConsistencyError,
    NumericalError,
    ProblemDefinitionError,
    ValidationError,
)
from .grid import UniformGrid
from .problem import ProblemSpec

SWEEPS = ("jacobi", "gauss_seidel")
REACTIONS = ("explicit", "implicit")


@dataclass(frozen=True)
class SolveConfig:
    """Iteration controls.

    ``residual_tol = 0`` disables early exit, so exactly ``max_iterations``
    sweeps are run. ``gauss_seidel`` selects red-black ordering.
    ``reaction="implicit"`` evaluates f at the new value (closed form for the
    catalog dynamics); it has the same fixed points and stays stable for
    reactions that are steep near zero, such as weighted_sqrt.
    ``threads = None`` reads ``SEGSOLVE_THREADS`` (unset means 1, 0 means
    all cores).
    """

    max_iterations: int = 1000
    residual_tol: float = 0.0
    audit_every: int = 0
    record_energy: bool = False
    sweep: str = "jacobi"
    threads: int | None = None
    reaction: str = "explicit"

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be an integer >= 1, got {self.max_iterations}")
        if not self.residual_tol >= 0:
            raise ValidationError(f"residual_tol must be >= 0, got {self.residual_tol}")
        if self.audit_every < 0:
            raise ValidationError(f"audit_every must be >= 0, got {self.audit_every}")
        if self.sweep not in SWEEPS:
            raise ValidationError(f"sweep must be one of {SWEEPS}, got {self.sweep!r}")
        if self.reaction not in REACTIONS:
            raise ValidationError(f"reaction must be one of {REACTIONS}, got {self.reaction!r}")
        if self.threads is not None and self.threads < 0:
            raise ValidationError(f"threads must be >= 0, got {self.threads}")


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        raw = os.environ.get("SEGSOLVE_THREADS", "1").strip() or "1"
        try:
            threads = int(raw)
        except ValueError:
            raise ValidationError(f"SEGSOLVE_THREADS must be an integer, got {raw!r}") from None
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(1, threads)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    delta_trace: np.ndarray = field(repr=False)
    residual_trace: np.ndarray | None = field(default=None, repr=False)
    energy_trace: list[float] | None = field(default=None, repr=False)
    audits_run: int = 0
    audit_failures: int = 0
    stability_ok: bool = True
    wall_time: float = 0.0
    sweep: str = "jacobi"
    reaction: str = "explicit"
    extras: dict = field(default_factory=dict)

    def to_dict(self, max_trace: int = 200, timing: bool = False) -> dict:
        def sample(tr):
            if tr is None:
                return None
            tr = np.asarray(tr, dtype=float)
            if tr.size <= max_trace:
                idx = np.arange(tr.size)
            else:
                idx = np.unique(np.r_[np.linspace(0, tr.size - 1, max_trace).astype(int), tr.size - 1])
            return {"iteration": [int(i) + 1 for i in idx], "value": [float(tr[i]) for i in idx]}

        d = {
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "sweep": self.sweep,
            "reaction": self.reaction,
            "delta_trace": sample(self.delta_trace),
            "residual_trace": sample(self.residual_trace),
            "energy_trace": sample(self.energy_trace),
            "audit": {"runs": self.audits_run, "failures": self.audit_failures,
                      "stability_ok": self.stability_ok},
        }
        d.update(self.extras)
        if timing:
            d["wall_time"] = self.wall_time
        return d


def initialize(problem: ProblemSpec) -> MultiPhaseState:
    """Zero interior, phi^l on the boundary."""
    problem.check_boundary()
    phi = problem.boundary_values()
    return MultiPhaseState(problem.grid, phi.copy(), phi)


class Sweeper:
    """Applies one sweep to a full-field array; optionally split into row slabs across threads.

    The update is elementwise, so slab count never changes the result.
    """

    def __init__(self, grid: UniformGrid, dynamics, sweep: str = "jacobi", threads: int = 1,
                 reaction: str = "explicit"):
        self.grid = grid
        self.sweep = sweep
        self.implicit = reaction == "implicit"
        tau = grid.h * grid.h / grid.K
        rows = grid.n - 1
        threads = max(1, min(int(threads), rows))
        cuts = np.linspace(0, rows, threads + 1).astype(int)
        self.slabs = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            pts = tuple(c[a:b] for c in grid.interior_mesh)
            if self.implicit:
                fs = [d.resolvent(pts, tau) for d in dynamics]
            else:
                fs = [d.bind(pts) for d in dynamics]
            self.slabs.append((a, b, fs))
        self.pool = ThreadPoolExecutor(threads) if threads > 1 else None
        if sweep == "gauss_seidel":
            idx = np.indices(tuple(n - 2 for n in grid.shape)).sum(axis=0)
            self.colors = [(idx % 2) == 0, (idx % 2) == 1]
        else:
            self.colors = None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()
            self.pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _map(self, values: np.ndarray) -> np.ndarray:
        g = self.grid
        m = values.shape[0]
        out = np.empty((m,) + tuple(n - 2 for n in g.shape))

        def work(slab):
            # full rows a..b+1 hold interior rows a..b-1 and their neighbours
            a, b, fs = slab
            out[:, a:b] = fixed_point_map(values[:, a:b + 2], fs, g, self.implicit)

        if self.pool is None:
            for s in self.slabs:
                work(s)
        else:
            list(self.pool.map(work, self.slabs))
        return out

    def __call__(self, values: np.ndarray) -> np.ndarray:
        inner = (slice(None),) + self.grid.interior
        new = np.array(values)
        if self.colors is None:
            new[inner] = self._map(values)
            return new
        for mask in self.colors:
            new[inner] = np.where(mask, self._map(new), new[inner])
        return new


def iterate_step(state: MultiPhaseState, dynamics, sweep: str = "jacobi", threads: int = 1,
                 reaction: str = "explicit") -> MultiPhaseState:
    with Sweeper(state.grid, dynamics, sweep, threads, reaction) as sweeper:
        return MultiPhaseState(state.grid, sweeper(state.values), state.boundary)


def successive_delta(prev: MultiPhaseState, nxt: MultiPhaseState) -> float:
    if prev.values.shape != nxt.values.shape or prev.grid != nxt.grid:
        raise ValidationError(f"state shapes differ: {prev.values.shape} vs {nxt.values.shape}")
    return float(np.max(np.abs(nxt.values - prev.values)))


def stability_violations(values: np.ndarray, boundary: np.ndarray) -> list[tuple[int, tuple[int, ...], float]]:
    """Nodes where 0 <= u^l <= max over the boundary of phi^l fails."""
    m = values.shape[0]
    bound = boundary.reshape(m, -1).max(axis=1)
    out = []
    for l in range(m):
        bad = (values[l] < 0) | (values[l] > bound[l])
        for a in np.argwhere(bad):
            a = tuple(int(i) for i in a)
            out.append((l, a, float(values[(l,) + a])))
    return out


def _check_dynamics(problem: ProblemSpec) -> None:
    for l, d in enumerate(problem.dynamics):
        if not d.nonneg:
            raise ProblemDefinitionError(f"dynamics of phase {l} ({d.name}) is not declared nonnegative")


def solve(problem: ProblemSpec, config: SolveConfig = SolveConfig(), initial: MultiPhaseState | None = None,
          callback=None) -> tuple[MultiPhaseState, SolveReport]:
    """Iterate from ``initial`` (default: :func:`initialize`) until the budget
    is spent or the scheme residual drops to ``residual_tol``.

    ``callback(k, values)`` is invoked after iterate k is formed.
    """
    t0 = time.perf_counter()
    _check_dynamics(problem)
    state = initialize(problem) if initial is None else initial
    if state.grid != problem.grid or state.m != problem.m:
        raise ValidationError("initial state does not match the problem grid/phase count")
    if initial is not None:
        problem.check_boundary()
        if not np.array_equal(state.boundary, problem.boundary_values()):
            raise ValidationError("initial state carries different boundary data")
    pre = audit(state)
    if pre:
        raise ProblemDefinitionError(f"initial state is not admissible: {pre[0]}")

    dyn = problem.dynamics
    # only for explicit Jacobi is the look-ahead step itself the scheme residual
    jacobi = config.sweep == "jacobi" and config.reaction == "explicit"
    inner = (slice(None),) + state.grid.interior
    phi = state.boundary
    deltas, residuals = [], []
    energies = [] if config.record_energy else None
    audits = 0
    converged = False

    with Sweeper(state.grid, dyn, config.sweep, resolve_threads(config.threads), config.reaction) as sweeper:
        def check(values, k):
            if not np.all(np.isfinite(values)):
                raise NumericalError(f"non-finite value at iteration {k}")

        cur = state.values
        nxt = sweeper(cur)
        check(nxt, 1)
        k = 0
        while k < config.max_iterations:
            prev, cur = cur, nxt
            k += 1
            deltas.append(float(np.max(np.abs(cur[inner] - prev[inner]))))
            nxt = sweeper(cur)
            check(nxt, k + 1)
            if jacobi:
                residuals.append(float(np.max(np.abs(nxt[inner] - cur[inner]))))
            if config.audit_every and k % config.audit_every == 0:
                audits += 1
                _audit_iterate(cur, phi, state.grid, k)
            if energies is not None:
                energies.append(energy(MultiPhaseState(state.grid, cur, phi), dyn))
            if callback is not None:
                callback(k, cur)
            if config.residual_tol > 0:
                res = residuals[-1] if jacobi else _residual(cur, dyn, state.grid)
                if res <= config.residual_tol:
                    converged = True
                    break

    final = MultiPhaseState(state.grid, cur, phi)
    if jacobi:
        res = residuals[-1]
    else:
        res = _residual(cur, dyn, state.grid)
    report = SolveReport(
        iterations=k,
        residual=res,
        converged=converged,
        delta_trace=np.asarray(deltas),
        residual_trace=np.asarray(residuals) if jacobi else None,
        energy_trace=energies,
        audits_run=audits,
        audit_failures=0,
        stability_ok=not stability_violations(cur, phi),
        wall_time=time.perf_counter() - t0,
        sweep=config.sweep,
        reaction=config.reaction,
    )
    return final, report


def _residual(values, dynamics, grid) -> float:
    inner = (slice(None),) + grid.interior
    return float(np.max(np.abs(fixed_point_map(values, bind(dynamics, grid), grid) - values[inner])))


def _audit_iterate(values, phi, grid, k) -> None:
    found = audit(MultiPhaseState(grid, values, phi))
    if found:
        raise InternalConsistencyError(f"iterate {k} breaks segregation invariants: {found[0]}", iteration=k)
    bad = stability_violations(values, phi)
    if bad:
        l, a, v = bad[0]
        raise InternalConsistencyError(f"iterate {k}: phase {l} at {a} = {v!r} leaves the stability bounds",
                                       iteration=k)
