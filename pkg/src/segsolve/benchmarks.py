"""Benchmark problems on [-1,1]^2, the exact solution of the three-phase
constant-dynamics problem, and the max-norm error tables R_{N,M}.

Boundary data are written edge by edge. At corners the horizontal-edge
formula (y = +-1) wins; ``EdgeBoundary.corner_mismatches`` checks that the
vertical formula agrees there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import builtin
from .errors import ValidationError
from .problem import ProblemSpec
from .solver import SolveConfig, solve

M_RULES = (5, 10, 20, 40, 80, 160)
DESK_N = (10, 20, 40)
FULL_N = (10, 20, 40, 80, 160, 320)


class EdgeBoundary:
    """Boundary data of the square given by one formula per edge.

    Each formula takes the running coordinate along its edge. Corners
    take the top/bottom value.
    """

    def __init__(self, top, bottom, left, right):
        self.top, self.bottom, self.left, self.right = top, bottom, left, right

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        out = np.zeros(x.shape)
        out = np.where(x == -1.0, self.left(y), out)
        out = np.where(x == 1.0, self.right(y), out)
        out = np.where(y == 1.0, self.top(x), out)
        out = np.where(y == -1.0, self.bottom(x), out)
        return out

    def corner_mismatches(self, tol: float = 1e-12) -> list[tuple[float, float]]:
        """Corners where the vertical-edge formula disagrees with the horizontal one."""
        bad = []
        for cx, vert in ((-1.0, self.left), (1.0, self.right)):
            for cy, horiz in ((-1.0, self.bottom), (1.0, self.top)):
                a = float(horiz(np.array(cx)))
                b = float(vert(np.array(cy)))
                if abs(a - b) > tol:
                    bad.append((cx, cy))
        return bad


def _zero(t):
    return np.zeros_like(t)


def _const(c):
    return lambda t: np.full_like(t, c)


# -- first example: two phases, weighted linear dynamics ---------------------

def _sqrt_right(t):
    return np.where(t >= 0, np.sqrt(np.abs(t)), 0.0)


def _abs_left(t):
    return np.where(t < 0, np.abs(t), 0.0)


_ex1_phi1 = EdgeBoundary(_sqrt_right, _sqrt_right, _zero, _const(1.0))
_ex1_phi2 = EdgeBoundary(_abs_left, _abs_left, _const(1.0), _zero)


def example1(n: int = 50) -> ProblemSpec:
    return ProblemSpec(
        name="example1", m=2, dim=2, n=n,
        boundary=(_ex1_phi1, _ex1_phi2),
        dynamics=(builtin("weighted_abs", 2.0), builtin("weighted_abs", 10.0)),
        preset="example1",
    )


# -- second example: three phases, constant dynamics, exact solution ---------
# free boundaries are the rays y = 3x (x < 0), y = -3x (x < 0) and y = 0 (x > 0)

def exact_u1(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.where((y < 0) & (y <= 3 * x), -(3 * x - y) * y, 0.0)


def exact_u2(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.where((y >= 0) & (y >= -3 * x), y * (3 * x + y), 0.0)


def exact_u3(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.where((3 * x < y) & (y < -3 * x), 0.5 * (9 * x**2 - y**2), 0.0)


def _linear_right_of_third(t):
    return np.where(3 * t >= -1, 1 + 3 * t, 0.0)


def _ex2_side3(t):
    return np.where(3 * t < -1, 0.5 * (9 * t**2 - 1), 0.0)


_ex2_phi1 = EdgeBoundary(
    top=_zero, bottom=_linear_right_of_third, left=_zero,
    right=lambda t: np.where(t < 0, t * (t - 3), 0.0))
_ex2_phi2 = EdgeBoundary(
    top=_linear_right_of_third, bottom=_zero, left=_zero,
    right=lambda t: np.where(t >= 0, t * (t + 3), 0.0))
_ex2_phi3 = EdgeBoundary(
    top=_ex2_side3, bottom=_ex2_side3, left=lambda t: -0.5 * (t - 3) * (t + 3), right=_zero)


EXAMPLE2_BOUNDARY = (_ex2_phi1, _ex2_phi2, _ex2_phi3)
EXAMPLE2_EXACT = (exact_u1, exact_u2, exact_u3)


def example2(n: int = 40) -> ProblemSpec:
    return ProblemSpec(
        name="example2", m=3, dim=2, n=n,
        boundary=EXAMPLE2_BOUNDARY,
        dynamics=(builtin("constant", 2.0), builtin("constant", 2.0), builtin("constant", 8.0)),
        exact=EXAMPLE2_EXACT,
        preset="example2",
    )


def example3(n: int = 80) -> ProblemSpec:
    return ProblemSpec(
        name="example3", m=3, dim=2, n=n,
        boundary=EXAMPLE2_BOUNDARY,
        dynamics=(builtin("weighted_sqrt", 10.0), builtin("weighted_sqrt", 10.0), builtin("weighted_sqrt", 40.0)),
        preset="example2",
    )


REGISTRY = {"example1": example1, "example2": example2, "example3": example3}

# boundary/exact presets addressable from config files
BOUNDARY_PRESETS = {
    "example1": (_ex1_phi1, _ex1_phi2),
    "example2": EXAMPLE2_BOUNDARY,
}
EXACT_PRESETS = {"example2": EXAMPLE2_EXACT}


def get(name: str, n: int | None = None) -> ProblemSpec:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown problem {name!r}; known: {sorted(REGISTRY)}") from None
    return factory() if n is None else factory(n)


@dataclass(frozen=True)
class ErrorRecord:
    n: int
    m_iter: int
    R: float

    def to_dict(self) -> dict:
        return {"N": self.n, "M": self.m_iter, "R": self.R}


def summed_error(problem: ProblemSpec, values: np.ndarray) -> float:
    """max over all nodes of |sum_l u_l(exact) - sum_l w_h^l|."""
    exact = problem.exact_values().sum(axis=0)
    return float(np.max(np.abs(exact - np.asarray(values).sum(axis=0))))


def error_R(problem: ProblemSpec, n: int, m_iter: int, threads: int | None = None) -> ErrorRecord:
    if problem.exact is None:
        raise ValidationError(f"problem {problem.name!r} has no exact solution")
    p = problem.with_n(n)
    state, _ = solve(p, SolveConfig(max_iterations=m_iter, threads=threads))
    return ErrorRecord(n, m_iter, summed_error(p, state.values))


@dataclass
class ErrorTable:
    problem: str
    ns: tuple[int, ...]
    rules: tuple[int, ...]
    R: dict  # (rule, n) -> R

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "N": list(self.ns),
            "M_rules": [f"{r}N" for r in self.rules],
            "rows": [
                {"M_rule": f"{r}N", "R": [self.R[(r, n)] for n in self.ns]} for r in self.rules
            ],
        }

    def to_text(self) -> str:
        head = f"{'':>12}" + "".join(f"{'N=' + str(n):>12}" for n in self.ns)
        lines = [head]
        for r in self.rules:
            lines.append(f"{'R_{N,' + str(r) + 'N}':>12}" + "".join(f"{self.R[(r, n)]:>12.3e}" for n in self.ns))
        return "\n".join(lines) + "\n"


def table(problem: ProblemSpec, ns=DESK_N, rules=M_RULES, threads: int | None = None) -> ErrorTable:
    """R_{N,M} for M = rule*N. One run per N; smaller budgets are read off
    along the way, which equals separate runs since the iteration is deterministic."""
    if problem.exact is None:
        raise ValidationError(f"problem {problem.name!r} has no exact solution")
    rules = tuple(sorted(rules))
    out = {}
    for n in ns:
        p = problem.with_n(n)
        exact = p.exact_values().sum(axis=0)
        checkpoints = {r * n: r for r in rules}

        def grab(k, values, n=n, checkpoints=checkpoints, exact=exact):
            if k in checkpoints:
                out[(checkpoints[k], n)] = float(np.max(np.abs(exact - values.sum(axis=0))))

        solve(p, SolveConfig(max_iterations=max(checkpoints), threads=threads), callback=grab)
    return ErrorTable(problem.name, tuple(ns), rules, out)


def free_boundary_region(x, y) -> np.ndarray:
    """Index of the phase that is positive at (x, y) for the exact solution, or -1 on the rays."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    region = np.full(np.broadcast(x, y).shape, -1)
    region = np.where((y < 0) & (y < 3 * x), 0, region)
    region = np.where((y > 0) & (y > -3 * x), 1, region)
    region = np.where((3 * x < y) & (y < -3 * x), 2, region)
    return region


def zero_set_size(values: np.ndarray) -> int:
    """Interior nodes where every phase vanishes."""
    inner = (slice(None),) + (slice(1, -1),) * (values.ndim - 1)
    return int(np.sum(np.all(values[inner] == 0.0, axis=0)))
