"""The m-phase discrete problem: segregated states, the hat transform, the
discrete energy J_h and the fixed-point map whose solutions are its minimizers.

Phases are indexed 0..m-1. A state stores full fields ``w^l = u^l + phi^l``:
the unknown interior part ``u^l`` (zero on the boundary) plus the boundary
data ``phi^l`` (zero in the interior).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grid import GridFunction, UniformGrid, laplacian_field, neighbor_average_field


@dataclass(frozen=True, eq=False)
class MultiPhaseState:
    grid: UniformGrid
    values: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        b = np.array(self.boundary, dtype=float)
        if v.ndim != self.grid.dim + 1 or v.shape[1:] != self.grid.shape:
            raise ValidationError(f"state values must have shape (m, {self.grid.shape}), got {v.shape}")
        if b.shape != v.shape:
            raise ValidationError(f"boundary shape {b.shape} does not match values {v.shape}")
        if v.shape[0] < 2:
            raise ValidationError("need at least two phases")
        v.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "boundary", b)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def interior_part(self) -> np.ndarray:
        """u^l: the full field with boundary nodes zeroed."""
        u = np.zeros_like(self.values)
        idx = (slice(None),) + self.grid.interior
        u[idx] = self.values[idx]
        return u

    def phase(self, l: int) -> GridFunction:
        return GridFunction(self.grid, self.values[l])

    def with_interior(self, interior: np.ndarray) -> MultiPhaseState:
        v = np.array(self.values)
        v[(slice(None),) + self.grid.interior] = interior
        return MultiPhaseState(self.grid, v, self.boundary)

    def total(self) -> np.ndarray:
        """Sum of all phases, the scalar field compared against exact solutions."""
        return self.values.sum(axis=0)

    def signed(self) -> np.ndarray:
        """Two-phase scalar w = w^0 - w^1."""
        if self.m != 2:
            raise ValidationError("signed field is only defined for two phases")
        return self.values[0] - self.values[1]


def hat_field(z: np.ndarray) -> np.ndarray:
    """z^k - sum_{j != k} z^j for every k, along axis 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    for k in range(z.shape[0]):
        others = np.zeros_like(z[0])
        for j in range(z.shape[0]):
            if j != k:
                others = others + z[j]
        out[k] = z[k] - others
    return out


def hat(state: MultiPhaseState, l: int, alpha) -> float:
    if not 0 <= l < state.m:
        raise IndexError(f"phase {l} out of range 0..{state.m - 1}")
    alpha = state.grid._check_index(alpha)
    v = state.values[(slice(None),) + alpha]
    return float(v[l] - sum(v[j] for j in range(state.m) if j != l))


def _check_dynamics(state: MultiPhaseState, dynamics) -> None:
    if len(dynamics) != state.m:
        raise ValidationError(f"got {len(dynamics)} dynamics for {state.m} phases")


def energy(state: MultiPhaseState, dynamics) -> float:
    """J_h = -1/2 sum (L_h u^, u) + sum F(x, u) - sum (L_h phi^, u).

    Inner products run over interior nodes; the primitive sum runs over all
    nodes (u vanishes on the boundary, so only interior terms contribute).
    """
    _check_dynamics(state, dynamics)
    g = state.grid
    u = state.interior_part
    inner = (slice(None),) + g.interior
    lap_u = laplacian_field(hat_field(u), g.dim, g.h)
    lap_phi = laplacian_field(hat_field(state.boundary), g.dim, g.h)
    quad = -0.5 * np.sum(lap_u * u[inner])
    link = -np.sum(lap_phi * u[inner])
    prim = sum(np.sum(dyn.F(g.mesh, u[l])) for l, dyn in enumerate(dynamics))
    return float(quad + prim + link)


def bind(dynamics, grid: UniformGrid):
    """Per-phase ``s -> f_l(x_alpha, s)`` on the interior nodes."""
    return [d.bind(grid.interior_mesh) for d in dynamics]


def bind_resolvents(dynamics, grid: UniformGrid):
    """Per-phase ``a -> w`` solving w + f_l(x_alpha, w) h^2/K = a on the interior nodes."""
    tau = grid.h * grid.h / grid.K
    return [d.resolvent(grid.interior_mesh, tau) for d in dynamics]


def fixed_point_map(values: np.ndarray, fs, grid: UniformGrid, implicit: bool = False) -> np.ndarray:
    """max(-f_l(x, w^l) h^2/K + avg w^l - sum_{p != l} avg w^p, 0) at interior nodes.

    ``values`` holds full fields; ``fs`` comes from :func:`bind`. Returns the
    new interior block, shape ``(m, n-1[, n-1])``.

    With ``implicit`` the reaction is taken at the new value instead, and
    ``fs`` must come from :func:`bind_resolvents`. Both maps have the same
    fixed points.
    """
    m = values.shape[0]
    avg = neighbor_average_field(values, grid.dim)
    scale = grid.h * grid.h / grid.K
    centre = values[(slice(None),) + grid.interior]
    out = np.empty_like(avg)
    for l in range(m):
        others = np.zeros_like(avg[l])
        for p in range(m):
            if p != l:
                others = others + avg[p]
        if implicit:
            a = fs[l](avg[l] - others)
        else:
            a = (avg[l] - others) - fs[l](centre[l]) * scale
        out[l] = np.where(a > 0.0, a, 0.0)
    return out


@dataclass
class SchemeResidual:
    per_phase: np.ndarray
    worst_node: list[tuple[int, ...]]

    @property
    def value(self) -> float:
        return float(self.per_phase.max()) if self.per_phase.size else 0.0

    def __float__(self):
        return self.value


def scheme_residual(state: MultiPhaseState, dynamics) -> SchemeResidual:
    """Max-norm distance of the state to the fixed-point system, per phase."""
    _check_dynamics(state, dynamics)
    g = state.grid
    new = fixed_point_map(state.values, bind(dynamics, g), g)
    diff = np.abs(new - state.values[(slice(None),) + g.interior])
    per_phase = diff.reshape(state.m, -1).max(axis=1)
    worst = []
    for l in range(state.m):
        k = np.unravel_index(int(np.argmax(diff[l])), diff[l].shape)
        worst.append(tuple(int(i) + 1 for i in k))
    return SchemeResidual(per_phase, worst)


@dataclass(frozen=True)
class AuditViolation:
    kind: str
    node: tuple[int, ...]
    phases: tuple[int, ...]
    detail: str


def _nodes(mask: np.ndarray):
    return [tuple(int(i) for i in k) for k in np.argwhere(mask)]


def audit(state: MultiPhaseState) -> list[AuditViolation]:
    """Exact checks of nonnegativity, segregation, boundary compatibility and attachment."""
    g = state.grid
    v, phi = state.values, state.boundary
    out: list[AuditViolation] = []
    for l in range(state.m):
        for a in _nodes(v[l] < 0):
            out.append(AuditViolation("nonnegativity", a, (l,), f"u={v[(l,) + a]!r}"))
    interior = g.interior_mask
    for p in range(state.m):
        for q in range(p + 1, state.m):
            both = interior & (v[p] != 0) & (v[q] != 0)
            for a in _nodes(both):
                out.append(AuditViolation("segregation", a, (p, q), f"u^{p}={v[(p,) + a]!r}, u^{q}={v[(q,) + a]!r}"))
            clash = ~interior & (phi[p] * phi[q] != 0)
            for a in _nodes(clash):
                out.append(AuditViolation("boundary_compatibility", a, (p, q), "overlapping boundary supports"))
    for l in range(state.m):
        for a in _nodes(~interior & (phi[l] < 0)):
            out.append(AuditViolation("boundary_compatibility", a, (l,), f"phi={phi[(l,) + a]!r}<0"))
        for a in _nodes(interior & (phi[l] != 0)):
            out.append(AuditViolation("boundary_support", a, (l,), "phi nonzero at an interior node"))
        for a in _nodes(~interior & (v[l] != phi[l])):
            out.append(AuditViolation("attachment", a, (l,), f"u={v[(l,) + a]!r} but phi={phi[(l,) + a]!r}"))
    return out
