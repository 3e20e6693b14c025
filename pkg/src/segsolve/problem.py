"""Problem definitions: domain resolution, phase count, boundary data, dynamics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ProblemDefinitionError, ValidationError
from .grid import UniformGrid


@dataclass(frozen=True)
class ProblemSpec:
    """An m-phase segregation problem on [-1,1]^dim discretized with ``n`` cells per side.

    ``boundary[l]`` and ``exact[l]`` are vectorized callables of the node
    coordinates. Boundary callables are only ever evaluated at boundary
    nodes. ``preset`` names the registry entry the data came from, so the
    problem can be written back to a config file.
    """

    name: str
    m: int
    boundary: tuple[Callable, ...]
    dynamics: tuple
    dim: int = 2
    n: int = 20
    exact: tuple[Callable, ...] | None = None
    preset: str | None = None

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"need m >= 2 phases, got {self.m}")
        if len(self.boundary) != self.m:
            raise ValidationError(f"{len(self.boundary)} boundary functions for {self.m} phases")
        if len(self.dynamics) != self.m:
            raise ValidationError(f"{len(self.dynamics)} dynamics for {self.m} phases")
        if self.exact is not None and len(self.exact) != self.m:
            raise ValidationError(f"{len(self.exact)} exact solutions for {self.m} phases")
        object.__setattr__(self, "boundary", tuple(self.boundary))
        object.__setattr__(self, "dynamics", tuple(self.dynamics))
        if self.exact is not None:
            object.__setattr__(self, "exact", tuple(self.exact))
        UniformGrid(self.dim, self.n)

    @property
    def grid(self) -> UniformGrid:
        return UniformGrid(self.dim, self.n)

    def with_n(self, n: int) -> ProblemSpec:
        return replace(self, n=n)

    def boundary_values(self) -> np.ndarray:
        """phi^l at every node, zero in the interior; shape (m, *grid.shape)."""
        g = self.grid
        mask = g.boundary_mask
        pts = tuple(c[mask] for c in g.mesh)
        out = np.zeros((self.m,) + g.shape)
        for l, fn in enumerate(self.boundary):
            out[l][mask] = np.broadcast_to(np.asarray(fn(*pts), dtype=float), pts[0].shape)
        return out

    def exact_values(self) -> np.ndarray:
        if self.exact is None:
            raise ValidationError(f"problem {self.name!r} has no exact solution")
        g = self.grid
        return np.stack([np.broadcast_to(np.asarray(fn(*g.mesh), dtype=float), g.shape) for fn in self.exact])

    def check_boundary(self) -> None:
        """Raise naming the first boundary node where the data are inadmissible."""
        phi = self.boundary_values()
        g = self.grid
        for alpha in g.boundary_nodes():
            vals = phi[(slice(None),) + alpha]
            if not np.all(np.isfinite(vals)):
                raise ProblemDefinitionError(f"non-finite boundary value at node {alpha} {g.point(alpha)}")
            neg = np.flatnonzero(vals < 0)
            if neg.size:
                raise ProblemDefinitionError(
                    f"phi^{neg[0]} < 0 at boundary node {alpha} {g.point(alpha)}")
            pos = np.flatnonzero(vals > 0)
            if pos.size > 1:
                raise ProblemDefinitionError(
                    f"phases {tuple(int(p) for p in pos)} overlap at boundary node {alpha} {g.point(alpha)}")


class NodeTable:
    """Boundary data given as explicit values per boundary node (row-major order)."""

    def __init__(self, values: Sequence[float], dim: int, n: int):
        self.grid = UniformGrid(dim, n)
        nodes = self.grid.boundary_nodes()
        values = [float(v) for v in values]
        if len(values) != len(nodes):
            raise ValidationError(f"expected {len(nodes)} boundary values for n={n}, got {len(values)}")
        self.values = values
        self._table = np.zeros(self.grid.shape)
        for a, v in zip(nodes, values):
            self._table[a] = v

    def __call__(self, *coords):
        h = self.grid.h
        idx = tuple(np.rint((np.asarray(c) + 1.0) / h).astype(int) for c in coords)
        return self._table[idx]

    @classmethod
    def from_array(cls, grid: UniformGrid, values: np.ndarray) -> NodeTable:
        """Take the boundary entries of a full nodal array."""
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValidationError(f"expected an array of shape {grid.shape}, got {values.shape}")
        return cls([values[a] for a in grid.boundary_nodes()], grid.dim, grid.n)
