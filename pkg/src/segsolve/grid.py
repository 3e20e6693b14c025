"""Uniform grids on [-1,1]^d, d in {1, 2}, and the 3-/5-point stencils.

Arrays are indexed ``[i]`` or ``[i, j]`` with ``x_i = -1 + i h`` along the
first axis and ``y_j = -1 + j h`` along the second, so a C-ordered buffer is
the row-major node order used for serialization. Vectorized helpers accept
arbitrary leading axes (e.g. a phase axis) and act on the trailing ``dim``
axes.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ContractViolation, ValidationError

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class UniformGrid:
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValidationError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"n_per_side must be an integer >= 2, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 / self.n

    @property
    def K(self) -> int:
        """Neighbours per interior node."""
        return 2 * self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n + 1,) * self.dim

    @property
    def node_count(self) -> int:
        return (self.n + 1) ** self.dim

    @property
    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        # linspace gives -1 + i*h for i < n and pins the last node to exactly 1
        a = np.linspace(-1.0, 1.0, self.n + 1)
        a.flags.writeable = False
        return a

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape``, one per dimension."""
        arrs = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        for a in arrs:
            a.flags.writeable = False
        return tuple(arrs)

    @cached_property
    def interior_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.ascontiguousarray(a[self.interior]) for a in self.mesh)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.interior] = True
        mask.flags.writeable = False
        return mask

    @property
    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask

    def nodes(self):
        """All multi-indices in row-major order."""
        return itertools.product(range(self.n + 1), repeat=self.dim)

    def boundary_nodes(self) -> list[tuple[int, ...]]:
        return [a for a in self.nodes() if not self.is_interior(a)]

    def point(self, alpha) -> tuple[float, ...]:
        alpha = self._check_index(alpha)
        return tuple(float(self.axis[k]) for k in alpha)

    def is_interior(self, alpha) -> bool:
        return all(1 <= k <= self.n - 1 for k in alpha)

    def neighbors(self, alpha) -> list[tuple[int, ...]]:
        alpha = self._check_index(alpha)
        if not self.is_interior(alpha):
            raise ContractViolation(f"node {alpha} is on the boundary and has no full stencil")
        out = []
        for d in range(self.dim):
            for step in (-1, 1):
                b = list(alpha)
                b[d] += step
                out.append(tuple(b))
        return out

    def _check_index(self, alpha) -> tuple[int, ...]:
        if np.ndim(alpha) == 0:
            alpha = (alpha,)
        alpha = tuple(int(k) for k in alpha)
        if len(alpha) != self.dim:
            raise IndexError(f"index {alpha} has wrong arity for a {self.dim}D grid")
        if any(k < 0 or k > self.n for k in alpha):
            raise IndexError(f"index {alpha} outside 0..{self.n}")
        return alpha


def classify(grid: UniformGrid, alpha) -> str:
    alpha = grid._check_index(alpha)
    return INTERIOR if grid.is_interior(alpha) else BOUNDARY


@dataclass(frozen=True, eq=False)
class GridFunction:
    """One real value per node. The value array is read-only."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            if v.size == self.grid.node_count:
                v = v.reshape(self.grid.shape)
            else:
                raise ValidationError(f"expected {self.grid.shape} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("grid function contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: UniformGrid, fn) -> GridFunction:
        return cls(grid, np.broadcast_to(fn(*grid.mesh), grid.shape))

    @classmethod
    def zeros(cls, grid: UniformGrid) -> GridFunction:
        return cls(grid, np.zeros(grid.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __getitem__(self, alpha) -> float:
        return float(self.values[self.grid._check_index(alpha)])

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def to_csv(self, path) -> None:
        write_csv(path, self.grid, self.values)

    @classmethod
    def from_csv(cls, path, grid: UniformGrid | None = None) -> GridFunction:
        return read_csv(path, grid)


def write_csv(path, grid: UniformGrid, values: np.ndarray) -> None:
    header = ["x", "y"][: grid.dim] + ["value"]
    coords = [a.ravel() for a in grid.mesh]
    vals = np.asarray(values, dtype=float).reshape(grid.shape).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(vals.size):
            w.writerow([format(c[k], ".17g") for c in coords] + [format(vals[k], ".17g")])


def read_csv(path, grid: UniformGrid | None = None) -> GridFunction:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    dim = len(header) - 1
    if header[-1] != "value" or dim not in (1, 2):
        raise ValidationError(f"unrecognized CSV header {header}")
    n = round(len(body) ** (1.0 / dim)) - 1
    if grid is None:
        grid = UniformGrid(dim, n)
    if grid.node_count != len(body):
        raise ValidationError(f"CSV has {len(body)} rows, grid expects {grid.node_count}")
    return GridFunction(grid, np.array([float(r[-1]) for r in body]))


# --- stencils -------------------------------------------------------------

def _shifted(a: np.ndarray, dim: int):
    """Neighbour slabs of the interior block: (minus, plus) pairs per axis."""
    lead = (Ellipsis,)
    inner = (slice(1, -1),) * dim
    pairs = []
    for d in range(dim):
        lo = list(inner)
        hi = list(inner)
        lo[d] = slice(None, -2)
        hi[d] = slice(2, None)
        pairs.append((a[lead + tuple(lo)], a[lead + tuple(hi)]))
    return pairs


def neighbor_sum_field(a: np.ndarray, dim: int) -> np.ndarray:
    """Sum over the K neighbours at every interior node.

    Pairs are summed per axis first, ((W+E)+(S+N)), so the result never
    exceeds K times the largest neighbour in floating point.
    """
    pairs = _shifted(np.asarray(a, dtype=float), dim)
    total = pairs[0][0] + pairs[0][1]
    for lo, hi in pairs[1:]:
        total = total + (lo + hi)
    return total


def neighbor_average_field(a: np.ndarray, dim: int) -> np.ndarray:
    return neighbor_sum_field(a, dim) * (1.0 / (2 * dim))


def laplacian_field(a: np.ndarray, dim: int, h: float) -> np.ndarray:
    """L_h at every interior node, shape ``(..., n-1[, n-1])``."""
    a = np.asarray(a, dtype=float)
    center = a[(Ellipsis,) + (slice(1, -1),) * dim]
    return (neighbor_sum_field(a, dim) - 2 * dim * center) / (h * h)


def laplacian(v: GridFunction, alpha) -> float:
    g = v.grid
    g.neighbors(alpha)  # raises on boundary nodes
    alpha = g._check_index(alpha)
    vals = v.values
    if g.dim == 1:
        (i,) = alpha
        return (vals[i - 1] - 2 * vals[i] + vals[i + 1]) / g.h**2
    i, j = alpha
    return (vals[i - 1, j] + vals[i + 1, j] - 4 * vals[i, j] + vals[i, j - 1] + vals[i, j + 1]) / g.h**2


def neighbor_average(v: GridFunction, alpha) -> float:
    nbrs = v.grid.neighbors(alpha)
    return float(sum(v.values[b] for b in nbrs) / len(nbrs))
