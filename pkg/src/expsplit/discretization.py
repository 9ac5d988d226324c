"""Uniform-grid finite differences for divergence-form diffusion operators.

The domain is the unit square with homogeneous Dirichlet boundary
conditions; only interior nodes carry unknowns.  The two split operators
d/dx(a d/dx) and d/dy(b d/dy) act line by line, which is what makes the
exponential dimension-splitting schemes cheap: each line is an
independent symmetric tridiagonal matrix.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .exceptions import GridMismatch, NonPositiveCoefficient
from .linalg import DiscreteOperator, SymTridiag


@dataclass(frozen=True)
class Grid:
    """Interior nodes of a uniform grid on (0,1) x (0,1)."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one interior node per direction")

    @property
    def dx(self) -> float:
        return 1.0 / (self.nx + 1)

    @property
    def dy(self) -> float:
        return 1.0 / (self.ny + 1)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 1.0) * self.dx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 1.0) * self.dy

    def mesh(self):
        """Coordinate arrays of shape (ny, nx), row-major (j outer)."""
        return np.meshgrid(self.x, self.y)


@dataclass
class GridFunction:
    """Scalar field on the interior nodes, flattened j-outer / i-inner."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.size:
            raise GridMismatch(
                f"expected {self.grid.size} values, got {self.values.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function contains non-finite entries")

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable) -> "GridFunction":
        X, Y = grid.mesh()
        return cls(grid, np.broadcast_to(f(X, Y), (grid.ny, grid.nx)).ravel())

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.size))

    def as_matrix(self) -> np.ndarray:
        return self.values.reshape(self.grid.ny, self.grid.nx)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


@dataclass(frozen=True)
class CoefficientField:
    """Positive diffusion coefficient, evaluable on [0,1]^2 (vectorized)."""

    func: Callable
    name: str = "coefficient"

    def __call__(self, x, y):
        return self.func(x, y)


class LineOperatorFamily:
    """One symmetric tridiagonal matrix per grid line for a split operator.

    For direction "x" there is one matrix of size nx per y-line (ny lines);
    for direction "y" one matrix of size ny per x-line.  Eigendecompositions
    are computed lazily, once, under a lock, and then reused for all
    exponential actions.
    """

    def __init__(self, grid: Grid, direction: str, diag: np.ndarray,
                 off: np.ndarray, half_samples: np.ndarray):
        if direction not in ("x", "y"):
            raise ValueError("direction must be 'x' or 'y'")
        self.grid = grid
        self.direction = direction
        self.diag = diag            # (n_lines, n)
        self.off = off              # (n_lines, n-1)
        self.half_samples = half_samples  # (n_lines, n+1)
        self._eigen = None
        self._lock = threading.Lock()

    @property
    def n_lines(self) -> int:
        return self.diag.shape[0]

    @property
    def line_size(self) -> int:
        return self.diag.shape[1]

    def line(self, k: int) -> SymTridiag:
        return SymTridiag(self.diag[k].copy(), self.off[k].copy())

    def eigen(self):
        """Per-line eigendecompositions: (eigenvalues, eigenvectors) stacks."""
        if self._eigen is None:
            with self._lock:
                if self._eigen is None:
                    n_lines, n = self.diag.shape
                    lam = np.empty((n_lines, n))
                    q = np.empty((n_lines, n, n))
                    for k in range(n_lines):
                        lam[k], q[k] = scipy.linalg.eigh_tridiagonal(
                            self.diag[k], self.off[k]
                        )
                    self._eigen = (lam, q)
        return self._eigen

    # -- internal array kernels (row-major flattened vectors) --

    def _lines(self, values: np.ndarray) -> np.ndarray:
        V = values.reshape(self.grid.ny, self.grid.nx)
        return V if self.direction == "x" else V.T

    def _flatten(self, lines: np.ndarray) -> np.ndarray:
        return (lines if self.direction == "x" else lines.T).ravel()

    def _apply_values(self, values: np.ndarray) -> np.ndarray:
        V = self._lines(values)
        out = self.diag * V
        out[:, 1:] += self.off * V[:, :-1]
        out[:, :-1] += self.off * V[:, 1:]
        return self._flatten(out)

    def _exp_values(self, t: float, values: np.ndarray) -> np.ndarray:
        lam, q = self.eigen()
        V = self._lines(values)
        c = np.einsum("lij,li->lj", q, V)
        c *= np.exp(t * lam)
        return self._flatten(np.einsum("lij,lj->li", q, c))

    # -- public operations --

    def _check(self, u: GridFunction):
        if u.grid != self.grid:
            raise GridMismatch("grid function lives on a different grid")

    def apply(self, u: GridFunction) -> GridFunction:
        self._check(u)
        return GridFunction(self.grid, self._apply_values(u.values))

    def exp_apply(self, t: float, u: GridFunction) -> GridFunction:
        """Action of exp(t * operator) on u, line by line."""
        if t < 0:
            raise ValueError("exponential action requires t >= 0")
        self._check(u)
        return GridFunction(self.grid, self._exp_values(t, u.values))

    def dense_matrix(self) -> np.ndarray:
        """Full (nx*ny) x (nx*ny) matrix of the split operator."""
        return self._scatter_blocks(
            [_tridiag_dense(self.diag[k], self.off[k]) for k in range(self.n_lines)]
        )

    def dense_exponential(self, t: float) -> np.ndarray:
        """Dense matrix of exp(t * operator); used by the smoothing probe."""
        lam, q = self.eigen()
        blocks = [
            (q[k] * np.exp(t * lam[k])) @ q[k].T for k in range(self.n_lines)
        ]
        return self._scatter_blocks(blocks)

    def _scatter_blocks(self, blocks) -> np.ndarray:
        N = self.grid.size
        M = np.zeros((N, N))
        nx = self.grid.nx
        if self.direction == "x":
            for j, blk in enumerate(blocks):
                sl = slice(j * nx, (j + 1) * nx)
                M[sl, sl] = blk
        else:
            for i, blk in enumerate(blocks):
                idx = i + nx * np.arange(self.grid.ny)
                M[np.ix_(idx, idx)] = blk
        return M


def _tridiag_dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    n = diag.size
    M = np.diag(diag)
    if n > 1:
        M += np.diag(off, 1) + np.diag(off, -1)
    return M


def build_line_operator(coeff: CoefficientField, grid: Grid,
                        direction: str) -> LineOperatorFamily:
    """Assemble the per-line tridiagonal matrices of one split operator.

    Coefficients are sampled at half nodes, which keeps every line matrix
    exactly symmetric.  Homogeneous Dirichlet values outside the interior
    are eliminated: boundary neighbours contribute only to the diagonal.
    """
    if direction == "x":
        x_half = (np.arange(grid.nx + 1) + 0.5) * grid.dx
        s = np.asarray(coeff(x_half[np.newaxis, :], grid.y[:, np.newaxis]), float)
        s = np.broadcast_to(s, (grid.ny, grid.nx + 1)).copy()
        h = grid.dx
    elif direction == "y":
        y_half = (np.arange(grid.ny + 1) + 0.5) * grid.dy
        s = np.asarray(coeff(grid.x[:, np.newaxis], y_half[np.newaxis, :]), float)
        s = np.broadcast_to(s, (grid.nx, grid.ny + 1)).copy()
        h = grid.dy
    else:
        raise ValueError("direction must be 'x' or 'y'")

    if not np.all(s > 0.0):
        raise NonPositiveCoefficient(
            f"{coeff.name}: non-positive sample in direction {direction}"
        )

    diag = -(s[:, :-1] + s[:, 1:]) / h**2
    off = s[:, 1:-1] / h**2
    return LineOperatorFamily(grid, direction, diag, off, s / h**2)


def apply_split_operator(family: LineOperatorFamily, u: GridFunction) -> GridFunction:
    """A*u or B*u, applied line by line."""
    return family.apply(u)


def assemble_full_operator(a_family: LineOperatorFamily,
                           b_family: LineOperatorFamily) -> DiscreteOperator:
    """Dense symmetric matrix of L = A + B on the flattened interior nodes."""
    if a_family.grid != b_family.grid:
        raise GridMismatch("operator families live on different grids")
    M = a_family.dense_matrix() + b_family.dense_matrix()
    assert np.array_equal(M, M.T), "assembly lost exact symmetry"
    return DiscreteOperator(M)


def boundary_coupling_vector(a_family: LineOperatorFamily,
                             b_family: LineOperatorFamily,
                             boundary_trace: Callable) -> GridFunction:
    """Stencil contributions of boundary nodes carrying trace values.

    For a node adjacent to the boundary the eliminated neighbour re-enters
    as coefficient * trace / spacing^2; corner-adjacent nodes collect a
    contribution from each direction.
    """
    if a_family.grid != b_family.grid:
        raise GridMismatch("operator families live on different grids")
    grid = a_family.grid
    out = np.zeros((grid.ny, grid.nx))

    # x-direction: left and right edges
    sx = a_family.half_samples  # (ny, nx+1), already divided by dx^2
    out[:, 0] += sx[:, 0] * np.asarray(
        boundary_trace(np.zeros(grid.ny), grid.y), float
    )
    out[:, -1] += sx[:, -1] * np.asarray(
        boundary_trace(np.ones(grid.ny), grid.y), float
    )

    # y-direction: bottom and top edges
    sy = b_family.half_samples  # (nx, ny+1), already divided by dy^2
    out[0, :] += sy[:, 0] * np.asarray(
        boundary_trace(grid.x, np.zeros(grid.nx)), float
    )
    out[-1, :] += sy[:, -1] * np.asarray(
        boundary_trace(grid.x, np.ones(grid.nx)), float
    )

    return GridFunction(grid, out.ravel())
