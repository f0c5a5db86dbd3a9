"""Uniform 1-D grid and sparse finite-difference operators.

Everything lives on the open interval (0, length) with homogeneous
Dirichlet conditions imposed by elimination: unknowns are the interior
nodal values only, boundary values are identically zero.  Coefficient
fields are supplied at *all* nodes, i.e. as arrays of length
``n_interior + 2`` including the two boundary points, so assembly can
average them onto half-nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of the interval (0, length) with Dirichlet boundary."""

    n_interior: int
    length: float = 1.0

    def __post_init__(self):
        if self.n_interior < 3:
            raise ValueError(f"n_interior must be >= 3, got {self.n_interior}")
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates x_i = i*h, i = 1..n_interior."""
        return self.spacing * np.arange(1, self.n_interior + 1)

    @property
    def nodes_with_boundary(self) -> np.ndarray:
        """All node coordinates including x=0 and x=length."""
        return self.spacing * np.arange(0, self.n_interior + 2)


def make_grid(n_interior: int, length: float = 1.0) -> Grid:
    """Build a uniform grid; rejects n_interior < 3 or length <= 0."""
    return Grid(n_interior=int(n_interior), length=float(length))


@dataclass
class GridFunction:
    """Nodal values of a scalar field at the interior nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_interior,):
            raise ValueError(
                f"expected {self.grid.n_interior} interior values, "
                f"got shape {self.values.shape}"
            )

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray([fn(x) for x in grid.nodes], dtype=float))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_interior))

    def with_boundary(self) -> np.ndarray:
        """Values padded with the Dirichlet zeros at both ends."""
        return np.concatenate(([0.0], self.values, [0.0]))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        # discrete L2 norm, weighted by the mesh spacing
        return float(np.sqrt(self.grid.spacing * np.sum(self.values**2)))

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


@dataclass
class SparseOperator:
    """Square sparse operator acting on interior nodal vectors."""

    matrix: sp.spmatrix
    symmetric: bool = False
    dimension: int = field(init=False)

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix)
        m, n = self.matrix.shape
        if m != n:
            raise ValueError(f"operator must be square, got {self.matrix.shape}")
        self.dimension = n

    def apply(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.dimension,):
            raise ValueError(
                f"vector length {vec.shape} does not match dimension {self.dimension}"
            )
        return self.matrix @ vec

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator(self.matrix + other.matrix,
                              symmetric=self.symmetric and other.symmetric)

    def __mul__(self, scalar: float) -> "SparseOperator":
        return SparseOperator(self.matrix * float(scalar), symmetric=self.symmetric)

    __rmul__ = __mul__


def _as_node_array(grid: Grid, coeff) -> np.ndarray:
    """Coerce a coefficient given as array (n+2), callable or scalar to
    nodal values including the boundary points."""
    if callable(coeff):
        return np.asarray([coeff(x) for x in grid.nodes_with_boundary], dtype=float)
    coeff = np.asarray(coeff, dtype=float)
    if coeff.ndim == 0:
        return np.full(grid.n_interior + 2, float(coeff))
    if coeff.shape == (grid.n_interior + 2,):
        return coeff
    raise ValueError(
        f"coefficient must cover all {grid.n_interior + 2} nodes, got {coeff.shape}"
    )


def assemble_diffusion(grid: Grid, coeff) -> SparseOperator:
    """Tridiagonal discretization of u -> -(A u')' with A averaged at
    half-nodes.  A must be bounded below by a positive constant."""
    a = _as_node_array(grid, coeff)
    if np.any(a <= 0.0):
        raise ValueError("diffusion coefficient must be strictly positive")
    h = grid.spacing
    half = 0.5 * (a[:-1] + a[1:])          # A_{i+1/2}, i = 0..n
    lower = -half[1:-1] / h**2             # couples u_{i-1}
    diag = (half[:-1] + half[1:]) / h**2
    upper = -half[1:-1] / h**2
    mat = sp.diags([lower, diag, upper], offsets=[-1, 0, 1], format="csr")
    return SparseOperator(mat, symmetric=True)


def assemble_drift(grid: Grid, flux_coeff) -> SparseOperator:
    """Tridiagonal discretization of u -> -(B u)' with B averaged at
    half-nodes and u averaged centrally; exact for constant B, linear u."""
    b = _as_node_array(grid, flux_coeff)
    h = grid.spacing
    half = 0.5 * (b[:-1] + b[1:])          # B_{i+1/2}, i = 0..n
    # -(B_{i+1/2}(u_i+u_{i+1})/2 - B_{i-1/2}(u_{i-1}+u_i)/2)/h
    lower = half[1:-1] / (2.0 * h)
    diag = (half[:-1] - half[1:]) / (2.0 * h)
    upper = -half[1:-1] / (2.0 * h)
    mat = sp.diags([lower, diag, upper], offsets=[-1, 0, 1], format="csr")
    return SparseOperator(mat, symmetric=False)


def assemble_weight(grid: Grid, weight) -> SparseOperator:
    """Diagonal multiplication operator from interior nodal weights."""
    if isinstance(weight, GridFunction):
        w = weight.values
    elif callable(weight):
        w = np.asarray([weight(x) for x in grid.nodes], dtype=float)
    else:
        w = np.asarray(weight, dtype=float)
        if w.ndim == 0:
            w = np.full(grid.n_interior, float(w))
    if w.shape != (grid.n_interior,):
        raise ValueError(f"weight must have {grid.n_interior} interior values")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight values must be finite")
    return SparseOperator(sp.diags(w, format="csr"), symmetric=True)
