"""Principal eigenpairs of weighted discrete elliptic operators.

Covers both the divergence form -(A u')' + B u = sigma C u and the
drift form -(M1(v) u v' + M2(v) u')' + B u = sigma C u, together with
the exponential gauge that maps the drift form onto a self-adjoint
weighted problem.  The solver is shift-invert inverse power iteration
with a Gershgorin-based shift, so each sweep is one banded solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad

from .errors import NonConvergence, QuadratureFailure, SignFailure
from .grid import (Grid, GridFunction, SparseOperator, _as_node_array,
                   assemble_diffusion, assemble_drift, assemble_weight)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


@dataclass
class EigenResult:
    sigma1: float
    eigenfunction: GridFunction
    iterations: int
    residual: float


def _gershgorin_shift(L: sp.csr_matrix, c_diag: np.ndarray) -> float:
    """A value strictly below every eigenvalue of C^-1 L."""
    diag = L.diagonal()
    absrow = np.abs(L).sum(axis=1).A1 - np.abs(diag)
    bound = np.min((diag - absrow) / c_diag)
    return bound - max(1.0, 0.1 * abs(bound))


def principal_eigenpair(L: SparseOperator, C_weight: SparseOperator,
                        tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER,
                        grid: Grid | None = None) -> EigenResult:
    """Smallest eigenvalue of L phi = sigma C phi with positive phi.

    C_weight must be diagonal with strictly positive entries.  Raises
    NonConvergence past max_iter and SignFailure if the converged
    eigenfunction is not one-signed.
    """
    n = L.dimension
    c_diag = C_weight.matrix.diagonal()
    if np.any(c_diag <= 0.0):
        raise ValueError("C weight must have strictly positive diagonal")

    s = _gershgorin_shift(L.matrix, c_diag)
    shifted = (L.matrix - s * C_weight.matrix).tocsc()
    solve = spla.splu(shifted).solve

    Lmat, Cmat = L.matrix, C_weight.matrix
    phi = np.ones(n)
    phi /= np.max(np.abs(phi))
    sigma_prev = np.inf
    for it in range(1, max_iter + 1):
        y = solve(Cmat @ phi)
        peak = y[np.argmax(np.abs(y))]
        phi = y / peak
        cphi = Cmat @ phi
        lphi = Lmat @ phi
        sigma = float(np.dot(cphi, lphi) / np.dot(cphi, cphi))
        residual = float(np.max(np.abs(lphi - sigma * cphi)))
        resid_scale = max(1.0, float(np.max(np.abs(lphi))))
        if abs(sigma - sigma_prev) < tol and residual <= tol * resid_scale:
            break
        sigma_prev = sigma
    else:
        raise NonConvergence(
            f"inverse iteration did not converge in {max_iter} iterations")

    # peak normalization forces the largest entry to +1, so a negative
    # entry means the iterate is genuinely sign-changing
    if np.min(phi) <= 0.0:
        raise SignFailure("converged eigenfunction changes sign")
    if grid is None:
        grid = Grid(n_interior=n)
    return EigenResult(sigma1=sigma,
                       eigenfunction=GridFunction(grid, phi),
                       iterations=it, residual=residual)


def sigma1_divergence(grid: Grid, A, B, C=1.0,
                      tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> EigenResult:
    """sigma_1 of -(A u')' + B u = sigma C u on the grid.

    A is given at all nodes (with boundary), B and C at interior nodes.
    """
    L = assemble_diffusion(grid, A) + assemble_weight(grid, B)
    return principal_eigenpair(L, assemble_weight(grid, C),
                               tol=tol, max_iter=max_iter, grid=grid)


def _interior_gradient(grid: Grid, v_wb: np.ndarray) -> np.ndarray:
    """Nodal derivative of a field given with boundary values; centered
    in the interior, one-sided at the two boundary nodes."""
    h = grid.spacing
    dv = np.empty_like(v_wb)
    dv[1:-1] = (v_wb[2:] - v_wb[:-2]) / (2.0 * h)
    dv[0] = (-3.0 * v_wb[0] + 4.0 * v_wb[1] - v_wb[2]) / (2.0 * h)
    dv[-1] = (3.0 * v_wb[-1] - 4.0 * v_wb[-2] + v_wb[-3]) / (2.0 * h)
    return dv


def drift_operator(grid: Grid, M1_of_v, M2_of_v, v: GridFunction,
                   B) -> SparseOperator:
    """Assemble -(M1(v) u v' + M2(v) u')' + B u on interior nodes."""
    m1 = _as_node_array(grid, M1_of_v)
    m2 = _as_node_array(grid, M2_of_v)
    dv = _interior_gradient(grid, v.with_boundary())
    L = assemble_diffusion(grid, m2) + assemble_drift(grid, m1 * dv)
    return L + assemble_weight(grid, B)


def sigma1_drift(grid: Grid, M1_of_v, M2_of_v, v: GridFunction, B, C=1.0,
                 tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> EigenResult:
    """Principal eigenvalue of the drift-form problem.

    M1_of_v and M2_of_v are the nodal values (with boundary) of
    M1(v(x)) and M2(v(x)); v must vanish on the boundary.
    """
    L = drift_operator(grid, M1_of_v, M2_of_v, v, B)
    return principal_eigenpair(L, assemble_weight(grid, C),
                               tol=tol, max_iter=max_iter, grid=grid)


def gauge_transform(M1, M2, v_wb: np.ndarray,
                    quad_tol: float = 1e-10) -> np.ndarray:
    """exp(-h(v(x))) at every node, h(z) = int_0^z M1(s)/M2(s) ds.

    M1 and M2 are scalar callables; v_wb are the nodal values of v
    including the boundary.
    """
    v_wb = np.asarray(v_wb, dtype=float)

    def integrand(s):
        return M1(s) / M2(s)

    out = np.empty_like(v_wb)
    cache: dict[float, float] = {}
    for i, z in enumerate(v_wb):
        key = float(z)
        if key not in cache:
            val, err = quad(integrand, 0.0, key, epsabs=quad_tol, limit=200)
            if err > max(100.0 * quad_tol, 1e-7 * abs(val)):
                raise QuadratureFailure(
                    f"gauge integral error estimate {err:g} above tolerance")
            cache[key] = val
        out[i] = np.exp(-cache[key])
    return out


def transform_identity_check(grid: Grid, M1, M2, v: GridFunction, B, C=1.0,
                             tol: float = DEFAULT_TOL):
    """Evaluate the drift-form and gauge-form principal eigenvalues on
    the same grid; returns (drift EigenResult, gauge EigenResult, gap)."""
    v_wb = v.with_boundary()
    m1 = np.asarray([M1(z) for z in v_wb])
    m2 = np.asarray([M2(z) for z in v_wb])
    res_drift = sigma1_drift(grid, m1, m2, v, B, C, tol=tol)

    w = gauge_transform(M1, M2, v_wb)
    B_arr = assemble_weight(grid, B).matrix.diagonal()
    C_arr = assemble_weight(grid, C).matrix.diagonal()
    w_int = w[1:-1]
    L = assemble_diffusion(grid, m2 * w) + assemble_weight(grid, B_arr * w_int)
    res_gauge = principal_eigenpair(L, assemble_weight(grid, C_arr * w_int),
                                    tol=tol, grid=grid)
    gap = abs(res_drift.sigma1 - res_gauge.sigma1)
    return res_drift, res_gauge, gap


def deflated_second_estimate(L: SparseOperator, C_weight: SparseOperator,
                             result: EigenResult, iters: int = 30) -> float:
    """Rough estimate of the next eigenvalue above sigma1, by inverse
    iteration deflated against the computed eigenfunction.  Used as a
    guard that the iteration did not land on sigma2."""
    n = L.dimension
    phi1 = result.eigenfunction.values
    phi1 = phi1 / np.linalg.norm(phi1)
    c_diag = C_weight.matrix.diagonal()
    s = _gershgorin_shift(L.matrix, c_diag)
    solve = spla.splu((L.matrix - s * C_weight.matrix).tocsc()).solve
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(n)
    for _ in range(iters):
        psi -= np.dot(psi, phi1) * phi1
        psi = solve(C_weight.matrix @ psi)
        psi /= np.linalg.norm(psi)
    psi -= np.dot(psi, phi1) * phi1
    psi /= np.linalg.norm(psi)
    cpsi = C_weight.matrix @ psi
    lpsi = L.matrix @ psi
    return float(np.dot(cpsi, lpsi) / np.dot(cpsi, cpsi))
