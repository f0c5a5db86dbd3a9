"""Scalar quasilinear problems -(d(w) w')' = gamma*a(x)*w + h(w)*w.

The solve works on the Kirchhoff-transformed residual: with
I(s) = int_0^s d(t) dt the equation becomes -Lap[I(w)] = gamma*a*w + h(w)*w,
so Newton sees the well-conditioned Jacobian
Lap_h * diag(d(w)) - diag(gamma*a + h(w) + w*h'(w)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg as spla
from scipy.integrate import quad

from .errors import NewtonDivergence, QuadratureFailure
from .eigen import principal_eigenpair
from .grid import Grid, GridFunction, assemble_diffusion, assemble_weight

ZERO_SOLUTION_TOL = 1e-8
RESIDUAL_TOL = 1e-8
MAX_HALVINGS = 8


@dataclass
class ScalarProblem:
    """Coefficient bundle for one scalar semitrivial equation."""

    d: Callable[[float], float]
    d_prime: Callable[[float], float]
    h: Callable[[float], float]
    h_prime: Callable[[float], float]
    gamma: float
    weight: Optional[np.ndarray] = None  # a(x) at interior nodes, default 1

    def weight_on(self, grid: Grid) -> np.ndarray:
        if self.weight is None:
            return np.ones(grid.n_interior)
        w = np.asarray(self.weight, dtype=float)
        if w.shape != (grid.n_interior,):
            raise ValueError("weight does not match grid")
        return w


def kirchhoff(d: Callable[[float], float], s: float,
              quad_tol: float = 1e-12) -> float:
    """I(s) = int_0^s d(t) dt by adaptive quadrature."""
    if s < 0:
        raise ValueError("kirchhoff transform defined for s >= 0")
    val, err = quad(d, 0.0, s, epsabs=quad_tol, limit=200)
    if err > max(quad_tol, 1e-9 * abs(val)):
        raise QuadratureFailure(
            f"kirchhoff integral error estimate {err:g} above tolerance")
    return val


# fixed-order Gauss rule for the nodal Kirchhoff values inside Newton;
# machine precision for the smooth d of the applications, cross-checked
# against the adaptive `kirchhoff` in the tests
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(24)


def _kirchhoff_nodal(d, w: np.ndarray) -> np.ndarray:
    out = np.empty_like(w)
    for i, s in enumerate(w):
        s = float(s)
        if s <= 0.0:
            # linear extension below zero keeps the residual C^1 while
            # Newton iterates hover around the trivial solution
            out[i] = d(0.0) * s
            continue
        half = 0.5 * s
        pts = half * (_GAUSS_X + 1.0)
        out[i] = half * sum(wj * d(float(p)) for wj, p in zip(_GAUSS_W, pts))
    return out


def scalar_residual(problem: ScalarProblem, grid: Grid,
                    w: np.ndarray) -> np.ndarray:
    lap = assemble_diffusion(grid, 1.0)
    a = problem.weight_on(grid)
    Iw = _kirchhoff_nodal(problem.d, w)
    hw = np.asarray([problem.h(float(s)) for s in w])
    return lap.apply(Iw) - problem.gamma * a * w - hw * w


def scalar_jacobian(problem: ScalarProblem, grid: Grid, w: np.ndarray):
    lap = assemble_diffusion(grid, 1.0)
    a = problem.weight_on(grid)
    dw = np.asarray([problem.d(max(float(s), 0.0)) for s in w])
    hw = np.asarray([problem.h(float(s)) for s in w])
    hpw = np.asarray([problem.h_prime(float(s)) for s in w])
    J = lap.matrix @ scipy.sparse.diags(dw)
    J = J - scipy.sparse.diags(problem.gamma * a + hw + w * hpw)
    return J.tocsc()


def default_guess(problem: ScalarProblem, grid: Grid) -> GridFunction:
    """Positive multiple of the principal eigenfunction of -d(0)*Lap,
    scaled by the first-order bifurcation asymptotics so that Newton
    starts inside the basin of the positive solution rather than the
    trivial one."""
    d0 = problem.d(0.0)
    L = assemble_diffusion(grid, d0)
    a = problem.weight_on(grid)
    res = principal_eigenpair(L, assemble_weight(grid, a), grid=grid)
    phi = res.eigenfunction.values
    margin = problem.gamma - res.sigma1
    # w ~ c*phi with c = margin * <a phi^2> / <q phi^3>, q = -h'(0)
    q = -problem.h_prime(0.0)
    if margin > 0 and q > 0:
        amp = margin * np.sum(a * phi**2) / (q * np.sum(phi**3))
    else:
        amp = 0.1 * max(margin, 1.0)
    return GridFunction(grid, amp * phi)


def solve_scalar(problem: ScalarProblem, grid: Grid,
                 guess: Optional[GridFunction] = None,
                 tol: float = RESIDUAL_TOL,
                 max_iter: int = 100) -> Optional[GridFunction]:
    """Damped Newton for the positive solution; None when the iteration
    lands on the zero solution (only the trivial state exists)."""
    if guess is None:
        base = default_guess(problem, grid)
        # retry with larger seeds before declaring the solution trivial:
        # near the threshold the first basin boundary sits close to zero
        for scale in (1.0, 3.0, 10.0):
            seed = GridFunction(grid, scale * base.values)
            try:
                sol = solve_scalar(problem, grid, seed, tol, max_iter)
            except NewtonDivergence:
                continue
            if sol is not None:
                return sol
        return None
    w = np.maximum(np.asarray(guess.values, dtype=float), 0.0)

    def target(vec):
        # relative target for small-amplitude iterates, so a sequence
        # collapsing onto the trivial solution is driven to machine zero
        # instead of stalling just above the classification cutoff
        return tol * min(1.0, float(np.max(np.abs(vec))))

    res = scalar_residual(problem, grid, w)
    rnorm = np.max(np.abs(res))
    for _ in range(max_iter):
        if rnorm <= target(w):
            break
        J = scalar_jacobian(problem, grid, w)
        try:
            step = spla.splu(J).solve(-res)
        except RuntimeError as exc:
            raise NewtonDivergence(f"singular scalar Jacobian: {exc}") from exc
        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            w_new = w + alpha * step
            res_new = scalar_residual(problem, grid, w_new)
            rnorm_new = np.max(np.abs(res_new))
            if rnorm_new < rnorm or rnorm_new <= target(w_new):
                break
            alpha *= 0.5
        else:
            raise NewtonDivergence(
                f"step-halving exhausted at residual {rnorm:.3e}")
        w, res, rnorm = w_new, res_new, rnorm_new
    else:
        raise NewtonDivergence(
            f"no convergence in {max_iter} Newton steps (residual {rnorm:.3e})")

    if np.max(np.abs(w)) < ZERO_SOLUTION_TOL or np.min(w) <= 0.0:
        return None
    return GridFunction(grid, w)


def nondegeneracy_margin(problem: ScalarProblem, grid: Grid,
                         w: GridFunction) -> float:
    """Smallest |eigenvalue| of the linearization at a positive solution.

    The linearized problem -Lap[d(w) xi] = [gamma*a + h(w) + w h'(w)] xi
    is exactly the Newton Jacobian at w; a positive margin certifies
    nondegeneracy.
    """
    J = scalar_jacobian(problem, grid, w.values).toarray()
    eigs = scipy.linalg.eigvals(J)
    return float(np.min(np.abs(eigs)))


@dataclass
class SemitrivialBranch:
    gammas: np.ndarray
    solutions: list  # Optional[GridFunction] per gamma
    nondegeneracy_margins: np.ndarray

    def sup_norms(self) -> np.ndarray:
        return np.asarray([s.sup_norm() if s is not None else 0.0
                           for s in self.solutions])


def branch_sweep(problem_family: Callable[[float], ScalarProblem],
                 gammas, grid: Grid) -> SemitrivialBranch:
    """Continuation in gamma with warm starts; empty entries below the
    existence threshold."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(np.diff(gammas) <= 0):
        raise ValueError("gamma grid must be strictly increasing")
    solutions = []
    margins = np.full(len(gammas), np.nan)
    prev: Optional[GridFunction] = None
    for k, gamma in enumerate(gammas):
        problem = problem_family(float(gamma))
        sol = None
        if prev is not None:
            try:
                sol = solve_scalar(problem, grid, prev)
            except NewtonDivergence:
                sol = None
        if sol is None:
            # warm start failed or absent: fall back to the seed ladder
            sol = solve_scalar(problem, grid)
        solutions.append(sol)
        if sol is not None:
            margins[k] = nondegeneracy_margin(problem, grid, sol)
            prev = sol
    return SemitrivialBranch(gammas=gammas, solutions=solutions,
                             nondegeneracy_margins=margins)


def existence_threshold(problem_family: Callable[[float], ScalarProblem],
                        grid: Grid, lo: float, hi: float,
                        tol: float = 1e-3) -> float:
    """Bisection on gamma for the onset of the positive solution."""
    def has_solution(gamma: float) -> bool:
        try:
            return solve_scalar(problem_family(gamma), grid) is not None
        except NewtonDivergence:
            return False

    if has_solution(lo) or not has_solution(hi):
        raise ValueError("threshold not bracketed by [lo, hi]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_solution(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
