"""Discrete coupled system: residual, Jacobian, Newton solver,
bifurcation-point data, and pseudo-arclength continuation.

The two equations are discretized in conservative form: the flux at a
half-node is P_{j+1/2} (u_{j+1}-u_j)/h + S_{j+1/2} (v_{j+1}-v_j)/h with
the coefficients evaluated at half-node averages of (u, v), and the
residual is minus the flux divergence minus the reaction.  The Jacobian
is assembled analytically from the same formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (DegenerateBase, KernelDimensionError, NewtonDivergence)
from .grid import Grid, GridFunction
from .models import Model

RESIDUAL_TOL = 1e-8
BOUNDARY_TOL = 1e-6
POSITIVITY_TOL = 1e-6
KERNEL_TOL = 1e-6
MATCHING_TOL = 1e-2


@dataclass
class CoupledState:
    u: GridFunction
    v: GridFunction

    def __post_init__(self):
        if self.u.grid is not self.v.grid and self.u.grid != self.v.grid:
            raise ValueError("u and v must live on the same grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def is_coexistence(self, tol: float = 0.0) -> bool:
        return bool(np.min(self.u.values) > tol and np.min(self.v.values) > tol)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.u.values, self.v.values])

    @classmethod
    def unpack(cls, grid: Grid, y: np.ndarray) -> "CoupledState":
        n = grid.n_interior
        return cls(GridFunction(grid, y[:n].copy()),
                   GridFunction(grid, y[n:].copy()))


def _ev(fn, *args):
    """Evaluate a model callable on arrays, broadcasting scalar output."""
    out = fn(*args)
    return np.broadcast_to(np.asarray(out, dtype=float), args[0].shape).copy()


def _halfnode_data(model: Model, grid: Grid, u: np.ndarray, v: np.ndarray):
    """Half-node averaged states and difference quotients."""
    h = grid.spacing
    u_wb = np.concatenate(([0.0], u, [0.0]))
    v_wb = np.concatenate(([0.0], v, [0.0]))
    ub = 0.5 * (u_wb[:-1] + u_wb[1:])
    vb = 0.5 * (v_wb[:-1] + v_wb[1:])
    du = (u_wb[1:] - u_wb[:-1]) / h
    dv = (v_wb[1:] - v_wb[:-1]) / h
    return ub, vb, du, dv


def _reactions(model: Model, grid: Grid, lam: float, mu: float,
               u: np.ndarray, v: np.ndarray):
    x = grid.nodes
    a = _ev(model.a, x)
    b = _ev(model.b, x)
    r1 = (lam * a * u + _ev(model.f, x, u) * u
          + _ev(model.F, x, u, v) * u * v)
    r2 = (mu * b * v + _ev(model.g, x, v) * v
          + _ev(model.G, x, u, v) * u * v)
    return r1, r2


def residual(model: Model, lam: float, mu: float,
             state: CoupledState) -> np.ndarray:
    """Stacked residual (length 2 n_interior) of the coupled system."""
    grid = state.grid
    h = grid.spacing
    u, v = state.u.values, state.v.values
    ub, vb, du, dv = _halfnode_data(model, grid, u, v)

    flux1 = _ev(model.P, ub, vb) * du + _ev(model.S, ub, vb) * dv
    flux2 = _ev(model.Q, ub, vb) * du + _ev(model.R, ub, vb) * dv
    r1, r2 = _reactions(model, grid, lam, mu, u, v)
    res1 = -(flux1[1:] - flux1[:-1]) / h - r1
    res2 = -(flux2[1:] - flux2[:-1]) / h - r2
    return np.concatenate([res1, res2])


def _flux_block(grid: Grid, coeff, alpha):
    """Tridiagonal block of d(-flux divergence)/d(nodal field).

    coeff: half-node diffusion coefficient multiplying the differenced
    field; alpha: half-node sensitivity of the flux to the averaged
    field value (0.5 * dcoeff * quotient terms).
    """
    h = grid.spacing
    lower = (alpha[1:-1] - coeff[1:-1] / h) / h
    diag = (alpha[:-1] - alpha[1:]) / h + (coeff[:-1] + coeff[1:]) / h**2
    upper = -(alpha[1:-1] + coeff[1:-1] / h) / h
    return sp.diags([lower, diag, upper], offsets=[-1, 0, 1])


def jacobian(model: Model, lam: float, mu: float,
             state: CoupledState) -> sp.csr_matrix:
    """Analytic 2n x 2n block-tridiagonal Jacobian of the residual."""
    grid = state.grid
    x = grid.nodes
    u, v = state.u.values, state.v.values
    ub, vb, du, dv = _halfnode_data(model, grid, u, v)

    P = _ev(model.P, ub, vb)
    Q = _ev(model.Q, ub, vb)
    R = _ev(model.R, ub, vb)
    S = _ev(model.S, ub, vb)
    alpha11 = 0.5 * (_ev(model.P_u, ub, vb) * du + _ev(model.S_u, ub, vb) * dv)
    alpha12 = 0.5 * (_ev(model.P_v, ub, vb) * du + _ev(model.S_v, ub, vb) * dv)
    alpha21 = 0.5 * (_ev(model.Q_u, ub, vb) * du + _ev(model.R_u, ub, vb) * dv)
    alpha22 = 0.5 * (_ev(model.Q_v, ub, vb) * du + _ev(model.R_v, ub, vb) * dv)

    J11 = _flux_block(grid, P, alpha11)
    J12 = _flux_block(grid, S, alpha12)
    J21 = _flux_block(grid, Q, alpha21)
    J22 = _flux_block(grid, R, alpha22)

    a = _ev(model.a, x)
    b = _ev(model.b, x)
    f = _ev(model.f, x, u)
    f_w = _ev(model.f_w, x, u)
    g = _ev(model.g, x, v)
    g_w = _ev(model.g_w, x, v)
    F = _ev(model.F, x, u, v)
    F_u = _ev(model.F_u, x, u, v)
    F_v = _ev(model.F_v, x, u, v)
    G = _ev(model.G, x, u, v)
    G_u = _ev(model.G_u, x, u, v)
    G_v = _ev(model.G_v, x, u, v)

    J11 = J11 - sp.diags(lam * a + f + u * f_w + (F + u * F_u) * v)
    J12 = J12 - sp.diags((F + F_v * v) * u)
    J21 = J21 - sp.diags((G + G_u * u) * v)
    J22 = J22 - sp.diags(mu * b + g + v * g_w + (G + v * G_v) * u)

    return sp.bmat([[J11, J12], [J21, J22]], format="csr")


def residual_parameter_derivative(model: Model, which: str,
                                  state: CoupledState) -> np.ndarray:
    """d(residual)/d(lambda) or d(residual)/d(mu)."""
    grid = state.grid
    x = grid.nodes
    n = grid.n_interior
    out = np.zeros(2 * n)
    if which == "lambda":
        out[:n] = -_ev(model.a, x) * state.u.values
    elif which == "mu":
        out[n:] = -_ev(model.b, x) * state.v.values
    else:
        raise ValueError(f"unknown parameter {which!r}")
    return out


@dataclass
class NewtonOpts:
    tol: float = RESIDUAL_TOL
    max_iter: int = 50
    max_halvings: int = 8
    positivity_tol: float = POSITIVITY_TOL


def newton_coexistence(model: Model, lam: float, mu: float,
                       guess: CoupledState,
                       opts: Optional[NewtonOpts] = None
                       ) -> Optional[CoupledState]:
    """Damped Newton toward a coexistence state.

    Returns the converged state, or None when the iteration converges
    to a state touching the boundary of the positive cone (a trivial or
    semitrivial solution).  Raises NewtonDivergence on failure.
    """
    opts = opts or NewtonOpts()
    grid = guess.grid
    y = guess.pack()

    def resnorm(vec):
        return float(np.max(np.abs(vec)))

    state = CoupledState.unpack(grid, y)
    res = residual(model, lam, mu, state)
    rnorm = resnorm(res)
    for _ in range(opts.max_iter):
        if rnorm < opts.tol:
            break
        J = jacobian(model, lam, mu, state).tocsc()
        try:
            step = spla.splu(J).solve(-res)
        except RuntimeError as exc:
            raise NewtonDivergence(f"singular coupled Jacobian: {exc}") from exc
        if not np.all(np.isfinite(step)):
            raise NewtonDivergence("non-finite Newton step")
        alpha = 1.0
        for _ in range(opts.max_halvings + 1):
            y_new = y + alpha * step
            state_new = CoupledState.unpack(grid, y_new)
            res_new = residual(model, lam, mu, state_new)
            if resnorm(res_new) < rnorm or resnorm(res_new) < opts.tol:
                break
            alpha *= 0.5
        else:
            raise NewtonDivergence(
                f"step-halving exhausted at residual {rnorm:.3e}")
        y, state, res = y_new, state_new, res_new
        rnorm = resnorm(res)
    else:
        raise NewtonDivergence(
            f"no convergence in {opts.max_iter} Newton steps "
            f"(residual {rnorm:.3e})")

    if not state.is_coexistence(tol=opts.positivity_tol):
        return None
    return state


# ---------------------------------------------------------------------------
# bifurcation-point data


@dataclass
class BifurcationPoint:
    """Data at a simple bifurcation point on a semitrivial branch.

    branch: "u" when the base state is (theta, 0), "v" for (0, theta).
    parameter: the critical value of the free parameter (mu_lambda for
    a u-branch base, lambda_mu for a v-branch base).
    tangent_u/tangent_v: the kernel direction of the coupled Jacobian,
    normalized so the newly activated component is positive with sup 1.
    """

    branch: str
    fixed_parameter: float
    parameter: float
    theta: GridFunction
    tangent_u: GridFunction
    tangent_v: GridFunction


def _kernel_via_blocks(model: Model, grid: Grid, J: sp.csr_matrix,
                       branch: str, kernel_tol: float):
    """Null vector of the coupled Jacobian at a semitrivial bifurcation
    point, via its triangular block structure."""
    n = grid.n_interior
    J = J.tocsr()
    J11 = J[:n, :n]
    J12 = J[:n, n:]
    J21 = J[n:, :n]
    J22 = J[n:, n:]
    if branch == "u":
        # v-equation decouples: J22 phi2 = 0, then J11 xi = -J12 phi2
        sing_block, solve_block, couple = J22, J11, J12
    else:
        sing_block, solve_block, couple = J11, J22, J21
    # smallest singular vector of the singular block
    dense = sing_block.toarray()
    _, svals, Vt = np.linalg.svd(dense)
    phi = Vt[-1]
    if svals[-1] > kernel_tol * svals[0]:
        raise DegenerateBase(
            f"semitrivial block not singular (smallest sv {svals[-1]:.3e})")
    # positive normalization
    if np.sum(phi) < 0:
        phi = -phi
    phi = phi / np.max(np.abs(phi))
    other = spla.splu(solve_block.tocsc()).solve(-(couple @ phi))
    if branch == "u":
        xi, eta = other, phi
    else:
        xi, eta = phi, other
    return GridFunction(grid, xi), GridFunction(grid, eta)


def bifurcation_tangent(model: Model, lam: float, theta_lambda: GridFunction,
                        mu_lambda: float, kernel_tol: float = KERNEL_TOL
                        ) -> tuple[GridFunction, GridFunction]:
    """Kernel direction (xi, phi2) of the coupled Jacobian at
    (mu_lambda, theta_lambda, 0).

    phi2 is the positive eigenfunction of the linearized v-equation,
    xi the response of the linearized u-equation to its coupling.
    Raises KernelDimensionError if the kernel is not one-dimensional.
    """
    grid = theta_lambda.grid
    base = CoupledState(theta_lambda, GridFunction.zeros(grid))
    J = jacobian(model, lam, mu_lambda, base)
    xi, phi2 = _kernel_via_blocks(model, grid, J, "u", kernel_tol)
    _check_kernel_simplicity(J, kernel_tol)
    if not phi2.is_positive():
        raise KernelDimensionError("kernel v-component is not sign-definite")
    return xi, phi2


def bifurcation_tangent_v(model: Model, mu: float, theta_mu: GridFunction,
                          lambda_mu: float, kernel_tol: float = KERNEL_TOL
                          ) -> tuple[GridFunction, GridFunction]:
    """Mirror of bifurcation_tangent for a base point (0, theta_mu) at
    the critical value lambda_mu; returns (phi1, eta)."""
    grid = theta_mu.grid
    base = CoupledState(GridFunction.zeros(grid), theta_mu)
    J = jacobian(model, lambda_mu, mu, base)
    phi1, eta = _kernel_via_blocks(model, grid, J, "v", kernel_tol)
    _check_kernel_simplicity(J, kernel_tol)
    if not phi1.is_positive():
        raise KernelDimensionError("kernel u-component is not sign-definite")
    return phi1, eta


def _check_kernel_simplicity(J: sp.csr_matrix, kernel_tol: float):
    svals = np.linalg.svd(J.toarray(), compute_uv=False)
    scale = svals[0]
    small = np.sum(svals < kernel_tol * scale)
    if small == 0:
        raise DegenerateBase("coupled Jacobian has no near-null direction")
    if small > 1:
        raise KernelDimensionError(
            f"coupled Jacobian kernel dimension {small} > 1")


def coupled_null_vector(model: Model, lam: float, mu: float,
                        state: CoupledState) -> tuple[np.ndarray, np.ndarray]:
    """Singular values and right null vector of the coupled Jacobian;
    independent cross-check for the assembled tangent."""
    J = jacobian(model, lam, mu, state)
    _, svals, Vt = np.linalg.svd(J.toarray())
    return svals, Vt[-1]


# ---------------------------------------------------------------------------
# pseudo-arclength continuation


class Termination(str, Enum):
    UNBOUNDED_WINDOW = "UnboundedWindow"
    HITS_OTHER_SEMITRIVIAL_V = "HitsOtherSemitrivial_v"
    HITS_OTHER_SEMITRIVIAL_U = "HitsOtherSemitrivial_u"
    HITS_TRIVIAL = "HitsTrivial"
    STEP_FAILURE = "StepFailure"


@dataclass
class BranchPoint:
    parameter: float
    state: CoupledState
    arclength: float


@dataclass
class Branch:
    fixed_name: str          # "lambda" or "mu"
    fixed_value: float
    free_name: str
    points: list
    termination: Termination
    termination_data: dict = field(default_factory=dict)


@dataclass
class ContinuationOpts:
    ds: float = 0.05
    ds_min: float = 1e-4
    ds_max: float = 0.5
    max_steps: int = 2000
    window: tuple = (-30.0, 30.0)
    norm_cap: float = 1e3
    boundary_tol: float = BOUNDARY_TOL
    matching_tol: float = MATCHING_TOL
    corrector_tol: float = RESIDUAL_TOL
    corrector_max_iter: int = 12


def _bordered_newton(model: Model, grid: Grid, free: str, fixed_pair,
                     y0: np.ndarray, p0: float, tangent: np.ndarray,
                     ds: float, y_prev: np.ndarray, p_prev: float,
                     opts: ContinuationOpts):
    """Newton corrector on residual + arclength constraint.

    Unknowns are (state, free parameter); the constraint is
    tangent . (Y - Y_prev) - ds = 0 with Y = (y, p).
    """
    fixed_name, fixed_value = fixed_pair
    y, p = y0.copy(), p0
    n2 = len(y)
    for it in range(opts.corrector_max_iter):
        lam, mu = ((p, fixed_value) if free == "lambda" else (fixed_value, p))
        state = CoupledState.unpack(grid, y)
        res = residual(model, lam, mu, state)
        constraint = (np.dot(tangent[:n2], y - y_prev)
                      + tangent[n2] * (p - p_prev) - ds)
        if max(np.max(np.abs(res)), abs(constraint)) < opts.corrector_tol:
            return y, p, True
        J = jacobian(model, lam, mu, state)
        dres_dp = residual_parameter_derivative(model, free, state)
        # bordered solve by block elimination
        lu = spla.splu(J.tocsc())
        w1 = lu.solve(-res)
        w2 = lu.solve(dres_dp)
        denom = tangent[n2] - np.dot(tangent[:n2], w2)
        if abs(denom) < 1e-14:
            return y, p, False
        dp = -(constraint + np.dot(tangent[:n2], w1)) / denom
        dy = w1 - dp * w2
        y = y + dy
        p = p + dp
        if not np.all(np.isfinite(y)) or not np.isfinite(p):
            return y0, p0, False
    return y, p, False


def continue_branch(model: Model, fixed_name: str, fixed_value: float,
                    start: BifurcationPoint,
                    opts: Optional[ContinuationOpts] = None) -> Branch:
    """Trace the coexistence continuum emanating from a semitrivial
    bifurcation point by pseudo-arclength continuation.

    Terminates with a verdict mirroring the branch alternatives:
    leaving the parameter window or norm cap (UnboundedWindow), landing
    on the opposite semitrivial branch (with the matching eigenvalue
    condition verified), returning to the trivial state, or running out
    of step size (StepFailure).
    """
    from . import curves  # local import; curves also drives this module

    opts = opts or ContinuationOpts()
    grid = start.theta.grid
    n = grid.n_interior
    free_name = "mu" if fixed_name == "lambda" else "lambda"

    if start.branch == "u":
        y_base = np.concatenate([start.theta.values, np.zeros(n)])
    else:
        y_base = np.concatenate([np.zeros(n), start.theta.values])
    p_base = start.parameter
    tangent_state = np.concatenate([start.tangent_u.values,
                                    start.tangent_v.values])
    tangent_state = tangent_state / np.linalg.norm(tangent_state)

    points = [BranchPoint(p_base, CoupledState.unpack(grid, y_base), 0.0)]
    termination = Termination.STEP_FAILURE
    termination_data: dict = {}

    ds = opts.ds
    # first step: walk along the kernel direction at fixed parameter
    tangent = np.concatenate([tangent_state, [0.0]])
    y_prev, p_prev = y_base, p_base
    arclength = 0.0
    have_first = False
    while ds >= opts.ds_min and not have_first:
        y_pred = y_base + ds * tangent_state
        pred_state = CoupledState.unpack(grid, y_pred)
        if np.min(pred_state.u.values) < 0 or np.min(pred_state.v.values) < 0:
            ds *= 0.5
            continue
        y_new, p_new, ok = _bordered_newton(
            model, grid, free_name, (fixed_name, fixed_value),
            y_pred, p_base, tangent, ds, y_base, p_base, opts)
        if ok:
            state = CoupledState.unpack(grid, y_new)
            if state.is_coexistence(tol=0.0):
                arclength += ds
                points.append(BranchPoint(p_new, state, arclength))
                have_first = True
                break
        ds *= 0.5
    if not have_first:
        return Branch(fixed_name, fixed_value, free_name, points,
                      Termination.STEP_FAILURE,
                      {"reason": "no first step off the bifurcation point"})

    for _ in range(opts.max_steps):
        y_prev = points[-2].state.pack() if len(points) >= 2 else y_base
        p_prev = points[-2].parameter if len(points) >= 2 else p_base
        y_cur = points[-1].state.pack()
        p_cur = points[-1].parameter
        # secant tangent
        sec = np.concatenate([y_cur - y_prev, [p_cur - p_prev]])
        norm = np.linalg.norm(sec)
        if norm == 0:
            termination = Termination.STEP_FAILURE
            termination_data = {"reason": "zero secant"}
            break
        tangent = sec / norm

        stepped = False
        while ds >= opts.ds_min:
            y_pred = y_cur + ds * tangent[:2 * n]
            p_pred = p_cur + ds * tangent[2 * n]
            y_new, p_new, ok = _bordered_newton(
                model, grid, free_name, (fixed_name, fixed_value),
                y_pred, p_pred, tangent, ds, y_cur, p_cur, opts)
            if ok:
                stepped = True
                break
            ds *= 0.5
        if not stepped:
            termination = Termination.STEP_FAILURE
            termination_data = {"reason": "step size underflow"}
            break

        state = CoupledState.unpack(grid, y_new)
        arclength += ds
        points.append(BranchPoint(p_new, state, arclength))
        ds = min(ds * 1.3, opts.ds_max)

        sup_u = state.u.sup_norm()
        sup_v = state.v.sup_norm()
        min_u = float(np.min(state.u.values))
        min_v = float(np.min(state.v.values))

        # approaching a semitrivial endpoint: damp the step so the
        # final points resolve the transcritical crossing
        if 0.0 < min(sup_u, sup_v) < 0.1 * max(sup_u, sup_v):
            ds = min(ds, 0.01)

        if not (opts.window[0] <= p_new <= opts.window[1]) \
                or max(sup_u, sup_v) > opts.norm_cap:
            termination = Termination.UNBOUNDED_WINDOW
            termination_data = {"parameter": p_new,
                                "sup_u": sup_u, "sup_v": sup_v}
            break
        if sup_u < opts.boundary_tol and sup_v < opts.boundary_tol:
            termination = Termination.HITS_TRIVIAL
            termination_data = _trivial_match(model, grid, free_name,
                                              p_new, opts)
            break
        if min_u < opts.boundary_tol and sup_u < 0.1 * sup_v:
            p_star = _endpoint_extrapolation(points, "u")
            termination = Termination.HITS_OTHER_SEMITRIVIAL_V
            termination_data = _semitrivial_match(
                model, grid, free_name, fixed_value, p_star, "v", opts)
            break
        if min_v < opts.boundary_tol and sup_v < 0.1 * sup_u:
            p_star = _endpoint_extrapolation(points, "v")
            termination = Termination.HITS_OTHER_SEMITRIVIAL_U
            termination_data = _semitrivial_match(
                model, grid, free_name, fixed_value, p_star, "u", opts)
            break
    else:
        termination = Termination.UNBOUNDED_WINDOW
        termination_data = {"reason": "max_steps reached",
                            "parameter": points[-1].parameter}

    return Branch(fixed_name, fixed_value, free_name, points,
                  termination, termination_data)


def _endpoint_extrapolation(points: list, dying: str) -> float:
    """Parameter value where the dying component reaches zero, by
    linear extrapolation of its amplitude over the last two points.
    The transcritical crossing has amplitude linear in the parameter,
    so this sharpens the endpoint well below one step size."""
    if len(points) < 2:
        return points[-1].parameter
    pts = points[-2:]
    amps = [getattr(p.state, dying).sup_norm() for p in pts]
    params = [p.parameter for p in pts]
    s1, s2 = amps
    p1, p2 = params
    if not (s1 > s2 > 0.0):
        return p2
    return p2 - s2 * (p2 - p1) / (s2 - s1)


def _semitrivial_match(model: Model, grid: Grid, free_name: str,
                       fixed_value: float, p_final: float,
                       hit_branch: str, opts: ContinuationOpts) -> dict:
    """Verify the eigenvalue condition at a semitrivial endpoint."""
    from . import curves

    if hit_branch == "u":
        # landed on (theta_lambda*, 0): the *other* parameter must equal
        # the critical value mu_{lambda*}
        lam_star = p_final if free_name == "lambda" else fixed_value
        expected = curves.mu_lambda(model, lam_star, grid)
        observed = fixed_value if free_name == "lambda" else p_final
    else:
        mu_star = p_final if free_name == "mu" else fixed_value
        expected = curves.lambda_mu(model, mu_star, grid)
        observed = fixed_value if free_name == "mu" else p_final
    gap = abs(observed - expected.value)
    return {"parameter": p_final,
            "eigenvalue_expected": expected.value,
            "eigenvalue_observed": observed,
            "eigenvalue_gap": gap,
            "matched": gap < opts.matching_tol}


def _trivial_match(model: Model, grid: Grid, free_name: str,
                   p_final: float, opts: ContinuationOpts) -> dict:
    from .eigen import sigma1_divergence

    if free_name == "lambda":
        P00 = model.P(0.0, 0.0)
        weight = [model.a(x) for x in grid.nodes]
    else:
        P00 = model.R(0.0, 0.0)
        weight = [model.b(x) for x in grid.nodes]
    res = sigma1_divergence(grid, float(P00), 0.0, np.asarray(weight))
    gap = abs(p_final - res.sigma1)
    return {"parameter": p_final, "eigenvalue_expected": res.sigma1,
            "eigenvalue_gap": gap, "matched": gap < opts.matching_tol}
