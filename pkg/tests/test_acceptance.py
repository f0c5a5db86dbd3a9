"""Acceptance gate: one test per primary quantitative criterion, each
at the stated tolerance on n = 199 interior nodes of (0, 1)."""

import numpy as np
import pytest

from coexist import curves, system
from coexist.eigen import sigma1_divergence, transform_identity_check
from coexist.grid import Grid, GridFunction
from coexist.models import (ap1_sample, apriori_bounds, g_inverse,
                            model_ap2)
from coexist.semitrivial import (ScalarProblem, existence_threshold,
                                 nondegeneracy_margin, solve_scalar)
from coexist.errors import NewtonDivergence
from conftest import discrete_lambda1

PI2 = np.pi**2
N = 199


def ap2_standard():
    return model_ap2(0.5, 1.0, 1.0, lambda v: 1.0, lambda v: 0.0)


def logistic(gamma):
    return ScalarProblem(d=lambda s: 1.0, d_prime=lambda s: 0.0,
                         h=lambda s: -s, h_prime=lambda s: -1.0, gamma=gamma)


def test_eigenvalue_ground_truth():
    # sigma1[-Lap] = pi^2 within 1e-3 relative; error drops by 4 +- 0.5
    # under refinement; constant-coefficient scalings within 1e-3
    grid = Grid(N)
    err = {}
    for n in (N, 2 * N + 1):
        res = sigma1_divergence(Grid(n), 1.0, 0.0)
        err[n] = abs(res.sigma1 - PI2)
    assert err[N] / PI2 < 1e-3
    ratio = err[N] / err[2 * N + 1]
    assert 3.5 < ratio < 4.5
    base = sigma1_divergence(grid, 1.0, 0.0).sigma1
    assert abs(sigma1_divergence(grid, 3.0, 0.0).sigma1 - 3 * base) < 1e-3
    assert abs(sigma1_divergence(grid, 1.0, 2.5).sigma1 - (base + 2.5)) < 1e-3
    assert abs(sigma1_divergence(grid, 1.0, 0.0, C=2.0).sigma1
               - base / 2) < 1e-3


def test_transform_identity_both_gauges():
    # drift vs gauge sigma1 gap < 1e-2 at n = 199 and second-order
    # convergent, for the prey-predator gauge (h1 = 0, h2 = ln H/H(0))
    # and the chemotaxis gauge (h2 = -chi F)
    m1, m2 = ap1_sample(), ap2_standard()
    for model, which, param in ((m1, "lambda_mu", 12.0),
                                (m2, "lambda_mu", PI2 + 2.0),
                                (m1, "mu_lambda", 22.0)):
        fn = getattr(curves, which)
        gaps = {}
        for n in (99, N):
            cv = fn(model, param, Grid(n))
            gaps[n] = cv.gap
        assert gaps[N] < 1e-2
        if gaps[N] > 1e-12:   # the gauge-free case is exact
            order = np.log2(gaps[99] / gaps[N]) / np.log2(200.0 / 100.0)
            assert 1.7 <= order <= 2.3


def test_logistic_threshold_and_nondegeneracy():
    grid = Grid(N)
    thr = existence_threshold(logistic, grid, lo=8.0, hi=12.0, tol=1e-3)
    assert abs(thr - PI2) < 1e-2
    for gamma in (PI2 + 0.5, 2 * PI2, 4 * PI2):
        sol = solve_scalar(logistic(gamma), grid)
        assert sol is not None
        assert sol.sup_norm() <= gamma + 1e-10
        assert nondegeneracy_margin(logistic(gamma), grid, sol) > 0.0


def test_jacobian_integrity():
    # analytic vs central finite-difference Jacobians within 1e-5
    # relative on 20 random states per application model
    grid = Grid(N)
    rng = np.random.default_rng(2024)
    x = grid.nodes
    eps = 1e-6
    for model in (ap1_sample(), ap2_standard()):
        for _ in range(20):
            u = rng.uniform(0.2, 2.0) * np.sin(np.pi * x) \
                + 0.1 * rng.random(N)
            v = rng.uniform(0.2, 2.0) * np.sin(np.pi * x) \
                + 0.1 * rng.random(N)
            state = system.CoupledState(GridFunction(grid, u),
                                        GridFunction(grid, v))
            lam, mu = rng.uniform(-5, 25, 2)
            J = system.jacobian(model, lam, mu, state).toarray()
            y0 = state.pack()
            Jfd = np.empty_like(J)
            for k in range(2 * N):
                yp, ym = y0.copy(), y0.copy()
                yp[k] += eps
                ym[k] -= eps
                rp = system.residual(model, lam, mu,
                                     system.CoupledState.unpack(grid, yp))
                rm = system.residual(model, lam, mu,
                                     system.CoupledState.unpack(grid, ym))
                Jfd[:, k] = (rp - rm) / (2 * eps)
            rel = np.max(np.abs(J - Jfd)) / np.max(np.abs(Jfd))
            assert rel < 1e-5


def test_semitrivial_embedding():
    # (theta_lambda, 0) solves the coupled system to < 1e-7,
    # independently of mu
    grid = Grid(N)
    m = ap1_sample()
    for lam in (20.5, 22.0, 30.0, 45.0, 59.0):
        theta = curves.semitrivial_state(m, "u", lam, grid)
        state = system.CoupledState(theta, GridFunction.zeros(grid))
        for mu in (-7.0, 13.0):
            res = system.residual(m, lam, mu, state)
            assert np.max(np.abs(res)) < 1e-7


def test_bifurcation_point_structure():
    # exactly one singular value below 1e-6 * scale, sign-definite
    # v-component, assembled tangent within 1e-4 angle of the SVD null
    # vector
    grid = Grid(N)
    m = ap1_sample()
    lam = 25.0
    theta = curves.semitrivial_state(m, "u", lam, grid)
    mu_c = curves.mu_lambda(m, lam, grid).value
    xi, phi2 = system.bifurcation_tangent(m, lam, theta, mu_c)
    assert phi2.is_positive()
    base = system.CoupledState(theta, GridFunction.zeros(grid))
    svals, nullvec = system.coupled_null_vector(m, lam, mu_c, base)
    small = np.sum(svals < 1e-6 * svals[0])
    assert small == 1
    t = np.concatenate([xi.values, phi2.values])
    t /= np.linalg.norm(t)
    angle = np.arccos(np.clip(abs(np.dot(t, nullvec)), 0.0, 1.0))
    assert angle < 1e-4


def test_endpoint_law_ap2():
    # the chemotaxis branch from lambda_mu lands on the u-semitrivial
    # branch at lambda* with |mu - sigma1[-Lap + c theta_lambda*]| < 1e-2
    grid = Grid(N)
    m = ap2_standard()
    mu = PI2 + 2.0
    theta = curves.semitrivial_state(m, "v", mu, grid)
    lam_c = curves.lambda_mu(m, mu, grid).value
    phi1, eta = system.bifurcation_tangent_v(m, mu, theta, lam_c)
    bp = system.BifurcationPoint("v", mu, lam_c, theta, phi1, eta)
    branch = system.continue_branch(m, "mu", mu, bp)
    assert branch.termination is system.Termination.HITS_OTHER_SEMITRIVIAL_U
    data = branch.termination_data
    lam_star = data["parameter"]
    expected = curves.mu_lambda(m, lam_star, grid).value
    assert abs(mu - expected) < 1e-2
    assert data["matched"]


def test_region_map_ap1():
    # 12x12 map over lambda in [-1, 3*2pi^2], mu in [l1-2, l1+10]:
    # ProvenEmpty cells probe-free, >= 90% of predicted cells
    # Confirmed, Confirmed states within the a-priori bounds + 1e-6
    grid = Grid(N)
    m = ap1_sample()
    lams = np.linspace(-1.0, 3 * 2 * PI2, 12)
    mus = np.linspace(PI2 - 2.0, PI2 + 10.0, 12)
    rm = curves.region_map(m, lams, mus, grid)
    predicted = confirmed = 0
    for i, lam in enumerate(rm.lambda_grid):
        for j, mu in enumerate(rm.mu_grid):
            cell = rm.cells[i][j]
            if cell.verdict == "ProvenEmpty":
                assert cell.state is None
                assert cell.seed_used == ""
            if cell.verdict in ("Confirmed", "PredictedNotFound"):
                predicted += 1
            if cell.verdict == "Confirmed":
                confirmed += 1
                u_cap = g_inverse(m, 2.0 * (lam**2 + lam))
                assert cell.state.u.sup_norm() <= u_cap + 1e-6
                assert cell.state.v.sup_norm() <= mu + u_cap + 1e-6
    assert predicted > 0
    assert confirmed >= 0.9 * predicted


def test_nonexistence_soundness():
    # 50 randomized probe seeds in proven-empty territory: none may
    # converge to a coexistence state
    grid = Grid(N)
    rng = np.random.default_rng(99)
    x = grid.nodes
    m1, m2 = ap1_sample(), ap2_standard()
    hits = 0
    for trial in range(50):
        if trial % 2 == 0:
            model = m1
            lam = rng.uniform(-5.0, 0.0)
            mu = rng.uniform(5.0, 15.0)
        else:
            model = m2
            lam = rng.uniform(5.0, 25.0)
            mu = rng.uniform(0.0, PI2)
        amp_u, amp_v = rng.uniform(0.1, 5.0, 2)
        seed = system.CoupledState(
            GridFunction(grid, amp_u * np.sin(np.pi * x)
                         * (1 + 0.2 * rng.random(N))),
            GridFunction(grid, amp_v * np.sin(np.pi * x)
                         * (1 + 0.2 * rng.random(N))))
        try:
            sol = system.newton_coexistence(model, lam, mu, seed)
        except NewtonDivergence:
            sol = None
        if sol is not None:
            hits += 1
    assert hits == 0


def test_mu_lambda_monotone_decreasing():
    # strictly decreasing over 10 sampled lambda above the threshold
    grid = Grid(N)
    m = ap1_sample()
    lams = np.linspace(20.5, 59.0, 10)
    vals = [curves.mu_lambda(m, lam, grid).value for lam in lams]
    assert np.all(np.diff(vals) < 0.0)
