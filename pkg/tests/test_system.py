import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coexist import curves, system
from coexist.errors import DegenerateBase, NewtonDivergence
from coexist.grid import Grid, GridFunction
from coexist.models import ap1_sample, model_ap2

PI2 = np.pi**2


def ap2_unit(chi=0.5, b=1.0, c=1.0):
    return model_ap2(chi, b, c, lambda v: 1.0, lambda v: 0.0)


def random_state(grid, seed):
    rng = np.random.default_rng(seed)
    x = grid.nodes
    u = 0.5 * np.sin(np.pi * x) * (1.0 + 0.3 * rng.random(grid.n_interior))
    v = 0.4 * np.sin(np.pi * x) * (1.0 + 0.3 * rng.random(grid.n_interior))
    return system.CoupledState(GridFunction(grid, u), GridFunction(grid, v))


def fd_jacobian(model, lam, mu, state, eps=1e-6):
    grid = state.grid
    y0 = state.pack()
    J = np.empty((len(y0), len(y0)))
    for k in range(len(y0)):
        yp, ym = y0.copy(), y0.copy()
        yp[k] += eps
        ym[k] -= eps
        rp = system.residual(model, lam, mu,
                             system.CoupledState.unpack(grid, yp))
        rm = system.residual(model, lam, mu,
                             system.CoupledState.unpack(grid, ym))
        J[:, k] = (rp - rm) / (2.0 * eps)
    return J


def test_pack_unpack_roundtrip(grid31):
    state = random_state(grid31, 0)
    back = system.CoupledState.unpack(grid31, state.pack())
    assert np.allclose(back.u.values, state.u.values)
    assert np.allclose(back.v.values, state.v.values)
    assert state.is_coexistence()


def test_state_rejects_mismatched_grids():
    with pytest.raises(ValueError):
        system.CoupledState(GridFunction.zeros(Grid(5)),
                            GridFunction.zeros(Grid(7)))


def test_semitrivial_embedding_u_branch(grid99):
    m = ap1_sample()
    theta = curves.semitrivial_state(m, "u", 22.0, grid99)
    state = system.CoupledState(theta, GridFunction.zeros(grid99))
    for mu in (-3.0, 5.0, 40.0):
        res = system.residual(m, 22.0, mu, state)
        assert np.max(np.abs(res)) < 1e-7


def test_semitrivial_embedding_v_branch(grid99):
    m = ap2_unit()
    theta = curves.semitrivial_state(m, "v", PI2 + 3.0, grid99)
    state = system.CoupledState(GridFunction.zeros(grid99), theta)
    for lam in (0.0, 17.0):
        res = system.residual(m, lam, PI2 + 3.0, state)
        assert np.max(np.abs(res)) < 1e-7


def test_jacobian_matches_fd(grid31):
    for model in (ap1_sample(), ap2_unit()):
        state = random_state(grid31, 3)
        J = system.jacobian(model, 3.0, 2.0, state).toarray()
        Jfd = fd_jacobian(model, 3.0, 2.0, state)
        scale = np.max(np.abs(Jfd))
        assert np.max(np.abs(J - Jfd)) / scale < 1e-6


def test_parameter_derivative(grid31):
    m = ap1_sample()
    state = random_state(grid31, 5)
    eps = 1e-7
    for which, dp in (("lambda", (eps, 0.0)), ("mu", (0.0, eps))):
        r0 = system.residual(m, 3.0, 2.0, state)
        r1 = system.residual(m, 3.0 + dp[0], 2.0 + dp[1], state)
        fd = (r1 - r0) / eps
        an = system.residual_parameter_derivative(m, which, state)
        assert np.max(np.abs(fd - an)) < 1e-5
    with pytest.raises(ValueError):
        system.residual_parameter_derivative(m, "nu", state)


def test_newton_decoupled_oracle(grid99):
    # chi = 0, b = 0, c tiny: the system is essentially two independent
    # logistic equations, so the coexistence state is near
    # (theta_lambda, theta_mu)
    m = model_ap2(0.0, 0.0, 1e-8, lambda v: 1.0, lambda v: 0.0)
    lam, mu = 2 * PI2, PI2 + 4.0
    tu = curves.semitrivial_state(m, "u", lam, grid99)
    tv = curves.semitrivial_state(m, "v", mu, grid99)
    guess = system.CoupledState(
        GridFunction(grid99, 0.9 * tu.values),
        GridFunction(grid99, 0.9 * tv.values))
    sol = system.newton_coexistence(m, lam, mu, guess)
    assert sol is not None
    assert np.max(np.abs(sol.u.values - tu.values)) < 1e-5
    assert np.max(np.abs(sol.v.values - tv.values)) < 1e-5


def test_newton_returns_none_on_semitrivial_collapse(grid99):
    # prey-predator with predator forced extinct (mu very negative)
    m = ap1_sample()
    state = random_state(grid99, 11)
    sol = system.newton_coexistence(m, 22.0, -30.0, state)
    assert sol is None


def test_newton_divergence_max_iter(grid31):
    m = ap1_sample()
    state = random_state(grid31, 2)
    with pytest.raises(NewtonDivergence):
        system.newton_coexistence(m, 3.0, 2.0, state,
                                  system.NewtonOpts(tol=1e-14, max_iter=1))


def test_bifurcation_tangent_svd_match(grid99):
    m = ap1_sample()
    lam = 25.0
    theta = curves.semitrivial_state(m, "u", lam, grid99)
    mu_c = curves.mu_lambda(m, lam, grid99).value
    xi, phi2 = system.bifurcation_tangent(m, lam, theta, mu_c)
    assert phi2.is_positive()
    base = system.CoupledState(theta, GridFunction.zeros(grid99))
    svals, nullvec = system.coupled_null_vector(m, lam, mu_c, base)
    assert svals[-1] < 1e-6 * svals[0]
    assert svals[-2] > 1e-6 * svals[0]
    t = np.concatenate([xi.values, phi2.values])
    t /= np.linalg.norm(t)
    angle = np.arccos(np.clip(abs(np.dot(t, nullvec)), 0.0, 1.0))
    assert angle < 1e-4


def test_bifurcation_tangent_rejects_regular_point(grid31):
    m = ap1_sample()
    theta = curves.semitrivial_state(m, "u", 25.0, grid31)
    with pytest.raises(DegenerateBase):
        # far from the critical mu the Jacobian is regular
        system.bifurcation_tangent(m, 25.0, theta, 100.0)


def test_continuation_unbounded_window(grid99):
    # prey-predator, fixed mu, continuing in lambda: the branch runs to
    # the window edge
    m = ap1_sample()
    mu = 12.0
    theta = curves.semitrivial_state(m, "v", mu, grid99)
    lam_c = curves.lambda_mu(m, mu, grid99).value
    phi1, eta = system.bifurcation_tangent_v(m, mu, theta, lam_c)
    bp = system.BifurcationPoint("v", mu, lam_c, theta, phi1, eta)
    br = system.continue_branch(m, "mu", mu, bp)
    assert br.termination is system.Termination.UNBOUNDED_WINDOW
    assert br.points[-1].parameter > 29.0
    # parameters move away from the bifurcation value
    assert br.points[-1].parameter > br.points[0].parameter


def test_continuation_connects_semitrivial_branches(grid99):
    m = ap1_sample()
    lam = 22.0
    theta = curves.semitrivial_state(m, "u", lam, grid99)
    mu_c = curves.mu_lambda(m, lam, grid99).value
    xi, phi2 = system.bifurcation_tangent(m, lam, theta, mu_c)
    bp = system.BifurcationPoint("u", lam, mu_c, theta, xi, phi2)
    br = system.continue_branch(m, "lambda", lam, bp)
    assert br.termination is system.Termination.HITS_OTHER_SEMITRIVIAL_V
    assert br.termination_data["matched"]
    last = br.points[-1]
    assert np.min(last.state.u.values) < 1e-6
    # interior points are genuine coexistence states
    mid = br.points[len(br.points) // 2]
    assert mid.state.is_coexistence()


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_residual_zero_at_trivial_state(seed):
    # the trivial state solves the system for any parameters
    rng = np.random.default_rng(seed)
    lam, mu = rng.uniform(-10, 10, 2)
    grid = Grid(15)
    zero = system.CoupledState(GridFunction.zeros(grid),
                               GridFunction.zeros(grid))
    for model in (ap1_sample(), ap2_unit()):
        assert np.max(np.abs(system.residual(model, lam, mu, zero))) == 0.0
