import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from coexist.errors import NonConvergence
from coexist.eigen import (deflated_second_estimate, gauge_transform,
                           principal_eigenpair, sigma1_divergence,
                           sigma1_drift, transform_identity_check)
from coexist.grid import (Grid, GridFunction, assemble_diffusion,
                          assemble_weight)
from conftest import discrete_lambda1


def test_laplacian_matches_discrete_closed_form(grid199):
    # the discrete operator has the exact eigenvalue
    # (4/h^2) sin^2(pi h/2); the solver must hit it to near machine
    res = sigma1_divergence(grid199, 1.0, 0.0)
    exact = discrete_lambda1(199)
    assert res.sigma1 == pytest.approx(exact, abs=1e-9)
    assert res.eigenfunction.is_positive()
    assert res.residual < 1e-8


def test_constant_shift_and_weight(grid99):
    base = sigma1_divergence(grid99, 1.0, 0.0).sigma1
    shifted = sigma1_divergence(grid99, 1.0, 5.0).sigma1
    assert shifted == pytest.approx(base + 5.0, abs=1e-9)
    weighted = sigma1_divergence(grid99, 1.0, 0.0, C=2.0).sigma1
    assert weighted == pytest.approx(base / 2.0, abs=1e-9)
    scaled = sigma1_divergence(grid99, 3.0, 0.0).sigma1
    assert scaled == pytest.approx(3.0 * base, abs=1e-8)


def test_dense_oracle_random_potential(grid99):
    # independent oracle: LAPACK tridiagonal eigensolver
    rng = np.random.default_rng(7)
    B = rng.uniform(-5.0, 5.0, grid99.n_interior)
    res = sigma1_divergence(grid99, 1.0, B)
    h2 = grid99.spacing**2
    diag = 2.0 / h2 + B
    off = np.full(grid99.n_interior - 1, -1.0 / h2)
    oracle = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, 0))[0][0]
    assert res.sigma1 == pytest.approx(oracle, abs=1e-8)


def test_nonconvergence_raises(grid31):
    L = assemble_diffusion(grid31, 1.0)
    C = assemble_weight(grid31, 1.0)
    with pytest.raises(NonConvergence):
        principal_eigenpair(L, C, tol=1e-15, max_iter=1)


def test_rejects_nonpositive_weight(grid31):
    L = assemble_diffusion(grid31, 1.0)
    with pytest.raises(ValueError):
        principal_eigenpair(L, assemble_weight(grid31, 0.0))


def test_gauge_transform_constant_ratio():
    # M1/M2 constant k gives exp(-k v) exactly
    v = np.array([0.0, 0.3, 1.1, 0.0])
    out = gauge_transform(lambda s: 2.0, lambda s: 4.0, v)
    assert out == pytest.approx(np.exp(-0.5 * v))


def test_drift_identity_gap_and_order():
    # chemotaxis-style drift M1 = -chi f, M2 = 1 against its gauge form
    chi = 0.5
    gaps = {}
    for n in (99, 199):
        grid = Grid(n)
        v = GridFunction.from_callable(grid,
                                       lambda x: 2.0 * np.sin(np.pi * x))
        B = -1.0 * v.values
        _, _, gap = transform_identity_check(
            grid, M1=lambda s: -chi, M2=lambda s: 1.0, v=v, B=B, C=1.0)
        gaps[n] = gap
    assert gaps[199] < 1e-2
    ratio = gaps[99] / gaps[199]
    assert 4.0 - 1.5 < ratio < 4.0 + 1.5


def test_drift_reduces_to_divergence_without_drift(grid99):
    v = GridFunction.from_callable(grid99, lambda x: np.sin(np.pi * x))
    res = sigma1_drift(grid99, np.zeros(101), np.ones(101), v, 0.0)
    plain = sigma1_divergence(grid99, 1.0, 0.0)
    assert res.sigma1 == pytest.approx(plain.sigma1, abs=1e-9)


def test_deflated_second_estimate_above_sigma1(grid99):
    L = assemble_diffusion(grid99, 1.0)
    C = assemble_weight(grid99, 1.0)
    res = principal_eigenpair(L, C, grid=grid99)
    second = deflated_second_estimate(L, C, res)
    assert second > res.sigma1 + 1.0
    # second Dirichlet eigenvalue is close to 4 pi^2
    assert second == pytest.approx(discrete_lambda1(99) * 4, rel=0.02)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=15,
                max_size=15),
       st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=15,
                max_size=15))
def test_monotone_in_potential(B, bump):
    # sigma1 is monotone nondecreasing in the zero-order coefficient
    grid = Grid(15)
    lo = sigma1_divergence(grid, 1.0, np.asarray(B)).sigma1
    hi = sigma1_divergence(grid, 1.0, np.asarray(B) + np.asarray(bump)).sigma1
    assert hi >= lo - 1e-9
