"""Bifurcation curves mu_lambda / lambda_mu and the (lambda, mu)
region map.

mu_lambda is the principal eigenvalue of the v-equation linearized at
the u-semitrivial state (theta_lambda, 0); lambda_mu is its mirror at
(0, theta_mu).  Both are evaluated in drift form and cross-checked
against the gauge-transformed self-adjoint form.  The region map
classifies each (lambda, mu) cell by the nonexistence predicate, the
theorem condition on the two curves, and a Newton coexistence probe.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eigen import sigma1_divergence, sigma1_drift, transform_identity_check
from .errors import NewtonDivergence, UnsupportedModel
from .grid import Grid, GridFunction
from .models import Model, apriori_bounds, nonexistence
from .semitrivial import ScalarProblem, solve_scalar
from . import system

THRESHOLD_PAD = 1e-10
BOUND_SLACK = 1e-6


# ---------------------------------------------------------------------------
# semitrivial states driven by the model coefficients


def semitrivial_problem(model: Model, branch: str, gamma: float,
                        grid: Grid) -> ScalarProblem:
    """Scalar problem solved by the semitrivial state of one branch.

    The reaction terms f and g of the built-in families do not depend
    on x, so they are sampled at a fixed abscissa.
    """
    if branch == "u":
        return ScalarProblem(
            d=lambda s: model.P(s, 0.0),
            d_prime=lambda s: model.P_u(s, 0.0),
            h=lambda s: model.f(0.0, s),
            h_prime=lambda s: model.f_w(0.0, s),
            gamma=gamma,
            weight=np.asarray([model.a(x) for x in grid.nodes]))
    if branch == "v":
        return ScalarProblem(
            d=lambda s: model.R(0.0, s),
            d_prime=lambda s: model.R_v(0.0, s),
            h=lambda s: model.g(0.0, s),
            h_prime=lambda s: model.g_w(0.0, s),
            gamma=gamma,
            weight=np.asarray([model.b(x) for x in grid.nodes]))
    raise ValueError(f"branch must be 'u' or 'v', got {branch!r}")


def semitrivial_threshold(model: Model, branch: str, grid: Grid) -> float:
    """Onset value of the branch parameter: sigma1 of the linearization
    at zero, -P(0,0) Lap with weight a (u-branch) or -R(0,0) Lap with
    weight b (v-branch)."""
    if branch == "u":
        diff, weight = float(model.P(0.0, 0.0)), model.a
    elif branch == "v":
        diff, weight = float(model.R(0.0, 0.0)), model.b
    else:
        raise ValueError(f"branch must be 'u' or 'v', got {branch!r}")
    w = np.asarray([weight(x) for x in grid.nodes])
    return sigma1_divergence(grid, diff, 0.0, w).sigma1


def semitrivial_state(model: Model, branch: str, gamma: float,
                      grid: Grid) -> Optional[GridFunction]:
    """theta_gamma on the given branch, or None below the threshold."""
    if gamma <= semitrivial_threshold(model, branch, grid) + THRESHOLD_PAD:
        return None
    return solve_scalar(semitrivial_problem(model, branch, gamma, grid), grid)


# ---------------------------------------------------------------------------
# the two bifurcation curves


@dataclass
class CurveValue:
    """One curve evaluation: drift-form value, gauge-form cross-check,
    and whether the below-threshold extension was used."""

    value: float
    gauge_value: float
    gap: float
    extended: bool
    theta: Optional[GridFunction] = None
    drift_result: object = None
    gauge_result: object = None


def mu_lambda(model: Model, lam: float, grid: Grid) -> CurveValue:
    """Critical mu at which the v-species can invade (theta_lambda, 0).

    Above the u-branch threshold this is the principal eigenvalue of
    -div(Q_v(theta,0) phi grad theta + R(theta,0) grad phi)
    - G(x,theta,0) theta phi = mu b phi; below it the extension is the
    invasion eigenvalue at the trivial state.
    """
    theta = semitrivial_state(model, "u", lam, grid)
    if theta is None:
        value = semitrivial_threshold(model, "v", grid)
        return CurveValue(value, value, 0.0, extended=True)
    x = grid.nodes
    B = np.asarray([-model.G(xi, ti, 0.0) * ti
                    for xi, ti in zip(x, theta.values)])
    C = np.asarray([model.b(xi) for xi in x])
    rd, rg, gap = transform_identity_check(
        grid,
        M1=lambda s: model.Q_v(s, 0.0),
        M2=lambda s: model.R(s, 0.0),
        v=theta, B=B, C=C)
    return CurveValue(rd.sigma1, rg.sigma1, gap, extended=False, theta=theta,
                      drift_result=rd, gauge_result=rg)


def lambda_mu(model: Model, mu: float, grid: Grid) -> CurveValue:
    """Critical lambda at which the u-species can invade (0, theta_mu).

    Mirror of mu_lambda with coefficients S_u(0,theta), P(0,theta) and
    potential -F(x,0,theta) theta, weight a.  The extension below the
    v-branch threshold is family-specific: zero for the prey-predator
    family, the trivial invasion eigenvalue otherwise.
    """
    theta = semitrivial_state(model, "v", mu, grid)
    if theta is None:
        if model.family == "ap1":
            return CurveValue(0.0, 0.0, 0.0, extended=True)
        value = semitrivial_threshold(model, "u", grid)
        return CurveValue(value, value, 0.0, extended=True)
    x = grid.nodes
    B = np.asarray([-model.F(xi, 0.0, ti) * ti
                    for xi, ti in zip(x, theta.values)])
    C = np.asarray([model.a(xi) for xi in x])
    rd, rg, gap = transform_identity_check(
        grid,
        M1=lambda s: model.S_u(0.0, s),
        M2=lambda s: model.P(0.0, s),
        v=theta, B=B, C=C)
    return CurveValue(rd.sigma1, rg.sigma1, gap, extended=False, theta=theta,
                      drift_result=rd, gauge_result=rg)


@dataclass
class CurveTable:
    """Sampled curve with piecewise-linear interpolation."""

    parameters: np.ndarray
    values: np.ndarray
    which: str               # "mu_lambda" or "lambda_mu"
    model_label: str
    n_interior: int
    gaps: np.ndarray = None

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.parameters) <= 0):
            raise ValueError("curve parameters must be strictly increasing")
        if self.parameters.shape != self.values.shape:
            raise ValueError("parameter/value length mismatch")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("curve values must be finite")

    def interpolate(self, p: float) -> float:
        return float(np.interp(p, self.parameters, self.values))


def curve_table(model: Model, which: str, parameters, grid: Grid) -> CurveTable:
    """Evaluate one curve over a parameter grid."""
    parameters = np.asarray(parameters, dtype=float)
    fn = {"mu_lambda": mu_lambda, "lambda_mu": lambda_mu}.get(which)
    if fn is None:
        raise ValueError(f"unknown curve {which!r}")
    vals, gaps = [], []
    for p in parameters:
        cv = fn(model, float(p), grid)
        vals.append(cv.value)
        gaps.append(cv.gap)
    return CurveTable(parameters, np.asarray(vals), which, model.label,
                      grid.n_interior, gaps=np.asarray(gaps))


# ---------------------------------------------------------------------------
# region map


@dataclass
class ProbeOpts:
    probe_predicted: bool = True
    probe_unknown: bool = True
    probe_proven_empty: bool = False
    seed_amplitude: float = 0.3
    rng_seed: Optional[int] = None
    max_workers: Optional[int] = None
    newton_opts: system.NewtonOpts = field(default_factory=system.NewtonOpts)


@dataclass
class CellResult:
    verdict: str
    probe_residual: float = np.nan
    seed_used: str = ""
    bounds_ok: bool = False
    state: Optional[system.CoupledState] = None


@dataclass
class RegionMap:
    lambda_grid: np.ndarray
    mu_grid: np.ndarray
    cells: list                 # cells[i][j] for (lambda_i, mu_j)
    mu_lambda_table: CurveTable
    lambda_mu_table: CurveTable

    def verdicts(self) -> np.ndarray:
        return np.asarray([[c.verdict for c in row] for row in self.cells])


def theorem_condition(model: Model, lam: float, mu: float,
                      mu_c: float, lam_c: float, lambda1_v: float) -> bool:
    """Coexistence condition of the existence theorems, evaluated from
    interpolated curve values mu_c = mu_lambda(lam), lam_c = lambda_mu(mu)."""
    if model.family == "ap1":
        return mu > mu_c and lam > lam_c
    if model.family == "ap2":
        if mu <= lambda1_v:
            return False
        return ((lam > lam_c and mu > mu_c)
                or (lam < lam_c and mu < mu_c))
    raise UnsupportedModel(f"no theorem condition for {model.family!r}")


def _bump_seed(grid: Grid, amp_u: float, amp_v: float) -> system.CoupledState:
    profile = np.sin(np.pi * grid.nodes / grid.length)
    return system.CoupledState(GridFunction(grid, amp_u * profile),
                               GridFunction(grid, amp_v * profile))


def _probe_cell(model: Model, lam: float, mu: float, grid: Grid,
                opts: ProbeOpts, warm: Optional[system.CoupledState],
                tangent_seed: Optional[system.CoupledState],
                jitter: float = 1.0) -> CellResult:
    """Run the seed ladder; returns a CellResult without a verdict set
    (caller decides Confirmed / NotFound from success and context)."""
    bounds = apriori_bounds(model, lam, mu)
    amp = opts.seed_amplitude * jitter
    amp_u = amp * (bounds.u_bound if bounds.u_bound > 0 else max(lam, 1.0))
    amp_v = amp * (bounds.v_bound if bounds.v_bound > 0 else max(mu, 1.0))

    seeds = []
    if warm is not None:
        seeds.append(("warm", warm))
    if tangent_seed is not None:
        seeds.append(("tangent", tangent_seed))
    seeds.append(("bump", _bump_seed(grid, amp_u, amp_v)))

    for name, seed in seeds:
        try:
            sol = system.newton_coexistence(model, lam, mu, seed,
                                            opts.newton_opts)
        except NewtonDivergence:
            continue
        if sol is None:
            continue
        res = float(np.max(np.abs(system.residual(model, lam, mu, sol))))
        ok = True
        if bounds.valid:
            ok = (sol.u.sup_norm() <= bounds.u_bound + BOUND_SLACK
                  and sol.v.sup_norm() <= bounds.v_bound + BOUND_SLACK)
        return CellResult(verdict="", probe_residual=res, seed_used=name,
                          bounds_ok=ok, state=sol)
    return CellResult(verdict="", probe_residual=np.nan, seed_used="none",
                      bounds_ok=False, state=None)


def _tangent_seed_for(model: Model, lam: float, grid: Grid,
                      theta: Optional[GridFunction], mu_c: float,
                      amp: float) -> Optional[system.CoupledState]:
    """Seed along the bifurcation direction off (theta_lambda, 0)."""
    if theta is None:
        return None
    try:
        xi, phi2 = system.bifurcation_tangent(model, lam, theta, mu_c)
    except Exception:
        return None
    u = np.maximum(theta.values + amp * xi.values, 0.0)
    v = amp * phi2.values
    return system.CoupledState(GridFunction(grid, u), GridFunction(grid, v))


def _classify_column(model: Model, lam: float, mu_grid: np.ndarray,
                     grid: Grid, opts: ProbeOpts,
                     mu_tab: CurveTable, lam_tab: CurveTable,
                     lambda1_v: float) -> list:
    """All cells of one lambda column, warm-starting up the mu axis."""
    mu_c = mu_tab.interpolate(lam)
    theta = semitrivial_state(model, "u", lam, grid)
    if opts.rng_seed is None:
        jitters = np.ones(len(mu_grid))
    else:
        rng = np.random.default_rng(
            [opts.rng_seed, abs(hash(round(lam, 9))) % 2**31])
        jitters = rng.uniform(0.8, 1.2, len(mu_grid))

    results = []
    warm = None
    for k, mu in enumerate(mu_grid):
        mu = float(mu)
        if nonexistence(model, lam, mu, lambda1_v) == "ProvenEmpty":
            cell = CellResult(verdict="ProvenEmpty")
            if opts.probe_proven_empty:
                probed = _probe_cell(model, lam, mu, grid, opts, warm, None,
                                     jitter=jitters[k])
                cell.probe_residual = probed.probe_residual
                cell.seed_used = probed.seed_used
                if probed.state is not None:
                    # soundness violation; keep the evidence
                    cell.state = probed.state
                    cell.bounds_ok = probed.bounds_ok
            results.append(cell)
            continue

        lam_c = lam_tab.interpolate(mu)
        predicted = theorem_condition(model, lam, mu, mu_c, lam_c, lambda1_v)
        do_probe = opts.probe_predicted if predicted else opts.probe_unknown
        if not do_probe:
            results.append(CellResult(
                verdict="Predicted" if predicted else "Unknown"))
            continue

        bounds = apriori_bounds(model, lam, mu)
        amp = opts.seed_amplitude * (bounds.v_bound if bounds.v_bound > 0
                                     else max(mu, 1.0))
        tangent_seed = _tangent_seed_for(model, lam, grid, theta, mu_c, amp)
        probed = _probe_cell(model, lam, mu, grid, opts, warm, tangent_seed,
                             jitter=jitters[k])
        if probed.state is not None and probed.bounds_ok:
            probed.verdict = "Confirmed"
            warm = probed.state
        else:
            probed.verdict = "PredictedNotFound" if predicted else "Unknown"
        results.append(probed)
    return results


def region_map(model: Model, lambda_grid, mu_grid, grid: Grid,
               probe_opts: Optional[ProbeOpts] = None) -> RegionMap:
    """Classify every (lambda, mu) cell of the parameter rectangle.

    Columns (fixed lambda) are independent and evaluated on a thread
    pool; within a column the probe warm-starts from the previous
    confirmed state going up the mu axis.
    """
    opts = probe_opts or ProbeOpts()
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)

    mu_tab = curve_table(model, "mu_lambda", lambda_grid, grid)
    lam_tab = curve_table(model, "lambda_mu", mu_grid, grid)
    lambda1_v = semitrivial_threshold(model, "v", grid)

    def column(lam):
        return _classify_column(model, float(lam), mu_grid, grid, opts,
                                mu_tab, lam_tab, lambda1_v)

    with concurrent.futures.ThreadPoolExecutor(
            max_workers=opts.max_workers) as pool:
        cells = list(pool.map(column, lambda_grid))

    return RegionMap(lambda_grid, mu_grid, cells, mu_tab, lam_tab)
