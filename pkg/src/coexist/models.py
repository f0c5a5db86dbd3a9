"""Coefficient bundles for the coupled cross-diffusion system.

A Model collects the diffusion matrix entries P, Q, R, S (functions of
(u, v) with first partials), the reaction data f, g (functions of
(x, w)), the interaction terms F, G (functions of (x, u, v)), and the
parameter weights a, b.  Two application families are built in: a
prey-predator system with nonlinear self- and cross-diffusion in the
prey, and a chemotaxis system with logistic competition kinetics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import QuadratureFailure, UnsupportedModel


@dataclass
class Model:
    """Coefficient bundle; all diffusion entries take (u, v)."""

    P: Callable
    Q: Callable
    R: Callable
    S: Callable
    # first partials of the diffusion entries
    P_u: Callable
    P_v: Callable
    Q_u: Callable
    Q_v: Callable
    R_u: Callable
    R_v: Callable
    S_u: Callable
    S_v: Callable
    # reactions: f(x, u), g(x, v) with w-derivatives
    f: Callable
    f_w: Callable
    g: Callable
    g_w: Callable
    # interactions: F(x, u, v), G(x, u, v) with partials
    F: Callable
    F_u: Callable
    F_v: Callable
    G: Callable
    G_u: Callable
    G_v: Callable
    # parameter weights
    a: Callable = lambda x: 1.0
    b: Callable = lambda x: 1.0
    # floor constants from the structural hypotheses
    delta0: float = 1.0
    P0: float = 1.0
    R0: float = 1.0
    label: str = "generic"
    family: str = "generic"          # "ap1" | "ap2" | "generic"
    constants: dict = field(default_factory=dict)


@dataclass
class BoundReport:
    u_bound: float
    v_bound: float
    valid: bool


@dataclass
class HypothesisViolation:
    name: str
    point: tuple
    value: float

    def __str__(self):
        return f"{self.name} violated at {self.point} (value {self.value:g})"


def hypothesis_check(model: Model, u_max: float, v_max: float,
                     samples: int = 50) -> list[HypothesisViolation]:
    """Sample the rectangle [0,u_max]x[0,v_max] and report violated
    structural inequalities; an empty list means the model passes."""
    if u_max <= 0 or v_max <= 0:
        raise ValueError("u_max and v_max must be positive")
    us = np.linspace(0.0, u_max, samples)
    vs = np.linspace(0.0, v_max, samples)
    violations: list[HypothesisViolation] = []

    def record(name, pts_vals):
        worst = None
        for pt, val in pts_vals:
            if worst is None or val < worst[1]:
                worst = (pt, val)
        if worst is not None:
            violations.append(HypothesisViolation(name, worst[0], worst[1]))

    bad = [((u, 0.0), -abs(model.Q(u, 0.0))) for u in us
           if abs(model.Q(u, 0.0)) > 1e-12]
    record("Q(u,0)=0", bad)
    bad = [((0.0, v), -abs(model.S(0.0, v))) for v in vs
           if abs(model.S(0.0, v)) > 1e-12]
    record("S(0,v)=0", bad)

    det_bad, p_bad, r_bad = [], [], []
    for u in us:
        for v in vs:
            det = abs(model.P(u, v) * model.R(u, v)
                      - model.Q(u, v) * model.S(u, v))
            if det < model.delta0 - 1e-12:
                det_bad.append(((u, v), det))
            if model.P(u, v) < model.P0 - 1e-12:
                p_bad.append(((u, v), model.P(u, v)))
            if model.R(u, v) < model.R0 - 1e-12:
                r_bad.append(((u, v), model.R(u, v)))
    record("|PR-QS| >= delta0", det_bad)
    record("P >= P0", p_bad)
    record("R >= R0", r_bad)

    if abs(model.f(0.0, 0.0)) > 1e-12:
        violations.append(HypothesisViolation("f(x,0)=0", (0.0,), model.f(0.0, 0.0)))
    if abs(model.g(0.0, 0.0)) > 1e-12:
        violations.append(HypothesisViolation("g(x,0)=0", (0.0,), model.g(0.0, 0.0)))
    return violations


def model_ap1(b_const: float, c_const: float,
              A, A_prime, G, G_prime, G_prime2, H, H_prime, H_prime2,
              A_floor: float, G0: float, H0: float, H1: float,
              label: str = "ap1") -> Model:
    """Prey-predator family: prey flux A(v)G'(u)H(v) grad u +
    A(v)G(u)H'(v) grad v, reactions u(lambda-u-bv) and v(mu-v+cu)."""
    if b_const <= 0 or c_const <= 0:
        raise ValueError("b and c must be positive")
    if A_floor <= 0 or G0 <= 0 or H0 <= 0 or H1 <= 0:
        raise ValueError("hypothesis floors must be positive")

    P = lambda u, v: A(v) * G_prime(u) * H(v)
    S = lambda u, v: A(v) * G(u) * H_prime(v)
    return Model(
        P=P,
        Q=lambda u, v: 0.0,
        R=lambda u, v: 1.0,
        S=S,
        P_u=lambda u, v: A(v) * G_prime2(u) * H(v),
        P_v=lambda u, v: (A_prime(v) * H(v) + A(v) * H_prime(v)) * G_prime(u),
        Q_u=lambda u, v: 0.0,
        Q_v=lambda u, v: 0.0,
        R_u=lambda u, v: 0.0,
        R_v=lambda u, v: 0.0,
        S_u=lambda u, v: A(v) * G_prime(u) * H_prime(v),
        S_v=lambda u, v: (A_prime(v) * H_prime(v) + A(v) * H_prime2(v)) * G(u),
        f=lambda x, u: -u,
        f_w=lambda x, u: -1.0,
        g=lambda x, v: -v,
        g_w=lambda x, v: -1.0,
        F=lambda x, u, v: -b_const,
        F_u=lambda x, u, v: 0.0,
        F_v=lambda x, u, v: 0.0,
        G=lambda x, u, v: c_const,
        G_u=lambda x, u, v: 0.0,
        G_v=lambda x, u, v: 0.0,
        delta0=A_floor * G0 * H0,
        P0=A_floor * G0 * H0,
        R0=1.0,
        label=label,
        family="ap1",
        constants={
            "b": b_const, "c": c_const,
            "A": A, "A_prime": A_prime,
            "G_fn": G, "G_prime": G_prime, "G_prime2": G_prime2,
            "H": H, "H_prime": H_prime, "H_prime2": H_prime2,
            "A_floor": A_floor, "G0": G0, "H0": H0, "H1": H1,
        },
    )


def ap1_sample(b_const: float = 1.0, c_const: float = 1.0) -> Model:
    """The reference instance A(v)=v+1, G(u)=u^2+u, H(v)=(v+2)/(v+1)."""
    return model_ap1(
        b_const, c_const,
        A=lambda v: v + 1.0, A_prime=lambda v: 1.0,
        G=lambda u: u**2 + u, G_prime=lambda u: 2.0 * u + 1.0,
        G_prime2=lambda u: 2.0,
        H=lambda v: (v + 2.0) / (v + 1.0),
        H_prime=lambda v: -1.0 / (v + 1.0) ** 2,
        H_prime2=lambda v: 2.0 / (v + 1.0) ** 3,
        A_floor=1.0, G0=1.0, H0=1.0, H1=2.0,
        label="ap1-sample",
    )


def model_ap2(chi: float, b_const: float, c_const: float,
              f_sens, f_sens_prime, label: str = "ap2") -> Model:
    """Chemotaxis family: -Lap u + div(chi f(v) u grad v), reactions
    u(lambda-u+bv) and v(mu-v-cu)."""
    if chi < 0:
        raise ValueError("chi must be nonnegative")
    if c_const <= 0:
        raise ValueError("c must be positive")

    S = lambda u, v: -chi * f_sens(v) * u
    return Model(
        P=lambda u, v: 1.0,
        Q=lambda u, v: 0.0,
        R=lambda u, v: 1.0,
        S=S,
        P_u=lambda u, v: 0.0,
        P_v=lambda u, v: 0.0,
        Q_u=lambda u, v: 0.0,
        Q_v=lambda u, v: 0.0,
        R_u=lambda u, v: 0.0,
        R_v=lambda u, v: 0.0,
        S_u=lambda u, v: -chi * f_sens(v),
        S_v=lambda u, v: -chi * f_sens_prime(v) * u,
        f=lambda x, u: -u,
        f_w=lambda x, u: -1.0,
        g=lambda x, v: -v,
        g_w=lambda x, v: -1.0,
        F=lambda x, u, v: b_const,
        F_u=lambda x, u, v: 0.0,
        F_v=lambda x, u, v: 0.0,
        G=lambda x, u, v: -c_const,
        G_u=lambda x, u, v: 0.0,
        G_v=lambda x, u, v: 0.0,
        delta0=1.0,
        P0=1.0,
        R0=1.0,
        label=label,
        family="ap2",
        constants={
            "chi": chi, "b": b_const, "c": c_const,
            "f_sens": f_sens, "f_sens_prime": f_sens_prime,
        },
    )


def _gauge_integral(num, den, z: float, quad_tol: float = 1e-10) -> float:
    val, err = quad(lambda s: num(s) / den(s), 0.0, z,
                    epsabs=quad_tol, limit=200)
    if err > max(quad_tol, 1e-8 * abs(val)):
        raise QuadratureFailure(
            f"gauge integral error estimate {err:g} above tolerance")
    return val


def gauge_h1(model: Model, z: float) -> float:
    """h1(z) = int_0^z Q_v(s,0)/R(s,0) ds."""
    if z < 0:
        raise ValueError("gauge argument must be nonnegative")
    return _gauge_integral(lambda s: model.Q_v(s, 0.0),
                           lambda s: model.R(s, 0.0), z)


def gauge_h2(model: Model, z: float) -> float:
    """h2(z) = int_0^z S_u(0,s)/P(0,s) ds."""
    if z < 0:
        raise ValueError("gauge argument must be nonnegative")
    return _gauge_integral(lambda s: model.S_u(0.0, s),
                           lambda s: model.P(0.0, s), z)


def chemo_cumulative(model: Model, z: float) -> float:
    """F(z) = int_0^z f(s) ds for the chemotaxis sensitivity."""
    if model.family != "ap2":
        raise UnsupportedModel("cumulative sensitivity defined for ap2 only")
    f_sens = model.constants["f_sens"]
    val, _ = quad(f_sens, 0.0, z, epsabs=1e-12, limit=200)
    return val


def g_inverse(model: Model, y: float) -> float:
    """Inverse of the prey diffusion profile G on [0, inf)."""
    if model.family != "ap1":
        raise UnsupportedModel("G inverse defined for ap1 only")
    G = model.constants["G_fn"]
    if y <= 0:
        return 0.0
    hi = 1.0
    while G(hi) < y:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("G inverse bracket overflow")
    return float(brentq(lambda s: G(s) - y, 0.0, hi, xtol=1e-12))


def apriori_bounds(model: Model, lam: float, mu: float) -> BoundReport:
    """Sup-norm ceilings for coexistence states of the two families."""
    if model.family == "ap1":
        c = model.constants["c"]
        G = model.constants["G_fn"]
        H0, H1 = model.constants["H0"], model.constants["H1"]
        if lam <= 0:
            return BoundReport(u_bound=0.0, v_bound=max(mu, 0.0), valid=False)
        u_bound = g_inverse(model, G(lam) * H1 / H0)
        v_bound = mu + c * u_bound
        return BoundReport(u_bound=u_bound, v_bound=v_bound,
                           valid=u_bound > 0 and v_bound > 0)
    if model.family == "ap2":
        chi, b = model.constants["chi"], model.constants["b"]
        if mu <= 0:
            return BoundReport(u_bound=0.0, v_bound=0.0, valid=False)
        v_bound = mu
        # proxy bound from the transformed equation's maximum principle:
        # ||u e^{-chi F(v)}||_inf <= lambda + |b| mu
        gauge = np.exp(chi * chemo_cumulative(model, mu))
        u_bound = max(lam + abs(b) * mu, 0.0) * gauge
        return BoundReport(u_bound=u_bound, v_bound=v_bound,
                           valid=u_bound > 0 and v_bound > 0)
    raise UnsupportedModel(f"no a-priori bounds for family {model.family!r}")


def nonexistence(model: Model, lam: float, mu: float,
                 lambda1: float) -> str:
    """Coexistence nonexistence verdict: "ProvenEmpty" or "Unknown".

    lambda1 is the principal eigenvalue of the Dirichlet Laplacian on
    the working grid.
    """
    if model.family == "ap1":
        if lam <= 0:
            return "ProvenEmpty"
        cbar = apriori_bounds(model, lam, mu).u_bound
        c = model.constants["c"]
        if mu <= lambda1 - c * cbar:
            return "ProvenEmpty"
        return "Unknown"
    if model.family == "ap2":
        if mu <= lambda1:
            return "ProvenEmpty"
        chi, b = model.constants["chi"], model.constants["b"]
        gauge = np.exp(chi * chemo_cumulative(model, mu))
        if b <= 0:
            small_lam = lambda1 / gauge
        else:
            sign = lambda1 - b * mu * gauge
            if sign > 0:
                small_lam = lambda1 / gauge - b * mu
            elif sign == 0:
                small_lam = 0.0
            else:
                small_lam = lambda1 - b * mu * gauge
        if lam <= small_lam:
            return "ProvenEmpty"
        return "Unknown"
    raise UnsupportedModel(f"no nonexistence predicate for {model.family!r}")
