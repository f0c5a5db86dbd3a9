"""Trace the coexistence continuum of the chemotaxis model from its
bifurcation point on the v-semitrivial branch and report the endpoint.

Usage: python scripts/trace_chemotaxis_branch.py [mu_offset]
"""

import sys

import numpy as np

from coexist import curves, system
from coexist.grid import Grid
from coexist.models import model_ap2


def main():
    offset = float(sys.argv[1]) if len(sys.argv) > 1 else 2.0
    grid = Grid(199)
    mu = np.pi**2 + offset
    model = model_ap2(0.5, 1.0, 1.0, lambda v: 1.0, lambda v: 0.0)

    theta = curves.semitrivial_state(model, "v", mu, grid)
    if theta is None:
        sys.exit(f"mu = {mu:.4f} is below the semitrivial threshold")
    lam_c = curves.lambda_mu(model, mu, grid).value
    print(f"mu = {mu:.6f}, branch opens at lambda = {lam_c:.6f}")

    phi1, eta = system.bifurcation_tangent_v(model, mu, theta, lam_c)
    bp = system.BifurcationPoint("v", mu, lam_c, theta, phi1, eta)
    branch = system.continue_branch(model, "mu", mu, bp)

    print(f"{len(branch.points)} continuation points")
    print(f"termination: {branch.termination.value}")
    for key, val in branch.termination_data.items():
        print(f"  {key}: {val}")

    step = max(1, len(branch.points) // 15)
    print(f"{'lambda':>10} {'sup u':>10} {'sup v':>10}")
    for pt in branch.points[::step]:
        print(f"{pt.parameter:10.4f} {pt.state.u.sup_norm():10.4f} "
              f"{pt.state.v.sup_norm():10.4f}")


if __name__ == "__main__":
    main()
