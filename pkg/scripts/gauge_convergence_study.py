"""Grid-refinement study of the drift-form vs gauge-form eigenvalue
identity for both application families.

Usage: python scripts/gauge_convergence_study.py
"""

import numpy as np

from coexist import curves
from coexist.grid import Grid
from coexist.models import ap1_sample, model_ap2


def study(label, fn, model, param, sizes):
    print(f"{label} at parameter {param:.4f}")
    print(f"{'n':>6} {'drift':>16} {'gauge':>16} {'gap':>12}")
    prev = None
    for n in sizes:
        cv = fn(model, param, Grid(n))
        line = f"{n:6d} {cv.value:16.10f} {cv.gauge_value:16.10f} " \
               f"{cv.gap:12.3e}"
        if prev is not None and cv.gap > 0:
            line += f"  ratio {prev / cv.gap:5.2f}"
        prev = cv.gap
        print(line)
    print()


def main():
    sizes = (49, 99, 199, 399)
    pi2 = np.pi**2
    ap2 = model_ap2(0.5, 1.0, 1.0, lambda v: 1.0, lambda v: 0.0)
    study("chemotaxis lambda_mu", curves.lambda_mu, ap2, pi2 + 2.0, sizes)
    study("prey-predator lambda_mu", curves.lambda_mu, ap1_sample(), 12.0,
          sizes)


if __name__ == "__main__":
    main()
