"""Map the coexistence region of the prey-predator model and print an
ASCII picture of the verdicts.

Usage: python scripts/region_map_prey_predator.py [n_interior]
"""

import sys
import time

import numpy as np

from coexist import curves
from coexist.grid import Grid
from coexist.models import ap1_sample

GLYPH = {"ProvenEmpty": ".", "Predicted": "p", "Confirmed": "#",
         "PredictedNotFound": "?", "Unknown": " "}


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 199
    grid = Grid(n)
    model = ap1_sample()
    pi2 = np.pi**2
    lams = np.linspace(-1.0, 6.0 * pi2, 12)
    mus = np.linspace(pi2 - 2.0, pi2 + 10.0, 12)

    t0 = time.time()
    rm = curves.region_map(model, lams, mus, grid)
    print(f"region map on {n} nodes in {time.time() - t0:.1f} s")
    print(f"columns: mu in [{mus[0]:.2f}, {mus[-1]:.2f}]")
    for i, lam in enumerate(lams):
        row = "".join(GLYPH[c.verdict] for c in rm.cells[i])
        print(f"lambda = {lam:7.2f}  |{row}|")
    print("legend: . proven empty, # confirmed, ? predicted not found,")
    print("        p predicted (probe off), blank unknown")

    confirmed = sum(c.verdict == "Confirmed" for row in rm.cells for c in row)
    print(f"{confirmed} confirmed coexistence states")


if __name__ == "__main__":
    main()
