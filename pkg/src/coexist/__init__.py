"""Numerical bifurcation toolkit for 1-D quasilinear cross-diffusion
systems: principal eigenvalues, semitrivial branches, coexistence
continuation, and region maps."""

from .grid import Grid, GridFunction, make_grid

__all__ = ["Grid", "GridFunction", "make_grid"]
__version__ = "0.1.0"
