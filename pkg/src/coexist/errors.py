"""Exception types shared across the toolkit."""


class CoexistError(Exception):
    """Base class for all toolkit errors."""


class NonConvergence(CoexistError):
    """Iterative eigensolver exhausted its iteration budget."""


class SignFailure(CoexistError):
    """Converged eigenfunction changes sign; the shift landed past the
    principal eigenvalue."""


class QuadratureFailure(CoexistError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NewtonDivergence(CoexistError):
    """Damped Newton iteration failed even after step-halving."""


class DegenerateBase(CoexistError):
    """Base semitrivial solution is degenerate; no simple bifurcation
    point is available."""


class KernelDimensionError(CoexistError):
    """Coupled Jacobian kernel at the bifurcation point is not
    one-dimensional."""


class UnsupportedModel(CoexistError):
    """Operation only defined for the built-in application models."""


class ConfigError(CoexistError):
    """Run configuration is malformed or contains unknown keys."""
