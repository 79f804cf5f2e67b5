"""Exception hierarchy shared across the package."""


class PlapLabError(Exception):
    """Base class for all package errors."""


class MeshMismatchError(PlapLabError, ValueError):
    """Two objects that must share a mesh do not."""


class FiberUndefinedError(PlapLabError, ValueError):
    """Fiber scaling t(u) is undefined: the energy and the weight integral
    do not share a strict sign (one of them is zero within tolerance, or
    they have opposite signs)."""


class WeightError(PlapLabError, ValueError):
    """A weight function violates a structural requirement, e.g. it lost
    its sign change after orthogonalization."""


class SolverError(PlapLabError, RuntimeError):
    """A solver could not produce its primary deliverable."""


class NonConvergenceError(SolverError):
    """Iteration cap reached before the convergence criterion was met."""


class EmptyConeError(SolverError):
    """The admissible cone for a constrained minimization is empty
    (e.g. no function with negative energy and negative weight integral)."""


class AttainabilityError(SolverError):
    """A minimization level expected to be attained was not: every sample
    run diverged, signalling the wrong parameter regime."""


class ConfigError(PlapLabError, ValueError):
    """A run configuration file or value is invalid."""
