"""Exception types shared across the toolkit."""


class SwarmnetError(Exception):
    """Base class for all toolkit errors."""


class GraphValidationError(SwarmnetError):
    """An adjacency matrix violates the regular-graph assumptions."""


class SimplexViolationError(SwarmnetError):
    """A trajectory left the feasible simplex by more than the tolerance.

    Carries the step index at which the violation occurred; usually a sign
    that the time step is too large.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SingularSystemError(SwarmnetError):
    """A linear system is singular to working precision."""


class NonFiniteStateError(SwarmnetError):
    """An integrator stage produced NaN or infinity."""


class ConvergenceError(SwarmnetError):
    """An iterative solve failed to converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class CertificateInapplicableError(SwarmnetError):
    """A stability certificate cannot be evaluated for these inputs."""


class ScenarioError(SwarmnetError):
    """A scenario file is malformed or references missing inputs."""
