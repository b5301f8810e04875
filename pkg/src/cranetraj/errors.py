"""Exception hierarchy for crane-traj.

Every error raised on purpose by the library derives from ``CraneTrajError`` so
callers (the CLI in particular) can map families of failures to exit codes.
"""


class CraneTrajError(Exception):
    """Base class for all crane-traj errors."""


class DomainError(CraneTrajError, ValueError):
    """An input violates a documented precondition."""


class ConfigError(CraneTrajError):
    """A configuration or model document cannot be read or validated."""


class InfeasibleError(CraneTrajError):
    """The requested travel cannot be completed within the horizon."""


class IllPosedSurrogateError(CraneTrajError):
    """The quadratic surrogate has no positive curvature in acceleration."""


class SingularELError(CraneTrajError):
    """The second acceleration derivative of the power model vanished on an arc."""


class DivergenceError(CraneTrajError):
    """An Euler-Lagrange arc left the admissible velocity envelope."""
