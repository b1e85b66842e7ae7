"""Exception types raised by the solvers."""


class AttotunnelError(Exception):
    """Base class for all package errors."""


class NonConvergence(AttotunnelError):
    pass


class QuadratureFailure(AttotunnelError):
    pass


class StepFailure(AttotunnelError):
    pass


class DegenerateField(AttotunnelError):
    pass


class CoreCollision(AttotunnelError):
    """Trajectory came closer to the ion than the core guard radius."""


class BoundOrbit(AttotunnelError):
    """Electron is left with negative energy after the pulse."""


class DomainError(AttotunnelError, ValueError):
    pass


class ConfigError(AttotunnelError, ValueError):
    pass
