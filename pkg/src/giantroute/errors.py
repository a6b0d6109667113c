"""Exception and warning types shared across the package."""


class GiantRouteError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GiantRouteError, ValueError):
    """A physical parameter is outside its admissible range."""


class ConfigurationError(GiantRouteError, ValueError):
    """A scenario, grid or config file is inconsistent.

    ``field`` names the offending config key when one can be identified.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class IntegrationError(GiantRouteError, RuntimeError):
    """Time stepping became unstable."""

    def __init__(self, message, dt=None):
        super().__init__(message)
        self.dt = dt


class SingularPointError(GiantRouteError, ArithmeticError):
    """The stationary scattering problem has no unique solution at this point.

    This happens where the common denominator of the amplitudes vanishes,
    i.e. an atom-photon bound state sits exactly at the incident energy.
    """


class AdiabaticityWarning(UserWarning):
    """Parameters sit outside the regime where the |f> level can be eliminated."""


class ConfigWarning(UserWarning):
    """Non-fatal config issue (e.g. an ignored unknown key in non-strict mode)."""
