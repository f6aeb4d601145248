"""Exception types raised across the package."""


class AerosymError(Exception):
    """Base class for all package errors."""


class ZeroAirspeed(AerosymError):
    """Angle of attack and sideslip are undefined at zero airspeed."""


class DomainError(AerosymError):
    """Angle of attack outside the declared domain of a coefficient model."""


class NotEquivalent(AerosymError):
    """Model does not admit an orientation-independent equivalent drag."""


class SingularFit(AerosymError):
    """Least-squares normal equations are rank deficient."""


class NonFiniteState(AerosymError):
    """Integration produced a NaN or infinite state component."""


class FpDegenerate(AerosymError):
    """|f_p| fell below the guard value; the controller is undefined."""


class ThrustConeSingularity(AerosymError):
    """Thrust axis exactly opposite to f_p (attitude error of pi)."""


class ConfigError(AerosymError):
    """Scenario or model-card file violates its schema."""


class NumericalDivergence(AerosymError):
    """Closed-loop simulation left the finite range."""
