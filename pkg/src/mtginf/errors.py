"""Exception types raised across the package."""


class InvalidParameter(ValueError):
    pass


class DomainError(ValueError):
    """Laplace variable outside the half-plane where a transform is defined."""


class UnsupportedRate(ValueError):
    pass


class NumericFailure(ArithmeticError):
    pass


class InsufficientReplications(ValueError):
    pass


class ParameterRegimeError(ValueError):
    """Tuning formula evaluated outside the regime where it is defined."""


class ConfigError(InvalidParameter):
    """Malformed experiment configuration; the message names the offending field."""
