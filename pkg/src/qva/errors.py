"""Exception types raised across the engine."""


class QVAError(Exception):
    """Base class for engine errors."""


class DivisionByZero(QVAError, ZeroDivisionError):
    pass


class PoleAtEvaluationPoint(QVAError):
    pass


class InvalidParameter(QVAError, ValueError):
    pass


class RegionMismatch(QVAError):
    pass


class DivergentProduct(QVAError):
    pass


class DivergentSubstitution(QVAError):
    pass


class MalformedDecomposition(QVAError, ValueError):
    pass


class InvalidCertificate(QVAError):
    pass


class ConfigError(QVAError, ValueError):
    pass
