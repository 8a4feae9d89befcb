"""Exact verification tools for quantum vertex algebras and their modules."""

from ._version import __version__
from .errors import (ConfigError, DivergentProduct, DivergentSubstitution, DivisionByZero,
                     InvalidCertificate, InvalidParameter, MalformedDecomposition,
                     PoleAtEvaluationPoint, QVAError, RegionMismatch)
from .scalars import QScalar, format_qscalar, parse_qscalar
from .series import Region, Series, VarSpec, iota_expand, series_mul
from .superfock import StateVector

__all__ = [
    "__version__", "QScalar", "format_qscalar", "parse_qscalar", "Region", "Series", "VarSpec",
    "iota_expand", "series_mul", "StateVector", "QVAError", "ConfigError", "DivergentProduct",
    "DivergentSubstitution", "DivisionByZero", "InvalidCertificate", "InvalidParameter",
    "MalformedDecomposition", "PoleAtEvaluationPoint", "RegionMismatch",
]
