"""Influences, noise sensitivity and correlation inequalities on the cube and in Gaussian space."""
from . import boolean, bridge, gaussian, numerics, report, verify
from .errors import CapacityError, ConfigError, DomainError, GeoinfError, PreconditionError
from .numerics import Estimate
from .report import InequalityReport

__version__ = "0.1.0"

__all__ = ["boolean", "bridge", "gaussian", "numerics", "report", "verify", "Estimate", "InequalityReport",
           "GeoinfError", "DomainError", "PreconditionError", "CapacityError", "ConfigError"]
