"""Exact soft-covering exponents, type enumeration and random-codebook simulation for DMCs."""

from . import bounds, exponents, simulator, typespace
from .errors import (
    ConstraintError,
    ConvergenceError,
    DegenerateChannelError,
    DimensionError,
    DomainError,
    SizeError,
    SoftCoverError,
    ValidationError,
)
from .exponents import ExponentResult, aleph_dual, alpha_dual, rate_sweep
from .measures import (
    Channel,
    Distribution,
    JointDistribution,
    LogBase,
    csiszar_mi,
    mutual_information,
    sibson_mi,
)

__all__ = [
    "Channel", "ConstraintError", "ConvergenceError", "DegenerateChannelError", "DimensionError",
    "Distribution", "DomainError", "ExponentResult", "JointDistribution", "LogBase", "SizeError",
    "SoftCoverError", "ValidationError", "aleph_dual", "alpha_dual", "bounds", "csiszar_mi",
    "exponents", "mutual_information", "rate_sweep", "sibson_mi", "simulator", "typespace",
]
