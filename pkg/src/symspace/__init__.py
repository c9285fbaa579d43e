"""Point-to-hyperplane distances, Busemann functions and layers on the
Poincare ball and on SPD matrices."""

from . import attention, data, gi, matkernels, poincare, spd_pem, training
from .errors import (
    DimensionError,
    DomainError,
    EigenSolverError,
    InvalidPointError,
    NonFiniteLossError,
    NotPositiveDefiniteError,
    RepresentationOverflowError,
    SingularMatrixError,
    SymspaceError,
)

__all__ = [
    "attention",
    "data",
    "gi",
    "matkernels",
    "poincare",
    "spd_pem",
    "training",
    "DimensionError",
    "DomainError",
    "EigenSolverError",
    "InvalidPointError",
    "NonFiniteLossError",
    "NotPositiveDefiniteError",
    "RepresentationOverflowError",
    "SingularMatrixError",
    "SymspaceError",
]
