"""Gap solitons, light bullets and EIT-SIT design in resonantly absorbing Bragg reflectors."""

from .model import (DimensionlessParams, DomainError, FieldState1D, Grid1D, ParameterError,
                    PhysicalParams, derive_dimensionless)

__all__ = ["DimensionlessParams", "DomainError", "FieldState1D", "Grid1D", "ParameterError",
           "PhysicalParams", "derive_dimensionless"]
