"""Numerical defaults schema."""
from pydantic import BaseModel, ConfigDict, Field


class NumericsConfig(BaseModel):
    """Quadrature and truncation constants shared by the numerical services."""

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        json_schema_extra={
            "example": {
                "conv_step": 0.05,
                "conv_radius": 8.0,
                "kernel_tail_tolerance": 1e-8,
                "kernel_radius": 8.0,
                "max_kernel_order": 8,
                "quadrature_order": 3,
                "float_digits": 12
            }
        },
    )

    conv_step: float = Field(0.05, gt=0, description="Quadrature step for continuum convolutions")
    conv_radius: float = Field(8.0, gt=0, description="Truncation radius of the y-integral")
    kernel_tail_tolerance: float = Field(
        1e-8, gt=0, description="Admissible kernel mass outside a discrete kernel grid"
    )
    kernel_radius: float = Field(
        8.0, gt=0, description="Physical half-width used when kernel grids are chosen automatically"
    )
    max_kernel_order: int = Field(8, ge=0, description="Largest a or b accepted for Gaussian derivatives")
    quadrature_order: int = Field(3, ge=1, description="Gauss-Legendre points per axis for cell averages")
    float_digits: int = Field(12, ge=1, description="Significant digits in reports")
