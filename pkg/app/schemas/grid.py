"""Grid and signal schema definitions."""
import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


FieldKind = Literal["real", "complex"]


def chain_length(spacing: float) -> int:
    """Number of smoothing layers ⌈4/λ²⌉."""
    return int(math.ceil(4.0 / spacing ** 2 - 1e-9))


class GridSpec(BaseModel):
    """Centered square grid {λk : k ∈ Z², ‖k‖∞ ≤ L}."""

    model_config = ConfigDict(frozen=True)

    spacing: float = Field(..., gt=0, description="Grid spacing λ")
    half_width: int = Field(..., ge=0, description="Nodes per half-side L")

    @field_validator("spacing")
    @classmethod
    def _finite_spacing(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("spacing must be finite")
        return v

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def node_count(self) -> int:
        return self.side ** 2

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis, ascending."""
        return self.spacing * np.arange(-self.half_width, self.half_width + 1, dtype=float)

    def shrink(self, by: int) -> "GridSpec":
        return GridSpec(spacing=self.spacing, half_width=self.half_width - by)


class Signal(BaseModel):
    """
    Multi-channel function on a centered square grid.

    ``values[i, j, c]`` holds channel ``c`` at node ``λ·(i − L, j − L)``; the first
    array axis is x, the second is y.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    channels: int = Field(..., ge=1)
    field: FieldKind = "real"
    values: np.ndarray

    @model_validator(mode="after")
    def _check_values(self) -> "Signal":
        values = np.asarray(self.values)
        expected = (self.grid.side, self.grid.side, self.channels)
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} does not match grid/channels {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        if self.field == "real":
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise ValueError("real-field signal has nonzero imaginary parts")
                values = values.real
            values = np.array(values, dtype=np.float64)
        else:
            values = np.array(values, dtype=np.complex128)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        return self

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    @property
    def half_width(self) -> int:
        return self.grid.half_width


class PolyTerm(BaseModel):
    """One term c·ζ^j·ζ̄^k of a polynomial in (ζ, ζ̄)."""

    model_config = ConfigDict(frozen=True)

    j: int = Field(..., ge=0, description="Power of ζ")
    k: int = Field(..., ge=0, description="Power of ζ̄")
    re: float = Field(1.0, description="Real part of the coefficient")
    im: float = Field(0.0, description="Imaginary part of the coefficient")


class AnalyticField(BaseModel):
    """
    Closed-form continuum input.

    The base field is rotated by ``rotation`` (radians, counter-clockwise) about the
    origin and then shifted by ``offset``: f(x) = f_base(A_{-rotation}(x - offset)).
    """

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        json_schema_extra={
            "example": {
                "kind": "gaussian_poly",
                "channels": 1,
                "terms": [{"j": 0, "k": 0, "re": 1.0}, {"j": 2, "k": 0, "re": 0.5}, {"j": 0, "k": 2, "re": 0.5}],
                "center": [0.3, -0.2],
                "width": 1.0
            }
        },
    )

    kind: Literal["gaussian_poly", "constant", "coordinate_monomial"]
    channels: int = Field(1, ge=1)
    channel_scales: Optional[List[float]] = Field(
        None, description="Per-channel real multipliers; defaults to all ones"
    )

    # gaussian_poly
    terms: List[PolyTerm] = Field(default_factory=list)
    center: Tuple[float, float] = (0.0, 0.0)
    width: float = Field(1.0, gt=0)

    # constant
    value: Tuple[float, float] = Field((0.0, 0.0), description="(re, im) of the constant")

    # coordinate_monomial z^a z̄^b
    a: int = Field(0, ge=0)
    b: int = Field(0, ge=0)

    rotation: float = 0.0
    offset: Tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def _check_kind(self) -> "AnalyticField":
        if self.kind == "gaussian_poly" and not self.terms:
            raise ValueError("gaussian_poly needs at least one polynomial term")
        if self.channel_scales is not None and len(self.channel_scales) != self.channels:
            raise ValueError(
                f"channel_scales has {len(self.channel_scales)} entries for {self.channels} channels"
            )
        return self

    @property
    def is_real(self) -> bool:
        """True when the field takes real values everywhere."""
        if self.kind == "constant":
            return self.value[1] == 0.0
        if self.kind == "coordinate_monomial":
            return self.a == self.b
        coeffs = {(t.j, t.k): complex(t.re, t.im) for t in self.terms}
        for (j, k), c in coeffs.items():
            if coeffs.get((k, j), 0j) != c.conjugate():
                return False
        return True

