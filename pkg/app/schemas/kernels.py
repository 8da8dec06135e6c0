"""Kernel, symbol and spectrum schema definitions."""
from typing import Dict, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


StencilKind = Literal["dz", "dzbar", "laplace", "smooth"]


class PolyGaussian(BaseModel):
    """
    Polynomial in (z, z̄) times the fixed factor (1/2π)e^{−z z̄/2}.

    ``coefficients[j, k]`` multiplies z^j z̄^k.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficients: np.ndarray

    @model_validator(mode="after")
    def _freeze(self) -> "PolyGaussian":
        coeffs = np.array(self.coefficients, dtype=np.complex128)
        if coeffs.ndim != 2:
            raise ValueError("coefficients must be a 2-D array indexed [j, k]")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        return self

    def terms(self) -> Dict[Tuple[int, int], complex]:
        """Sparse view {(j, k): c_jk} of the nonzero coefficients."""
        js, ks = np.nonzero(self.coefficients)
        return {(int(j), int(k)): complex(self.coefficients[j, k]) for j, k in zip(js, ks)}


class SpectralSymbol(BaseModel):
    """
    Closed-form Fourier symbol of a stencil or of a composed chain.

    ``kind="chain"`` stands for (∂_z)^a (∂_z̄)^b (1 + λ²/8 Δ)^{⌈4/λ²⌉}.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["dz", "dzbar", "laplace", "smooth", "chain"]
    spacing: float = Field(..., gt=0)
    a: int = Field(0, ge=0)
    b: int = Field(0, ge=0)


class Spectrum(BaseModel):
    """
    Samples of F_λΦ on the frequency grid p_j = 2πj/((2L+1)λ), |j| ≤ L.

    ``values[i, j, c]`` is channel c at (p_i, p_j).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spacing: float = Field(..., gt=0, description="Spatial spacing λ of the source grid")
    half_width: int = Field(..., ge=0)
    channels: int = Field(..., ge=1)
    values: np.ndarray

    @property
    def frequency_step(self) -> float:
        return 2.0 * np.pi / ((2 * self.half_width + 1) * self.spacing)

    def frequencies(self) -> np.ndarray:
        return self.frequency_step * np.arange(-self.half_width, self.half_width + 1, dtype=float)
