"""Gaussian-derivative kernels Ψ_{a,b} and continuum convolutions."""
import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from app.core.logging import logger
from app.schemas.grid import AnalyticField
from app.schemas.kernels import PolyGaussian
from app.services.grid.fields import evaluate_field
from app.services.loader import load_numerics

CONV_KINDS = ("gaussian_poly", "constant")


def _apply_dz(coeffs: np.ndarray) -> np.ndarray:
    """p ↦ ∂_z p − (z̄/2) p on a coefficient array C[j, k]."""
    nj, nk = coeffs.shape
    out = np.zeros((nj, nk + 1), dtype=np.complex128)
    j = np.arange(1, nj)
    out[:-1, :-1] += j[:, None] * coeffs[1:, :]
    out[:, 1:] -= 0.5 * coeffs
    return out


def _apply_dzbar(coeffs: np.ndarray) -> np.ndarray:
    """p ↦ ∂_z̄ p − (z/2) p on a coefficient array C[j, k]."""
    nj, nk = coeffs.shape
    out = np.zeros((nj + 1, nk), dtype=np.complex128)
    k = np.arange(1, nk)
    out[:-1, :-1] += coeffs[:, 1:] * k[None, :]
    out[1:, :] -= 0.5 * coeffs
    return out


@lru_cache(maxsize=128)
def gaussian_deriv_kernel(a: int, b: int) -> PolyGaussian:
    """
    Closed form of Ψ_{a,b} = ∂_z^a ∂_z̄^b ((1/2π) e^{−|x|²/2}).

    Args:
        a: Order of ∂_z
        b: Order of ∂_z̄

    Returns:
        PolyGaussian holding the polynomial factor

    Raises:
        ValueError: If a or b is negative or exceeds the configured order guard
    """
    guard = load_numerics().max_kernel_order
    if a < 0 or b < 0:
        raise ValueError(f"kernel orders must be nonnegative, got ({a}, {b})")
    if a > guard or b > guard:
        raise ValueError(f"kernel order ({a}, {b}) exceeds the guard {guard}")
    coeffs = np.ones((1, 1), dtype=np.complex128)
    for _ in range(b):
        coeffs = _apply_dzbar(coeffs)
    for _ in range(a):
        coeffs = _apply_dz(coeffs)
    return PolyGaussian(coefficients=coeffs)


def evaluate_poly_gaussian(kernel: PolyGaussian, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Σ c_jk z^j z̄^k · (1/2π) e^{−(x²+y²)/2} at points (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = x + 1j * y
    poly = P.polyval2d(z, np.conj(z), kernel.coefficients)
    return poly * np.exp(-0.5 * (x * x + y * y)) / (2.0 * math.pi)


@lru_cache(maxsize=64)
def _quadrature_kernel(a: int, b: int, step: float, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    n = int(round(2 * radius / step)) + 1
    axis = np.linspace(-radius, radius, n)
    weights = np.full(n, step)
    weights[0] = weights[-1] = step / 2.0
    Y1, Y2 = np.meshgrid(axis, axis, indexing="ij")
    psi = evaluate_poly_gaussian(gaussian_deriv_kernel(a, b), Y1, Y2)
    psi_weighted = psi * np.outer(weights, weights)
    psi_weighted.setflags(write=False)
    return axis, psi_weighted


def continuum_conv(f: AnalyticField, a: int, b: int, x: Sequence[float]) -> np.ndarray:
    """
    Evaluate (f * Ψ_{a,b})(x) = ∫ f(x − y) Ψ_{a,b}(y) d²y.

    Uses the trapezoidal rule on a square y-grid (configured step and
    truncation radius, 0.05 and 8 by default).

    Args:
        f: Square-integrable field (gaussian_poly) or a constant
        a: Order of ∂_z
        b: Order of ∂_z̄
        x: Evaluation point (x1, x2)

    Returns:
        Complex vector with one entry per field channel

    Raises:
        ValueError: If the field kind is not supported
    """
    if f.kind not in CONV_KINDS:
        raise ValueError(
            f"continuum_conv supports field kinds {CONV_KINDS}, got {f.kind!r} "
            f"(polynomial growth defeats the truncated quadrature)"
        )
    numerics = load_numerics()
    axis, psi_weighted = _quadrature_kernel(a, b, numerics.conv_step, numerics.conv_radius)
    Y1, Y2 = np.meshgrid(axis, axis, indexing="ij")
    values = evaluate_field(f, x[0] - Y1, x[1] - Y2)
    result = np.tensordot(psi_weighted, values, axes=([0, 1], [0, 1]))
    logger.debug(f"Kernels: continuum_conv ({a},{b}) at {tuple(x)} -> {result}")
    return result
