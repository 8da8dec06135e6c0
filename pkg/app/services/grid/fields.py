"""Evaluation of closed-form continuum fields."""
import math
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from app.schemas.grid import AnalyticField


def poly_coefficients(field: AnalyticField) -> np.ndarray:
    """Dense coefficient array C[j, k] of the gaussian_poly polynomial."""
    max_j = max(t.j for t in field.terms)
    max_k = max(t.k for t in field.terms)
    coeffs = np.zeros((max_j + 1, max_k + 1), dtype=np.complex128)
    for term in field.terms:
        coeffs[term.j, term.k] += complex(term.re, term.im)
    return coeffs


def _base_coordinates(field: AnalyticField, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = x - field.offset[0]
    v = y - field.offset[1]
    if field.rotation != 0.0:
        c, s = math.cos(field.rotation), math.sin(field.rotation)
        u, v = c * u + s * v, -s * u + c * v
    return u, v


def evaluate_field(field: AnalyticField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Evaluate a field at points (x, y).

    Args:
        field: Field description
        x: x coordinates (any shape)
        y: y coordinates (same shape as x)

    Returns:
        Complex array of shape ``x.shape + (field.channels,)``
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u, v = _base_coordinates(field, x, y)

    if field.kind == "constant":
        base = np.full(u.shape, complex(*field.value), dtype=np.complex128)
    elif field.kind == "coordinate_monomial":
        z = u + 1j * v
        base = z ** field.a * np.conj(z) ** field.b
    else:
        zeta = ((u - field.center[0]) + 1j * (v - field.center[1])) / field.width
        base = P.polyval2d(zeta, np.conj(zeta), poly_coefficients(field))
        base = base * np.exp(-0.5 * (zeta * np.conj(zeta)).real)

    scales = np.ones(field.channels) if field.channel_scales is None else np.asarray(field.channel_scales)
    return base[..., None] * scales


def rotate_field(field: AnalyticField, angle: float) -> AnalyticField:
    """Rotate a field counter-clockwise about the origin."""
    c, s = math.cos(angle), math.sin(angle)
    ox, oy = field.offset
    return field.model_copy(update={
        "rotation": field.rotation + angle,
        "offset": (c * ox - s * oy, s * ox + c * oy),
    })


def shift_field(field: AnalyticField, shift: Tuple[float, float]) -> AnalyticField:
    """Translate a field: the result at x equals the input at x − shift."""
    return field.model_copy(update={
        "offset": (field.offset[0] + shift[0], field.offset[1] + shift[1]),
    })
