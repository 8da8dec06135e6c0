"""Five-point stencils on centered grids.

Every stencil shrinks the grid half-width by exactly one; there is no padding.
"""
import numpy as np

from app.core.errors import GridError
from app.core.logging import logger
from app.schemas.grid import GridSpec, Signal, chain_length
from app.schemas.kernels import StencilKind

STENCIL_KINDS = ("dz", "dzbar", "laplace", "smooth")


def apply_stencil_array(kind: str, values: np.ndarray, spacing: float) -> np.ndarray:
    """
    Apply one stencil to a raw (2L+1, 2L+1, d) array.

    Returns an array of shape (2L−1, 2L−1, d).
    """
    centre = values[1:-1, 1:-1]
    xp, xm = values[2:, 1:-1], values[:-2, 1:-1]
    yp, ym = values[1:-1, 2:], values[1:-1, :-2]
    if kind == "dz":
        return ((xp - xm) - 1j * (yp - ym)) * (1.0 / (4.0 * spacing))
    if kind == "dzbar":
        return ((xp - xm) + 1j * (yp - ym)) * (1.0 / (4.0 * spacing))
    if kind == "laplace":
        return ((xp + xm) + (yp + ym) - 4.0 * centre) * (1.0 / spacing ** 2)
    if kind == "smooth":
        return 0.5 * centre + 0.125 * ((xp + xm) + (yp + ym))
    raise ValueError(f"Unknown stencil kind: {kind!r}; expected one of {STENCIL_KINDS}")


def _wrap(values: np.ndarray, grid: GridSpec, field: str) -> Signal:
    return Signal(grid=grid, channels=values.shape[2], field=field, values=values)


def _require_half_width(s: Signal, needed: int, what: str) -> None:
    if s.half_width < needed:
        raise GridError(
            f"{what} needs half-width >= {needed}, got {s.half_width} (λ={s.spacing})"
        )


def stencil_apply(kind: StencilKind, s: Signal) -> Signal:
    """
    Apply a five-point stencil.

    Args:
        kind: "dz", "dzbar", "laplace" or "smooth" (1 + λ²/8 Δ)
        s: Input signal with half-width ≥ 1

    Returns:
        Signal on the grid shrunk by one; complex for dz and dzbar

    Raises:
        GridError: If the grid is too small
    """
    _require_half_width(s, 1, f"stencil {kind}")
    out = apply_stencil_array(kind, s.values, s.spacing)
    field = "complex" if kind in ("dz", "dzbar") else s.field
    return _wrap(out, s.grid.shrink(1), field)


def smooth_array(values: np.ndarray, spacing: float, steps: int) -> np.ndarray:
    for _ in range(steps):
        values = apply_stencil_array("smooth", values, spacing)
    return values


def smooth_chain(s: Signal) -> Signal:
    """
    Apply the smoothing stencil ⌈4/λ²⌉ times.

    Raises:
        GridError: If the grid is smaller than the chain length
    """
    steps = chain_length(s.spacing)
    _require_half_width(s, steps, "smoothing chain")
    logger.debug(f"Stencils: smoothing chain of {steps} steps on half-width {s.half_width}")
    out = smooth_array(s.values, s.spacing, steps)
    return _wrap(out, s.grid.shrink(steps), s.field)


def derivative_array(values: np.ndarray, spacing: float, a: int, b: int) -> np.ndarray:
    """(∂_z)^a (∂_z̄)^b on a raw array; ∂_z̄ steps are applied first."""
    for _ in range(b):
        values = apply_stencil_array("dzbar", values, spacing)
    for _ in range(a):
        values = apply_stencil_array("dz", values, spacing)
    return values


def discrete_deriv_chain(s: Signal, a: int, b: int) -> Signal:
    """
    Composed operator (∂_z)^a (∂_z̄)^b (1 + λ²/8 Δ)^{⌈4/λ²⌉} on an already
    discretized signal.

    Args:
        s: Discretized input
        a: Number of ∂_z applications
        b: Number of ∂_z̄ applications

    Returns:
        Signal shrunk by ⌈4/λ²⌉ + a + b

    Raises:
        GridError: If the grid is too small
    """
    if a < 0 or b < 0:
        raise ValueError(f"derivative orders must be nonnegative, got a={a}, b={b}")
    steps = chain_length(s.spacing)
    _require_half_width(s, steps + a + b, f"derivative chain ({a},{b})")
    out = smooth_array(s.values, s.spacing, steps)
    out = derivative_array(out, s.spacing, a, b)
    field = "complex" if a + b > 0 else s.field
    return _wrap(out, s.grid.shrink(steps + a + b), field)
