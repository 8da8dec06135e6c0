"""Signal construction, exact grid symmetries and norms."""
import math
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from app.core.errors import GridError
from app.schemas.grid import AnalyticField, GridSpec, Signal
from app.services.grid.fields import evaluate_field
from app.services.loader import load_numerics


def make_signal(values: np.ndarray, spacing: float, field: Optional[str] = None) -> Signal:
    """
    Wrap an array as a Signal.

    Args:
        values: Array of shape (2L+1, 2L+1) or (2L+1, 2L+1, d)
        spacing: Grid spacing λ
        field: "real" or "complex"; inferred from the dtype when omitted

    Returns:
        Signal on the matching centered grid
    """
    values = np.asarray(values)
    if values.ndim == 2:
        values = values[..., None]
    if values.ndim != 3 or values.shape[0] != values.shape[1] or values.shape[0] % 2 == 0:
        raise GridError(f"values must be (2L+1, 2L+1[, d]), got shape {values.shape}")
    if field is None:
        field = "complex" if np.iscomplexobj(values) else "real"
    grid = GridSpec(spacing=spacing, half_width=(values.shape[0] - 1) // 2)
    return Signal(grid=grid, channels=values.shape[2], field=field, values=values)


def delta(spacing: float, half_width: int, node: Tuple[int, int] = (0, 0), channels: int = 1) -> Signal:
    """Signal equal to 1 at one node (all channels) and 0 elsewhere."""
    if max(abs(node[0]), abs(node[1])) > half_width:
        raise GridError(f"node {node} lies outside a grid of half-width {half_width}")
    side = 2 * half_width + 1
    values = np.zeros((side, side, channels))
    values[node[0] + half_width, node[1] + half_width, :] = 1.0
    return make_signal(values, spacing)


def node_coordinates(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Meshgrid (x, y) of node positions, indexed [i, j]."""
    axis = grid.axis()
    return np.meshgrid(axis, axis, indexing="ij")


def value_at(s: Signal, node: Tuple[int, int]) -> np.ndarray:
    """Channel vector at integer node ``node``."""
    L = s.half_width
    if max(abs(node[0]), abs(node[1])) > L:
        raise GridError(f"node {node} lies outside a grid of half-width {L}")
    return s.values[node[0] + L, node[1] + L, :]


def conjugate(s: Signal) -> Signal:
    return Signal(grid=s.grid, channels=s.channels, field=s.field, values=np.conj(s.values))


def crop(s: Signal, half_width: int) -> Signal:
    """Restrict a signal to the centered sub-grid Z_half_width."""
    L = s.half_width
    if half_width > L or half_width < 0:
        raise GridError(f"cannot crop half-width {L} to {half_width}")
    m = L - half_width
    values = s.values[m:s.grid.side - m, m:s.grid.side - m, :]
    return Signal(grid=GridSpec(spacing=s.spacing, half_width=half_width),
                  channels=s.channels, field=s.field, values=values)


def pad(s: Signal, half_width: int) -> Signal:
    """Embed a signal into a larger centered grid, filling new nodes with 0."""
    L = s.half_width
    if half_width < L:
        raise GridError(f"cannot pad half-width {L} to {half_width}")
    m = half_width - L
    values = np.pad(s.values, ((m, m), (m, m), (0, 0)))
    return Signal(grid=GridSpec(spacing=s.spacing, half_width=half_width),
                  channels=s.channels, field=s.field, values=values)


def _check_same_grid(s: Signal, t: Signal) -> None:
    if s.grid != t.grid:
        raise GridError(f"grid mismatch: {s.grid} vs {t.grid}")
    if s.channels != t.channels:
        raise GridError(f"channel mismatch: {s.channels} vs {t.channels}")


def translate(s: Signal, k: Tuple[int, int]) -> Signal:
    """
    Shift a signal by integer node offset ``k``.

    The value at node m becomes the input value at m − k; nodes whose source
    falls outside the grid are set to 0.
    """
    kx, ky = int(k[0]), int(k[1])
    side = s.grid.side
    out = np.zeros_like(s.values)
    if abs(kx) < side and abs(ky) < side:
        dst_x = slice(max(kx, 0), side + min(kx, 0))
        src_x = slice(max(-kx, 0), side + min(-kx, 0))
        dst_y = slice(max(ky, 0), side + min(ky, 0))
        src_y = slice(max(-ky, 0), side + min(-ky, 0))
        out[dst_x, dst_y, :] = s.values[src_x, src_y, :]
    return Signal(grid=s.grid, channels=s.channels, field=s.field, values=out)


def shift_deviation(shifted: Signal, base: Signal, k: Tuple[int, int]) -> float:
    """
    Max |shifted(m) − base(m − k)| over nodes m where both sides lie on the grid.

    Returns 0.0 when the overlap is empty.
    """
    _check_same_grid(shifted, base)
    kx, ky = int(k[0]), int(k[1])
    side = base.grid.side
    if abs(kx) >= side or abs(ky) >= side:
        return 0.0
    dst = (slice(max(kx, 0), side + min(kx, 0)), slice(max(ky, 0), side + min(ky, 0)))
    src = (slice(max(-kx, 0), side + min(-kx, 0)), slice(max(-ky, 0), side + min(-ky, 0)))
    diff = np.abs(shifted.values[dst] - base.values[src])
    return float(np.max(diff)) if diff.size else 0.0


def rotate_quarter(s: Signal, q: int) -> Signal:
    """
    Rotate a signal by q quarter turns counter-clockwise.

    Node k receives the input value at ρ^{-q}k, with ρ the 90° rotation of Z².
    """
    values = np.rot90(s.values, k=q % 4, axes=(0, 1))
    return Signal(grid=s.grid, channels=s.channels, field=s.field, values=values)


def norms(s: Signal, t: Optional[Signal] = None) -> Tuple[float, float, complex]:
    """
    Grid norms of ``s`` and the inner product ⟨s, t⟩.

    Args:
        s: First signal
        t: Second signal on the same grid; defaults to ``s``

    Returns:
        (l2, linf, inner) with l2 = sqrt(λ² Σ|s|²) and
        inner = λ² Σ conj(s)·t

    Raises:
        GridError: If grids or channel counts differ
    """
    if t is None:
        t = s
    _check_same_grid(s, t)
    weight = s.spacing ** 2
    l2 = math.sqrt(weight * float(np.sum(np.abs(s.values) ** 2)))
    linf = float(np.max(np.abs(s.values))) if s.values.size else 0.0
    inner = complex(weight * np.sum(np.conj(s.values) * t.values))
    return l2, linf, inner


@lru_cache(maxsize=8)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights / 2.0


def cell_average(func: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: GridSpec,
                 order: Optional[int] = None) -> np.ndarray:
    """
    Tensor Gauss-Legendre cell averages of ``func`` over the cells of ``grid``.

    ``func`` maps coordinate arrays (x, y) to values of shape ``x.shape + (d,)``.
    Returns an array of shape (2L+1, 2L+1, d).
    """
    order = order or load_numerics().quadrature_order
    nodes, weights = _gauss_legendre(order)
    half = grid.spacing / 2.0
    X, Y = node_coordinates(grid)
    total = None
    for u, wu in zip(nodes, weights):
        for v, wv in zip(nodes, weights):
            term = (wu * wv) * func(X + half * u, Y + half * v)
            total = term if total is None else total + term
    return total


def discretize_to(field: AnalyticField, spacing: float, half_width: int,
                  order: Optional[int] = None) -> Signal:
    """Cell-average ``field`` onto the grid of the given half-width."""
    grid = GridSpec(spacing=spacing, half_width=half_width)
    values = cell_average(lambda x, y: evaluate_field(field, x, y), grid, order)
    if field.is_real:
        return Signal(grid=grid, channels=field.channels, field="real", values=values.real)
    return Signal(grid=grid, channels=field.channels, field="complex", values=values)


def grid_half_width(spacing: float, extent: float) -> int:
    """⌊extent/λ⌋, tolerant of representation error in the ratio."""
    if spacing <= 0:
        raise GridError(f"spacing must be positive, got {spacing}")
    if extent < 0:
        raise GridError(f"extent must be nonnegative, got {extent}")
    return int(math.floor(extent / spacing + 1e-9))


def discretize(field: AnalyticField, spacing: float, extent: float, order: Optional[int] = None) -> Signal:
    """
    Project a continuum field onto the grid of half-width ⌊Λ/λ⌋.

    Each value approximates the cell average over the square of side λ centred
    on the node, using tensor Gauss-Legendre quadrature (3×3 by default).

    Args:
        field: Continuum input
        spacing: λ > 0
        extent: Λ ≥ 0
        order: Quadrature points per axis; defaults to the configured order

    Returns:
        Discretized Signal
    """
    return discretize_to(field, spacing, grid_half_width(spacing, extent), order)


def sample(field: AnalyticField, spacing: float, half_width: int) -> Signal:
    """Point values of ``field`` at the grid nodes."""
    grid = GridSpec(spacing=spacing, half_width=half_width)
    X, Y = node_coordinates(grid)
    values = evaluate_field(field, X, Y)
    if field.is_real:
        return Signal(grid=grid, channels=field.channels, field="real", values=values.real)
    return Signal(grid=grid, channels=field.channels, field="complex", values=values)
