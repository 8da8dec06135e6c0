"""Discrete Fourier transform F_λ, stencil symbols and discrete kernels.

Conventions: F_λΦ(p) = (λ²/2π) Σ_γ Φ(γ) e^{−ip·γ}, sampled on the grid
p_j = 2πj/((2L+1)λ), |j| ≤ L. The inverse carries the frequency-cell weight
Δp² and the factor 1/2π, so that both directions are unitary.
"""
import math
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import integrate

from app.core.errors import TruncationError
from app.core.logging import logger
from app.schemas.grid import GridSpec, Signal
from app.schemas.kernels import SpectralSymbol, Spectrum
from app.services.grid.signal_ops import cell_average, delta
from app.services.loader import load_numerics
from app.services.operators.kernels import evaluate_poly_gaussian, gaussian_deriv_kernel
from app.services.operators.stencils import apply_stencil_array, chain_length, stencil_apply


@lru_cache(maxsize=32)
def _dft_matrix(half_width: int) -> np.ndarray:
    idx = np.arange(-half_width, half_width + 1)
    n = 2 * half_width + 1
    matrix = np.exp(-2j * np.pi * np.outer(idx, idx) / n)
    matrix.setflags(write=False)
    return matrix


def dft2(s: Signal) -> Spectrum:
    """
    Forward transform F_λ of every channel.

    Args:
        s: Signal on a (2L+1)² grid

    Returns:
        Spectrum with the same node count
    """
    E = _dft_matrix(s.half_width)
    channels_first = np.moveaxis(s.values, 2, 0)
    transformed = E @ channels_first @ E.T
    values = (s.spacing ** 2 / (2.0 * math.pi)) * np.moveaxis(transformed, 0, 2)
    return Spectrum(spacing=s.spacing, half_width=s.half_width, channels=s.channels, values=values)


def idft2(spectrum: Spectrum) -> Signal:
    """Inverse transform F_λ^{-1}; always returns a complex Signal."""
    E_inv = np.conj(_dft_matrix(spectrum.half_width))
    channels_first = np.moveaxis(spectrum.values, 2, 0)
    transformed = E_inv @ channels_first @ E_inv.T
    values = (spectrum.frequency_step ** 2 / (2.0 * math.pi)) * np.moveaxis(transformed, 0, 2)
    grid = GridSpec(spacing=spectrum.spacing, half_width=spectrum.half_width)
    return Signal(grid=grid, channels=spectrum.channels, field="complex", values=values)


def spectrum_norm(spectrum: Spectrum) -> float:
    """sqrt(Δp² Σ|F|²), the frequency-cell-weighted norm."""
    return math.sqrt(spectrum.frequency_step ** 2 * float(np.sum(np.abs(spectrum.values) ** 2)))


def evaluate_symbol(symbol: SpectralSymbol, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Vectorized closed-form symbol; no domain check."""
    lam = symbol.spacing
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    sx, sy = np.sin(lam * px), np.sin(lam * py)
    dz = (1j / (2.0 * lam)) * (sx - 1j * sy)
    dzbar = (1j / (2.0 * lam)) * (sx + 1j * sy)
    laplace = -(4.0 / lam ** 2) * (np.sin(lam * px / 2.0) ** 2 + np.sin(lam * py / 2.0) ** 2)
    smooth = 1.0 + (lam ** 2 / 8.0) * laplace
    if symbol.kind == "dz":
        return dz
    if symbol.kind == "dzbar":
        return dzbar
    if symbol.kind == "laplace":
        return laplace.astype(np.complex128)
    if symbol.kind == "smooth":
        return smooth.astype(np.complex128)
    return dz ** symbol.a * dzbar ** symbol.b * smooth ** chain_length(lam)


def fourier_symbol(kind: Union[str, SpectralSymbol], p: Tuple[float, float],
                   spacing: Optional[float] = None) -> complex:
    """
    Closed-form Fourier symbol at one frequency point.

    Args:
        kind: Stencil name or a SpectralSymbol (use kind="chain" for the
            composed operator with orders a, b)
        p: Frequency (p_x, p_y) inside [−π/λ, π/λ]²
        spacing: λ, required when ``kind`` is a string

    Returns:
        Symbol value

    Raises:
        ValueError: If p lies outside the fundamental domain
    """
    if isinstance(kind, SpectralSymbol):
        symbol = kind
    else:
        if spacing is None:
            raise ValueError("spacing is required when the symbol is given by name")
        symbol = SpectralSymbol(kind=kind, spacing=spacing)
    bound = math.pi / symbol.spacing * (1.0 + 1e-12)
    if abs(p[0]) > bound or abs(p[1]) > bound:
        raise ValueError(f"frequency {tuple(p)} outside the fundamental domain [−π/λ, π/λ]²")
    return complex(evaluate_symbol(symbol, np.array(p[0]), np.array(p[1])))


def stencil_symbol_error(kind: str, spacing: float, half_width: int) -> float:
    """
    Max deviation between the closed-form symbol and the transformed delta response.

    The stencil maps a delta on λZ_L to a signal on λZ_{L-1}; its F_λ times
    2π/λ² must equal the symbol at every frequency of the shrunk grid.
    """
    response = dft2(stencil_apply(kind, delta(spacing, half_width)))
    P1, P2 = np.meshgrid(response.frequencies(), response.frequencies(), indexing="ij")
    expected = evaluate_symbol(SpectralSymbol(kind=kind, spacing=spacing), P1, P2)
    scaled = (2.0 * math.pi / spacing ** 2) * response.values[..., 0]
    return float(np.max(np.abs(scaled - expected)))


def _delta_response(a: int, b: int, spacing: float) -> np.ndarray:
    """
    Exact response of the composed operator to a unit node value at the origin.

    The grid keeps the full support radius ⌈4/λ²⌉ + a + b; each step pads by
    one ring before applying the stencil, which is exact because the support
    grows by at most one node per step.
    """
    steps = chain_length(spacing)
    radius = steps + a + b
    side = 2 * radius + 1
    values = np.zeros((side, side, 1), dtype=np.complex128)
    values[radius, radius, 0] = 1.0
    kinds = ["smooth"] * steps + ["dz"] * a + ["dzbar"] * b
    for kind in kinds:
        values = apply_stencil_array(kind, np.pad(values, ((1, 1), (1, 1), (0, 0))), spacing)
    return values


@lru_cache(maxsize=64)
def spatial_kernel(a: int, b: int, spacing: float) -> Signal:
    """Discrete kernel computed in space: the delta response divided by λ²."""
    values = _delta_response(a, b, spacing) / spacing ** 2
    return Signal(grid=GridSpec(spacing=spacing, half_width=(values.shape[0] - 1) // 2),
                  channels=1, field="complex", values=values)


def _outside_mass(kernel: Signal, half_width: int) -> float:
    R = kernel.half_width
    if half_width >= R:
        return 0.0
    m = R - half_width
    mask = np.ones(kernel.values.shape[:2], dtype=bool)
    mask[m:kernel.grid.side - m, m:kernel.grid.side - m] = False
    return kernel.spacing ** 2 * float(np.sum(np.abs(kernel.values[mask])))


def discrete_kernel(a: int, b: int, spacing: float, half_width: int) -> Signal:
    """
    Kernel Ψ^(λ)_{a,b} = (1/2π) F_λ^{-1} of the composed symbol.

    Args:
        a: Order of ∂_z
        b: Order of ∂_z̄
        spacing: λ
        half_width: L of the kernel grid

    Returns:
        Complex Signal with one channel (real for a = b = 0)

    Raises:
        TruncationError: If kernel mass outside the grid exceeds the tolerance
    """
    tolerance = load_numerics().kernel_tail_tolerance
    outside = _outside_mass(spatial_kernel(a, b, spacing), half_width)
    if outside > tolerance:
        logger.error(f"Spectral: kernel ({a},{b}) at λ={spacing} leaks mass {outside:.3e} outside L={half_width}")
        raise TruncationError(
            f"kernel ({a},{b}) at λ={spacing} has mass {outside:.3e} outside half-width {half_width}; "
            f"use a larger L (tolerance {tolerance:g})"
        )
    symbol = SpectralSymbol(kind="chain", spacing=spacing, a=a, b=b)
    spec_grid = Spectrum(spacing=spacing, half_width=half_width, channels=1,
                         values=np.zeros((2 * half_width + 1,) * 2 + (1,), dtype=np.complex128))
    P1, P2 = np.meshgrid(spec_grid.frequencies(), spec_grid.frequencies(), indexing="ij")
    sampled = evaluate_symbol(symbol, P1, P2)[..., None]
    kernel = idft2(spec_grid.model_copy(update={"values": sampled}))
    values = kernel.values / (2.0 * math.pi)
    if a == 0 and b == 0:
        return Signal(grid=kernel.grid, channels=1, field="real", values=values.real)
    return Signal(grid=kernel.grid, channels=1, field="complex", values=values)


def kernel_half_width(spacing: float) -> int:
    """Kernel grid half-width covering the configured physical radius."""
    return int(math.ceil(load_numerics().kernel_radius / spacing - 1e-9))


KERNEL_GAP_COLUMNS = ("a", "b", "lambda", "gap", "kernel_l2", "grid_half_width")


class KernelGapRow(BaseModel):
    """One row of a kernel-gap sweep."""

    model_config = ConfigDict(frozen=True)

    a: int
    b: int
    spacing: float
    gap: float
    kernel_l2: float
    grid_half_width: int

    def csv_row(self) -> Dict[str, Any]:
        """Row keyed by KERNEL_GAP_COLUMNS, in that order."""
        return {"a": self.a, "b": self.b, "lambda": self.spacing, "gap": self.gap,
                "kernel_l2": self.kernel_l2, "grid_half_width": self.grid_half_width}


def kernel_gap_row(a: int, b: int, spacing: float) -> KernelGapRow:
    """
    L² distance between Ψ^(λ)_{a,b} and the cell averages of Ψ_{a,b}.

    Raises:
        ValueError: If λ is outside (0, 1]
        TruncationError: Propagated from discrete_kernel
    """
    if not 0.0 < spacing <= 1.0:
        raise ValueError(f"kernel_gap needs λ in (0, 1], got {spacing}")
    half_width = kernel_half_width(spacing)
    kernel = discrete_kernel(a, b, spacing, half_width)
    continuum = gaussian_deriv_kernel(a, b)
    averaged = cell_average(lambda x, y: evaluate_poly_gaussian(continuum, x, y)[..., None], kernel.grid)
    weight = spacing ** 2
    gap = math.sqrt(weight * float(np.sum(np.abs(kernel.values - averaged) ** 2)))
    kernel_l2 = math.sqrt(weight * float(np.sum(np.abs(kernel.values) ** 2)))
    logger.info(f"Spectral: gap({a},{b}) at λ={spacing} = {gap:.6e} (L={half_width})")
    return KernelGapRow(a=a, b=b, spacing=spacing, gap=gap, kernel_l2=kernel_l2,
                        grid_half_width=half_width)


def kernel_gap(a: int, b: int, spacing: float) -> float:
    """Scalar gap ‖Ψ^(λ)_{a,b} − Ψ_{a,b}‖ on cells; see kernel_gap_row."""
    return kernel_gap_row(a, b, spacing).gap


@lru_cache(maxsize=32)
def kernel_norm_bound(a: int, b: int) -> float:
    """
    Uniform-in-λ bound on ‖Ψ^(λ)_{a,b}‖²:
    (1/4π²) ∫ ((|p_x|+|p_y|)/2)^{2(a+b)} e^{−(4/π²)|p|²} d²p.
    """
    order = 2 * (a + b)
    rate = 4.0 / math.pi ** 2

    def integrand(py: float, px: float) -> float:
        return ((px + py) / 2.0) ** order * math.exp(-rate * (px * px + py * py))

    quadrant, _ = integrate.dblquad(integrand, 0.0, np.inf, 0.0, np.inf)
    return 4.0 * quadrant / (4.0 * math.pi ** 2)
