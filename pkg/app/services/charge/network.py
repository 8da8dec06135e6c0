"""Smoothing, differentiation and multiplication stages of the charge-conserving convnet."""
import math
from typing import Dict, Optional

import numpy as np

from app.core.errors import GridError, SpecError
from app.core.logging import logger
from app.schemas.charge import ChargeConvNetSpec, ChargedStack, MultWeights
from app.schemas.grid import AnalyticField, GridSpec, Signal, chain_length
from app.services.grid.signal_ops import discretize_to, make_signal
from app.services.operators.stencils import derivative_array, smooth_array


def multinomial(t_diff: int, a: int, b: int) -> int:
    """c_{a,b} = T_diff! / (a! b! (T_diff − a − b)!)."""
    if a < 0 or b < 0 or a + b > t_diff:
        return 0
    return math.factorial(t_diff) // (math.factorial(a) * math.factorial(b) * math.factorial(t_diff - a - b))


def diff_labels(t_diff: int):
    """All (s, μ) with |μ| ≤ s ≤ T_diff, s-major, μ ascending."""
    return [(s, mu) for s in range(t_diff + 1) for mu in range(-s, s + 1)]


def label_orders(s: int, mu: int) -> Optional[tuple]:
    """(a, b) with a + b = s and a − b = μ, or None when s − μ is odd."""
    if (s - mu) % 2:
        return None
    return (s + mu) // 2, (s - mu) // 2


def charge_phase(mu: int, phi: float) -> complex:
    """e^{−iμφ}, exact when φ is a multiple of π/2."""
    q = round(phi / (math.pi / 2))
    if abs(phi - q * math.pi / 2) <= 1e-12:
        return (1 + 0j, -1j, -1 + 0j, 1j)[(mu * q) % 4]
    return complex(np.exp(-1j * mu * phi))


def diff_stage(s0: Signal, t_diff: int) -> ChargedStack:
    """
    Charge-labelled derivatives c_{a,b}(∂_z)^a(∂_z̄)^b s0 for a + b ≤ T_diff.

    Entry (s, μ) uses a = (s+μ)/2, b = (s−μ)/2; entries with s − μ odd are
    zero. Every entry lives on the grid shrunk by T_diff.

    Args:
        s0: Input signal, lifted to complex
        t_diff: Number of differentiation layers

    Returns:
        Diff-stage ChargedStack

    Raises:
        GridError: If the grid is smaller than T_diff
    """
    if s0.half_width < t_diff:
        raise GridError(f"diff stage needs half-width >= {t_diff}, got {s0.half_width}")
    values = np.asarray(s0.values, dtype=np.complex128)
    out_grid = GridSpec(spacing=s0.spacing, half_width=s0.half_width - t_diff)
    side = out_grid.side
    entries = {}
    for s, mu in diff_labels(t_diff):
        orders = label_orders(s, mu)
        if orders is None:
            block = np.zeros((side, side, s0.channels), dtype=np.complex128)
        else:
            a, b = orders
            block = derivative_array(values, s0.spacing, a, b)
            trim = t_diff - s
            if trim:
                block = block[trim:-trim, trim:-trim]
            block = multinomial(t_diff, a, b) * block
        entries[(s, mu)] = Signal(grid=out_grid, channels=s0.channels, field="complex", values=block)
    return ChargedStack(stage="diff", max_charge=t_diff, entries=entries)


def stack_arrays(stack: ChargedStack) -> Dict[int, np.ndarray]:
    """Per-charge channel arrays; diff entries are concatenated s-major."""
    if stack.stage != "diff":
        return {label[0]: sig.values for label, sig in stack.entries.items()}
    arrays = {}
    for mu in range(-stack.max_charge, stack.max_charge + 1):
        blocks = [stack.entries[(s, mu)].values for s in range(abs(mu), stack.max_charge + 1)]
        arrays[mu] = np.concatenate(blocks, axis=-1)
    return arrays


def mult_arrays(arrays: Dict[int, np.ndarray], w: MultWeights, final: bool) -> Dict[int, np.ndarray]:
    """
    Apply one multiplication layer pointwise to per-charge arrays of shape (..., c).

    Non-final layers return every charge |μ| ≤ T_diff; the final layer returns
    {0: real part}.
    """
    charges = [0] if final else w.charges()
    shape = next(iter(arrays.values())).shape[:-1]
    out = {}
    for mu in charges:
        acc = np.zeros(shape + (w.d_out,), dtype=np.complex128)
        if mu == 0:
            acc = acc + w.constant
        if mu in w.linear and mu in arrays:
            acc = acc + np.einsum("...k,nk->...n", arrays[mu], w.linear[mu])
        for c in w.couplings:
            if c.mu != mu or c.mu1 not in arrays or c.mu2 not in arrays:
                continue
            acc = acc + np.einsum("...i,...j,nij->...n", arrays[c.mu1], arrays[c.mu2], c.weights)
        out[mu] = acc
    if final:
        return {0: out[0].real}
    return out


def mult_layer(stack: ChargedStack, w: MultWeights, final: bool = False) -> ChargedStack:
    """
    One charge-conserving multiplication layer.

    Raises:
        SpecError: If the stack carries charges beyond the weights' range
    """
    if stack.max_charge > w.max_charge:
        raise SpecError(f"stack charges up to {stack.max_charge} exceed layer range {w.max_charge}")
    grid = stack.grid
    out = mult_arrays(stack_arrays(stack), w, final)
    if final:
        sig = Signal(grid=grid, channels=w.d_out, field="real", values=out[0])
        return ChargedStack(stage="final", max_charge=w.max_charge, entries={(0,): sig})
    entries = {
        (mu,): Signal(grid=grid, channels=w.d_out, field="complex", values=values)
        for mu, values in out.items()
    }
    return ChargedStack(stage="mult", max_charge=w.max_charge, entries=entries)


def mult_stage(stack: ChargedStack, spec: ChargeConvNetSpec) -> ChargedStack:
    for t, layer in enumerate(spec.layers):
        stack = mult_layer(stack, layer, final=t == spec.t_mult - 1)
    return stack


def smoothed_diff_stack(spec: ChargeConvNetSpec, s: Signal) -> ChargedStack:
    """
    Smoothing chain followed by the diff stage, on the full input grid.

    Raises:
        GridError: If spacing, half-width or channel count disagree with the spec
    """
    if abs(s.spacing - spec.spacing) > 1e-12 * spec.spacing:
        raise GridError(f"signal spacing {s.spacing} does not match spec spacing {spec.spacing}")
    if s.half_width != spec.input_half_width:
        raise GridError(f"input half-width {s.half_width} != required {spec.input_half_width}")
    if s.channels != spec.input_channels:
        raise GridError(f"input has {s.channels} channels, spec expects d_V={spec.input_channels}")
    smoothed = smooth_array(np.asarray(s.values, dtype=np.complex128), spec.spacing, chain_length(spec.spacing))
    return diff_stage(make_signal(smoothed, spec.spacing, "complex"), spec.t_diff)


def forward_signal(spec: ChargeConvNetSpec, s: Signal) -> Signal:
    """Run the network on an input already discretized on the full input grid."""
    stack = mult_stage(smoothed_diff_stack(spec, s), spec)
    return stack.entries[(0,)]


def forward(spec: ChargeConvNetSpec, f: AnalyticField, order: Optional[int] = None) -> Signal:
    """
    Discretize ``f`` on λZ with extent Λ′ and run smoothing, diff and mult stages.

    Returns:
        Real d_U-channel Signal on half-width ⌊Λ/λ⌋
    """
    if f.channels != spec.input_channels:
        raise SpecError(f"field has {f.channels} channels, spec expects d_V={spec.input_channels}")
    logger.debug(
        f"Charge: forward λ={spec.spacing} input half-width {spec.input_half_width} "
        f"(smoothing {chain_length(spec.spacing)}, T_diff {spec.t_diff})"
    )
    return forward_signal(spec, discretize_to(f, spec.spacing, spec.input_half_width, order))
