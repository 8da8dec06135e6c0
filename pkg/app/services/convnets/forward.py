"""Forward evaluation of basic and downsampled convnets."""
import itertools
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import GridError, SpecError
from app.schemas.convnet import AffineLayer, BasicConvNetSpec, ConvLayer, DownsampledConvNetSpec
from app.schemas.grid import AnalyticField, Signal
from app.services.grid.signal_ops import discretize_to, make_signal, shift_deviation, translate
from app.services.invariant.activations import get_activation


def conv_layer_array(values: np.ndarray, layer: ConvLayer, receptive_field: int, stride: int,
                     out_half: int, activation: str) -> np.ndarray:
    """
    One nonlinear layer on a raw (2H+1, 2H+1, d_in) array.

    Output node γ (|γ|∞ ≤ out_half) reads input nodes sγ + θ, θ ∈ Z_{L_rf}.
    Accumulation order is fixed (θx, θy, k ascending), so equal input
    neighbourhoods give bit-identical outputs wherever they sit on the grid.
    """
    H = (values.shape[0] - 1) // 2
    L = receptive_field
    if H < stride * out_half + L:
        raise GridError(f"input half-width {H} cannot feed output half-width {out_half} (s={stride}, L_rf={L})")
    taps = 2 * L + 1
    W = layer.weights.reshape(layer.d_out, taps, taps, layer.d_in)
    count = 2 * out_half + 1
    reach = stride * (count - 1) + 1
    acc = np.zeros((count, count, layer.d_out))
    for ix, tx in enumerate(range(-L, L + 1)):
        x0 = H - stride * out_half + tx
        for iy, ty in enumerate(range(-L, L + 1)):
            y0 = H - stride * out_half + ty
            patch = values[x0:x0 + reach:stride, y0:y0 + reach:stride, :]
            for k in range(layer.d_in):
                acc = acc + patch[:, :, k, None] * W[:, ix, iy, k]
    return get_activation(activation)(acc + layer.bias)


def affine_array(values: np.ndarray, final: AffineLayer) -> np.ndarray:
    """Pointwise Σ_k w_nk Φ_k + h_n over the last axis, with a fixed accumulation order."""
    acc = np.zeros(values.shape[:-1] + (final.weights.shape[0],))
    for k in range(final.weights.shape[1]):
        acc = acc + values[..., k, None] * final.weights[:, k]
    return acc + final.bias


def _input_signal(spec, f: Union[AnalyticField, Signal], half_width: int,
                  order: Optional[int]) -> Signal:
    if isinstance(f, AnalyticField):
        if not f.is_real:
            raise SpecError("convnet inputs must be real fields")
        s = discretize_to(f, spec.spacing, half_width, order)
    else:
        s = f
    if s.field != "real":
        raise GridError("convnet inputs must be real signals")
    if abs(s.spacing - spec.spacing) > 1e-12 * spec.spacing:
        raise GridError(f"signal spacing {s.spacing} does not match spec spacing {spec.spacing}")
    if s.half_width != half_width:
        raise GridError(f"input half-width {s.half_width} != required {half_width}")
    if s.channels != spec.input_channels:
        raise GridError(f"input has {s.channels} channels, spec expects d_V={spec.input_channels}")
    return s


def basic_forward(spec: BasicConvNetSpec, f: Union[AnalyticField, Signal],
                  order: Optional[int] = None) -> Signal:
    """
    Evaluate a basic convnet.

    Args:
        spec: Network spec
        f: Continuum field (discretized onto λZ_{⌊Λ/λ⌋+(T−1)L_rf}) or a Signal
            already on that grid
        order: Quadrature order for discretization

    Returns:
        Real d_U-channel Signal on half-width ⌊Λ/λ⌋

    Raises:
        GridError: If the input signal does not match the spec geometry
    """
    schedule = spec.schedule()
    s = _input_signal(spec, f, schedule[0], order)
    values = s.values
    for t, layer in enumerate(spec.layers):
        values = conv_layer_array(values, layer, spec.receptive_field, 1, schedule[t + 1], spec.activation)
    return make_signal(affine_array(values, spec.final), spec.spacing, "real")


def strided_layer_maps(spec: DownsampledConvNetSpec, s: Signal) -> List[Signal]:
    """
    Intermediate feature maps of the strided layers on an input of any size.

    Layer t maps half-width H to ⌊(H − L_rf)/s⌋ and multiplies the spacing by s.

    Raises:
        GridError: If the input is too small to feed every layer
    """
    if s.channels != spec.input_channels:
        raise GridError(f"input has {s.channels} channels, spec expects d_V={spec.input_channels}")
    maps = []
    values, spacing = s.values, s.spacing
    for t, layer in enumerate(spec.layers):
        H = (values.shape[0] - 1) // 2
        out_half = (H - spec.receptive_field) // spec.stride
        if out_half < 0:
            raise GridError(f"layer {t + 1}: input half-width {H} is below L_rf={spec.receptive_field}")
        values = conv_layer_array(values, layer, spec.receptive_field, spec.stride, out_half, spec.activation)
        spacing *= spec.stride
        maps.append(make_signal(values, spacing, "real"))
    return maps


def downsampled_forward(spec: DownsampledConvNetSpec, f: Union[AnalyticField, Signal],
                        order: Optional[int] = None) -> np.ndarray:
    """
    Evaluate a convnet with downsampling at its single output node.

    Returns:
        Vector of length d_U
    """
    s = _input_signal(spec, f, spec.input_half_width, order)
    maps = strided_layer_maps(spec, s)
    values = maps[-1].values if maps else s.values
    if values.shape[:2] != (1, 1):
        raise GridError(f"expected a single surviving node, got grid of side {values.shape[0]}")
    return affine_array(values[0, 0], spec.final)


def strided_shift_deviation(spec: DownsampledConvNetSpec, s: Signal, shift: Tuple[int, int],
                            layer: int = 0, coarse_reach: int = 1) -> float:
    """
    How far a strided feature map is from commuting with an input shift.

    Compares layer ``layer`` maps of ``s`` and ``translate(s, shift)`` under every
    coarse shift k' with |k'|∞ ≤ coarse_reach and returns the smallest overlap
    deviation; 0 means some coarse shift reproduces the fine one exactly.
    """
    base = strided_layer_maps(spec, s)[layer]
    moved = strided_layer_maps(spec, translate(s, shift))[layer]
    offsets = range(-coarse_reach, coarse_reach + 1)
    return min(shift_deviation(moved, base, k) for k in itertools.product(offsets, offsets))


def _random_layers(rng: np.random.Generator, receptive_field: int, dims: Sequence[int]) -> Tuple[List[ConvLayer], AffineLayer]:
    taps = (2 * receptive_field + 1) ** 2
    layers = []
    for d_in, d_out in zip(dims[:-2], dims[1:-1]):
        fan_in = taps * d_in
        layers.append(ConvLayer(
            weights=rng.uniform(-1.0, 1.0, size=(d_out, taps, d_in)) / fan_in,
            bias=rng.uniform(-1.0, 1.0, size=d_out) / fan_in,
        ))
    d_last, d_out = dims[-2], dims[-1]
    final = AffineLayer(weights=rng.uniform(-1.0, 1.0, size=(d_out, d_last)) / d_last,
                        bias=rng.uniform(-1.0, 1.0, size=d_out) / d_last)
    return layers, final


def random_basic_spec(rng: np.random.Generator, spacing: float, extent: float, receptive_field: int,
                      dims: Sequence[int], activation: str = "tanh") -> BasicConvNetSpec:
    """Weights uniform on [−1, 1] divided by the fan-in; ``dims`` is d_1..d_{T+1}."""
    layers, final = _random_layers(rng, receptive_field, dims)
    return BasicConvNetSpec(spacing=spacing, extent=extent, receptive_field=receptive_field,
                            input_channels=dims[0], layers=layers, final=final, activation=activation)


def random_downsampled_spec(rng: np.random.Generator, spacing: float, receptive_field: int, stride: int,
                            dims: Sequence[int], activation: str = "tanh") -> DownsampledConvNetSpec:
    layers, final = _random_layers(rng, receptive_field, dims)
    return DownsampledConvNetSpec(spacing=spacing, receptive_field=receptive_field, stride=stride,
                                  input_channels=dims[0], layers=layers, final=final, activation=activation)
