"""Random specs, random stacks, deliberate constraint violations and final-layer fitting."""
from typing import Dict, List, Sequence

import numpy as np

from app.core.logging import logger
from app.schemas.charge import ChargeConvNetSpec, ChargedStack, Coupling, MultWeights
from app.schemas.grid import Signal
from app.services.charge.network import diff_stage, mult_arrays, smoothed_diff_stack, stack_arrays
from app.services.grid.signal_ops import make_signal
from app.services.invariant.fitting import fit_ridge


def _complex_uniform(rng: np.random.Generator, size) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=size) + 1j * rng.uniform(-1.0, 1.0, size=size)


def random_mult_weights(rng: np.random.Generator, max_charge: int, widths: Dict[int, int], d_out: int,
                        final: bool = False, scale: float = 1.0) -> MultWeights:
    """
    Dense random layer respecting μ1 + μ2 = μ.

    Linear blocks are divided by their fan-in c_in(μ), quadratic blocks by c1·c2.
    """
    T = max_charge
    targets = [0] if final else list(range(-T, T + 1))
    linear = {mu: scale * _complex_uniform(rng, (d_out, widths[mu])) / widths[mu] for mu in targets}
    couplings = []
    for mu in targets:
        for mu1 in range(-T, T + 1):
            mu2 = mu - mu1
            if abs(mu2) > T:
                continue
            c1, c2 = widths[mu1], widths[mu2]
            couplings.append(Coupling(mu=mu, mu1=mu1, mu2=mu2,
                                      weights=scale * _complex_uniform(rng, (d_out, c1, c2)) / (c1 * c2)))
    constant = scale * _complex_uniform(rng, d_out)
    return MultWeights(max_charge=T, constant=constant, linear=linear, couplings=couplings)


def random_charge_spec(rng: np.random.Generator, spacing: float, extent: float, t_diff: int, t_mult: int,
                       d_mult: int, input_channels: int = 1, output_channels: int = 1,
                       scale: float = 1.0) -> ChargeConvNetSpec:
    """Random complex weights, uniform on [−1, 1] + i[−1, 1] scaled by fan-in."""
    layers: List[MultWeights] = []
    widths = {mu: input_channels * (t_diff - abs(mu) + 1) for mu in range(-t_diff, t_diff + 1)}
    for t in range(t_mult):
        final = t == t_mult - 1
        d_out = output_channels if final else d_mult
        layers.append(random_mult_weights(rng, t_diff, widths, d_out, final, scale))
        widths = {mu: d_mult for mu in widths}
    return ChargeConvNetSpec(spacing=spacing, extent=extent, t_diff=t_diff, d_mult=d_mult,
                             input_channels=input_channels, output_channels=output_channels, layers=layers)


def random_stack(rng: np.random.Generator, spec: ChargeConvNetSpec, layer: int, half_width: int) -> ChargedStack:
    """
    A stack shaped like the input of ``spec.layers[layer]``.

    Layer 0 gets a diff stage of a random complex signal; later layers get
    random mult-stage entries.
    """
    T = spec.t_diff
    side = 2 * half_width + 1
    if layer == 0:
        shape = (side + 2 * T, side + 2 * T, spec.input_channels)
        return diff_stage(make_signal(_complex_uniform(rng, shape), spec.spacing, "complex"), T)
    entries = {
        (mu,): make_signal(_complex_uniform(rng, (side, side, spec.d_mult)), spec.spacing, "complex")
        for mu in range(-T, T + 1)
    }
    return ChargedStack(stage="mult", max_charge=T, entries=entries)


def break_conservation(w: MultWeights) -> MultWeights:
    """
    Copy of ``w`` with its first coupling relabelled to a wrong output charge.

    Built with ``model_construct`` so validation is bypassed; normal
    construction of the same weights raises.
    """
    if not w.couplings:
        raise ValueError("weights have no couplings to corrupt")
    first = w.couplings[0]
    wrong = first.mu + 1 if first.mu + 1 <= w.max_charge else first.mu - 1
    broken = Coupling.model_construct(mu=wrong, mu1=first.mu1, mu2=first.mu2, weights=first.weights)
    return MultWeights.model_construct(max_charge=w.max_charge, constant=w.constant, linear=dict(w.linear),
                                       couplings=[broken] + list(w.couplings[1:]))


def _prefinal_center(spec: ChargeConvNetSpec, s: Signal) -> Dict[int, np.ndarray]:
    arrays = stack_arrays(smoothed_diff_stack(spec, s))
    L = spec.output_half_width
    arrays = {mu: values[L, L] for mu, values in arrays.items()}
    for layer in spec.layers[:-1]:
        arrays = mult_arrays(arrays, layer, final=False)
    return arrays


def fit_final_layer(spec: ChargeConvNetSpec, inputs: Sequence[Signal], targets: Sequence[float],
                    reg: float = 1e-8) -> ChargeConvNetSpec:
    """
    Refit the final layer so the centre output matches scalar ``targets``.

    Earlier layers stay fixed. The final layer is linear in the real and
    imaginary parts of its weights, so this is a ridge regression.

    Raises:
        ValueError: If the spec has more than one output channel, or if
            there are no samples or the sample and target counts differ
    """
    if spec.output_channels != 1:
        raise ValueError("final-layer fitting supports d_U = 1")
    if not inputs:
        raise ValueError("final-layer fitting needs at least one sample")
    if len(inputs) != len(targets):
        raise ValueError(f"{len(inputs)} input(s) but {len(targets)} target(s)")
    T = spec.t_diff
    pairs = [(mu1, -mu1) for mu1 in range(-T, T + 1)]
    rows = []
    for s in inputs:
        phi = _prefinal_center(spec, s)
        feats = [np.ones(1), phi[0].real, -phi[0].imag]
        for mu1, mu2 in pairs:
            prod = np.outer(phi[mu1], phi[mu2]).reshape(-1)
            feats.extend([prod.real, -prod.imag])
        rows.append(np.concatenate(feats))
    theta = fit_ridge(np.array(rows), np.asarray(targets, dtype=float), reg)

    c0 = phi[0].shape[0]
    linear = {0: (theta[1:1 + c0] + 1j * theta[1 + c0:1 + 2 * c0])[None, :]}
    couplings = []
    pos = 1 + 2 * c0
    for mu1, mu2 in pairs:
        c1, c2 = phi[mu1].shape[0], phi[mu2].shape[0]
        n = c1 * c2
        block = theta[pos:pos + n] + 1j * theta[pos + n:pos + 2 * n]
        couplings.append(Coupling(mu=0, mu1=mu1, mu2=mu2, weights=block.reshape(1, c1, c2)))
        pos += 2 * n
    final = MultWeights(max_charge=T, constant=np.array([theta[0] + 0j]), linear=linear, couplings=couplings)
    logger.info(f"Charge: refitted final layer on {len(rows)} sample(s), {theta.size} real parameters")
    return ChargeConvNetSpec(spacing=spec.spacing, extent=spec.extent, t_diff=T, d_mult=spec.d_mult,
                             input_channels=spec.input_channels, output_channels=1,
                             layers=list(spec.layers[:-1]) + [final])
