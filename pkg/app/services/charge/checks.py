"""Charge-conservation and rotation diagnostics."""
import math
from typing import Dict, Union

import numpy as np

from app.schemas.charge import ChargeConvNetSpec, ChargedStack, MultWeights
from app.schemas.grid import Signal
from app.services.charge.network import charge_phase, diff_stage, forward_signal, mult_arrays, stack_arrays
from app.services.grid.signal_ops import rotate_quarter, value_at


def _phased(arrays: Dict[int, np.ndarray], phi: float) -> Dict[int, np.ndarray]:
    return {mu: charge_phase(mu, phi) * values for mu, values in arrays.items()}


def _layer_deviation(w: MultWeights, arrays: Dict[int, np.ndarray], phi: float, final: bool) -> float:
    lhs = mult_arrays(_phased(arrays, phi), w, final)
    rhs = _phased(mult_arrays(arrays, w, final), phi)
    return max(float(np.max(np.abs(lhs[mu] - rhs[mu]))) for mu in lhs)


def phase_equivariance_check(target: Union[ChargeConvNetSpec, MultWeights], stack: ChargedStack,
                             phi: float) -> float:
    """
    Max node-wise |mult(e^{−iμφ}·stack)_μ − e^{−iμφ}·mult(stack)_μ|.

    For a single MultWeights the layer is treated as non-final. For a spec the
    stack is fed through every layer in turn and the worst deviation over all
    layers is returned; the final layer is checked for μ = 0 invariance.
    """
    arrays = stack_arrays(stack)
    if isinstance(target, MultWeights):
        return _layer_deviation(target, arrays, phi, final=False)
    worst = 0.0
    for t, layer in enumerate(target.layers):
        final = t == target.t_mult - 1
        worst = max(worst, _layer_deviation(layer, arrays, phi, final))
        arrays = mult_arrays(arrays, layer, final)
    return worst


def diff_rotation_deviation(s0: Signal, t_diff: int, q: int) -> float:
    """
    Max over labels (s, μ) of |diff(ρ^q s0)_(s,μ) − e^{−iμqπ/2}·ρ^q diff(s0)_(s,μ)|.
    """
    phi = q * math.pi / 2
    rotated = diff_stage(rotate_quarter(s0, q), t_diff)
    base = diff_stage(s0, t_diff)
    worst = 0.0
    for (s, mu), sig in rotated.entries.items():
        expected = charge_phase(mu, phi) * rotate_quarter(base.entries[(s, mu)], q).values
        worst = max(worst, float(np.max(np.abs(sig.values - expected))))
    return worst


def origin_rotation_deviation(spec: ChargeConvNetSpec, s: Signal, q: int) -> float:
    """|f̂(ρ^q s)(0) − f̂(s)(0)| at the centre node, max over output channels."""
    rotated = value_at(forward_signal(spec, rotate_quarter(s, q)), (0, 0))
    base = value_at(forward_signal(spec, s), (0, 0))
    return float(np.max(np.abs(rotated - base)))
