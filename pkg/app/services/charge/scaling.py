"""Scaling limit f̂₀ of the charge-conserving convnet."""
from typing import Dict, Sequence, Tuple

import numpy as np

from app.core.logging import logger
from app.schemas.charge import ChargeConvNetSpec
from app.schemas.grid import AnalyticField
from app.services.charge.network import diff_labels, label_orders, mult_arrays, multinomial
from app.services.operators.kernels import continuum_conv


def continuum_stack(spec: ChargeConvNetSpec, f: AnalyticField,
                    points: Sequence[Tuple[float, float]]) -> Dict[int, np.ndarray]:
    """
    Per-charge arrays of c_{a,b}·(f * Ψ_{a,b})(x), laid out like the diff stage.

    Returns:
        {μ: complex array of shape (P, d_V·(T_diff − |μ| + 1))}
    """
    T, d = spec.t_diff, spec.input_channels
    P = len(points)
    entries = {}
    for s, mu in diff_labels(T):
        orders = label_orders(s, mu)
        block = np.zeros((P, d), dtype=np.complex128)
        if orders is not None:
            a, b = orders
            coefficient = multinomial(T, a, b)
            for p, x in enumerate(points):
                block[p] = coefficient * continuum_conv(f, a, b, x)
        entries[(s, mu)] = block
    return {
        mu: np.concatenate([entries[(s, mu)] for s in range(abs(mu), T + 1)], axis=-1)
        for mu in range(-T, T + 1)
    }


def scaling_limit_eval(spec: ChargeConvNetSpec, f: AnalyticField,
                       points: Sequence[Tuple[float, float]]) -> np.ndarray:
    """
    Evaluate f̂₀(f) at the given points.

    The diff stage is replaced by the continuum convolutions c_{a,b} L_0^(a,b)
    and the spec's multiplication layers are applied unchanged.

    Args:
        spec: Network spec (λ and Λ are ignored)
        f: Square-integrable field or constant
        points: Evaluation points in ℝ²

    Returns:
        Real array of shape (P, d_U)

    Raises:
        ValueError: If the field kind is not supported by continuum_conv
    """
    if len(points) == 0:
        return np.zeros((0, spec.output_channels))
    logger.debug(f"Charge: scaling limit at {len(points)} point(s), T_diff {spec.t_diff}")
    arrays = continuum_stack(spec, f, points)
    for t, layer in enumerate(spec.layers):
        arrays = mult_arrays(arrays, layer, final=t == spec.t_mult - 1)
    return arrays[0]
