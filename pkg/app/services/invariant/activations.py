"""Activation functions."""
from typing import Callable, Dict

import numpy as np
from scipy.special import expit


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


ACTIVATIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "sigmoid": expit,
    "softplus": _softplus,
}


def get_activation(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """
    Look up an activation by name.

    Raises:
        ValueError: If the name is not one of the non-polynomial choices
    """
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"Unknown activation {name!r}; expected one of {sorted(ACTIVATIONS)}")
