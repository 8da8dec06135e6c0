"""Annotated numpy field types for pydantic models."""
from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator


def _frozen(value: Any, dtype: Any) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    if not np.all(np.isfinite(array)):
        raise ValueError("array entries must be finite")
    array.setflags(write=False)
    return array


def _as_float(value: Any) -> np.ndarray:
    return _frozen(value, np.float64)


def _as_complex(value: Any) -> np.ndarray:
    return _frozen(value, np.complex128)


def _as_int(value: Any) -> np.ndarray:
    array = np.array(value)
    if array.size and not np.issubdtype(array.dtype, np.integer):
        if not np.all(np.equal(np.mod(array, 1), 0)):
            raise ValueError("integer array expected")
    return _frozen(array, np.int64)


FloatArray = Annotated[np.ndarray, BeforeValidator(_as_float)]
ComplexArray = Annotated[np.ndarray, BeforeValidator(_as_complex)]
IntArray = Annotated[np.ndarray, BeforeValidator(_as_int)]
