"""
JSON codecs for signals, weights and network specs.

Complex numbers are written as [re, im] pairs; arrays as nested row-major lists.
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from app.core.errors import ConfigError
from app.core.logging import logger
from app.schemas.charge import ChargeConvNetSpec, ChargedStack, Coupling, MultWeights
from app.schemas.convnet import BasicConvNetSpec, DownsampledConvNetSpec
from app.schemas.grid import GridSpec, Signal
from app.schemas.nets import SymNetWeights


def _complex_to_pairs(values: np.ndarray) -> list:
    values = np.asarray(values, dtype=np.complex128)
    return np.stack([values.real, values.imag], axis=-1).tolist()


def _pairs_to_complex(data: Any) -> np.ndarray:
    pairs = np.asarray(data, dtype=float)
    if pairs.shape[-1:] != (2,):
        raise ConfigError(f"complex values must be [re, im] pairs, got trailing shape {pairs.shape[-1:]}")
    return pairs[..., 0] + 1j * pairs[..., 1]


def _require(data: Dict[str, Any], keys: List[str], what: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise ConfigError(f"{what} is missing {', '.join(missing)}", missing)


# Signals

def signal_to_dict(s: Signal) -> Dict[str, Any]:
    values = _complex_to_pairs(s.values) if s.field == "complex" else s.values.tolist()
    return {
        "lambda": s.spacing,
        "half_width": s.half_width,
        "channels": s.channels,
        "field": s.field,
        "values": values,
    }


def signal_from_dict(data: Dict[str, Any]) -> Signal:
    """
    Rebuild a Signal from its JSON object.

    Raises:
        ConfigError: If keys are missing or values are malformed
    """
    _require(data, ["lambda", "half_width", "channels", "field", "values"], "signal")
    field = data["field"]
    values = _pairs_to_complex(data["values"]) if field == "complex" else np.asarray(data["values"], dtype=float)
    grid = GridSpec(spacing=data["lambda"], half_width=data["half_width"])
    return Signal(grid=grid, channels=data["channels"], field=field, values=values)


# S_N network weights

_SYMNET_ARRAYS = ("c", "h", "w", "b", "e", "a")


def symnet_to_dict(w: SymNetWeights) -> Dict[str, Any]:
    """Flat arrays plus shape metadata."""
    return {
        "T1": w.T1,
        "T2": w.T2,
        "M": w.M,
        "activation": w.activation,
        "arrays": {
            name: {"shape": list(getattr(w, name).shape), "data": getattr(w, name).reshape(-1).tolist()}
            for name in _SYMNET_ARRAYS
        },
    }


def symnet_from_dict(data: Dict[str, Any]) -> SymNetWeights:
    _require(data, ["arrays"], "S_N weights")
    arrays = {}
    for name in _SYMNET_ARRAYS:
        entry = data["arrays"].get(name)
        if entry is None:
            raise ConfigError(f"S_N weights are missing array {name!r}", [f"arrays.{name}"])
        arrays[name] = np.asarray(entry["data"], dtype=float).reshape(entry["shape"])
    return SymNetWeights(activation=data.get("activation", "tanh"), **arrays)


# Convnet specs

def convnet_to_dict(spec: Union[BasicConvNetSpec, DownsampledConvNetSpec]) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "spacing": spec.spacing,
        "receptive_field": spec.receptive_field,
        "input_channels": spec.input_channels,
        "activation": spec.activation,
        "layers": [{"weights": layer.weights.tolist(), "bias": layer.bias.tolist()} for layer in spec.layers],
        "final": {"weights": spec.final.weights.tolist(), "bias": spec.final.bias.tolist()},
    }
    if isinstance(spec, DownsampledConvNetSpec):
        data["stride"] = spec.stride
    else:
        data["extent"] = spec.extent
    return data


def convnet_from_dict(data: Dict[str, Any]) -> Union[BasicConvNetSpec, DownsampledConvNetSpec]:
    """A mapping with ``stride`` is a downsampled spec, otherwise a basic one."""
    model = DownsampledConvNetSpec if "stride" in data else BasicConvNetSpec
    return model.model_validate(data)


# Charge convnet specs

def _layer_to_dict(w: MultWeights) -> Dict[str, Any]:
    triples = []
    for c in sorted(w.couplings, key=lambda c: (c.mu1, c.mu2)):
        for n, n1, n2 in zip(*np.nonzero(c.weights)):
            value = c.weights[n, n1, n2]
            triples.append([c.mu1, c.mu2, int(n), int(n1), int(n2), float(value.real), float(value.imag)])
    return {
        "w0": _complex_to_pairs(w.constant),
        "w1": {str(mu): _complex_to_pairs(w.linear[mu]) for mu in sorted(w.linear)},
        "w2": triples,
    }


def charge_spec_to_dict(spec: ChargeConvNetSpec) -> Dict[str, Any]:
    return {
        "lambda": spec.spacing,
        "Lambda": spec.extent,
        "T_diff": spec.t_diff,
        "T_mult": spec.t_mult,
        "d_mult": spec.d_mult,
        "d_V": spec.input_channels,
        "d_U": spec.output_channels,
        "layers": [_layer_to_dict(w) for w in spec.layers],
    }


def _layer_from_dict(data: Dict[str, Any], t_diff: int, widths: Dict[int, int], d_out: int) -> MultWeights:
    _require(data, ["w0"], "mult layer")
    blocks: Dict[tuple, np.ndarray] = {}
    for triple in data.get("w2", []):
        if len(triple) != 7:
            raise ConfigError(f"w2 entries must be [mu1, mu2, n, n1, n2, re, im], got {triple}", ["w2"])
        mu1, mu2, n, n1, n2 = (int(v) for v in triple[:5])
        if mu1 not in widths or mu2 not in widths:
            raise ConfigError(f"w2 entry {triple} refers to a charge outside ±{t_diff}", ["w2"])
        if (mu1, mu2) not in blocks:
            blocks[(mu1, mu2)] = np.zeros((d_out, widths[mu1], widths[mu2]), dtype=np.complex128)
        blocks[(mu1, mu2)][n, n1, n2] += complex(triple[5], triple[6])
    couplings = [Coupling(mu=mu1 + mu2, mu1=mu1, mu2=mu2, weights=block)
                 for (mu1, mu2), block in sorted(blocks.items())]
    linear = {int(mu): _pairs_to_complex(value) for mu, value in data.get("w1", {}).items()}
    return MultWeights(max_charge=t_diff, constant=_pairs_to_complex(data["w0"]), linear=linear, couplings=couplings)


def charge_spec_from_dict(data: Dict[str, Any]) -> ChargeConvNetSpec:
    """
    Rebuild a charge convnet spec; w2 output charges are μ = μ1 + μ2.

    Raises:
        ConfigError: If keys are missing or T_mult disagrees with the layer list
    """
    _require(data, ["lambda", "Lambda", "T_diff", "d_mult", "layers"], "charge convnet spec")
    T, d_mult = int(data["T_diff"]), int(data["d_mult"])
    d_v, d_u = int(data.get("d_V", 1)), int(data.get("d_U", 1))
    layers_data = data["layers"]
    if "T_mult" in data and int(data["T_mult"]) != len(layers_data):
        raise ConfigError(f"T_mult={data['T_mult']} but {len(layers_data)} layers given", ["T_mult"])
    widths = {mu: d_v * (T - abs(mu) + 1) for mu in range(-T, T + 1)}
    layers = []
    for t, layer in enumerate(layers_data):
        final = t == len(layers_data) - 1
        d_out = d_u if final else d_mult
        layers.append(_layer_from_dict(layer, T, widths, d_out))
        widths = {mu: d_mult for mu in widths}
    return ChargeConvNetSpec(spacing=data["lambda"], extent=data["Lambda"], t_diff=T, d_mult=d_mult,
                             input_channels=d_v, output_channels=d_u, layers=layers)


def stack_to_dict(stack: ChargedStack) -> Dict[str, Any]:
    return {
        "stage": stack.stage,
        "max_charge": stack.max_charge,
        "entries": {",".join(str(v) for v in label): signal_to_dict(sig)
                    for label, sig in sorted(stack.entries.items())},
    }


def stack_from_dict(data: Dict[str, Any]) -> ChargedStack:
    _require(data, ["stage", "max_charge", "entries"], "charged stack")
    entries = {
        tuple(int(v) for v in key.split(",")): signal_from_dict(value)
        for key, value in data["entries"].items()
    }
    return ChargedStack(stage=data["stage"], max_charge=data["max_charge"], entries=entries)


# Files

def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    logger.debug(f"Codec: wrote {path}")
    return path

