import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import ConfigError
from app.schemas.convnet import DownsampledConvNetSpec
from app.services.charge.builder import random_charge_spec
from app.services.charge.network import diff_stage
from app.services.codec import (
    charge_spec_from_dict, charge_spec_to_dict, convnet_from_dict, convnet_to_dict, signal_from_dict,
    signal_to_dict, stack_from_dict, stack_to_dict, symnet_from_dict, symnet_to_dict, write_json,
)
from app.services.convnets.forward import random_basic_spec, random_downsampled_spec
from app.services.invariant.symmetric import random_symnet, symmetric_net_eval


def test_complex_signal_is_written_as_pairs(random_signal):
    s = random_signal(half_width=1, complex_values=True)
    data = signal_to_dict(s)
    assert data["lambda"] == 0.5
    assert data["values"][0][0][0] == [s.values[0, 0, 0].real, s.values[0, 0, 0].imag]
    assert np.array_equal(signal_from_dict(json.loads(json.dumps(data))).values, s.values)


def test_signal_missing_keys():
    with pytest.raises(ConfigError) as info:
        signal_from_dict({"lambda": 1.0, "values": [[0.0]]})
    assert info.value.fields == ["half_width", "channels", "field"]


def test_complex_values_need_pairs():
    with pytest.raises(ConfigError):
        signal_from_dict({"lambda": 1.0, "half_width": 0, "channels": 1, "field": "complex",
                          "values": [[[1.0, 2.0, 3.0]]]})


def test_symnet_weights_survive_json(rng):
    net = random_symnet(2, 4, 3, rng).model_copy(update={"c": rng.normal(size=4)})
    restored = symnet_from_dict(json.loads(json.dumps(symnet_to_dict(net))))
    X = rng.normal(size=(3, 2))
    assert symmetric_net_eval(restored, X) == symmetric_net_eval(net, X)


def test_symnet_missing_array(rng):
    data = symnet_to_dict(random_symnet(2, 4, 3, rng))
    del data["arrays"]["e"]
    with pytest.raises(ConfigError) as info:
        symnet_from_dict(data)
    assert info.value.fields == ["arrays.e"]


def test_convnet_dict_picks_model_by_stride(rng):
    basic = random_basic_spec(rng, 0.5, 1.0, 1, [1, 2, 1])
    down = random_downsampled_spec(rng, 1.0, 1, 2, [1, 2, 1])
    assert "extent" in convnet_to_dict(basic)
    restored = convnet_from_dict(convnet_to_dict(down))
    assert isinstance(restored, DownsampledConvNetSpec)
    assert restored.stride == 2


def test_charge_spec_w2_charge_is_derived(rng):
    spec = random_charge_spec(rng, 1.0, 1.0, 1, 2, 2)
    data = charge_spec_to_dict(spec)
    first = data["layers"][0]["w2"][0]
    assert len(first) == 7
    restored = charge_spec_from_dict(json.loads(json.dumps(data)))
    for a, b in zip(restored.layers, spec.layers):
        by_pair = {(c.mu1, c.mu2): c for c in b.couplings}
        for c in a.couplings:
            assert c.mu == c.mu1 + c.mu2
            assert np.array_equal(c.weights, by_pair[(c.mu1, c.mu2)].weights)


def test_charge_spec_layer_count_mismatch(rng):
    data = charge_spec_to_dict(random_charge_spec(rng, 1.0, 1.0, 1, 2, 2))
    data["T_mult"] = 3
    with pytest.raises(ConfigError) as info:
        charge_spec_from_dict(data)
    assert info.value.fields == ["T_mult"]


def test_charge_spec_w2_out_of_range(rng):
    data = charge_spec_to_dict(random_charge_spec(rng, 1.0, 1.0, 1, 1, 2))
    data["layers"][0]["w2"].append([2, -2, 0, 0, 0, 1.0, 0.0])
    with pytest.raises(ConfigError):
        charge_spec_from_dict(data)


def test_charge_spec_bad_linear_charge(rng):
    data = charge_spec_to_dict(random_charge_spec(rng, 1.0, 1.0, 1, 1, 2))
    data["layers"][0]["w1"]["1"] = [[[1.0, 0.0], [0.0, 0.0]]]
    with pytest.raises(ValidationError):
        charge_spec_from_dict(data)


def test_stack_labels_survive_json(random_signal):
    stack = diff_stage(random_signal(half_width=3, complex_values=True), 1)
    data = json.loads(json.dumps(stack_to_dict(stack)))
    assert set(data["entries"]) == {"0,0", "1,-1", "1,0", "1,1"}
    assert stack_from_dict(data).entries.keys() == stack.entries.keys()


def test_write_json_creates_parents(tmp_path):
    path = write_json({"a": 1}, tmp_path / "nested" / "x.json")
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}
