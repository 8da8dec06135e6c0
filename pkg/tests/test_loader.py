import asyncio
import json

import pytest

from app.core.errors import ConfigError
from app.schemas.experiment import CltSweepConfig, EXPERIMENT_KINDS
from app.services.loader import (
    load_builtin_experiments, load_experiment_config, load_numerics, read_json, validate_experiment_config,
)


def test_minimal_config_gets_defaults():
    cfg = validate_experiment_config({"kind": "clt_sweep"})
    assert isinstance(cfg, CltSweepConfig)
    assert cfg.seed == 0
    assert cfg.lambdas == [1.0, 0.5, 0.25, 0.125]
    assert cfg.label == "clt_sweep"


def test_unknown_kind():
    with pytest.raises(ConfigError):
        validate_experiment_config({"kind": "no_such_experiment"})


def test_unknown_key_is_reported():
    with pytest.raises(ConfigError) as info:
        validate_experiment_config({"kind": "clt_sweep", "lamdas": [1.0]})
    assert any("lamdas" in field for field in info.value.fields)


def test_lambdas_must_descend():
    with pytest.raises(ConfigError) as info:
        validate_experiment_config({"kind": "clt_sweep", "lambdas": [0.5, 1.0]})
    assert any("lambdas" in field for field in info.value.fields)


@pytest.mark.parametrize("data", [
    {"kind": "clt_sweep", "lambdas": [2.0, 1.0]},
    {"kind": "clt_sweep", "seed": -1},
    {"kind": "sn_invariance_fit", "widths": [32, 8]},
    {"kind": "sn_invariance_fit", "orbit_ns": [6]},
    {"kind": "sn_invariance_fit", "orbit_ns": []},
    {"kind": "downsample_nonequivariance", "reject_stride": 3},
    {"kind": "lambda_consistency", "points": [(0.3, 0.0)]},
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        validate_experiment_config(data)


def test_every_kind_validates_with_defaults():
    for kind in EXPERIMENT_KINDS:
        assert validate_experiment_config({"kind": kind}).kind == kind


def test_configs_are_frozen():
    cfg = validate_experiment_config({"kind": "clt_sweep"})
    with pytest.raises(Exception):
        cfg.seed = 3


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        asyncio.run(load_experiment_config(tmp_path / "missing.json"))


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_json(path)


def test_config_must_be_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        asyncio.run(load_experiment_config(path))
    assert info.value.fields == ["<root>"]


def test_load_from_file(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"kind": "clt_sweep", "name": "quick", "pairs": [[1, 0]], "lambdas": [1.0, 0.5]}),
                    encoding="utf-8")
    cfg = asyncio.run(load_experiment_config(path))
    assert cfg.label == "quick"
    assert cfg.pairs == [(1, 0)]


def test_builtin_experiments_cover_every_kind():
    configs = asyncio.run(load_builtin_experiments())
    assert {cfg.kind for cfg in configs} == set(EXPERIMENT_KINDS)
    assert all(cfg.seed == 0 for cfg in configs)
    sn = next(cfg for cfg in configs if cfg.kind == "sn_invariance_fit")
    assert sn.orbit_ns == [3, 4]


def test_numerics_defaults():
    numerics = load_numerics()
    assert numerics.float_digits == 12
