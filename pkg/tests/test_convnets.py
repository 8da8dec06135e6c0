import numpy as np
import pytest

from app.core.errors import GridError, SpecError
from app.schemas.convnet import AffineLayer, BasicConvNetSpec, DownsampledConvNetSpec, downsampled_ranges
from app.schemas.grid import AnalyticField, PolyTerm
from app.services.codec import convnet_to_dict
from app.services.convnets.forward import (
    basic_forward, downsampled_forward, random_basic_spec, random_downsampled_spec, strided_layer_maps,
    strided_shift_deviation,
)
from app.services.convnets.validation import validate_spec
from app.services.grid.signal_ops import make_signal, shift_deviation, translate


def _input(rng, spec, channels=None):
    side = 2 * spec.input_half_width + 1
    return make_signal(rng.uniform(-1, 1, size=(side, side, channels or spec.input_channels)), spec.spacing, "real")


def test_basic_schedule(rng):
    spec = random_basic_spec(rng, 0.5, 1.0, 2, [1, 3, 3, 2])
    assert spec.depth == 3
    assert spec.schedule() == [2 + 4, 2 + 2, 2]
    out = basic_forward(spec, _input(rng, spec))
    assert out.half_width == 2
    assert out.channels == 2


@pytest.mark.parametrize("shift", [(1, 0), (0, -2), (2, 1)])
def test_basic_translation_equivariance(rng, shift):
    spec = random_basic_spec(rng, 0.5, 2.0, 1, [2, 3, 3, 1])
    s = _input(rng, spec)
    assert shift_deviation(basic_forward(spec, translate(s, shift)), basic_forward(spec, s), shift) <= 1e-12


def test_basic_forward_from_field(rng):
    spec = random_basic_spec(rng, 0.5, 0.5, 1, [1, 2, 1])
    field = AnalyticField(kind="gaussian_poly", terms=[PolyTerm(j=0, k=0, re=1.0)])
    assert basic_forward(spec, field).half_width == 1


def test_complex_field_rejected(rng):
    spec = random_basic_spec(rng, 0.5, 0.5, 1, [1, 2, 1])
    field = AnalyticField(kind="gaussian_poly", terms=[PolyTerm(j=1, k=0, re=1.0)])
    with pytest.raises(SpecError):
        basic_forward(spec, field)


def test_wrong_input_size_rejected(rng):
    spec = random_basic_spec(rng, 0.5, 0.5, 1, [1, 2, 1])
    with pytest.raises(GridError):
        basic_forward(spec, make_signal(np.zeros((5, 5)), 0.5))


def test_layer_shape_mismatch_is_reported(rng):
    spec = random_basic_spec(rng, 0.5, 0.5, 1, [2, 3, 1])
    data = convnet_to_dict(spec)
    data["input_channels"] = 1
    report = validate_spec(data)
    assert not report.ok
    assert any("layers[0].weights" in d for d in report.diagnostics)


def test_valid_spec_report(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 2, [1, 2, 2, 1])
    report = validate_spec(spec)
    assert report.ok
    assert report.schedule == downsampled_ranges(1, 2, 3) == [3, 1, 0]
    assert report.spacings == [1.0, 2.0, 4.0]


def test_stride_larger_than_receptive_field_is_rejected(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 3, [1, 2, 1])
    data = convnet_to_dict(spec)
    data["stride"] = 4
    report = validate_spec(data)
    assert not report.ok
    assert any(d.startswith("stride") for d in report.diagnostics)


def test_declared_ranges_must_follow_recurrence(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 2, [1, 2, 1])
    with pytest.raises(ValueError):
        DownsampledConvNetSpec(spacing=1.0, receptive_field=1, stride=2, input_channels=1,
                               layers=spec.layers, final=spec.final, ranges=[2, 0])
    ok = DownsampledConvNetSpec(spacing=1.0, receptive_field=1, stride=2, input_channels=1,
                                layers=spec.layers, final=spec.final, ranges=[1, 0])
    assert ok.input_half_width == 1


def test_downsampled_forward_single_node(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 2, [1, 3, 3, 2])
    out = downsampled_forward(spec, _input(rng, spec))
    assert out.shape == (2,)


def test_stride_one_matches_basic_net(rng):
    down = random_downsampled_spec(rng, 0.5, 1, 1, [1, 2, 2, 1])
    basic = BasicConvNetSpec(spacing=0.5, extent=0.0, receptive_field=1, input_channels=1,
                             layers=down.layers, final=down.final)
    s = _input(rng, down)
    assert np.max(np.abs(downsampled_forward(down, s) - basic_forward(basic, s).values[0, 0])) <= 1e-12


def test_strided_maps_halve_resolution(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 2, [1, 2, 2, 1])
    maps = strided_layer_maps(spec, make_signal(rng.uniform(-1, 1, size=(25, 25)), 1.0))
    assert [m.half_width for m in maps] == [5, 2]
    assert [m.spacing for m in maps] == [2.0, 4.0]


def test_downsampling_breaks_fine_shift_equivariance(rng):
    spec = random_downsampled_spec(rng, 1.0, 1, 2, [1, 4, 4, 1])
    s = make_signal(rng.uniform(-1, 1, size=(25, 25)), 1.0)
    assert strided_shift_deviation(spec, s, (1, 0)) > 1e-3
    assert strided_shift_deviation(spec, s, (2, 0)) <= 1e-12


def test_affine_only_net(rng):
    spec = BasicConvNetSpec(spacing=1.0, extent=1.0, receptive_field=1, input_channels=2,
                            final=AffineLayer(weights=np.array([[1.0, -1.0]]), bias=np.array([0.5])))
    s = make_signal(rng.uniform(-1, 1, size=(3, 3, 2)), 1.0)
    out = basic_forward(spec, s)
    assert np.allclose(out.values[..., 0], s.values[..., 0] - s.values[..., 1] + 0.5)
