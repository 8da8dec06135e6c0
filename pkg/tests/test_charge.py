import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import ChargeConservationError, GridError, SpecError
from app.schemas.charge import ChargeConvNetSpec, Coupling, MultWeights
from app.schemas.grid import AnalyticField, PolyTerm, chain_length
from app.services.charge.builder import (
    break_conservation, fit_final_layer, random_charge_spec, random_mult_weights, random_stack,
)
from app.services.charge.checks import diff_rotation_deviation, origin_rotation_deviation, phase_equivariance_check
from app.services.charge.network import charge_phase, diff_stage, forward, forward_signal, multinomial
from app.services.charge.scaling import scaling_limit_eval
from app.services.grid.signal_ops import make_signal


def _spec(rng, spacing=1.0, extent=1.0, t_diff=1, t_mult=2, d_mult=2, **kwargs):
    return random_charge_spec(rng, spacing, extent, t_diff, t_mult, d_mult, **kwargs)


def _input(rng, spec, complex_values=False):
    side = 2 * spec.input_half_width + 1
    values = rng.uniform(-1, 1, size=(side, side, spec.input_channels))
    if complex_values:
        values = values + 1j * rng.uniform(-1, 1, size=values.shape)
    return make_signal(values, spec.spacing, "complex" if complex_values else "real")


def test_smoothing_matches_stencil_chain_length(rng):
    for spacing in (1.0, 0.5, 0.25):
        spec = _spec(rng, spacing=spacing, extent=1.0, t_diff=1)
        assert spec.input_half_width - spec.output_half_width - 1 == chain_length(spacing)


def test_grid_sizes(rng):
    spec = _spec(rng, spacing=0.5, extent=1.0, t_diff=2)
    assert spec.output_half_width == 2
    assert spec.input_half_width == 2 + 2 + 16
    assert spec.input_extent == pytest.approx(1.0 + 18 * 0.5)


def test_multinomial():
    assert multinomial(3, 1, 1) == 6
    assert multinomial(2, 2, 0) == 1
    assert multinomial(2, 2, 1) == 0


def test_charge_phase_is_exact_on_quarter_turns():
    assert charge_phase(1, math.pi / 2) == -1j
    assert charge_phase(-2, math.pi) == 1
    assert charge_phase(1, 0.3) == pytest.approx(complex(math.cos(0.3), -math.sin(0.3)))


def test_diff_stage_labels_and_shape(random_signal):
    s = random_signal(half_width=4, complex_values=True)
    stack = diff_stage(s, 2)
    assert set(stack.entries) == {(0, 0), (1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)}
    assert stack.grid.half_width == 2
    assert not np.any(stack.entries[(1, 0)].values)


def test_diff_stage_needs_room():
    with pytest.raises(GridError):
        diff_stage(make_signal(np.zeros((3, 3)), 1.0), 2)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_diff_stage_rotation_covariance(random_signal, q):
    s = random_signal(half_width=5, complex_values=True)
    assert diff_rotation_deviation(s, 2, q) <= 1e-12


@pytest.mark.parametrize("phi", [0.0, 0.7, math.pi / 2, 2.3])
def test_mult_layer_phase_equivariance(rng, phi):
    spec = _spec(rng, t_mult=2, d_mult=3)
    w = random_mult_weights(rng, 1, spec.input_widths(1), 3)
    stack = random_stack(rng, spec, layer=1, half_width=1)
    assert phase_equivariance_check(w, stack, phi) <= 1e-12


def test_network_phase_equivariance(rng):
    spec = _spec(rng, t_diff=2, t_mult=3)
    stack = random_stack(rng, spec, layer=0, half_width=1)
    assert phase_equivariance_check(spec, stack, 1.1) <= 1e-12


def test_broken_conservation_is_detected(rng):
    spec = _spec(rng, t_mult=2)
    stack = random_stack(rng, spec, layer=0, half_width=1)
    broken = break_conservation(spec.layers[0])
    assert phase_equivariance_check(broken, stack, 0.9) > 1e-3


def test_nonconserving_coupling_is_rejected():
    weights = np.ones((1, 1, 1), dtype=complex)
    with pytest.raises((ChargeConservationError, ValidationError)):
        MultWeights(max_charge=1, constant=np.zeros(1, dtype=complex),
                    couplings=[Coupling(mu=1, mu1=1, mu2=1, weights=weights)])


def test_charge_out_of_range_is_rejected():
    with pytest.raises((ChargeConservationError, ValidationError)):
        MultWeights(max_charge=1, constant=np.zeros(1, dtype=complex),
                    linear={2: np.ones((1, 1), dtype=complex)})


def test_final_layer_only_keeps_charge_zero(rng):
    spec = _spec(rng, t_mult=1)
    bad = random_mult_weights(rng, 1, spec.input_widths(0), 1, final=False)
    with pytest.raises((SpecError, ValidationError)):
        ChargeConvNetSpec(spacing=1.0, extent=1.0, t_diff=1, d_mult=2, layers=[bad])


def test_forward_output_grid(rng, gaussian_field):
    spec = _spec(rng, spacing=0.5, extent=1.0)
    out = forward(spec, gaussian_field)
    assert out.half_width == 2
    assert out.field == "real"
    assert out.channels == 1


def test_forward_checks_input_grid(rng):
    spec = _spec(rng)
    with pytest.raises(GridError):
        forward_signal(spec, make_signal(np.zeros((5, 5)), 1.0))


@pytest.mark.parametrize("q", [1, 2, 3])
def test_rotation_invariance_at_origin(rng, q):
    spec = _spec(rng, t_diff=2, t_mult=2)
    assert origin_rotation_deviation(spec, _input(rng, spec, complex_values=True), q) <= 1e-10


def test_scaling_limit_of_constant_field(rng):
    # derivatives of a constant vanish, so only the μ=0, s=0 channel is nonzero
    spec = _spec(rng, t_mult=1)
    field = AnalyticField(kind="constant", value=(0.5, 0.0))
    value = scaling_limit_eval(spec, field, [(0.0, 0.0), (1.0, -1.0)])
    assert value.shape == (2, 1)
    assert value[0, 0] == pytest.approx(value[1, 0], abs=1e-8)


def test_fit_final_layer(rng):
    spec = _spec(rng, t_mult=2, d_mult=2)
    field = AnalyticField(kind="gaussian_poly", terms=[PolyTerm(j=0, k=0, re=1.0)])
    inputs = [_input(rng, spec) for _ in range(30)]
    targets = [float(np.mean(s.values)) for s in inputs]
    fitted = fit_final_layer(spec, inputs, targets)
    assert np.array_equal(fitted.layers[0].constant, spec.layers[0].constant)
    assert forward(fitted, field).channels == 1


def test_fit_final_layer_needs_single_output(rng):
    spec = _spec(rng, output_channels=2)
    with pytest.raises(ValueError):
        fit_final_layer(spec, [_input(rng, spec)], [0.0])


def test_fit_final_layer_rejects_empty_or_mismatched_samples(rng):
    spec = _spec(rng)
    with pytest.raises(ValueError, match="at least one sample"):
        fit_final_layer(spec, [], [])
    with pytest.raises(ValueError, match="target"):
        fit_final_layer(spec, [_input(rng, spec)], [0.0, 1.0])
