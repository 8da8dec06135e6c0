import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from app.core.errors import GridError
from app.schemas.grid import AnalyticField, PolyTerm
from app.services.grid.fields import evaluate_field, rotate_field, shift_field
from app.services.grid.signal_ops import (
    crop, delta, discretize, grid_half_width, make_signal, norms, pad, rotate_quarter, sample,
    shift_deviation, translate, value_at,
)


def test_make_signal_rejects_even_side():
    with pytest.raises(GridError):
        make_signal(np.zeros((4, 4)), 0.5)


def test_real_signal_rejects_imaginary_parts():
    with pytest.raises(ValueError):
        make_signal(np.full((3, 3, 1), 1j), 0.5, "real")


def test_signal_values_are_read_only(random_signal):
    s = random_signal()
    with pytest.raises(ValueError):
        s.values[0, 0, 0] = 1.0


def test_value_at_outside_grid():
    with pytest.raises(GridError):
        value_at(delta(1.0, 2), (3, 0))


@given(kx=st.integers(-3, 3), ky=st.integers(-3, 3))
@hsettings(max_examples=30, deadline=None)
def test_translate_is_exact_on_overlap(kx, ky):
    rng = np.random.default_rng(7)
    s = make_signal(rng.normal(size=(9, 9, 2)), 0.5)
    assert shift_deviation(translate(s, (kx, ky)), s, (kx, ky)) == 0.0


def test_translate_moves_a_delta():
    moved = translate(delta(1.0, 3), (1, -2))
    assert value_at(moved, (1, -2))[0] == 1.0
    assert np.sum(moved.values) == 1.0


def test_translate_off_the_grid_is_zero():
    assert not np.any(translate(delta(1.0, 2), (5, 0)).values)


def test_quarter_turn_maps_x_axis_to_y_axis():
    turned = rotate_quarter(delta(1.0, 2, node=(1, 0)), 1)
    assert value_at(turned, (0, 1))[0] == 1.0


def test_four_quarter_turns_are_identity(random_signal):
    s = random_signal(complex_values=True)
    assert np.array_equal(rotate_quarter(s, 4).values, s.values)
    assert np.array_equal(rotate_quarter(rotate_quarter(s, 3), 1).values, s.values)


def test_norms_of_delta():
    l2, linf, inner = norms(delta(0.25, 3))
    assert l2 == pytest.approx(0.25)
    assert linf == 1.0
    assert inner == pytest.approx(0.0625)


def test_norms_grid_mismatch(random_signal):
    with pytest.raises(GridError):
        norms(random_signal(half_width=2), random_signal(half_width=3))


def test_crop_pad_round_trip(random_signal):
    s = random_signal(half_width=3)
    assert np.array_equal(crop(pad(s, 5), 3).values, s.values)
    with pytest.raises(GridError):
        crop(s, 4)


def test_grid_half_width_tolerates_representation_error():
    assert grid_half_width(0.1, 0.3) == 3
    assert grid_half_width(0.5, 1.0) == 2
    assert grid_half_width(0.5, 0.0) == 0


def test_discretize_constant_is_exact():
    field = AnalyticField(kind="constant", value=(2.0, -1.0))
    s = discretize(field, 0.5, 1.0)
    assert s.half_width == 2
    assert np.allclose(s.values, 2.0 - 1.0j, atol=1e-15)


def test_discretize_linear_monomial_equals_point_values():
    # cell averages of a linear function equal its value at the cell centre
    field = AnalyticField(kind="coordinate_monomial", a=1, b=0)
    averaged = discretize(field, 0.5, 1.0)
    pointwise = sample(field, 0.5, 2)
    assert np.allclose(averaged.values, pointwise.values, atol=1e-14)
    assert value_at(pointwise, (1, 2))[0] == pytest.approx(0.5 + 1.0j)


def _step_function_error(field, spacing, extent=1.5):
    # dense points never sit on a cell boundary
    axis = -extent + (np.arange(192) + 0.5) / 64.0
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    s = discretize(field, spacing, extent)
    i = np.rint(X / spacing).astype(int) + s.half_width
    j = np.rint(Y / spacing).astype(int) + s.half_width
    return float(np.sqrt(np.mean(np.abs(s.values[i, j] - evaluate_field(field, X, Y)) ** 2)))


def test_discretize_error_decreases_as_spacing_halves(gaussian_field):
    errors = [_step_function_error(gaussian_field, spacing) for spacing in (0.5, 0.25, 0.125)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.5 * errors[0]


def test_real_field_discretizes_to_real_signal(gaussian_field):
    assert gaussian_field.is_real
    assert discretize(gaussian_field, 0.5, 1.0).field == "real"


def test_complex_terms_make_field_complex():
    field = AnalyticField(kind="gaussian_poly", terms=[PolyTerm(j=1, k=0, re=1.0)])
    assert not field.is_real


@given(angle=st.floats(-math.pi, math.pi), x=st.floats(-2, 2), y=st.floats(-2, 2))
@hsettings(max_examples=40, deadline=None)
def test_rotate_field_rotates_values(angle, x, y):
    field = shift_field(
        AnalyticField(kind="gaussian_poly", terms=[PolyTerm(j=1, k=0, re=1.0)], center=(0.4, 0.1)),
        (0.3, -0.5),
    )
    c, s = math.cos(angle), math.sin(angle)
    rotated = evaluate_field(rotate_field(field, angle), np.array(c * x - s * y), np.array(s * x + c * y))
    assert np.allclose(rotated, evaluate_field(field, np.array(x), np.array(y)), atol=1e-12)


def test_shift_field_translates_values(gaussian_field):
    moved = shift_field(gaussian_field, (0.5, -0.25))
    assert np.allclose(evaluate_field(moved, np.array(0.7), np.array(0.0)),
                       evaluate_field(gaussian_field, np.array(0.2), np.array(0.25)))
