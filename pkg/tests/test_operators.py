import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from app.core.errors import GridError, TruncationError
from app.schemas.grid import AnalyticField
from app.schemas.kernels import SpectralSymbol
from app.services.grid.signal_ops import crop, delta, discretize, make_signal, node_coordinates, norms, sample
from app.services.operators.kernels import continuum_conv, evaluate_poly_gaussian, gaussian_deriv_kernel
from app.services.operators.spectral import (
    dft2, discrete_kernel, evaluate_symbol, fourier_symbol, idft2, kernel_gap, kernel_norm_bound,
    spectrum_norm, stencil_symbol_error,
)
from app.services.operators.stencils import chain_length, discrete_deriv_chain, smooth_chain, stencil_apply


def _monomial(a: int, b: int, spacing: float, half_width: int):
    return sample(AnalyticField(kind="coordinate_monomial", a=a, b=b), spacing, half_width)


@pytest.mark.parametrize("spacing", [1.0, 0.5])
def test_wirtinger_stencils_on_z(spacing):
    z = _monomial(1, 0, spacing, 5)
    assert np.max(np.abs(stencil_apply("dz", z).values - 1.0)) <= 1e-12
    assert np.max(np.abs(stencil_apply("dzbar", z).values)) <= 1e-12


@pytest.mark.parametrize("spacing", [1.0, 0.5])
def test_laplacian_of_radius_squared(spacing):
    r2 = _monomial(1, 1, spacing, 5)
    assert np.max(np.abs(stencil_apply("laplace", r2).values - 4.0)) <= 1e-12


def test_stencil_shrinks_grid(random_signal):
    s = random_signal(half_width=4)
    out = stencil_apply("laplace", s)
    assert out.half_width == 3
    assert out.field == "real"
    assert stencil_apply("dz", s).field == "complex"


def test_stencil_needs_half_width_one():
    with pytest.raises(GridError):
        stencil_apply("dz", make_signal(np.ones((1, 1)), 1.0))


def test_smooth_is_identity_plus_laplacian(random_signal):
    s = random_signal(spacing=0.5, half_width=4)
    expected = crop(s, 3).values + (0.25 / 8.0) * stencil_apply("laplace", s).values
    assert np.allclose(stencil_apply("smooth", s).values, expected, atol=1e-14)


def test_chain_length():
    assert chain_length(1.0) == 4
    assert chain_length(0.5) == 16
    assert chain_length(2.0) == 1


def test_smooth_chain_preserves_constants():
    s = make_signal(np.full((11, 11), 3.0), 1.0)
    out = smooth_chain(s)
    assert out.half_width == 1
    assert np.allclose(out.values, 3.0)


@given(seed=st.integers(0, 2 ** 32 - 1))
@hsettings(max_examples=30, deadline=None)
def test_smooth_chain_shrinks_sup_norm(seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(13, 13))
    s = make_signal(values - values.mean(), 1.0)
    assert norms(smooth_chain(s))[1] < norms(s)[1]


def test_deriv_chain_too_small_grid():
    with pytest.raises(GridError):
        discrete_deriv_chain(make_signal(np.zeros((9, 9)), 1.0), 1, 0)


def test_deriv_chain_shrink():
    s = make_signal(np.zeros((15, 15)), 1.0)
    assert discrete_deriv_chain(s, 1, 1).half_width == 7 - 4 - 2


@given(half_width=st.integers(0, 8), seed=st.integers(0, 1000))
@hsettings(max_examples=25, deadline=None)
def test_dft_parseval_and_round_trip(half_width, seed):
    rng = np.random.default_rng(seed)
    side = 2 * half_width + 1
    s = make_signal(rng.normal(size=(side, side, 2)) + 1j * rng.normal(size=(side, side, 2)), 0.5)
    spectrum = dft2(s)
    assert spectrum_norm(spectrum) == pytest.approx(norms(s)[0], rel=1e-10)
    assert np.max(np.abs(idft2(spectrum).values - s.values)) <= 1e-10


def test_symbol_matches_stencil_on_plane_wave():
    spacing, half_width = 0.5, 6
    p = (0.3 * math.pi / spacing, -0.6 * math.pi / spacing)
    X, Y = node_coordinates(make_signal(np.zeros((13, 13)), spacing).grid)
    wave = make_signal(np.exp(1j * (p[0] * X + p[1] * Y)), spacing)
    for kind in ("dz", "dzbar", "laplace", "smooth"):
        out = stencil_apply(kind, wave)
        expected = fourier_symbol(kind, p, spacing) * crop(wave, half_width - 1).values
        assert np.max(np.abs(out.values - expected)) <= 1e-8


@pytest.mark.parametrize("spacing", [1.0, 0.5, 0.25])
@pytest.mark.parametrize("kind", ["dz", "dzbar", "laplace", "smooth"])
def test_symbol_matches_transformed_delta_response(kind, spacing):
    half_width = 5
    response = dft2(stencil_apply(kind, delta(spacing, half_width)))
    assert response.half_width == half_width - 1
    step = 2.0 * math.pi / ((2 * half_width - 1) * spacing)
    for i in range(-(half_width - 1), half_width):
        for j in range(-(half_width - 1), half_width):
            got = (2.0 * math.pi / spacing ** 2) * response.values[i + half_width - 1, j + half_width - 1, 0]
            assert abs(got - fourier_symbol(kind, (i * step, j * step), spacing)) <= 1e-10
    assert stencil_symbol_error(kind, spacing, half_width) <= 1e-10


def test_symbol_outside_domain():
    with pytest.raises(ValueError):
        fourier_symbol("dz", (4.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        fourier_symbol("dz", (0.0, 0.0))


def test_smooth_symbol_at_origin_is_one():
    assert evaluate_symbol(SpectralSymbol(kind="smooth", spacing=0.5), np.array(0.0), np.array(0.0)) == 1.0


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (1, 1), (2, 0)])
def test_kernel_mass(a, b):
    kernel = discrete_kernel(a, b, 0.5, 16)
    mass = 0.25 * np.sum(kernel.values)
    assert abs(mass - (1.0 if a == b == 0 else 0.0)) <= 1e-8


def test_plain_kernel_is_real():
    assert discrete_kernel(0, 0, 1.0, 8).field == "real"


def test_kernel_truncation():
    with pytest.raises(TruncationError):
        discrete_kernel(0, 0, 0.5, 2)


def test_kernel_norm_bound_dominates():
    for a, b in [(0, 0), (1, 0), (1, 1)]:
        bound = kernel_norm_bound(a, b)
        for spacing in (1.0, 0.5):
            kernel = discrete_kernel(a, b, spacing, 8 * int(1 / spacing) + 8)
            assert norms(kernel)[0] ** 2 <= bound * (1 + 1e-6)


def test_gaussian_kernel_closed_form():
    psi = gaussian_deriv_kernel(1, 0)
    # ∂_z of (1/2π)e^{−|z|²/2} = −(z̄/2)(1/2π)e^{−|z|²/2}
    assert psi.terms() == {(0, 1): pytest.approx(-0.5)}
    value = evaluate_poly_gaussian(psi, np.array(1.0), np.array(0.0))
    assert value == pytest.approx(-0.5 * math.exp(-0.5) / (2 * math.pi))


def test_kernel_order_guard():
    with pytest.raises(ValueError):
        gaussian_deriv_kernel(-1, 0)
    with pytest.raises(ValueError):
        gaussian_deriv_kernel(99, 0)


def test_continuum_conv_of_constant():
    field = AnalyticField(kind="constant", value=(1.5, 0.0))
    assert continuum_conv(field, 0, 0, (0.2, 0.1))[0] == pytest.approx(1.5, abs=1e-8)
    assert abs(continuum_conv(field, 1, 0, (0.2, 0.1))[0]) <= 1e-8


def test_continuum_conv_rejects_polynomial_growth():
    with pytest.raises(ValueError):
        continuum_conv(AnalyticField(kind="coordinate_monomial", a=1), 0, 0, (0.0, 0.0))


def test_kernel_gap_decreases():
    gaps = [kernel_gap(1, 0, spacing) for spacing in (1.0, 0.5, 0.25)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_kernel_gap_rejects_large_spacing():
    with pytest.raises(ValueError):
        kernel_gap(0, 0, 2.0)


def test_discrete_chain_tracks_continuum_convolution(gaussian_field):
    spacing = 0.25
    steps = chain_length(spacing)
    s = discretize(gaussian_field, spacing, (steps + 1) * spacing)
    out = discrete_deriv_chain(s, 1, 0)
    assert out.half_width == 0
    assert abs(out.values[0, 0, 0] - continuum_conv(gaussian_field, 1, 0, (0.0, 0.0))[0]) < 0.05


@pytest.mark.parametrize("spacing,half_width", [(1.0, 8), (0.5, 24)])
def test_plain_kernel_is_smoothed_delta(spacing, half_width):
    kernel = discrete_kernel(0, 0, spacing, half_width)
    smoothed = smooth_chain(delta(spacing, half_width))
    overlap = smoothed.half_width
    assert np.max(np.abs(crop(kernel, overlap).values - smoothed.values / spacing ** 2)) <= 1e-8
