import itertools

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from app.core.errors import SpecError
from app.schemas.nets import Isotype, PolyAnsatzWeights, PolyFeatureSet, ShallowNet
from app.services.invariant.activations import get_activation
from app.services.invariant.ansatz import poly_ansatz_eval, polarized_ansatz_eval, symmetrize_eval
from app.services.invariant.fitting import (
    fit_poly_ansatz, fit_polarized_ansatz, fit_ridge, fit_symmetrized_net, rmse, symmetric_width_sweep,
)
from app.services.invariant.groups import (
    cyclic_shifts, permutations, plane_rotations, rep_from_matrices, sign_flip, trivial,
)
from app.services.invariant.polynomials import (
    power_sum_features, validate_features, z2_line_features, z2_plane_features, z4_rotation_features,
)
from app.services.invariant.symmetric import (
    orbit_separation, power_sums, prefix, random_symnet, symmetric_net_eval,
)


def test_quarter_turns_are_exact():
    rep = plane_rotations(4)
    assert rep.order == 4
    assert set(np.unique(rep.matrices)) <= {-1.0, 0.0, 1.0}
    for g in range(rep.order):
        assert rep.table[g, rep.inverse(g)] == rep.identity


def test_symmetric_group_order():
    assert permutations(3).order == 6
    assert cyclic_shifts(5).order == 5


def test_open_matrix_set_is_rejected():
    c, s = np.cos(1.0), np.sin(1.0)
    with pytest.raises(ValueError):
        rep_from_matrices("not_a_group", [np.eye(2), np.array([[c, -s], [s, c]])])


@pytest.mark.parametrize("features,rep", [
    (z2_line_features(), sign_flip(1)),
    (z2_plane_features(with_equivariants=True), sign_flip(2)),
    (z4_rotation_features(), plane_rotations(4)),
    (power_sum_features(3, with_equivariants=True), permutations(3)),
])
def test_builtin_features_are_symmetric(features, rep):
    assert validate_features(features, rep) <= 1e-8


def test_validate_features_catches_broken_symmetry():
    with pytest.raises(ValueError):
        validate_features(z2_plane_features(), plane_rotations(4))


def test_unknown_activation():
    with pytest.raises(ValueError):
        get_activation("relu")


def _random_shallow(rng, units, dim, outputs=None):
    return ShallowNet(c=rng.normal(size=units), weights=rng.normal(size=(units, dim)),
                      bias=rng.normal(size=units),
                      outputs=None if outputs is None else rng.normal(size=(units, outputs)))


def test_symmetrized_net_invariance(rng):
    rep = plane_rotations(4)
    net = _random_shallow(rng, 16, 2)
    X = rng.uniform(-1, 1, size=(20, 2))
    base = symmetrize_eval(rep, net, X)
    for R in rep.matrices:
        assert np.allclose(symmetrize_eval(rep, net, X @ R.T), base, atol=1e-12)


def test_symmetrized_net_equivariance(rng):
    rep = plane_rotations(4)
    net = _random_shallow(rng, 16, 2, outputs=2)
    X = rng.uniform(-1, 1, size=(20, 2))
    base = symmetrize_eval(rep, net, X, mode="equivariant")
    for R in rep.matrices:
        rotated = symmetrize_eval(rep, net, X @ R.T, mode="equivariant")
        assert np.allclose(rotated, base @ R.T, atol=1e-12)


def test_trivial_group_gives_plain_shallow_net(rng):
    net = _random_shallow(rng, 8, 3)
    X = rng.uniform(-1, 1, size=(10, 3))
    plain = np.tanh(X @ net.weights.T + net.bias) @ net.c
    assert np.allclose(symmetrize_eval(trivial(3), net, X), plain, atol=1e-14)


def test_symmetrize_single_point_returns_scalar(rng):
    net = _random_shallow(rng, 4, 2)
    assert isinstance(symmetrize_eval(sign_flip(2), net, np.array([0.1, 0.2])), float)


def test_symmetrize_rejects_bad_mode(rng):
    with pytest.raises(ValueError):
        symmetrize_eval(sign_flip(2), _random_shallow(rng, 4, 2), np.zeros(2), mode="other")
    with pytest.raises(ValueError):
        symmetrize_eval(sign_flip(3), _random_shallow(rng, 4, 2), np.zeros(3))


def test_poly_ansatz_equivariance(rng):
    features = z2_plane_features(with_equivariants=True)
    weights = PolyAnsatzWeights(c=rng.normal(size=(4, 8)), w=rng.normal(size=(4, 8, 3)), h=rng.normal(size=(4, 8)))
    X = rng.uniform(-1, 1, size=(10, 2))
    assert np.allclose(poly_ansatz_eval(features, weights, -X), -poly_ansatz_eval(features, weights, X))


def test_poly_ansatz_weight_mismatch(rng):
    weights = PolyAnsatzWeights(c=rng.normal(size=(1, 8)), w=rng.normal(size=(1, 8, 2)), h=rng.normal(size=(1, 8)))
    with pytest.raises(ValueError):
        poly_ansatz_eval(z2_plane_features(), weights, np.zeros(2))


def test_polarized_ansatz_is_invariant(rng):
    isotype = Isotype(name="sign", dim=1, multiplicity=2, reference_multiplicity=1)
    scalar = PolyFeatureSet(name="z2_line", dim=1, invariants=z2_line_features().invariants)
    X = rng.uniform(-1, 1, size=(200, 2))
    ansatz = fit_polarized_ansatz([isotype], scalar, X, (X[:, 0] + X[:, 1]) ** 2, 32, rng, reg=1e-8)
    assert np.allclose(polarized_ansatz_eval(ansatz, -X), polarized_ansatz_eval(ansatz, X), atol=1e-12)
    assert rmse(polarized_ansatz_eval(ansatz, X), (X[:, 0] + X[:, 1]) ** 2) < 0.05


def test_polarized_ansatz_input_dimension(rng):
    isotype = Isotype(name="sign", dim=1, multiplicity=2, reference_multiplicity=1)
    scalar = PolyFeatureSet(name="z2_line", dim=1, invariants=z2_line_features().invariants)
    X = rng.uniform(-1, 1, size=(20, 2))
    ansatz = fit_polarized_ansatz([isotype], scalar, X, X[:, 0] ** 2, 4, rng, reg=1e-6)
    with pytest.raises(ValueError):
        polarized_ansatz_eval(ansatz, np.zeros(3))


@given(perm=st.permutations(list(range(5))))
@hsettings(max_examples=30, deadline=None)
def test_symnet_permutation_invariance_is_bit_exact(perm):
    rng = np.random.default_rng(3)
    net = random_symnet(3, 6, 4, rng, n_points=5)
    net = net.model_copy(update={"c": rng.normal(size=6)})
    X = rng.normal(size=(5, 3))
    assert symmetric_net_eval(net, X[list(perm)]) == symmetric_net_eval(net, X)


def test_symnet_batch_matches_single(rng):
    net = random_symnet(2, 4, 3, rng, n_points=3).model_copy(update={"c": np.ones(4)})
    X = rng.normal(size=(6, 3, 2))
    batch = symmetric_net_eval(net, X)
    assert batch.shape == (6,)
    assert batch[2] == pytest.approx(symmetric_net_eval(net, X[2]))


def test_symnet_rejects_wrong_columns(rng):
    net = random_symnet(2, 4, 3, rng)
    with pytest.raises(SpecError):
        symmetric_net_eval(net, np.zeros((3, 5)))


def test_prefix_bounds(rng):
    net = random_symnet(2, 4, 3, rng)
    assert prefix(net, 2).T1 == 2
    with pytest.raises(SpecError):
        prefix(net, 5)


def test_power_sums_are_permutation_invariant(rng):
    y = rng.normal(size=6)
    for perm in itertools.islice(itertools.permutations(range(6)), 50):
        assert np.array_equal(power_sums(y[list(perm)]), power_sums(y))


def test_power_sums_values():
    assert np.allclose(power_sums(np.array([1.0, 2.0])), [3.0, 5.0])


@pytest.mark.parametrize("n,count", [(3, 125), (4, 625)])
def test_power_sums_separate_orbits(n, count):
    assert orbit_separation(n, 2) == (count, [])


def test_fit_ridge_solves_exact_system(rng):
    design = rng.normal(size=(30, 5))
    weights = rng.normal(size=5)
    assert np.allclose(fit_ridge(design, design @ weights), weights, atol=1e-10)


def test_fit_ridge_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_ridge(np.ones((3, 2)), np.ones(3), reg=-1.0)
    with pytest.raises(ValueError):
        fit_ridge(np.ones((3, 2)), np.ones(4))
    with pytest.raises(ValueError):
        fit_ridge(np.zeros((3, 2)), np.ones(3))


def test_poly_and_symmetrized_fits_agree(rng):
    X = rng.uniform(-1, 1, size=(300, 2))
    y = np.exp(-(X ** 2).sum(axis=1))
    features = z2_plane_features()
    weights = fit_poly_ansatz(features, X, y, 60, rng, reg=1e-10)
    net = fit_symmetrized_net(sign_flip(2), X, y, 60, rng, reg=1e-10)
    assert rmse(poly_ansatz_eval(features, weights, X), y) < 1e-2
    assert rmse(symmetrize_eval(sign_flip(2), net, X), y) < 1e-2


def test_width_sweep_reports_every_width(rng):
    X = rng.uniform(-0.75, 0.75, size=(80, 4, 2))
    y = np.tanh((X ** 2).sum(axis=2)).sum(axis=1)
    rows = symmetric_width_sweep(X[:60], y[:60], X[60:], y[60:], [2, 8], seed=5, t2=4, reg=1e-6)
    assert [row.width for row in rows] == [2, 8]
    assert rows[1].train_rmse <= rows[0].train_rmse + 1e-6
