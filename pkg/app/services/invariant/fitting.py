"""
Random-feature fitting.

Inner weights are drawn once from a seeded generator; only the outer linear
coefficients are fitted, by ridge regression.
"""
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from app.core.logging import logger
from app.schemas.nets import Isotype, OrthogonalRep, PolarizedAnsatz, PolyAnsatzWeights, PolyFeatureSet, ShallowNet, SymNetWeights
from app.services.invariant.activations import get_activation
from app.services.invariant.ansatz import polarized_hidden, symmetrized_hidden
from app.services.invariant.polynomials import evaluate_equivariants, evaluate_invariants
from app.services.invariant.symmetric import prefix, random_symnet, symnet_hidden


class FitRow(BaseModel):
    """One fitting-report row."""

    seed: int
    width: int
    train_rmse: float
    test_rmse: float


def fit_ridge(design: np.ndarray, targets: np.ndarray, reg: float = 0.0) -> np.ndarray:
    """
    Minimize ‖design·w − targets‖² + reg‖w‖² through the normal equations.

    Args:
        design: Matrix with one row per sample
        targets: Vector (or matrix of column targets) with one row per sample
        reg: Nonnegative ridge parameter

    Returns:
        Weight vector (or matrix)

    Raises:
        ValueError: If reg < 0, shapes disagree or the system is singular
    """
    if reg < 0:
        raise ValueError(f"reg must be nonnegative, got {reg}")
    D = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    if D.ndim != 2 or y.shape[0] != D.shape[0]:
        raise ValueError(f"design {D.shape} and targets {y.shape} disagree on the sample count")
    gram = D.T @ D + reg * np.eye(D.shape[1])
    try:
        factor = cho_factor(gram)
    except LinAlgError:
        raise ValueError("normal equations are singular; use reg > 0")
    return cho_solve(factor, D.T @ y)


def rmse(predicted: np.ndarray, targets: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(predicted) - np.asarray(targets)) ** 2)))


def fit_symmetrized_net(rep: OrthogonalRep, X: np.ndarray, y: np.ndarray, width: int,
                        rng: np.random.Generator, reg: float = 1e-8, activation: str = "tanh",
                        scale: float = 2.0) -> ShallowNet:
    """Fit c over random (l_n, h_n) for the group-averaged invariant net."""
    weights = scale * rng.uniform(-1.0, 1.0, size=(width, rep.dim))
    bias = scale * rng.uniform(-1.0, 1.0, size=width)
    net = ShallowNet(c=np.zeros(width), weights=weights, bias=bias, activation=activation)
    design = symmetrized_hidden(rep, net, np.atleast_2d(X))
    c = fit_ridge(design, y, reg)
    return ShallowNet(c=c, weights=weights, bias=bias, activation=activation)


def _poly_design(hidden: np.ndarray, G: Optional[np.ndarray]) -> np.ndarray:
    # hidden (B, N_eq, N); G (B, N_eq, d_U) -> rows per (sample, output component)
    if G is None:
        return hidden.reshape(hidden.shape[0], -1)
    design = np.einsum("bmn,bmu->bumn", hidden, G)
    return design.reshape(hidden.shape[0] * G.shape[2], -1)


def fit_poly_ansatz(features: PolyFeatureSet, X: np.ndarray, y: np.ndarray, width: int,
                    rng: np.random.Generator, reg: float = 1e-8, activation: str = "tanh",
                    scale: float = 2.0) -> PolyAnsatzWeights:
    """
    Fit c_mn over random (w_mns, h_mn).

    Scalar targets have shape (B,); equivariant targets have shape (B, d_U).
    """
    n_eq, n_inv = features.n_equivariants, len(features.invariants)
    w = scale * rng.uniform(-1.0, 1.0, size=(n_eq, width, n_inv))
    h = scale * rng.uniform(-1.0, 1.0, size=(n_eq, width))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    hidden = get_activation(activation)(np.einsum("mns,bs->bmn", w, evaluate_invariants(features, X)) + h)
    G = evaluate_equivariants(features, X) if features.equivariants else None
    c = fit_ridge(_poly_design(hidden, G), np.asarray(y, dtype=float).reshape(-1), reg)
    return PolyAnsatzWeights(c=c.reshape(n_eq, width), w=w, h=h, activation=activation)


def fit_polarized_ansatz(isotypes: Sequence[Isotype], features: PolyFeatureSet, X: np.ndarray,
                         y: np.ndarray, n_maps: int, rng: np.random.Generator, reg: float = 1e-8,
                         activation: str = "tanh", scale: float = 1.0) -> PolarizedAnsatz:
    """Fit c_mt over random block maps A_α^(t) and random inner weights."""
    n_eq, n_inv = features.n_equivariants, len(features.invariants)
    maps = [
        [rng.uniform(-1.0, 1.0, size=(iso.reference, iso.multiplicity)) for iso in isotypes]
        for _ in range(n_maps)
    ]
    w = scale * rng.uniform(-1.0, 1.0, size=(n_eq, n_maps, n_inv))
    h = scale * rng.uniform(-1.0, 1.0, size=(n_eq, n_maps))
    draft = PolarizedAnsatz(isotypes=list(isotypes), maps=maps, features=features,
                            c=np.zeros((n_eq, n_maps)), w=w, h=h, activation=activation)
    hidden = polarized_hidden(draft, np.atleast_2d(np.asarray(X, dtype=float)))
    if features.equivariants:
        design = np.moveaxis(hidden, 3, 1).reshape(hidden.shape[0] * hidden.shape[3], -1)
    else:
        design = hidden.reshape(hidden.shape[0], -1)
    c = fit_ridge(design, np.asarray(y, dtype=float).reshape(-1), reg)
    return PolarizedAnsatz(isotypes=list(isotypes), maps=maps, features=features,
                           c=c.reshape(n_eq, n_maps), w=w, h=h, activation=activation)


def fit_symmetric_net(base: SymNetWeights, X: np.ndarray, y: np.ndarray, width: int,
                      reg: float = 1e-8) -> SymNetWeights:
    """Fit c for the first ``width`` outer units of ``base``."""
    net = prefix(base, width)
    c = fit_ridge(symnet_hidden(net, X), y, reg)
    return SymNetWeights(c=c, h=net.h, w=net.w, b=net.b, e=net.e, a=net.a, activation=net.activation)


def symmetric_width_sweep(X_train: np.ndarray, y_train: np.ndarray, X_test: np.ndarray,
                          y_test: np.ndarray, widths: Sequence[int], seed: int, t2: int,
                          reg: float = 1e-8, activation: str = "tanh") -> List[FitRow]:
    """
    Fit nested prefixes of one random S_N network and report train/test RMSE per width.

    Args:
        X_train, X_test: Inputs of shape (B, N, M)
        y_train, y_test: Targets of shape (B,)
        widths: Outer widths T1, fitted as prefixes of the widest network
        seed: Generator seed for the inner weights
        t2: Inner width T2

    Returns:
        One FitRow per width, in the order given
    """
    rng = np.random.default_rng(seed)
    n_points, m = X_train.shape[1], X_train.shape[2]
    base = random_symnet(m, max(widths), t2, rng, n_points=n_points, activation=activation)
    rows = []
    for width in widths:
        net = fit_symmetric_net(base, X_train, y_train, width, reg)
        train = rmse(symnet_hidden(net, X_train) @ net.c, y_train)
        test = rmse(symnet_hidden(net, X_test) @ net.c, y_test)
        logger.debug(f"Fitting: seed {seed} width {width} train {train:.3e} test {test:.3e}")
        rows.append(FitRow(seed=seed, width=width, train_rmse=train, test_rmse=test))
    return rows
