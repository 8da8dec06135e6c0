"""Sparse polynomials and built-in generating sets of invariants/equivariants."""
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.logging import logger
from app.schemas.nets import OrthogonalRep, PolyFeatureSet, Polynomial


def polynomial(terms: Dict[Tuple[int, ...], float], dim: int) -> Polynomial:
    """Build a Polynomial from {exponent tuple: coefficient}."""
    if not terms:
        return Polynomial(exponents=np.zeros((0, dim), dtype=np.int64), coeffs=np.zeros(0))
    exponents = np.array(list(terms.keys()), dtype=np.int64).reshape(len(terms), dim)
    coeffs = np.array(list(terms.values()), dtype=float)
    return Polynomial(exponents=exponents, coeffs=coeffs)


def zero_polynomial(dim: int) -> Polynomial:
    return polynomial({}, dim)


def evaluate_polynomial(poly: Polynomial, X: np.ndarray) -> np.ndarray:
    """Evaluate on a batch X of shape (B, d); returns shape (B,)."""
    if poly.exponents.shape[0] == 0:
        return np.zeros(X.shape[0])
    monomials = np.prod(X[:, None, :] ** poly.exponents[None, :, :], axis=2)
    return monomials @ poly.coeffs


def evaluate_invariants(features: PolyFeatureSet, X: np.ndarray) -> np.ndarray:
    """f_s(x) for a batch; shape (B, N_inv)."""
    return np.stack([evaluate_polynomial(f, X) for f in features.invariants], axis=1)


def evaluate_equivariants(features: PolyFeatureSet, X: np.ndarray) -> np.ndarray:
    """g_m(x) for a batch; shape (B, N_eq, d_U). Returns ones when there are no equivariants."""
    if not features.equivariants:
        return np.ones((X.shape[0], 1, 1))
    return np.stack(
        [np.stack([evaluate_polynomial(comp, X) for comp in g], axis=1) for g in features.equivariants],
        axis=1,
    )


def z2_line_features() -> PolyFeatureSet:
    """Z_2 on ℝ: invariant x², equivariant x."""
    return PolyFeatureSet(
        name="z2_line",
        dim=1,
        invariants=[polynomial({(2,): 1.0}, 1)],
        equivariants=[[polynomial({(1,): 1.0}, 1)]],
    )


def z2_plane_features(with_equivariants: bool = False) -> PolyFeatureSet:
    """Z_2 acting by x ↦ −x on ℝ²: invariants x1², x2², x1x2; equivariants x_i e_j."""
    invariants = [
        polynomial({(2, 0): 1.0}, 2),
        polynomial({(0, 2): 1.0}, 2),
        polynomial({(1, 1): 1.0}, 2),
    ]
    equivariants: List[List[Polynomial]] = []
    if with_equivariants:
        x1, x2, zero = polynomial({(1, 0): 1.0}, 2), polynomial({(0, 1): 1.0}, 2), zero_polynomial(2)
        equivariants = [[x1, zero], [zero, x1], [x2, zero], [zero, x2]]
    return PolyFeatureSet(name="z2_plane", dim=2, invariants=invariants, equivariants=equivariants)


def z4_rotation_features() -> PolyFeatureSet:
    """
    Quarter-turn rotations of ℝ² = ℂ: invariants |z|², Re z⁴, Im z⁴;
    equivariants z, iz, z̄³, iz̄³ written as real pairs.
    """
    invariants = [
        polynomial({(2, 0): 1.0, (0, 2): 1.0}, 2),
        polynomial({(4, 0): 1.0, (2, 2): -6.0, (0, 4): 1.0}, 2),
        polynomial({(3, 1): 4.0, (1, 3): -4.0}, 2),
    ]
    x, y = polynomial({(1, 0): 1.0}, 2), polynomial({(0, 1): 1.0}, 2)
    neg_y = polynomial({(0, 1): -1.0}, 2)
    re_zbar3 = polynomial({(3, 0): 1.0, (1, 2): -3.0}, 2)
    im_zbar3 = polynomial({(2, 1): -3.0, (0, 3): 1.0}, 2)
    neg_im_zbar3 = polynomial({(2, 1): 3.0, (0, 3): -1.0}, 2)
    equivariants = [[x, y], [neg_y, x], [re_zbar3, im_zbar3], [neg_im_zbar3, re_zbar3]]
    return PolyFeatureSet(name="z4_rotation", dim=2, invariants=invariants, equivariants=equivariants)


def power_sum_features(n: int, with_equivariants: bool = False) -> PolyFeatureSet:
    """S_n on ℝ^n: power sums p_k = Σ x_i^k (k = 1..n); equivariants (x_i^k)_i (k = 0..n−1)."""
    invariants = []
    for k in range(1, n + 1):
        invariants.append(polynomial({tuple(k if j == i else 0 for j in range(n)): 1.0 for i in range(n)}, n))
    equivariants: List[List[Polynomial]] = []
    if with_equivariants:
        for k in range(n):
            equivariants.append([
                polynomial({tuple(k if j == i else 0 for j in range(n)): 1.0}, n) for i in range(n)
            ])
    return PolyFeatureSet(name=f"power_sums_{n}", dim=n, invariants=invariants, equivariants=equivariants)


def validate_features(features: PolyFeatureSet, rep: OrthogonalRep,
                      rng: Optional[np.random.Generator] = None, points: int = 20,
                      tol: float = 1e-8) -> float:
    """
    Check f_s(R_g x) = f_s(x) and g_m(R_g x) = R_g g_m(x) at random points.

    Returns:
        Largest deviation observed

    Raises:
        ValueError: If dimensions disagree or a deviation exceeds ``tol``
    """
    if features.dim != rep.dim:
        raise ValueError(f"features act on {features.dim} variables, representation on {rep.dim}")
    if features.equivariants and features.out_dim != rep.dim:
        raise ValueError(f"equivariants map to dimension {features.out_dim}, representation has {rep.dim}")
    rng = rng if rng is not None else np.random.default_rng(0)
    X = rng.uniform(-1.0, 1.0, size=(points, rep.dim))
    f_base = evaluate_invariants(features, X)
    g_base = evaluate_equivariants(features, X) if features.equivariants else None
    worst = 0.0
    for R in rep.matrices:
        X_rot = X @ R.T
        worst = max(worst, float(np.max(np.abs(evaluate_invariants(features, X_rot) - f_base))))
        if g_base is not None:
            g_rot = evaluate_equivariants(features, X_rot)
            worst = max(worst, float(np.max(np.abs(g_rot - g_base @ R.T))))
    if worst > tol:
        logger.error(f"Features: {features.name} fails {rep.name} symmetry by {worst:.3e}")
        raise ValueError(f"feature set {features.name} is not {rep.name}-symmetric (deviation {worst:.3e})")
    return worst
