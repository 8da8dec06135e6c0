"""Group-averaged, polynomial-feature and polarization ansatzes."""
from typing import Literal, Tuple, Union

import numpy as np

from app.schemas.nets import OrthogonalRep, PolarizedAnsatz, PolyAnsatzWeights, PolyFeatureSet, ShallowNet
from app.services.invariant.activations import get_activation
from app.services.invariant.polynomials import evaluate_equivariants, evaluate_invariants


def _as_batch(x: np.ndarray, dim: int) -> Tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != dim:
        raise ValueError(f"input dimension {X.shape[1]} does not match {dim}")
    return X, single


def _unbatch(out: np.ndarray, single: bool) -> Union[float, np.ndarray]:
    if single:
        out = out[0]
        return float(out) if np.ndim(out) == 0 else out
    return out


def symmetrized_hidden(rep: OrthogonalRep, net: ShallowNet, X: np.ndarray) -> np.ndarray:
    """Group-averaged hidden units (1/|Γ|) Σ_g σ(l_n(R_g x) + h_n); shape (B, N)."""
    sigma = get_activation(net.activation)
    X_orbit = np.einsum("gij,bj->gbi", rep.matrices, X)
    return np.mean(sigma(X_orbit @ net.weights.T + net.bias), axis=0)


def symmetrize_eval(rep: OrthogonalRep, net: ShallowNet, x: np.ndarray,
                    mode: Literal["invariant", "equivariant"] = "invariant") -> Union[float, np.ndarray]:
    """
    Evaluate a shallow net averaged over a finite group.

    Invariant mode returns (1/|Γ|) Σ_g Σ_n c_n σ(l_n(R_g x) + h_n); equivariant
    mode returns (1/|Γ|) Σ_g Σ_n R_g^{-1} y_n σ(l_n(R_g x) + h_n).

    Args:
        rep: Orthogonal representation on the input space
        net: Shallow-net weights; ``outputs`` is required in equivariant mode
        x: Input vector (d,) or batch (B, d)
        mode: "invariant" or "equivariant"

    Returns:
        Scalar / vector for a single input, arrays for a batch

    Raises:
        ValueError: On dimension mismatch
    """
    if net.input_dim != rep.dim:
        raise ValueError(f"net expects dimension {net.input_dim}, representation has {rep.dim}")
    X, single = _as_batch(x, rep.dim)
    sigma = get_activation(net.activation)
    X_orbit = np.einsum("gij,bj->gbi", rep.matrices, X)
    hidden = sigma(X_orbit @ net.weights.T + net.bias)

    if mode == "invariant":
        return _unbatch(np.mean(hidden @ net.c, axis=0), single)
    if mode != "equivariant":
        raise ValueError(f"mode must be 'invariant' or 'equivariant', got {mode!r}")
    if net.outputs is None or net.outputs.shape[1] != rep.dim:
        raise ValueError("equivariant mode needs output vectors y_n in the representation space")
    summed = hidden @ net.outputs
    back = np.einsum("gji,gbj->gbi", rep.matrices, summed)
    return _unbatch(np.mean(back, axis=0), single)


def _ansatz_combine(F: np.ndarray, G: np.ndarray, c: np.ndarray, w: np.ndarray, h: np.ndarray,
                    activation: str, scalar: bool) -> np.ndarray:
    sigma = get_activation(activation)
    hidden = sigma(np.einsum("mns,bs->bmn", w, F) + h)
    if scalar:
        return np.einsum("mn,bmn->b", c, hidden)
    return np.einsum("mn,bmn,bmu->bu", c, hidden, G)


def poly_ansatz_eval(features: PolyFeatureSet, weights: PolyAnsatzWeights,
                     x: np.ndarray) -> Union[float, np.ndarray]:
    """
    Σ_n Σ_m c_mn g_m(x) σ(Σ_s w_mns f_s(x) + h_mn).

    With no equivariants in ``features`` the ansatz is the invariant one (g ≡ 1).

    Raises:
        ValueError: If weight indices exceed the feature counts
    """
    if weights.c.shape[0] != features.n_equivariants:
        raise ValueError(f"weights cover {weights.c.shape[0]} equivariants, features have {features.n_equivariants}")
    if weights.w.shape[2] != len(features.invariants):
        raise ValueError(f"weights cover {weights.w.shape[2]} invariants, features have {len(features.invariants)}")
    X, single = _as_batch(x, features.dim)
    F = evaluate_invariants(features, X)
    scalar = not features.equivariants
    G = None if scalar else evaluate_equivariants(features, X)
    out = _ansatz_combine(F, G, weights.c, weights.w, weights.h, weights.activation, scalar)
    return _unbatch(out, single)


def apply_block_map(ansatz_or_isotypes, blocks, X: np.ndarray) -> np.ndarray:
    """
    Apply A = ⊕_α 1_{V_α} ⊗ A_α to a batch.

    Each isotypic block of x is read as a (dim V_α, m_α) matrix X_α and mapped
    to X_α A_αᵀ.
    """
    isotypes = getattr(ansatz_or_isotypes, "isotypes", ansatz_or_isotypes)
    parts = []
    offset = 0
    for iso, A in zip(isotypes, blocks):
        size = iso.dim * iso.multiplicity
        block = X[:, offset:offset + size].reshape(X.shape[0], iso.dim, iso.multiplicity)
        parts.append((block @ A.T).reshape(X.shape[0], iso.dim * A.shape[0]))
        offset += size
    return np.concatenate(parts, axis=1)


def polarized_hidden(ansatz: PolarizedAnsatz, X: np.ndarray) -> np.ndarray:
    """σ(Σ_s w_mts f_s(A_t x) + h_mt) with g_m(A_t x) folded in; shape (B, N_eq, T[, d_U])."""
    sigma = get_activation(ansatz.activation)
    scalar = not ansatz.features.equivariants
    columns = []
    for t, blocks in enumerate(ansatz.maps):
        Y = apply_block_map(ansatz, blocks, X)
        F = evaluate_invariants(ansatz.features, Y)
        act = sigma(F @ ansatz.w[:, t, :].T + ansatz.h[:, t])
        if scalar:
            columns.append(act)
        else:
            columns.append(act[:, :, None] * evaluate_equivariants(ansatz.features, Y))
    return np.stack(columns, axis=2)


def polarized_ansatz_eval(ansatz: PolarizedAnsatz, x: np.ndarray) -> Union[float, np.ndarray]:
    """
    Evaluate Σ_t c_t σ(Σ_s w_st f_s(A_t x) + h_t) or its equivariant form
    Σ_t Σ_m c_mt g_m(A_t x) σ(Σ_s w_mst f_s(A_t x) + h_mt).

    Raises:
        ValueError: If x does not have dimension Σ_α m_α dim V_α
    """
    X, single = _as_batch(x, ansatz.input_dim)
    hidden = polarized_hidden(ansatz, X)
    if not ansatz.features.equivariants:
        out = np.einsum("mt,bmt->b", ansatz.c, hidden)
    else:
        out = np.einsum("mt,bmtu->bu", ansatz.c, hidden)
    return _unbatch(out, single)
