"""
Explicit S_N-invariant network and power sums.

Every sum over the permuted index n runs over values sorted in ascending
order, so row permutations of the input give bit-identical results.
"""
import itertools
from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np

from app.core.errors import SpecError
from app.schemas.nets import SymNetWeights
from app.services.invariant.activations import get_activation


def _ordered_sum(values: np.ndarray, axis: int) -> np.ndarray:
    return np.sum(np.sort(values, axis=axis), axis=axis)


def power_sums(y: np.ndarray) -> np.ndarray:
    """
    First N coordinate power sums p_k = Σ_n y_n^k, k = 1..N.

    Args:
        y: Vector of length N ≥ 1, or a batch of shape (B, N)

    Returns:
        Array of the same shape as ``y``
    """
    Y = np.asarray(y, dtype=float)
    if Y.shape[-1] < 1:
        raise ValueError("power_sums needs at least one coordinate")
    n = Y.shape[-1]
    powers = Y[..., None, :] ** np.arange(1, n + 1)[:, None]
    return _ordered_sum(powers, axis=-1)


def _inner_projection(a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Σ_m a_tm X_nm accumulated in ascending m; shape (..., N, T1)."""
    acc = np.zeros(X.shape[:-1] + (a.shape[0],))
    for m in range(a.shape[1]):
        acc = acc + X[..., m, None] * a[:, m]
    return acc


def symnet_hidden(w: SymNetWeights, X: np.ndarray) -> np.ndarray:
    """
    Outer hidden units σ(Σ_q w_qt Σ_n σ(b_q Σ_m a_tm X_nm + e_q) + h_t).

    Args:
        w: Network weights
        X: Input of shape (N, M) or a batch (B, N, M)

    Returns:
        Array of shape (T1,) or (B, T1)

    Raises:
        SpecError: If the column count does not match M
    """
    X = np.asarray(X, dtype=float)
    if X.ndim not in (2, 3) or X.shape[-1] != w.M:
        raise SpecError(f"input must have shape (N, {w.M}) or (B, N, {w.M}), got {X.shape}")
    sigma = get_activation(w.activation)
    proj = _inner_projection(w.a, X)
    inner = sigma(w.b[:, None] * proj[..., None, :] + w.e[:, None])
    pooled = _ordered_sum(inner, axis=-3)
    return sigma(np.einsum("qt,...qt->...t", w.w, pooled) + w.h)


def symmetric_net_eval(w: SymNetWeights, X: np.ndarray):
    """
    Σ_t c_t σ(Σ_q w_qt Σ_n σ(b_q Σ_m a_tm X_nm + e_q) + h_t).

    Returns:
        A float for a single (N, M) input, an array of shape (B,) for a batch
    """
    out = symnet_hidden(w, X) @ w.c
    return float(out) if np.ndim(out) == 0 else out


def random_symnet(m: int, t1: int, t2: int, rng: np.random.Generator, n_points: int = 1,
                  activation: str = "tanh", inner_scale: float = 2.0) -> SymNetWeights:
    """
    Random inner weights with zero outer coefficients c.

    a, b, e, h are uniform on [−1, 1] (b scaled by ``inner_scale``); w_qt is
    uniform on [−1, 1] divided by the fan-in N·T2.
    """
    a = rng.uniform(-1.0, 1.0, size=(t1, m))
    b = inner_scale * rng.uniform(-1.0, 1.0, size=t2)
    e = rng.uniform(-1.0, 1.0, size=t2)
    w = rng.uniform(-1.0, 1.0, size=(t2, t1)) / (n_points * t2)
    h = rng.uniform(-1.0, 1.0, size=t1)
    return SymNetWeights(c=np.zeros(t1), h=h, w=w, b=b, e=e, a=a, activation=activation)


def prefix(w: SymNetWeights, t1: int) -> SymNetWeights:
    """The first ``t1`` outer units of a network; nested prefixes share inner weights."""
    if not 1 <= t1 <= w.T1:
        raise SpecError(f"prefix width {t1} outside 1..{w.T1}")
    return SymNetWeights(c=w.c[:t1], h=w.h[:t1], w=w.w[:, :t1], b=w.b, e=w.e, a=w.a[:t1],
                         activation=w.activation)


def orbit_separation(n: int, radius: int) -> Tuple[int, List[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    """
    Brute-force check that power sums separate S_n orbits on {−radius..radius}^n.

    Power sums are computed in exact integer arithmetic.

    Returns:
        (number of vectors checked, list of colliding pairs from different orbits)
    """
    images: Dict[Tuple[int, ...], set] = defaultdict(set)
    count = 0
    for vec in itertools.product(range(-radius, radius + 1), repeat=n):
        image = tuple(sum(v ** k for v in vec) for k in range(1, n + 1))
        images[image].add(tuple(sorted(vec)))
        count += 1
    collisions = []
    for orbits in images.values():
        if len(orbits) > 1:
            ordered = sorted(orbits)
            collisions.append((ordered[0], ordered[1]))
    return count, collisions
