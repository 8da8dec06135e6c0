"""Built-in finite orthogonal representations."""
import itertools
import math
from typing import List, Sequence

import numpy as np

from app.schemas.nets import OrthogonalRep


def composition_table(matrices: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """
    Derive table[g, h] = index of R_g R_h by matching matrix products.

    Raises:
        ValueError: If a product is not among the given matrices
    """
    order = matrices.shape[0]
    flat = matrices.reshape(order, -1)
    table = np.empty((order, order), dtype=np.int64)
    for g in range(order):
        products = np.einsum("ij,hjk->hik", matrices[g], matrices).reshape(order, -1)
        dist = np.max(np.abs(products[:, None, :] - flat[None, :, :]), axis=2)
        idx = np.argmin(dist, axis=1)
        if np.any(dist[np.arange(order), idx] > tol):
            raise ValueError("matrix set is not closed under multiplication")
        table[g] = idx
    return table


def rep_from_matrices(name: str, matrices: Sequence[np.ndarray]) -> OrthogonalRep:
    mats = np.asarray(matrices, dtype=float)
    return OrthogonalRep(name=name, matrices=mats, table=composition_table(mats))


def trivial(dim: int) -> OrthogonalRep:
    return rep_from_matrices(f"trivial_{dim}", [np.eye(dim)])


def sign_flip(dim: int) -> OrthogonalRep:
    """Z_2 acting by x ↦ −x on every coordinate."""
    return rep_from_matrices(f"z2_sign_{dim}", [np.eye(dim), -np.eye(dim)])


def plane_rotations(n: int) -> OrthogonalRep:
    """Z_n acting on ℝ² by rotations through multiples of 2π/n."""
    mats: List[np.ndarray] = []
    for k in range(n):
        if n % 4 == 0 and (4 * k) % n == 0:
            # exact quarter turns
            quarter = (4 * k) // n
            c, s = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][quarter]
        else:
            angle = 2.0 * math.pi * k / n
            c, s = math.cos(angle), math.sin(angle)
        mats.append(np.array([[c, -s], [s, c]]))
    return rep_from_matrices(f"z{n}_rotation", mats)


def cyclic_shifts(n: int) -> OrthogonalRep:
    """Z_n acting on ℝ^n by cyclic coordinate shifts."""
    eye = np.eye(n)
    return rep_from_matrices(f"z{n}_shift", [np.roll(eye, k, axis=0) for k in range(n)])


def permutations(n: int) -> OrthogonalRep:
    """S_n acting on ℝ^n by permuting coordinates; only sensible for small n."""
    eye = np.eye(n)
    mats = [eye[list(perm)] for perm in itertools.permutations(range(n))]
    return rep_from_matrices(f"s{n}_permutation", mats)
