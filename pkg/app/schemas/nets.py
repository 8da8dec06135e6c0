"""Invariant and equivariant network schema definitions."""
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.arrays import FloatArray, IntArray


Activation = Literal["tanh", "sigmoid", "softplus"]

_ARRAY_MODEL = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class OrthogonalRep(BaseModel):
    """
    Finite group acting orthogonally on ℝ^d.

    ``matrices[g]`` is R_g; ``table[g, h]`` is the index of the product g·h.
    """

    model_config = _ARRAY_MODEL

    name: str = Field("group", description="Human-readable label")
    matrices: FloatArray
    table: IntArray

    @model_validator(mode="after")
    def _check_group(self) -> "OrthogonalRep":
        mats, table = self.matrices, self.table
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"matrices must have shape (|Γ|, d, d), got {mats.shape}")
        order = mats.shape[0]
        if table.shape != (order, order):
            raise ValueError(f"table must have shape ({order}, {order}), got {table.shape}")
        if table.min() < 0 or table.max() >= order:
            raise ValueError("table entries must index group elements")
        eye = np.eye(mats.shape[1])
        gram = np.einsum("gji,gjk->gik", mats, mats)
        if np.max(np.abs(gram - eye)) > 1e-10:
            raise ValueError("representation matrices are not orthogonal to 1e-10")
        products = np.einsum("gij,hjk->ghik", mats, mats)
        if np.max(np.abs(products - mats[table])) > 1e-10:
            raise ValueError("composition table disagrees with the matrix products")
        identities = [e for e in range(order)
                      if np.array_equal(table[e], np.arange(order)) and np.array_equal(table[:, e], np.arange(order))]
        if not identities:
            raise ValueError("composition table has no identity element")
        e = identities[0]
        for g in range(order):
            if not np.any(table[g] == e):
                raise ValueError(f"element {g} has no inverse")
        lhs = table[table[:, :, None], np.arange(order)[None, None, :]]
        rhs = table[np.arange(order)[:, None, None], table[None, :, :]]
        if not np.array_equal(lhs, rhs):
            raise ValueError("composition table is not associative")
        return self

    @property
    def order(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def identity(self) -> int:
        order = self.order
        for e in range(order):
            if np.array_equal(self.table[e], np.arange(order)):
                return e
        raise ValueError("no identity element")

    def inverse(self, g: int) -> int:
        return int(np.nonzero(self.table[g] == self.identity)[0][0])


class ShallowNet(BaseModel):
    """One hidden layer: units c_n σ(l_n·x + h_n), optional output vectors y_n."""

    model_config = _ARRAY_MODEL

    c: FloatArray = Field(..., description="Output coefficients, shape (N,)")
    weights: FloatArray = Field(..., description="Linear forms l_n as rows, shape (N, d)")
    bias: FloatArray = Field(..., description="Biases h_n, shape (N,)")
    outputs: Optional[FloatArray] = Field(None, description="Output vectors y_n, shape (N, d_U)")
    activation: Activation = "tanh"

    @model_validator(mode="after")
    def _check_shapes(self) -> "ShallowNet":
        n = self.c.shape[0]
        if self.c.ndim != 1 or self.weights.ndim != 2 or self.weights.shape[0] != n or self.bias.shape != (n,):
            raise ValueError(
                f"inconsistent shallow-net shapes: c {self.c.shape}, weights {self.weights.shape}, bias {self.bias.shape}"
            )
        if self.outputs is not None and (self.outputs.ndim != 2 or self.outputs.shape[0] != n):
            raise ValueError(f"outputs must have shape ({n}, d_U), got {self.outputs.shape}")
        return self

    @property
    def units(self) -> int:
        return self.c.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]


class Polynomial(BaseModel):
    """Sparse real polynomial Σ_t coeffs[t] Π_i x_i^{exponents[t, i]}."""

    model_config = _ARRAY_MODEL

    exponents: IntArray = Field(..., description="Monomial exponents, shape (T, d)")
    coeffs: FloatArray = Field(..., description="Monomial coefficients, shape (T,)")

    @model_validator(mode="after")
    def _check_shapes(self) -> "Polynomial":
        if self.exponents.ndim != 2 or self.coeffs.shape != (self.exponents.shape[0],):
            raise ValueError(
                f"exponents {self.exponents.shape} and coeffs {self.coeffs.shape} do not match"
            )
        if self.exponents.size and self.exponents.min() < 0:
            raise ValueError("exponents must be nonnegative")
        return self

    @property
    def dim(self) -> int:
        return self.exponents.shape[1]


class PolyFeatureSet(BaseModel):
    """
    Generating invariants f_s and equivariants g_m of a representation.

    Each equivariant is listed by its output components. With no equivariants
    the ansatz is scalar and uses g ≡ 1.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = "features"
    dim: int = Field(..., ge=1, description="Number of input variables d")
    invariants: List[Polynomial]
    equivariants: List[List[Polynomial]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_dims(self) -> "PolyFeatureSet":
        if not self.invariants:
            raise ValueError("at least one invariant is required")
        for poly in self.invariants:
            if poly.dim != self.dim:
                raise ValueError(f"invariant over {poly.dim} variables, expected {self.dim}")
        widths = {len(g) for g in self.equivariants}
        if len(widths) > 1:
            raise ValueError("all equivariants must share the output dimension")
        for g in self.equivariants:
            for poly in g:
                if poly.dim != self.dim:
                    raise ValueError(f"equivariant component over {poly.dim} variables, expected {self.dim}")
        return self

    @property
    def out_dim(self) -> int:
        return len(self.equivariants[0]) if self.equivariants else 1

    @property
    def n_equivariants(self) -> int:
        return max(len(self.equivariants), 1)


class PolyAnsatzWeights(BaseModel):
    """Weights (c_mn, w_mns, h_mn) of the polynomial-feature ansatz."""

    model_config = _ARRAY_MODEL

    c: FloatArray = Field(..., description="Shape (N_eq, N)")
    w: FloatArray = Field(..., description="Shape (N_eq, N, N_inv)")
    h: FloatArray = Field(..., description="Shape (N_eq, N)")
    activation: Activation = "tanh"

    @model_validator(mode="after")
    def _check_shapes(self) -> "PolyAnsatzWeights":
        if self.c.ndim != 2 or self.h.shape != self.c.shape or self.w.ndim != 3 or self.w.shape[:2] != self.c.shape:
            raise ValueError(
                f"inconsistent ansatz shapes: c {self.c.shape}, w {self.w.shape}, h {self.h.shape}"
            )
        return self


class Isotype(BaseModel):
    """Isotypic block V_α ⊗ ℝ^{m_α} of the input, laid out as a (dim, multiplicity) matrix."""

    model_config = ConfigDict(frozen=True)

    name: str = "isotype"
    dim: int = Field(..., ge=1, description="dim V_α")
    multiplicity: int = Field(..., ge=1, description="m_α")
    reference_multiplicity: Optional[int] = Field(
        None, ge=1, description="Copies of V_α in the reference module; defaults to dim V_α"
    )

    @property
    def reference(self) -> int:
        return self.reference_multiplicity or self.dim


class PolarizedAnsatz(BaseModel):
    """
    Polarization ansatz: shared features on the reference module V′ composed
    with block maps A_t = ⊕_α 1_{V_α} ⊗ A_α^{(t)}.

    ``maps[t][α]`` has shape (reference multiplicity, m_α).
    """

    model_config = _ARRAY_MODEL

    isotypes: List[Isotype]
    maps: List[List[FloatArray]]
    features: PolyFeatureSet
    c: FloatArray = Field(..., description="Shape (N_eq, T)")
    w: FloatArray = Field(..., description="Shape (N_eq, T, N_inv)")
    h: FloatArray = Field(..., description="Shape (N_eq, T)")
    activation: Activation = "tanh"

    @model_validator(mode="after")
    def _check_blocks(self) -> "PolarizedAnsatz":
        for t, blocks in enumerate(self.maps):
            if len(blocks) != len(self.isotypes):
                raise ValueError(f"map {t} has {len(blocks)} blocks for {len(self.isotypes)} isotypes")
            for iso, block in zip(self.isotypes, blocks):
                if block.shape != (iso.reference, iso.multiplicity):
                    raise ValueError(
                        f"map {t} block for {iso.name} has shape {block.shape}, "
                        f"expected ({iso.reference}, {iso.multiplicity})"
                    )
        reference_dim = sum(iso.dim * iso.reference for iso in self.isotypes)
        if self.features.dim != reference_dim:
            raise ValueError(f"features act on {self.features.dim} variables, reference module has {reference_dim}")
        n_maps = len(self.maps)
        n_eq = self.features.n_equivariants
        n_inv = len(self.features.invariants)
        if self.c.shape != (n_eq, n_maps) or self.h.shape != (n_eq, n_maps) or self.w.shape != (n_eq, n_maps, n_inv):
            raise ValueError(
                f"outer weights must have shapes ({n_eq}, {n_maps}) and ({n_eq}, {n_maps}, {n_inv}); "
                f"got c {self.c.shape}, w {self.w.shape}, h {self.h.shape}"
            )
        return self

    @property
    def input_dim(self) -> int:
        return sum(iso.dim * iso.multiplicity for iso in self.isotypes)


class SymNetWeights(BaseModel):
    """
    Weights of Σ_t c_t σ(Σ_q w_qt Σ_n σ(b_q Σ_m a_tm X_nm + e_q) + h_t).
    """

    model_config = ConfigDict(
        frozen=True,
        arbitrary_types_allowed=True,
        json_schema_extra={
            "example": {
                "c": [1.0], "h": [0.0], "w": [[1.0]], "b": [1.0], "e": [0.0], "a": [[1.0]],
                "activation": "tanh"
            }
        },
    )

    c: FloatArray = Field(..., description="Shape (T1,)")
    h: FloatArray = Field(..., description="Shape (T1,)")
    w: FloatArray = Field(..., description="Shape (T2, T1)")
    b: FloatArray = Field(..., description="Shape (T2,)")
    e: FloatArray = Field(..., description="Shape (T2,)")
    a: FloatArray = Field(..., description="Shape (T1, M)")
    activation: Activation = "tanh"

    @model_validator(mode="after")
    def _check_shapes(self) -> "SymNetWeights":
        t1, t2 = self.c.shape[0], self.b.shape[0]
        ok = (
            self.c.ndim == 1 and self.h.shape == (t1,) and self.w.shape == (t2, t1)
            and self.b.shape == (t2,) and self.e.shape == (t2,)
            and self.a.ndim == 2 and self.a.shape[0] == t1
        )
        if not ok:
            raise ValueError(
                f"inconsistent shapes: c {self.c.shape}, h {self.h.shape}, w {self.w.shape}, "
                f"b {self.b.shape}, e {self.e.shape}, a {self.a.shape}"
            )
        return self

    @property
    def T1(self) -> int:
        return self.c.shape[0]

    @property
    def T2(self) -> int:
        return self.b.shape[0]

    @property
    def M(self) -> int:
        return self.a.shape[1]
