"""Charge-conserving convnet schema definitions."""
import math
from typing import Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import ChargeConservationError, SpecError
from app.schemas.arrays import ComplexArray
from app.schemas.grid import GridSpec, Signal, chain_length


_ARRAY_MODEL = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Coupling(BaseModel):
    """Quadratic weights w2[n, n1, n2] coupling charges μ1 and μ2 into μ."""

    model_config = _ARRAY_MODEL

    mu: int
    mu1: int
    mu2: int
    weights: ComplexArray = Field(..., description="Shape (d_out, c_in(μ1), c_in(μ2))")


class MultWeights(BaseModel):
    """
    One multiplication layer:
    Ψ_{μ,n} = w0_n·1_{μ=0} + Σ w1[μ][n, n1] Φ_{μ,n1} + Σ_{μ1+μ2=μ} w2[n, n1, n2] Φ_{μ1,n1} Φ_{μ2,n2}.

    Missing ``linear`` charges and absent couplings contribute zero.
    """

    model_config = _ARRAY_MODEL

    max_charge: int = Field(..., ge=0, description="T_diff; every charge satisfies |μ| ≤ T_diff")
    constant: ComplexArray = Field(..., description="w0, shape (d_out,)")
    linear: Dict[int, ComplexArray] = Field(default_factory=dict, description="w1 by charge, (d_out, c_in(μ))")
    couplings: List[Coupling] = Field(default_factory=list, description="w2 blocks")

    @model_validator(mode="after")
    def _check_charges(self) -> "MultWeights":
        T = self.max_charge
        if self.constant.ndim != 1:
            raise SpecError(f"constant must be a vector, got shape {self.constant.shape}")
        d_out = self.constant.shape[0]
        for mu, w in self.linear.items():
            if abs(mu) > T:
                raise ChargeConservationError(f"linear weight at charge {mu} exceeds max_charge {T}")
            if w.ndim != 2 or w.shape[0] != d_out:
                raise SpecError(f"linear[{mu}] has shape {w.shape}, expected ({d_out}, c_in)")
        for c in self.couplings:
            if c.mu1 + c.mu2 != c.mu:
                raise ChargeConservationError(
                    f"coupling ({c.mu1}, {c.mu2}) -> {c.mu} breaks charge conservation mu1 + mu2 = mu"
                )
            if max(abs(c.mu), abs(c.mu1), abs(c.mu2)) > T:
                raise ChargeConservationError(
                    f"coupling ({c.mu1}, {c.mu2}) -> {c.mu} leaves the charge range |mu| <= {T}"
                )
            if c.weights.ndim != 3 or c.weights.shape[0] != d_out:
                raise SpecError(f"coupling ({c.mu1}, {c.mu2}) has shape {c.weights.shape}, expected ({d_out}, c1, c2)")
        return self

    @property
    def d_out(self) -> int:
        return self.constant.shape[0]

    def charges(self) -> List[int]:
        return list(range(-self.max_charge, self.max_charge + 1))


class ChargeConvNetSpec(BaseModel):
    """
    Smoothing, differentiation and multiplication stages on λZ_L.

    The input grid has half-width ⌊Λ/λ⌋ + T_diff + ⌈4/λ²⌉ (extent Λ′); the
    output grid has half-width ⌊Λ/λ⌋. The last multiplication layer keeps
    only μ = 0 and takes the real part.
    """

    model_config = ConfigDict(
        frozen=True,
        arbitrary_types_allowed=True,
        json_schema_extra={
            "example": {
                "lambda": 0.5, "Lambda": 1.0, "T_diff": 1, "T_mult": 1, "d_mult": 1,
                "layers": [{"w0": [[0.0, 0.0]], "w1": {"0": [[[1.0, 0.0], [0.0, 0.0]]]}, "w2": []}]
            }
        },
    )

    spacing: float = Field(..., gt=0, description="λ")
    extent: float = Field(..., ge=0, description="Λ")
    t_diff: int = Field(..., ge=1, description="T_diff")
    d_mult: int = Field(..., ge=1, description="Channels per charge in hidden mult layers")
    input_channels: int = Field(1, ge=1, description="d_V")
    output_channels: int = Field(1, ge=1, description="d_U")
    layers: List[MultWeights] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_layers(self) -> "ChargeConvNetSpec":
        T = self.t_diff
        for t, layer in enumerate(self.layers):
            final = t == len(self.layers) - 1
            if layer.max_charge != T:
                raise SpecError(f"layers[{t}].max_charge={layer.max_charge} != T_diff={T}")
            want_out = self.output_channels if final else self.d_mult
            if layer.d_out != want_out:
                raise SpecError(f"layers[{t}] produces {layer.d_out} channels, expected {want_out}")
            c_in = self.input_widths(t)
            for mu, w in layer.linear.items():
                if final and mu != 0:
                    raise SpecError(f"final layer carries linear weights at charge {mu}; only μ=0 is allowed")
                if w.shape[1] != c_in[mu]:
                    raise SpecError(f"layers[{t}].linear[{mu}] reads {w.shape[1]} channels, input has {c_in[mu]}")
            for c in layer.couplings:
                if final and c.mu != 0:
                    raise SpecError(f"final layer couples into charge {c.mu}; only μ=0 is allowed")
                if c.weights.shape[1:] != (c_in[c.mu1], c_in[c.mu2]):
                    raise SpecError(
                        f"layers[{t}] coupling ({c.mu1}, {c.mu2}) has shape {c.weights.shape}, "
                        f"input widths are ({c_in[c.mu1]}, {c_in[c.mu2]})"
                    )
        return self

    @property
    def t_mult(self) -> int:
        return len(self.layers)

    @property
    def output_half_width(self) -> int:
        return int(math.floor(self.extent / self.spacing + 1e-9))

    @property
    def input_half_width(self) -> int:
        return self.output_half_width + self.t_diff + chain_length(self.spacing)

    @property
    def input_extent(self) -> float:
        """Λ′ = Λ + (T_diff + ⌈4/λ²⌉)λ."""
        return self.extent + (self.t_diff + chain_length(self.spacing)) * self.spacing

    def diff_width(self, mu: int) -> int:
        """Channels per charge leaving the diff stage: d_V·(T_diff − |μ| + 1)."""
        return self.input_channels * (self.t_diff - abs(mu) + 1)

    def input_widths(self, layer: int) -> Dict[int, int]:
        T = self.t_diff
        if layer == 0:
            return {mu: self.diff_width(mu) for mu in range(-T, T + 1)}
        return {mu: self.d_mult for mu in range(-T, T + 1)}


StackLabel = Tuple[int, ...]


class ChargedStack(BaseModel):
    """
    Charge-labelled complex signals on a common grid.

    Diff-stage labels are (s, μ) with |μ| ≤ s ≤ T_diff; entries with s − μ odd
    are stored as zeros. Mult-stage labels are (μ,), one multi-channel signal
    per charge; a final stack holds the single real entry (0,).
    """

    model_config = _ARRAY_MODEL

    stage: Literal["diff", "mult", "final"]
    max_charge: int = Field(..., ge=0)
    entries: Dict[StackLabel, Signal]

    @model_validator(mode="after")
    def _check_entries(self) -> "ChargedStack":
        grids = {s.grid for s in self.entries.values()}
        if len(grids) > 1:
            raise ValueError("stack entries must share one grid")
        for label, sig in self.entries.items():
            mu = label[-1]
            if abs(mu) > self.max_charge:
                raise ValueError(f"label {label} exceeds max charge {self.max_charge}")
            if self.stage == "diff":
                if len(label) != 2 or not abs(mu) <= label[0] <= self.max_charge:
                    raise ValueError(f"diff label {label} must be (s, μ) with |μ| ≤ s ≤ {self.max_charge}")
                if (label[0] - mu) % 2 and np.any(sig.values != 0):
                    raise ValueError(f"diff entry {label} has s − μ odd and must vanish")
            elif len(label) != 1:
                raise ValueError(f"{self.stage} label {label} must be (μ,)")
            if self.stage == "final" and (mu != 0 or sig.field != "real"):
                raise ValueError("final stack holds only the real μ=0 entry")
        return self

    @property
    def grid(self) -> GridSpec:
        return next(iter(self.entries.values())).grid

    def charges(self) -> List[int]:
        return sorted({label[-1] for label in self.entries})
