"""Translation-equivariant convnet schema definitions."""
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.arrays import FloatArray
from app.schemas.nets import Activation


_ARRAY_MODEL = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class ConvLayer(BaseModel):
    """
    Nonlinear layer σ(Σ_θ Σ_k w_{nθk} Φ_{sγ+θ,k} + h_n).

    ``weights[n, θ, k]`` enumerates θ ∈ Z_{L_rf} row-major over (θx, θy), each
    running from −L_rf to L_rf.
    """

    model_config = _ARRAY_MODEL

    weights: FloatArray = Field(..., description="Shape (d_out, (2L_rf+1)², d_in)")
    bias: FloatArray = Field(..., description="Shape (d_out,)")

    @property
    def d_in(self) -> int:
        return self.weights.shape[2]

    @property
    def d_out(self) -> int:
        return self.weights.shape[0]


class AffineLayer(BaseModel):
    """Pointwise final layer Σ_k w_{nk} Φ_k + h_n."""

    model_config = _ARRAY_MODEL

    weights: FloatArray = Field(..., description="Shape (d_U, d_T)")
    bias: FloatArray = Field(..., description="Shape (d_U,)")


def layer_diagnostics(receptive_field: int, input_channels: int, layers: List[ConvLayer],
                      final: AffineLayer) -> List[str]:
    """Shape problems of a layer stack, one message per offending field."""
    problems = []
    taps = (2 * receptive_field + 1) ** 2
    channels = input_channels
    for t, layer in enumerate(layers):
        w, h = layer.weights, layer.bias
        if w.ndim != 3:
            problems.append(f"layers[{t}].weights: expected 3 axes (d_out, taps, d_in), got shape {w.shape}")
            continue
        if w.shape[1] != taps:
            problems.append(f"layers[{t}].weights: {w.shape[1]} taps, receptive field L_rf={receptive_field} needs {taps}")
        if w.shape[2] != channels:
            name = "input_channels (d_V)" if t == 0 else f"layers[{t - 1}] output dimension"
            problems.append(f"layers[{t}].weights: input dimension {w.shape[2]} != {name} {channels}")
        if h.shape != (w.shape[0],):
            problems.append(f"layers[{t}].bias: shape {h.shape}, expected ({w.shape[0]},)")
        channels = w.shape[0]
    if final.weights.ndim != 2 or final.weights.shape[1] != channels:
        problems.append(f"final.weights: shape {final.weights.shape}, expected (d_U, {channels})")
    elif final.bias.shape != (final.weights.shape[0],):
        problems.append(f"final.bias: shape {final.bias.shape}, expected ({final.weights.shape[0]},)")
    return problems


class ConvNetBase(BaseModel):
    model_config = _ARRAY_MODEL

    spacing: float = Field(..., gt=0, description="Grid spacing λ")
    receptive_field: int = Field(..., ge=1, description="L_rf")
    input_channels: int = Field(..., ge=1, description="d_V")
    layers: List[ConvLayer] = Field(default_factory=list, description="Nonlinear layers t = 1..T−1")
    final: AffineLayer
    activation: Activation = "tanh"

    @property
    def depth(self) -> int:
        """T, counting the final affine layer."""
        return len(self.layers) + 1

    @property
    def output_channels(self) -> int:
        return self.final.weights.shape[0]

    def dims(self) -> List[int]:
        """Feature dimensions d_1..d_{T+1}."""
        return [self.input_channels] + [layer.d_out for layer in self.layers] + [self.output_channels]


class BasicConvNetSpec(ConvNetBase):
    """Basic (no-pooling) convnet on grids λZ_L with output cutoff Λ."""

    extent: float = Field(..., ge=0, description="Output cutoff Λ")

    @model_validator(mode="after")
    def _check_layers(self) -> "BasicConvNetSpec":
        problems = layer_diagnostics(self.receptive_field, self.input_channels, self.layers, self.final)
        if problems:
            raise ValueError("; ".join(problems))
        return self

    @property
    def output_half_width(self) -> int:
        return int(math.floor(self.extent / self.spacing + 1e-9))

    def schedule(self) -> List[int]:
        """Half-widths of W_1..W_T: ⌊Λ/λ⌋ + (T − t)·L_rf."""
        return [self.output_half_width + (self.depth - t) * self.receptive_field for t in range(1, self.depth + 1)]

    @property
    def input_half_width(self) -> int:
        return self.schedule()[0]


def downsampled_ranges(receptive_field: int, stride: int, depth: int) -> List[int]:
    """L_{t,T} = L_rf(1 + s + … + s^{T−t−1}) for t = 1..T (L_{T,T} = 0)."""
    return [receptive_field * sum(stride ** i for i in range(depth - t)) for t in range(1, depth + 1)]


class DownsampledConvNetSpec(ConvNetBase):
    """
    Convnet with decimation by stride s between layers.

    Layer t reads Φ_{sγ+θ} on the grid s^{t−1}λZ_{L_{t,T}}; the last
    nonlinear layer leaves a single node, where the affine layer acts.
    """

    stride: int = Field(..., ge=1, description="Decimation stride s")
    ranges: Optional[List[int]] = Field(
        None, description="Declared L_{t,T}; derived from the recurrence when omitted"
    )

    @model_validator(mode="after")
    def _check_geometry(self) -> "DownsampledConvNetSpec":
        problems = []
        if self.stride > 2 * self.receptive_field + 1:
            problems.append(
                f"stride: s={self.stride} exceeds the receptive field size 2L_rf+1={2 * self.receptive_field + 1}"
            )
        problems.extend(layer_diagnostics(self.receptive_field, self.input_channels, self.layers, self.final))
        if self.ranges is not None:
            if len(self.ranges) != self.depth:
                problems.append(f"ranges: {len(self.ranges)} entries for depth T={self.depth}")
            else:
                if self.ranges[-1] != 0:
                    problems.append(f"ranges[{self.depth - 1}]: L_T,T must be 0, got {self.ranges[-1]}")
                for t in range(self.depth - 1):
                    want = self.stride * self.ranges[t + 1] + self.receptive_field
                    if self.ranges[t] != want:
                        problems.append(
                            f"ranges[{t}]: L_{t + 1},T={self.ranges[t]} violates L_t,T = s·L_t+1,T + L_rf = {want}"
                        )
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def schedule(self) -> List[int]:
        return downsampled_ranges(self.receptive_field, self.stride, self.depth)

    @property
    def input_half_width(self) -> int:
        return self.schedule()[0]


class SpecReport(BaseModel):
    """Outcome of validate_spec."""

    ok: bool
    diagnostics: List[str] = Field(default_factory=list)
    schedule: List[int] = Field(default_factory=list, description="Per-layer half-widths of W_1..W_T")
    spacings: List[float] = Field(default_factory=list, description="Per-layer grid spacings")
