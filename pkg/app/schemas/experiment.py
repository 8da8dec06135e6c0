"""Experiment configuration and report schema definitions."""
import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from app.schemas.grid import AnalyticField, PolyTerm


def _descending(values: List[float]) -> List[float]:
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError(f"λ values must be strictly descending, got {values}")
    return values


def _ascending(values: List[int]) -> List[int]:
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"widths must be strictly ascending, got {values}")
    return values


Tolerance = Annotated[float, Field(gt=0)]
Spacing = Annotated[float, Field(gt=0, le=1)]
LambdaList = Annotated[List[Spacing], Field(min_length=1), AfterValidator(_descending)]
WidthList = Annotated[List[Annotated[int, Field(ge=1)]], Field(min_length=1), AfterValidator(_ascending)]
Orders = Tuple[Annotated[int, Field(ge=0)], Annotated[int, Field(ge=0)]]
Shift = Tuple[int, int]


class ExperimentBase(BaseModel):
    """Fields shared by every experiment kind; unknown keys are rejected."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Optional[str] = Field(None, description="Label used in logs and the report")
    seed: int = Field(0, ge=0, description="Root seed; every case derives its generator from it")
    output_dir: Optional[str] = Field(None, description="Report directory; overridden by --out and EQUINET_OUT")

    @property
    def label(self) -> str:
        return self.name or self.kind


class StencilIdentitiesConfig(ExperimentBase):
    """Exact stencil identities plus conjugation and commutation on random signals."""

    kind: Literal["stencil_identities"]
    lambdas: LambdaList = [1.0, 0.5]
    half_width: int = Field(6, ge=3)
    random_signals: int = Field(5, ge=1)
    tolerance: Tolerance = 1e-12
    commutation_tolerance: Tolerance = Field(1e-12, description="Relative to the largest output value")


class FourierConsistencyConfig(ExperimentBase):
    """Parseval, round trip, symbol-vs-stencil agreement, kernel masses and the norm bound."""

    kind: Literal["fourier_consistency"]
    lambdas: LambdaList = [1.0, 0.5]
    half_widths: List[Annotated[int, Field(ge=0)]] = Field([4, 8, 16, 32], min_length=1)
    random_signals: int = Field(20, ge=1)
    tolerance: Tolerance = Field(1e-10, description="Relative Parseval and round-trip error")
    symbol_pairs: List[Orders] = [(0, 0), (1, 0), (0, 1), (1, 1)]
    symbol_tolerance: Tolerance = 1e-8
    kernel_pairs: List[Orders] = [(0, 0), (1, 0), (1, 1), (2, 0)]
    kernel_lambdas: LambdaList = [1.0, 0.5, 0.25]
    mass_tolerance: Tolerance = 1e-8


class CltSweepConfig(ExperimentBase):
    """Discrete-to-continuum kernel gap over a λ sweep."""

    kind: Literal["clt_sweep"]
    pairs: List[Orders] = Field([(0, 0), (1, 0), (1, 1), (2, 0)], min_length=1)
    lambdas: LambdaList = [1.0, 0.5, 0.25, 0.125]
    final_ratio: Tolerance = Field(0.15, description="gap at the last λ must stay below this multiple of the first")
    mass_tolerance: Tolerance = 1e-8


class SnInvarianceFitConfig(ExperimentBase):
    """Permutation invariance, orbit separation and width sweeps of the S_N network."""

    kind: Literal["sn_invariance_fit"]
    n_points: int = Field(6, ge=1, description="N")
    dim: int = Field(3, ge=1, description="M")
    widths: WidthList = [8, 32, 128]
    inner_width: int = Field(16, ge=1, description="T2")
    seeds: int = Field(10, ge=1)
    train_size: int = Field(600, ge=1)
    test_size: int = Field(400, ge=1)
    box: float = Field(0.75, gt=0, description="Inputs are uniform on [−box, box]")
    reg: float = Field(1e-6, ge=0)
    exhaustive_n: int = Field(4, ge=1, le=7)
    random_n: int = Field(12, ge=1)
    random_permutations: int = Field(200, ge=1)
    invariance_tolerance: Tolerance = 1e-10
    rmse_ratio: Tolerance = Field(0.1, description="Final median test RMSE over target standard deviation")
    orbit_ns: List[Annotated[int, Field(ge=1, le=5)]] = Field([3, 4], min_length=1, description="N values for orbit separation")
    orbit_radius: int = Field(2, ge=1, le=4)


class BasicEquivarianceConfig(ExperimentBase):
    """Partial translation equivariance of random basic convnets."""

    kind: Literal["basic_equivariance"]
    trials: int = Field(50, ge=1)
    spacing: Spacing = 0.5
    extent: float = Field(2.0, ge=0)
    receptive_fields: List[Annotated[int, Field(ge=1)]] = Field([1, 2], min_length=1)
    depths: List[Annotated[int, Field(ge=1)]] = Field([2, 3], min_length=1, description="Nonlinear layers T − 1")
    max_channels: int = Field(3, ge=1)
    max_shift: int = Field(2, ge=1)
    tolerance: Tolerance = 1e-12


class DownsampleNonequivarianceConfig(ExperimentBase):
    """Loss of equivariance under decimation, stride rejection and the s = 1 reduction."""

    kind: Literal["downsample_nonequivariance"]
    trials: int = Field(5, ge=1)
    spacing: Spacing = 1.0
    receptive_field: int = Field(1, ge=1)
    stride: int = Field(2, ge=2)
    dims: List[Annotated[int, Field(ge=1)]] = Field([1, 4, 4, 1], min_length=2)
    input_half_width: int = Field(12, ge=1)
    shift: Shift = (1, 0)
    threshold: Tolerance = Field(1e-3, description="A violation must exceed this somewhere")
    tolerance: Tolerance = Field(1e-12, description="Positive control and s = 1 reduction")
    reject_stride: int = Field(4, ge=1)
    reject_receptive_field: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_rejection_case(self) -> "DownsampleNonequivarianceConfig":
        if self.reject_stride <= 2 * self.reject_receptive_field + 1:
            raise ValueError("reject_stride must exceed 2·reject_receptive_field + 1")
        if self.stride > 2 * self.receptive_field + 1:
            raise ValueError("stride must not exceed 2·receptive_field + 1")
        return self


class ChargeRotationConfig(ExperimentBase):
    """Charge conservation and quarter-turn symmetry of random charge convnets."""

    kind: Literal["charge_rotation"]
    quarter_turns: List[Annotated[int, Field(ge=1, le=3)]] = [1, 2, 3]
    specs: int = Field(20, ge=1)
    phase_trials: int = Field(100, ge=1)
    spacing: Spacing = 0.5
    extent: float = Field(1.0, ge=0)
    t_diff: int = Field(2, ge=1)
    t_mult: int = Field(2, ge=1)
    d_mult: int = Field(3, ge=1)
    stack_half_width: int = Field(3, ge=0)
    tolerance: Tolerance = 1e-10


def _default_rotation_field() -> AnalyticField:
    return AnalyticField(kind="gaussian_poly", terms=[
        PolyTerm(j=0, k=0, re=1.0),
        PolyTerm(j=1, k=0, re=0.5), PolyTerm(j=0, k=1, re=0.5),
        PolyTerm(j=2, k=0, re=0.25, im=0.1), PolyTerm(j=0, k=2, re=0.25, im=-0.1),
    ], center=(0.3, -0.2), width=1.0)


class LambdaConsistencyConfig(ExperimentBase):
    """Continuous-rotation consistency and convergence to the scaling limit."""

    kind: Literal["lambda_consistency"]
    lambdas: LambdaList = [0.5, 0.25, 0.125]
    rotation_lambdas: LambdaList = [0.25, 0.125]
    angle: float = Field(math.pi / 7, description="Rotation angle in radians")
    extent: float = Field(1.0, ge=0)
    t_diff: int = Field(2, ge=1)
    t_mult: int = Field(2, ge=1)
    d_mult: int = Field(4, ge=1)
    weight_scale: float = Field(0.5, gt=0)
    field: AnalyticField = Field(default_factory=_default_rotation_field)
    points: List[Tuple[float, float]] = Field(
        [(0.0, 0.0), (0.5, 0.0), (0.0, -0.5), (0.5, 0.5), (-1.0, 0.5)], min_length=1
    )
    shrink_factor: float = Field(1.5, gt=1, description="Required drop of the rotation discrepancy per halving")

    @model_validator(mode="after")
    def _check_field(self) -> "LambdaConsistencyConfig":
        if not self.field.is_real or self.field.kind != "gaussian_poly":
            raise ValueError("field must be a real gaussian_poly")
        for x, y in self.points:
            if max(abs(x), abs(y)) > self.extent + 1e-12:
                raise ValueError(f"point ({x}, {y}) lies outside the output window Λ={self.extent}")
            for lam in set(self.lambdas) | set(self.rotation_lambdas):
                if any(abs(v / lam - round(v / lam)) > 1e-9 for v in (x, y)):
                    raise ValueError(f"point ({x}, {y}) is not a node of the grid with λ={lam}")
        return self


class InvariantPolyFitConfig(ExperimentBase):
    """Z_2 ansatz equivalence on ℝ² and a polarized fit."""

    kind: Literal["invariant_poly_fit"]
    train_size: int = Field(600, ge=1)
    grid_step: float = Field(0.1, gt=0, le=1)
    width: int = Field(200, ge=1)
    reg: float = Field(1e-10, ge=0)
    tolerance: Tolerance = Field(1e-2, description="Test RMSE bound for both ansatzes")
    polarized_maps: int = Field(128, ge=1)
    polarized_scale: float = Field(0.5, gt=0)
    polarized_tolerance: Tolerance = 1e-3


ExperimentConfig = Annotated[
    Union[
        StencilIdentitiesConfig,
        FourierConsistencyConfig,
        CltSweepConfig,
        SnInvarianceFitConfig,
        BasicEquivarianceConfig,
        DownsampleNonequivarianceConfig,
        ChargeRotationConfig,
        LambdaConsistencyConfig,
        InvariantPolyFitConfig,
    ],
    Field(discriminator="kind"),
]

_CONFIG_ADAPTER: TypeAdapter = TypeAdapter(ExperimentConfig)

EXPERIMENT_KINDS = (
    "clt_sweep", "sn_invariance_fit", "basic_equivariance", "downsample_nonequivariance",
    "charge_rotation", "lambda_consistency", "invariant_poly_fit", "stencil_identities",
    "fourier_consistency",
)


def parse_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate raw data against the kind-tagged union.

    Raises:
        pydantic.ValidationError: On unknown kinds, unknown keys or bad values
    """
    return _CONFIG_ADAPTER.validate_python(data)


# Reports

Metric = Union[bool, int, float, str, None]


class Case(BaseModel):
    """One independent unit of work inside an experiment."""

    model_config = ConfigDict(frozen=True)

    case_id: str
    params: Dict[str, Any] = Field(default_factory=dict)


class CaseResult(BaseModel):
    """
    Outcome of one case.

    ``tables`` maps a CSV table name to the rows this case contributes.
    ``seconds`` is wall-clock time and is never written to report.json.
    """

    case_id: str
    params: Dict[str, Any] = Field(default_factory=dict)
    metrics: Dict[str, Metric] = Field(default_factory=dict)
    tables: Dict[str, List[Dict[str, Metric]]] = Field(default_factory=dict)
    error: Optional[str] = None
    seconds: float = Field(0.0, exclude=True)

    @property
    def ok(self) -> bool:
        return self.error is None


class Verdict(BaseModel):
    """Pass/fail of one declared check."""

    check: str = Field(..., description="Short name of the check")
    passed: bool
    detail: str = ""


class Report(BaseModel):
    """
    Full experiment report.

    Determined by (config, seed) except for ``CaseResult.seconds``.
    """

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "config": {"kind": "clt_sweep", "seed": 0, "pairs": [[0, 0]], "lambdas": [1.0, 0.5]},
                "cases": [{"case_id": "gap-0-0-lambda-1", "params": {"a": 0, "b": 0, "lambda": 1.0},
                           "metrics": {"gap": 0.0123}, "error": None}],
                "verdicts": [{"check": "gap-decreasing-0-0", "passed": True, "detail": ""}],
                "verdict": "pass"
            }
        }
    )

    config: Dict[str, Any]
    cases: List[CaseResult] = Field(default_factory=list)
    verdicts: List[Verdict] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"
