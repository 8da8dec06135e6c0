"""Decimation breaks translation equivariance; oversized strides are rejected; s = 1 is the basic net."""
from typing import List

import numpy as np

from app.schemas.convnet import BasicConvNetSpec, DownsampledConvNetSpec
from app.schemas.experiment import Case, CaseResult, DownsampleNonequivarianceConfig, Verdict
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, make_cases, metric_values,
)
from app.services.codec import convnet_to_dict
from app.services.convnets.forward import (
    basic_forward, downsampled_forward, random_downsampled_spec, strided_shift_deviation,
)
from app.services.convnets.validation import validate_spec
from app.services.grid.signal_ops import make_signal


def _random_signal(rng: np.random.Generator, spacing: float, half_width: int, channels: int):
    side = 2 * half_width + 1
    return make_signal(rng.uniform(-1.0, 1.0, size=(side, side, channels)), spacing, "real")


def stride_one_deviation(spec: DownsampledConvNetSpec, rng: np.random.Generator) -> float:
    """|downsampled(s=1) − basic(Λ=0)| at the single output node, same weights and input."""
    reduced = DownsampledConvNetSpec(spacing=spec.spacing, receptive_field=spec.receptive_field, stride=1,
                                     input_channels=spec.input_channels, layers=spec.layers,
                                     final=spec.final, activation=spec.activation)
    basic = BasicConvNetSpec(spacing=spec.spacing, extent=0.0, receptive_field=spec.receptive_field,
                             input_channels=spec.input_channels, layers=spec.layers,
                             final=spec.final, activation=spec.activation)
    s = _random_signal(rng, spec.spacing, reduced.input_half_width, spec.input_channels)
    return float(np.max(np.abs(downsampled_forward(reduced, s) - basic_forward(basic, s).values[0, 0])))


class DownsampleNonequivarianceHandler(ExperimentHandler):
    kind = "downsample_nonequivariance"
    description = "equivariance violation under fine shifts, stride rejection, s = 1 reduction"

    def expand(self, cfg: DownsampleNonequivarianceConfig) -> List[Case]:
        specs = [(f"trial-{i}", {"check": "shift"}) for i in range(cfg.trials)]
        specs.append(("stride-rejection", {"check": "reject"}))
        return make_cases(specs)

    def run_case(self, cfg: DownsampleNonequivarianceConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        if case.params["check"] == "reject":
            return self._reject(cfg, case, rng)

        spec = random_downsampled_spec(rng, cfg.spacing, cfg.receptive_field, cfg.stride, cfg.dims)
        s = _random_signal(rng, cfg.spacing, cfg.input_half_width, cfg.dims[0])
        coarse = (cfg.stride * cfg.shift[0], cfg.stride * cfg.shift[1])
        report = validate_spec(spec)
        metrics = {
            "stride": cfg.stride,
            "schedule": " ".join(str(h) for h in report.schedule),
            "violation": strided_shift_deviation(spec, s, cfg.shift),
            "control_deviation": strided_shift_deviation(spec, s, coarse),
            "stride_one_deviation": stride_one_deviation(spec, rng),
            "output": float(downsampled_forward(spec, _random_signal(rng, cfg.spacing, spec.input_half_width,
                                                                      cfg.dims[0]))[0]),
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"shifts": [{"trial": case.case_id, **metrics}]})

    def _reject(self, cfg: DownsampleNonequivarianceConfig, case: Case, rng: np.random.Generator) -> CaseResult:
        L = cfg.reject_receptive_field
        valid = random_downsampled_spec(rng, cfg.spacing, L, 2 * L + 1, cfg.dims)
        data = convnet_to_dict(valid)
        data["stride"] = cfg.reject_stride
        report = validate_spec(data)
        metrics = {
            "stride": cfg.reject_stride,
            "receptive_field": L,
            "rejected": not report.ok,
            "names_stride": any(d.startswith("stride") for d in report.diagnostics),
            "diagnostics": " | ".join(report.diagnostics),
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics)

    def judge(self, cfg: DownsampleNonequivarianceConfig, results: List[CaseResult]) -> List[Verdict]:
        violations = metric_values(results, "violation")
        rejection = [r for r in results if r.ok and r.params.get("check") == "reject"]
        rejected = bool(rejection) and bool(rejection[0].metrics["rejected"]) and bool(rejection[0].metrics["names_stride"])
        return [
            completion_verdict(results),
            Verdict(check="violation-exhibited", passed=bool(violations) and max(violations) > cfg.threshold,
                    detail=f"max {max(violations):.3e} (threshold {cfg.threshold:g})" if violations else "no values"),
            bound_verdict("coarse-shift-control", metric_values(results, "control_deviation"), cfg.tolerance),
            bound_verdict("stride-one-reduction", metric_values(results, "stride_one_deviation"), cfg.tolerance),
            Verdict(check="stride-rejected", passed=rejected,
                    detail=str(rejection[0].metrics["diagnostics"]) if rejection else "no result"),
        ]
