"""Partial translation equivariance of basic convnets on overlap windows."""
from typing import List

from app.schemas.experiment import BasicEquivarianceConfig, Case, CaseResult, Verdict
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, make_cases, metric_values,
)
from app.services.convnets.forward import basic_forward, random_basic_spec
from app.services.grid.signal_ops import make_signal, shift_deviation, translate


class BasicEquivarianceHandler(ExperimentHandler):
    kind = "basic_equivariance"
    description = "f(shift·x) = shift·f(x) on the overlap window for random (spec, input, shift)"

    def expand(self, cfg: BasicEquivarianceConfig) -> List[Case]:
        return make_cases((f"trial-{i}", {}) for i in range(cfg.trials))

    def run_case(self, cfg: BasicEquivarianceConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        receptive_field = int(rng.choice(cfg.receptive_fields))
        depth = int(rng.choice(cfg.depths))
        dims = [int(d) for d in rng.integers(1, cfg.max_channels + 1, size=depth + 2)]
        spec = random_basic_spec(rng, cfg.spacing, cfg.extent, receptive_field, dims)

        side = 2 * spec.input_half_width + 1
        s = make_signal(rng.uniform(-1.0, 1.0, size=(side, side, dims[0])), cfg.spacing, "real")
        shift = (0, 0)
        while shift == (0, 0):
            shift = tuple(int(v) for v in rng.integers(-cfg.max_shift, cfg.max_shift + 1, size=2))

        base = basic_forward(spec, s)
        moved = basic_forward(spec, translate(s, shift))
        metrics = {
            "receptive_field": receptive_field,
            "layers": depth,
            "dims": "x".join(str(d) for d in dims),
            "shift_x": shift[0],
            "shift_y": shift[1],
            "output_half_width": base.half_width,
            "deviation": shift_deviation(moved, base, shift),
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"equivariance": [{"trial": case.case_id, **metrics}]})

    def judge(self, cfg: BasicEquivarianceConfig, results: List[CaseResult]) -> List[Verdict]:
        return [
            completion_verdict(results),
            bound_verdict("overlap-equivariance", metric_values(results, "deviation"), cfg.tolerance),
        ]
