"""Continuous-rotation consistency of the charge convnet and convergence to its scaling limit."""
from typing import Dict, List

import numpy as np

from app.schemas.charge import ChargeConvNetSpec
from app.schemas.experiment import Case, CaseResult, LambdaConsistencyConfig, Verdict
from app.pipelines.experiments.base import ExperimentHandler, completion_verdict, lambda_tag, make_cases
from app.services.charge.builder import random_charge_spec
from app.services.charge.network import forward
from app.services.charge.scaling import scaling_limit_eval
from app.services.grid.fields import rotate_field
from app.services.grid.signal_ops import value_at


def network_at(cfg: LambdaConsistencyConfig, spacing: float) -> ChargeConvNetSpec:
    """The experiment's fixed random weights placed on the grid with spacing λ."""
    rng = np.random.default_rng([cfg.seed])
    return random_charge_spec(rng, spacing, cfg.extent, cfg.t_diff, cfg.t_mult, cfg.d_mult,
                              scale=cfg.weight_scale)


def _spacings(cfg: LambdaConsistencyConfig) -> List[float]:
    return sorted(set(cfg.lambdas) | set(cfg.rotation_lambdas), reverse=True)


class LambdaConsistencyHandler(ExperimentHandler):
    kind = "lambda_consistency"
    description = "rotation discrepancy at the centre and |forward − scaling limit| over a λ sweep"

    def expand(self, cfg: LambdaConsistencyConfig) -> List[Case]:
        specs = [(f"forward-{lambda_tag(lam)}", {"check": "forward", "lambda": lam,
                                                  "rotated": lam in cfg.rotation_lambdas})
                 for lam in _spacings(cfg)]
        specs.append(("scaling-limit", {"check": "limit"}))
        return make_cases(specs)

    def run_case(self, cfg: LambdaConsistencyConfig, case: Case) -> CaseResult:
        if case.params["check"] == "limit":
            spec = network_at(cfg, cfg.lambdas[0])
            values = scaling_limit_eval(spec, cfg.field, cfg.points)[:, 0]
            metrics = {f"value_p{i}": float(v) for i, v in enumerate(values)}
            rows = [{"x": x, "y": y, "limit": float(v)} for (x, y), v in zip(cfg.points, values)]
            return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                              tables={"scaling_limit": rows})

        lam = case.params["lambda"]
        spec = network_at(cfg, lam)
        out = forward(spec, cfg.field)
        metrics: Dict[str, float] = {"lambda": lam, "input_half_width": spec.input_half_width}
        rows = []
        for i, (x, y) in enumerate(cfg.points):
            value = float(value_at(out, (int(round(x / lam)), int(round(y / lam))))[0])
            metrics[f"value_p{i}"] = value
            rows.append({"lambda": lam, "x": x, "y": y, "forward": value})
        if case.params["rotated"]:
            rotated = forward(spec, rotate_field(cfg.field, cfg.angle))
            centre = value_at(out, (0, 0))[0]
            metrics["rotation_discrepancy"] = float(abs(value_at(rotated, (0, 0))[0] - centre))
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"forward_values": rows})

    def _limit_errors(self, cfg: LambdaConsistencyConfig, results: List[CaseResult]) -> Dict[float, float]:
        limit = next((r for r in results if r.ok and r.params.get("check") == "limit"), None)
        errors: Dict[float, float] = {}
        if limit is None:
            return errors
        for r in results:
            if r.ok and r.params.get("check") == "forward" and r.params["lambda"] in cfg.lambdas:
                errors[r.params["lambda"]] = max(
                    abs(float(r.metrics[f"value_p{i}"]) - float(limit.metrics[f"value_p{i}"]))
                    for i in range(len(cfg.points))
                )
        return errors

    def summary_tables(self, cfg: LambdaConsistencyConfig, results: List[CaseResult]):
        errors = self._limit_errors(cfg, results)
        discrepancies = {r.params["lambda"]: r.metrics["rotation_discrepancy"]
                         for r in results if r.ok and "rotation_discrepancy" in r.metrics}
        rows = []
        for lam in _spacings(cfg):
            rows.append({"lambda": lam, "limit_error": errors.get(lam),
                         "rotation_discrepancy": discrepancies.get(lam)})
        return {"convergence": rows}

    def judge(self, cfg: LambdaConsistencyConfig, results: List[CaseResult]) -> List[Verdict]:
        discrepancies = {r.params["lambda"]: float(r.metrics["rotation_discrepancy"])
                         for r in results if r.ok and "rotation_discrepancy" in r.metrics}
        ordered = [discrepancies.get(lam) for lam in cfg.rotation_lambdas]
        shrinks = [
            earlier / later if later else float("inf")
            for earlier, later in zip(ordered, ordered[1:]) if earlier is not None and later is not None
        ]
        rotation_ok = None not in ordered and all(ratio >= cfg.shrink_factor for ratio in shrinks)

        errors = self._limit_errors(cfg, results)
        sweep = [errors.get(lam) for lam in cfg.lambdas]
        limit_ok = None not in sweep and all(later < earlier for earlier, later in zip(sweep, sweep[1:]))
        return [
            completion_verdict(results),
            Verdict(check="rotation-discrepancy-shrinks", passed=rotation_ok,
                    detail=", ".join(f"{d:.3e}" for d in ordered if d is not None)),
            Verdict(check="scaling-limit-convergence", passed=limit_ok,
                    detail=", ".join(f"{e:.3e}" for e in sweep if e is not None)),
        ]
