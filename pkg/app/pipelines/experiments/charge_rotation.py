"""Charge conservation, per-charge rotation covariance and quarter-turn origin invariance."""
import math
from typing import List

import numpy as np
from pydantic import ValidationError

from app.core.errors import EquinetError
from app.schemas.charge import MultWeights
from app.schemas.experiment import Case, CaseResult, ChargeRotationConfig, Verdict
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, make_cases, metric_values,
)
from app.services.charge.builder import break_conservation, random_charge_spec, random_stack
from app.services.charge.checks import diff_rotation_deviation, origin_rotation_deviation, phase_equivariance_check
from app.services.codec import charge_spec_from_dict, charge_spec_to_dict
from app.services.grid.signal_ops import make_signal


def _random_spec(cfg: ChargeRotationConfig, rng: np.random.Generator):
    return random_charge_spec(rng, cfg.spacing, cfg.extent, cfg.t_diff, cfg.t_mult, cfg.d_mult)


def _rejects(build) -> str:
    """Message of the charge-conservation failure raised by ``build``, or '' if it succeeds."""
    try:
        build()
    except (ValidationError, EquinetError) as e:
        return e.errors()[0]["msg"] if isinstance(e, ValidationError) else str(e)
    return ""


class ChargeRotationHandler(ExperimentHandler):
    kind = "charge_rotation"
    description = "phase equivariance of mult layers, diff-stage covariance, origin invariance, constraint rejection"

    def expand(self, cfg: ChargeRotationConfig) -> List[Case]:
        specs = [("phase", {"check": "phase"})]
        specs.extend((f"spec-{i}", {"check": "rotation"}) for i in range(cfg.specs))
        specs.append(("conservation", {"check": "conservation"}))
        return make_cases(specs)

    def run_case(self, cfg: ChargeRotationConfig, case: Case) -> CaseResult:
        check = case.params["check"]
        if check == "phase":
            return self._phase(cfg, case)
        if check == "rotation":
            return self._rotation(cfg, case)
        return self._conservation(cfg, case)

    def _phase(self, cfg: ChargeRotationConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        rows = []
        for trial in range(cfg.phase_trials):
            spec = _random_spec(cfg, rng)
            layer = int(rng.integers(spec.t_mult))
            phi = float(rng.uniform(0.0, 2.0 * math.pi))
            single = phase_equivariance_check(spec.layers[layer], random_stack(rng, spec, layer, cfg.stack_half_width), phi)
            network = phase_equivariance_check(spec, random_stack(rng, spec, 0, cfg.stack_half_width), phi)
            rows.append({"trial": trial, "layer": layer, "phi": phi,
                         "layer_deviation": single, "network_deviation": network})
        metrics = {
            "trials": cfg.phase_trials,
            "phase_deviation": max(max(r["layer_deviation"], r["network_deviation"]) for r in rows),
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics, tables={"phase": rows})

    def _rotation(self, cfg: ChargeRotationConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        spec = _random_spec(cfg, rng)
        side = 2 * spec.input_half_width + 1
        s = make_signal(rng.uniform(-1.0, 1.0, size=(side, side, 1)), spec.spacing, "real")
        side0 = 2 * (cfg.stack_half_width + cfg.t_diff) + 1
        s0 = make_signal(rng.uniform(-1, 1, (side0, side0, 1)) + 1j * rng.uniform(-1, 1, (side0, side0, 1)),
                         spec.spacing, "complex")
        rows = []
        for q in cfg.quarter_turns:
            rows.append({
                "spec": case.case_id,
                "quarter_turns": q,
                "origin_deviation": origin_rotation_deviation(spec, s, q),
                "diff_deviation": diff_rotation_deviation(s0, cfg.t_diff, q),
            })
        metrics = {
            "origin_deviation": max(r["origin_deviation"] for r in rows),
            "diff_deviation": max(r["diff_deviation"] for r in rows),
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics, tables={"rotation": rows})

    def _conservation(self, cfg: ChargeRotationConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        spec = _random_spec(cfg, rng)
        broken = break_conservation(spec.layers[0])
        direct = _rejects(lambda: MultWeights(max_charge=broken.max_charge, constant=broken.constant,
                                              linear=dict(broken.linear), couplings=list(broken.couplings)))

        data = charge_spec_to_dict(spec)
        T = cfg.t_diff
        data["layers"][0]["w2"].append([T, 1, 0, 0, 0, 1.0, 0.0])
        encoded = _rejects(lambda: charge_spec_from_dict(data))
        metrics = {
            "direct_rejected": bool(direct),
            "codec_rejected": bool(encoded),
            "direct_message": direct,
            "codec_message": encoded,
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics)

    def judge(self, cfg: ChargeRotationConfig, results: List[CaseResult]) -> List[Verdict]:
        conservation = [r for r in results if r.ok and r.params.get("check") == "conservation"]
        rejected = bool(conservation) and all(
            conservation[0].metrics[k] for k in ("direct_rejected", "codec_rejected")
        )
        return [
            completion_verdict(results),
            bound_verdict("phase-equivariance", metric_values(results, "phase_deviation"), cfg.tolerance),
            bound_verdict("diff-covariance", metric_values(results, "diff_deviation"), cfg.tolerance),
            bound_verdict("origin-invariance", metric_values(results, "origin_deviation"), cfg.tolerance),
            Verdict(check="violation-rejected", passed=rejected,
                    detail=str(conservation[0].metrics["direct_message"]) if conservation else "no result"),
        ]
