"""Kernel-gap sweep: the discrete kernels Ψ^(λ)_{a,b} approach Ψ_{a,b} as λ shrinks."""
from typing import Dict, List, Tuple

import numpy as np

from app.schemas.experiment import Case, CaseResult, CltSweepConfig, Verdict
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, completion_verdict, lambda_tag, make_cases, metric_values,
)
from app.services.operators.spectral import discrete_kernel, kernel_gap_row


def gaps_by_pair(results: List[CaseResult]) -> Dict[Tuple[int, int], List[float]]:
    """Completed gaps grouped by (a, b), in declared λ order."""
    grouped: Dict[Tuple[int, int], List[float]] = {}
    for r in results:
        if r.ok:
            grouped.setdefault((r.params["a"], r.params["b"]), []).append(float(r.metrics["gap"]))
    return grouped


def decreasing_verdicts(cfg: CltSweepConfig, results: List[CaseResult]) -> List[Verdict]:
    """One verdict per (a, b): the gap strictly decreases along the λ sweep."""
    grouped = gaps_by_pair(results)
    verdicts = []
    for a, b in cfg.pairs:
        gaps = grouped.get((a, b), [])
        complete = len(gaps) == len(cfg.lambdas)
        decreasing = complete and all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
        detail = ", ".join(f"{g:.3e}" for g in gaps) if gaps else "no values"
        verdicts.append(Verdict(check=f"gap-decreasing-{a}-{b}", passed=decreasing, detail=detail))
    return verdicts


class CltSweepHandler(ExperimentHandler):
    kind = "clt_sweep"
    description = "kernel_gap(a, b, λ) over a descending λ sweep, plus kernel masses"

    def expand(self, cfg: CltSweepConfig) -> List[Case]:
        return make_cases(
            (f"gap-{a}-{b}-{lambda_tag(lam)}", {"a": a, "b": b, "lambda": lam})
            for a, b in cfg.pairs for lam in cfg.lambdas
        )

    def run_case(self, cfg: CltSweepConfig, case: Case) -> CaseResult:
        a, b, lam = case.params["a"], case.params["b"], case.params["lambda"]
        row = kernel_gap_row(a, b, lam)
        kernel = discrete_kernel(a, b, lam, row.grid_half_width)
        mass = complex(lam ** 2 * np.sum(kernel.values))
        metrics = {**row.csv_row(), "mass_error": abs(mass - (1.0 if a == b == 0 else 0.0))}
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"kernel_gap": [row.csv_row()]})

    def judge(self, cfg: CltSweepConfig, results: List[CaseResult]) -> List[Verdict]:
        verdicts = [completion_verdict(results)] + decreasing_verdicts(cfg, results)
        grouped = gaps_by_pair(results)
        for a, b in cfg.pairs:
            gaps = grouped.get((a, b), [])
            if len(cfg.lambdas) < 2:
                continue
            ratio = gaps[-1] / gaps[0] if len(gaps) == len(cfg.lambdas) and gaps[0] > 0 else float("inf")
            verdicts.append(Verdict(check=f"gap-ratio-{a}-{b}", passed=ratio < cfg.final_ratio,
                                    detail=f"last/first {ratio:.3e} (bound {cfg.final_ratio:g})"))
        verdicts.append(bound_verdict("kernel-mass", metric_values(results, "mass_error"), cfg.mass_tolerance))
        return verdicts
