"""Exact stencil identities on coordinate monomials and algebraic checks on random signals."""
from typing import List

import numpy as np

from app.schemas.experiment import Case, CaseResult, StencilIdentitiesConfig, Verdict
from app.schemas.grid import AnalyticField
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, lambda_tag, make_cases, metric_values,
)
from app.services.grid.signal_ops import conjugate, crop, make_signal, sample
from app.services.operators.stencils import stencil_apply


def _max_abs(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return _max_abs(a - b) / max(1.0, _max_abs(a), _max_abs(b))


class StencilIdentitiesHandler(ExperimentHandler):
    kind = "stencil_identities"
    description = "∂_z z = 1, ∂_z̄ z = 0, Δ|x|² = 4; conjugation and commutation of stencils"

    def expand(self, cfg: StencilIdentitiesConfig) -> List[Case]:
        return make_cases((lambda_tag(lam), {"lambda": lam}) for lam in cfg.lambdas)

    def run_case(self, cfg: StencilIdentitiesConfig, case: Case) -> CaseResult:
        lam = case.params["lambda"]
        L = cfg.half_width
        z = sample(AnalyticField(kind="coordinate_monomial", a=1, b=0), lam, L)
        r2 = sample(AnalyticField(kind="coordinate_monomial", a=1, b=1), lam, L)
        metrics = {
            "lambda": lam,
            "dz_z_error": _max_abs(stencil_apply("dz", z).values - 1.0),
            "dzbar_z_error": _max_abs(stencil_apply("dzbar", z).values),
            "laplace_r2_error": _max_abs(stencil_apply("laplace", r2).values - 4.0),
        }

        rng = case_rng(cfg, case)
        side = 2 * L + 1
        conj_err = comm_err = smooth_err = 0.0
        for _ in range(cfg.random_signals):
            s = make_signal(rng.uniform(-1, 1, (side, side, 2)) + 1j * rng.uniform(-1, 1, (side, side, 2)), lam)
            lhs = conjugate(stencil_apply("dz", s)).values
            rhs = stencil_apply("dzbar", conjugate(s)).values
            conj_err = max(conj_err, _max_abs(lhs - rhs))

            dz_dzbar = stencil_apply("dz", stencil_apply("dzbar", s)).values
            dzbar_dz = stencil_apply("dzbar", stencil_apply("dz", s)).values
            lap_dz = stencil_apply("laplace", stencil_apply("dz", s)).values
            dz_lap = stencil_apply("dz", stencil_apply("laplace", s)).values
            comm_err = max(comm_err, _relative(dz_dzbar, dzbar_dz), _relative(lap_dz, dz_lap))

            smoothed = stencil_apply("smooth", s).values
            expected = crop(s, L - 1).values + (lam ** 2 / 8.0) * stencil_apply("laplace", s).values
            smooth_err = max(smooth_err, _relative(smoothed, expected))

        metrics.update({
            "conjugation_error": conj_err,
            "commutation_error": comm_err,
            "smooth_identity_error": smooth_err,
        })
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"stencil_identities": [dict(metrics)]})

    def judge(self, cfg: StencilIdentitiesConfig, results: List[CaseResult]) -> List[Verdict]:
        identities = []
        for name in ("dz_z_error", "dzbar_z_error", "laplace_r2_error", "conjugation_error"):
            identities.extend(metric_values(results, name))
        algebra = metric_values(results, "commutation_error") + metric_values(results, "smooth_identity_error")
        return [
            completion_verdict(results),
            bound_verdict("exact-identities", identities, cfg.tolerance),
            bound_verdict("commutation", algebra, cfg.commutation_tolerance),
        ]
