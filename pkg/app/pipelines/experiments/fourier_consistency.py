"""DFT unitarity, stencil symbols on plane waves and delta responses, kernel masses and the norm bound."""
import math
from typing import List

import numpy as np

from app.schemas.experiment import Case, CaseResult, FourierConsistencyConfig, Verdict
from app.schemas.grid import GridSpec, Signal
from app.schemas.kernels import SpectralSymbol
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, lambda_tag, make_cases, metric_values,
)
from app.services.grid.signal_ops import crop, make_signal, node_coordinates, norms
from app.services.operators.spectral import (
    dft2, discrete_kernel, fourier_symbol, idft2, kernel_half_width, kernel_norm_bound, spectrum_norm,
    stencil_symbol_error,
)
from app.services.operators.stencils import STENCIL_KINDS, chain_length, discrete_deriv_chain, stencil_apply

# Test frequencies as fractions of π/λ.
TEST_FREQUENCIES = [(0.0, 0.0), (0.3, -0.7), (1.0, 0.25), (-0.5, 0.9), (0.95, -0.95)]
DELTA_HALF_WIDTH = 4


def plane_wave(p, spacing: float, half_width: int) -> Signal:
    """e^{i p·x} sampled on λZ_L."""
    X, Y = node_coordinates(GridSpec(spacing=spacing, half_width=half_width))
    return make_signal(np.exp(1j * (p[0] * X + p[1] * Y)), spacing, "complex")


class FourierConsistencyHandler(ExperimentHandler):
    kind = "fourier_consistency"
    description = "Parseval and round trip of F_λ, closed-form symbols, kernel masses, norm bound"

    def expand(self, cfg: FourierConsistencyConfig) -> List[Case]:
        specs = []
        for i in range(cfg.random_signals):
            specs.append((f"dft-{i}", {
                "check": "dft",
                "lambda": cfg.lambdas[i % len(cfg.lambdas)],
                "half_width": cfg.half_widths[i % len(cfg.half_widths)],
            }))
        for lam in cfg.lambdas:
            specs.append((f"symbol-{lambda_tag(lam)}", {"check": "symbol", "lambda": lam}))
            specs.append((f"symbol-dft-{lambda_tag(lam)}", {"check": "symbol_dft", "lambda": lam}))
        for lam in cfg.kernel_lambdas:
            for a, b in cfg.kernel_pairs:
                specs.append((f"kernel-{a}-{b}-{lambda_tag(lam)}", {"check": "kernel", "a": a, "b": b, "lambda": lam}))
        return make_cases(specs)

    def run_case(self, cfg: FourierConsistencyConfig, case: Case) -> CaseResult:
        check = case.params["check"]
        if check == "dft":
            return self._dft(cfg, case)
        if check == "symbol":
            return self._symbol(cfg, case)
        if check == "symbol_dft":
            return self._symbol_dft(cfg, case)
        return self._kernel(cfg, case)

    def _dft(self, cfg: FourierConsistencyConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        lam, L = case.params["lambda"], case.params["half_width"]
        side = 2 * L + 1
        s = make_signal(rng.standard_normal((side, side, 2)) + 1j * rng.standard_normal((side, side, 2)), lam)
        spectrum = dft2(s)
        l2, linf, _ = norms(s)
        back = idft2(spectrum)
        metrics = {
            "lambda": lam,
            "nodes": side * side,
            "parseval_error": abs(l2 - spectrum_norm(spectrum)) / l2,
            "roundtrip_error": float(np.max(np.abs(back.values - s.values))) / linf,
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"dft": [{"case": case.case_id, **metrics}]})

    def _symbol(self, cfg: FourierConsistencyConfig, case: Case) -> CaseResult:
        lam = case.params["lambda"]
        rows = []
        for fx, fy in TEST_FREQUENCIES:
            p = (fx * math.pi / lam, fy * math.pi / lam)
            for kind in STENCIL_KINDS:
                wave = plane_wave(p, lam, 3)
                expected = fourier_symbol(kind, p, lam) * crop(wave, 2).values
                error = float(np.max(np.abs(stencil_apply(kind, wave).values - expected)))
                rows.append({"operator": kind, "a": 0, "b": 0, "px": p[0], "py": p[1], "error": error})
            for a, b in cfg.symbol_pairs:
                shrink = chain_length(lam) + a + b
                wave = plane_wave(p, lam, shrink + 2)
                symbol = SpectralSymbol(kind="chain", spacing=lam, a=a, b=b)
                expected = fourier_symbol(symbol, p) * crop(wave, 2).values
                error = float(np.max(np.abs(discrete_deriv_chain(wave, a, b).values - expected)))
                rows.append({"operator": "chain", "a": a, "b": b, "px": p[0], "py": p[1], "error": error})
        for row in rows:
            row["lambda"] = lam
        metrics = {"lambda": lam, "frequencies": len(rows), "symbol_error": max(r["error"] for r in rows)}
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics, tables={"symbols": rows})

    def _symbol_dft(self, cfg: FourierConsistencyConfig, case: Case) -> CaseResult:
        lam = case.params["lambda"]
        rows = [{"operator": kind, "lambda": lam, "error": stencil_symbol_error(kind, lam, DELTA_HALF_WIDTH)}
                for kind in STENCIL_KINDS]
        metrics = {"lambda": lam, "dft_symbol_error": max(r["error"] for r in rows)}
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics, tables={"symbols_dft": rows})

    def _kernel(self, cfg: FourierConsistencyConfig, case: Case) -> CaseResult:
        a, b, lam = case.params["a"], case.params["b"], case.params["lambda"]
        kernel = discrete_kernel(a, b, lam, kernel_half_width(lam))
        mass = complex(lam ** 2 * np.sum(kernel.values))
        expected = 1.0 if a == b == 0 else 0.0
        l2, _, _ = norms(kernel)
        bound = kernel_norm_bound(a, b)
        metrics = {
            "a": a, "b": b, "lambda": lam,
            "mass_error": abs(mass - expected),
            "norm_squared": l2 ** 2,
            "norm_bound": bound,
            "bound_slack": bound - l2 ** 2,
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"kernel_norms": [dict(metrics)]})

    def judge(self, cfg: FourierConsistencyConfig, results: List[CaseResult]) -> List[Verdict]:
        slack = metric_values(results, "bound_slack")
        return [
            completion_verdict(results),
            bound_verdict("parseval", metric_values(results, "parseval_error"), cfg.tolerance),
            bound_verdict("roundtrip", metric_values(results, "roundtrip_error"), cfg.tolerance),
            bound_verdict("symbol-vs-stencil", metric_values(results, "symbol_error"), cfg.symbol_tolerance),
            bound_verdict("symbol-via-dft", metric_values(results, "dft_symbol_error"), cfg.tolerance),
            bound_verdict("kernel-mass", metric_values(results, "mass_error"), cfg.mass_tolerance),
            Verdict(check="norm-bound", passed=bool(slack) and min(slack) >= 0.0,
                    detail=f"min slack {min(slack):.3e}" if slack else "no values"),
        ]
