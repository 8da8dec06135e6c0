"""Z_2 ansatz equivalence on ℝ² and a polarized fit on a multiplicity-two sign module."""
from typing import List, Tuple

import numpy as np

from app.schemas.experiment import Case, CaseResult, InvariantPolyFitConfig, Verdict
from app.schemas.nets import Isotype, PolyFeatureSet
from app.pipelines.experiments.base import ExperimentHandler, case_rng, completion_verdict, make_cases
from app.services.invariant.ansatz import poly_ansatz_eval, polarized_ansatz_eval, symmetrize_eval
from app.services.invariant.fitting import fit_poly_ansatz, fit_polarized_ansatz, fit_symmetrized_net, rmse
from app.services.invariant.groups import sign_flip
from app.services.invariant.polynomials import z2_line_features, z2_plane_features


def even_target(X: np.ndarray) -> np.ndarray:
    """exp(−(x1² + x1x2 + x2²)), invariant under x ↦ −x."""
    return np.exp(-(X[:, 0] ** 2 + X[:, 0] * X[:, 1] + X[:, 1] ** 2))


def polarized_target(X: np.ndarray) -> np.ndarray:
    return (X[:, 0] + X[:, 1]) ** 2


def _data(cfg: InvariantPolyFitConfig) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([cfg.seed, 0])
    train = rng.uniform(-1.0, 1.0, size=(cfg.train_size, 2))
    ticks = np.linspace(-1.0, 1.0, int(round(2.0 / cfg.grid_step)) + 1)
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    return train, np.column_stack([gx.ravel(), gy.ravel()])


def _result(case: Case, X_test: np.ndarray, predicted: np.ndarray, targets: np.ndarray,
            train_rmse: float) -> CaseResult:
    best = int(np.argmax(predicted))
    metrics = {
        "train_rmse": train_rmse,
        "test_rmse": rmse(predicted, targets),
        "argmax_x": float(X_test[best, 0]),
        "argmax_y": float(X_test[best, 1]),
    }
    return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                      tables={"fits": [{"ansatz": case.case_id, **metrics}]})


class InvariantPolyFitHandler(ExperimentHandler):
    kind = "invariant_poly_fit"
    description = "poly-invariant ansatz vs group-averaged net under Z_2, plus a polarized fit"

    def expand(self, cfg: InvariantPolyFitConfig) -> List[Case]:
        return make_cases([("poly-ansatz", {}), ("symmetrized-net", {}), ("polarized", {})])

    def run_case(self, cfg: InvariantPolyFitConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        X_train, X_test = _data(cfg)

        if case.case_id == "poly-ansatz":
            features = z2_plane_features()
            weights = fit_poly_ansatz(features, X_train, even_target(X_train), cfg.width, rng, cfg.reg)
            return _result(case, X_test, poly_ansatz_eval(features, weights, X_test), even_target(X_test),
                           rmse(poly_ansatz_eval(features, weights, X_train), even_target(X_train)))

        if case.case_id == "symmetrized-net":
            rep = sign_flip(2)
            net = fit_symmetrized_net(rep, X_train, even_target(X_train), cfg.width, rng, cfg.reg)
            return _result(case, X_test, symmetrize_eval(rep, net, X_test), even_target(X_test),
                           rmse(symmetrize_eval(rep, net, X_train), even_target(X_train)))

        # (x1, x2) read as one sign-rep block of multiplicity two, reference module ℝ with invariant x²
        isotype = Isotype(name="sign", dim=1, multiplicity=2, reference_multiplicity=1)
        scalar = PolyFeatureSet(name="z2_line", dim=1, invariants=z2_line_features().invariants)
        ansatz = fit_polarized_ansatz([isotype], scalar, X_train, polarized_target(X_train),
                                      cfg.polarized_maps, rng, cfg.reg, scale=cfg.polarized_scale)
        return _result(case, X_test, polarized_ansatz_eval(ansatz, X_test), polarized_target(X_test),
                       rmse(polarized_ansatz_eval(ansatz, X_train), polarized_target(X_train)))

    def judge(self, cfg: InvariantPolyFitConfig, results: List[CaseResult]) -> List[Verdict]:
        fits = {r.case_id: r for r in results if r.ok}
        poly, sym, polar = fits.get("poly-ansatz"), fits.get("symmetrized-net"), fits.get("polarized")

        pair_ok = poly is not None and sym is not None
        rmse_ok = pair_ok and max(poly.metrics["test_rmse"], sym.metrics["test_rmse"]) < cfg.tolerance
        argmax_ok = pair_ok and (poly.metrics["argmax_x"], poly.metrics["argmax_y"]) == (
            sym.metrics["argmax_x"], sym.metrics["argmax_y"])
        return [
            completion_verdict(results),
            Verdict(check="ansatz-rmse", passed=rmse_ok,
                    detail=(f"poly {poly.metrics['test_rmse']:.3e}, symmetrized {sym.metrics['test_rmse']:.3e}"
                            if pair_ok else "missing fit")),
            Verdict(check="argmax-agrees", passed=argmax_ok,
                    detail=(f"poly ({poly.metrics['argmax_x']:g}, {poly.metrics['argmax_y']:g}), "
                            f"symmetrized ({sym.metrics['argmax_x']:g}, {sym.metrics['argmax_y']:g})"
                            if pair_ok else "missing fit")),
            Verdict(check="polarized-rmse",
                    passed=polar is not None and polar.metrics["test_rmse"] < cfg.polarized_tolerance,
                    detail=f"{polar.metrics['test_rmse']:.3e}" if polar is not None else "missing fit"),
        ]
