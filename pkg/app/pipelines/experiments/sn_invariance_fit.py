"""S_N network: permutation invariance, power-sum orbit separation and width sweeps."""
import itertools
from typing import Dict, List

import numpy as np

from app.schemas.experiment import Case, CaseResult, Metric, SnInvarianceFitConfig, Verdict
from app.pipelines.experiments.base import (
    ExperimentHandler, bound_verdict, case_rng, completion_verdict, make_cases, metric_values,
)
from app.services.invariant.fitting import symmetric_width_sweep
from app.services.invariant.symmetric import orbit_separation, power_sums, random_symnet, symmetric_net_eval


def smooth_symmetric_target(X: np.ndarray) -> np.ndarray:
    """Σ_n tanh(‖x_n‖²) for a batch of shape (B, N, M)."""
    return np.sum(np.tanh(np.sum(X ** 2, axis=-1)), axis=-1)


class SnInvarianceFitHandler(ExperimentHandler):
    kind = "sn_invariance_fit"
    description = "permutation invariance, orbit separation and median test RMSE over widths"

    def expand(self, cfg: SnInvarianceFitConfig) -> List[Case]:
        specs = [("invariance", {"check": "invariance"})]
        specs.extend((f"orbits-n{n}", {"check": "orbits", "n": n}) for n in cfg.orbit_ns)
        specs.extend((f"fit-seed-{k}", {"check": "fit", "fit_seed": k}) for k in range(cfg.seeds))
        return make_cases(specs)

    def run_case(self, cfg: SnInvarianceFitConfig, case: Case) -> CaseResult:
        check = case.params["check"]
        if check == "invariance":
            return self._invariance(cfg, case)
        if check == "orbits":
            n = case.params["n"]
            count, collisions = orbit_separation(n, cfg.orbit_radius)
            metrics = {"n": n, "radius": cfg.orbit_radius, "vectors": count, "collisions": len(collisions)}
            return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics)
        return self._fit(cfg, case)

    def _invariance(self, cfg: SnInvarianceFitConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        n = cfg.exhaustive_n
        net = random_symnet(cfg.dim, 8, cfg.inner_width, rng, n_points=n)
        X = rng.uniform(-cfg.box, cfg.box, size=(n, cfg.dim))
        base = symmetric_net_eval(net, X)
        y = X[:, 0]
        sums = power_sums(y)
        exhaustive = sum_dev = 0.0
        count = 0
        for perm in itertools.permutations(range(n)):
            idx = list(perm)
            exhaustive = max(exhaustive, abs(symmetric_net_eval(net, X[idx]) - base))
            sum_dev = max(sum_dev, float(np.max(np.abs(power_sums(y[idx]) - sums))))
            count += 1

        n = cfg.random_n
        net = random_symnet(cfg.dim, 8, cfg.inner_width, rng, n_points=n)
        X = rng.uniform(-cfg.box, cfg.box, size=(n, cfg.dim))
        base = symmetric_net_eval(net, X)
        sampled = 0.0
        for _ in range(cfg.random_permutations):
            sampled = max(sampled, abs(symmetric_net_eval(net, X[rng.permutation(n)]) - base))

        metrics = {
            "exhaustive_n": cfg.exhaustive_n,
            "exhaustive_permutations": count,
            "exhaustive_max_deviation": exhaustive,
            "power_sum_max_deviation": sum_dev,
            "random_n": cfg.random_n,
            "random_permutations": cfg.random_permutations,
            "random_max_deviation": sampled,
        }
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics,
                          tables={"invariance": [dict(metrics)]})

    def _fit(self, cfg: SnInvarianceFitConfig, case: Case) -> CaseResult:
        rng = case_rng(cfg, case)
        shape = (cfg.n_points, cfg.dim)
        X_train = rng.uniform(-cfg.box, cfg.box, size=(cfg.train_size,) + shape)
        X_test = rng.uniform(-cfg.box, cfg.box, size=(cfg.test_size,) + shape)
        y_train, y_test = smooth_symmetric_target(X_train), smooth_symmetric_target(X_test)
        weight_seed = int(rng.integers(2 ** 31))
        rows = symmetric_width_sweep(X_train, y_train, X_test, y_test, cfg.widths, weight_seed,
                                     cfg.inner_width, cfg.reg)
        target_std = float(np.std(y_test))
        metrics: Dict[str, Metric] = {"fit_seed": case.params["fit_seed"], "target_std": target_std}
        table = []
        for row in rows:
            metrics[f"test_rmse_w{row.width}"] = row.test_rmse
            table.append({"fit_seed": case.params["fit_seed"], "width": row.width,
                          "train_rmse": row.train_rmse, "test_rmse": row.test_rmse, "target_std": target_std})
        return CaseResult(case_id=case.case_id, params=case.params, metrics=metrics, tables={"fit": table})

    def _medians(self, cfg: SnInvarianceFitConfig, results: List[CaseResult]) -> List[float]:
        return [float(np.median(metric_values(results, f"test_rmse_w{w}")))
                if metric_values(results, f"test_rmse_w{w}") else float("inf") for w in cfg.widths]

    def summary_tables(self, cfg: SnInvarianceFitConfig, results: List[CaseResult]):
        medians = self._medians(cfg, results)
        return {"fit_median": [{"width": w, "median_test_rmse": m} for w, m in zip(cfg.widths, medians)]}

    def judge(self, cfg: SnInvarianceFitConfig, results: List[CaseResult]) -> List[Verdict]:
        exhaustive = metric_values(results, "exhaustive_max_deviation")
        collisions = metric_values(results, "collisions")
        medians = self._medians(cfg, results)
        stds = metric_values(results, "target_std")
        limit = cfg.rmse_ratio * float(np.median(stds)) if stds else 0.0
        return [
            completion_verdict(results),
            Verdict(check="exhaustive-bit-exact", passed=bool(exhaustive) and max(exhaustive) == 0.0,
                    detail=f"max {max(exhaustive):.3e}" if exhaustive else "no values"),
            bound_verdict("power-sums-invariant", metric_values(results, "power_sum_max_deviation"), 0.0),
            bound_verdict("random-permutations", metric_values(results, "random_max_deviation"),
                          cfg.invariance_tolerance),
            Verdict(check="orbit-separation", passed=bool(collisions) and max(collisions) == 0,
                    detail=f"{int(max(collisions))} collision(s)" if collisions else "no values"),
            Verdict(check="median-rmse-non-increasing",
                    passed=all(later <= earlier for earlier, later in zip(medians, medians[1:])),
                    detail=", ".join(f"w{w}: {m:.3e}" for w, m in zip(cfg.widths, medians))),
            Verdict(check="final-rmse", passed=medians[-1] < limit,
                    detail=f"{medians[-1]:.3e} vs {cfg.rmse_ratio:g}·std = {limit:.3e}"),
        ]
