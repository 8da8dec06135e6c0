import asyncio
import csv
import json
import math
import sys

import numpy as np
import pytest

from app.core.config import settings
from app.output.exporter import collect_tables, write_rows
from app.output.formatter import csv_cell, round_floats
from app.pipelines import experiments
from app.pipelines.experiment_pipeline import resolve_output_dir, run_experiment, run_kernel_sweep
from app.pipelines.experiments.base import ExperimentHandler, case_rng, execute_case, make_cases, run_cases
from app.schemas.experiment import CaseResult, Verdict
from app.services.loader import load_builtin_experiments, validate_experiment_config


def _stencil_config(**overrides):
    return validate_experiment_config({"kind": "stencil_identities", "lambdas": [1.0, 0.5], "half_width": 4,
                                       "random_signals": 2, **overrides})


class _FlakyHandler(ExperimentHandler):
    kind = "flaky"

    def expand(self, cfg):
        return make_cases([("good", {}), ("bad", {}), ("late", {})])

    def run_case(self, cfg, case):
        if case.case_id == "bad":
            raise ArithmeticError("boom")
        draw = float(case_rng(cfg, case).random())
        return CaseResult(case_id=case.case_id, params=case.params, metrics={"draw": draw})

    def judge(self, cfg, results):
        return [Verdict(check="all-ok", passed=all(r.ok for r in results))]


class _EmptyHandler(_FlakyHandler):
    kind = "stencil_identities"

    def expand(self, cfg):
        return []


def test_round_floats():
    value = {"a": 1.0 / 3.0, "b": [np.float64(2.0 / 3.0), 7], "c": math.inf, "d": True, "e": None}
    assert round_floats(value, 4) == {"a": 0.3333, "b": [0.6667, 7], "c": "inf", "d": True, "e": None}


def test_csv_cell():
    assert csv_cell(None) == ""
    assert csv_cell(True) == "true"
    assert csv_cell(1.0 / 3.0) == "0.333333333333"
    assert csv_cell(np.int64(4)) == "4"


def test_write_rows_unions_columns(capsys):
    write_rows([{"a": 1}, {"a": 2, "b": 0.5}], sys.stdout)
    assert capsys.readouterr().out == "a,b\n1,\n2,0.5\n"


def test_collect_tables_keeps_case_order():
    results = [CaseResult(case_id="x", tables={"t": [{"v": 1}]}), CaseResult(case_id="y", tables={"t": [{"v": 2}]})]
    assert collect_tables(results) == {"t": [{"v": 1}, {"v": 2}]}


def test_case_rng_depends_on_seed_and_index():
    cases = make_cases([("a", {}), ("b", {})])
    cfg0, cfg1 = _stencil_config(), _stencil_config(seed=1)
    assert case_rng(cfg0, cases[0]).random() == case_rng(cfg0, cases[0]).random()
    assert case_rng(cfg0, cases[0]).random() != case_rng(cfg0, cases[1]).random()
    assert case_rng(cfg0, cases[0]).random() != case_rng(cfg1, cases[0]).random()


def test_failing_case_is_recorded():
    result = execute_case(_FlakyHandler(), _stencil_config(), make_cases([("bad", {})])[0])
    assert not result.ok
    assert result.error == "ArithmeticError: boom"
    assert result.seconds >= 0.0


def test_run_cases_keeps_declared_order():
    handler = _FlakyHandler()
    cfg = _stencil_config()
    results = asyncio.run(run_cases(handler, cfg, handler.expand(cfg), jobs=3))
    assert [r.case_id for r in results] == ["good", "bad", "late"]
    assert [r.ok for r in results] == [True, False, True]


def test_output_dir_precedence(tmp_path, monkeypatch):
    cfg = _stencil_config(output_dir=str(tmp_path / "from-config"))
    monkeypatch.setattr(settings, "OUT_DIR", None)
    assert resolve_output_dir(cfg) == tmp_path / "from-config"
    assert resolve_output_dir(_stencil_config()) == settings.OUTPUT_DIR / "stencil_identities"
    monkeypatch.setattr(settings, "OUT_DIR", tmp_path / "env")
    assert resolve_output_dir(cfg) == tmp_path / "env"
    assert resolve_output_dir(cfg, tmp_path / "flag") == tmp_path / "flag"


def test_run_experiment_writes_outputs(out_dir):
    report = asyncio.run(run_experiment(_stencil_config(), jobs=1, output_dir=out_dir))
    assert report.passed
    payload = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert payload["verdict"] == "pass"
    assert payload["config"]["kind"] == "stencil_identities"
    assert all("seconds" not in case for case in payload["cases"])
    assert (out_dir / "stencil_identities.csv").exists()
    with open(out_dir / "timings.csv", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [row["case_id"] for row in rows] == [case["case_id"] for case in payload["cases"]]


def test_report_is_independent_of_jobs(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "OUT_DIR", None)
    cfg = _stencil_config(seed=5)
    asyncio.run(run_experiment(cfg, jobs=1, output_dir=tmp_path / "one"))
    asyncio.run(run_experiment(cfg, jobs=2, output_dir=tmp_path / "two"))
    assert (tmp_path / "one" / "report.json").read_bytes() == (tmp_path / "two" / "report.json").read_bytes()
    assert (tmp_path / "one" / "stencil_identities.csv").read_bytes() == \
        (tmp_path / "two" / "stencil_identities.csv").read_bytes()


def test_empty_experiment_fails(out_dir, monkeypatch):
    monkeypatch.setitem(experiments.HANDLERS, "stencil_identities", _EmptyHandler())
    report = asyncio.run(run_experiment(_stencil_config(), output_dir=out_dir))
    assert not report.passed
    assert report.verdicts[0].check == "cases-completed"
    assert (out_dir / "report.json").exists()


def test_kernel_sweep_verdicts():
    results, verdicts = asyncio.run(run_kernel_sweep([(1, 0)], [1.0, 0.5], jobs=2))
    assert [r.metrics["lambda"] for r in results] == [1.0, 0.5]
    assert all(v.passed for v in verdicts)


@pytest.mark.slow
def test_builtin_experiments_pass(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "OUT_DIR", None)
    for cfg in asyncio.run(load_builtin_experiments()):
        report = asyncio.run(run_experiment(cfg, jobs=2, output_dir=tmp_path / cfg.label))
        failed = [v for v in report.verdicts if not v.passed]
        assert not failed, f"{cfg.label}: {failed}"


def test_kernel_gap_csv_columns(out_dir):
    cfg = validate_experiment_config({"kind": "clt_sweep", "pairs": [[1, 0]], "lambdas": [1.0, 0.5]})
    report = asyncio.run(run_experiment(cfg, jobs=1, output_dir=out_dir))
    with open(out_dir / "kernel_gap.csv", encoding="utf-8") as f:
        header = f.readline().strip()
    assert header == "a,b,lambda,gap,kernel_l2,grid_half_width"
    assert "mass_error" in report.cases[0].metrics


def test_symbol_via_dft_cases():
    handler = experiments.HANDLERS["fourier_consistency"]
    cfg = validate_experiment_config({"kind": "fourier_consistency", "lambdas": [1.0, 0.5], "random_signals": 1})
    cases = [c for c in handler.expand(cfg) if c.params["check"] == "symbol_dft"]
    assert [c.case_id for c in cases] == ["symbol-dft-lambda-1", "symbol-dft-lambda-0.5"]
    results = [handler.run_case(cfg, c) for c in cases]
    assert all(r.metrics["dft_symbol_error"] <= 1e-10 for r in results)
    assert [row["operator"] for row in results[0].tables["symbols_dft"]] == ["dz", "dzbar", "laplace", "smooth"]


def test_orbit_cases_per_n():
    handler = experiments.HANDLERS["sn_invariance_fit"]
    cfg = validate_experiment_config({"kind": "sn_invariance_fit", "orbit_ns": [3, 4], "seeds": 1})
    cases = [c for c in handler.expand(cfg) if c.params["check"] == "orbits"]
    assert [c.case_id for c in cases] == ["orbits-n3", "orbits-n4"]
    results = [handler.run_case(cfg, c) for c in cases]
    assert [(r.metrics["vectors"], r.metrics["collisions"]) for r in results] == [(125, 0), (625, 0)]
