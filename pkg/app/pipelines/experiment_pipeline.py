"""Experiment pipeline."""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.graph import create_experiment_graph
from app.core.logging import logger
from app.core.state import ExperimentState
from app.pipelines.experiments import get_handler
from app.pipelines.experiments.base import run_cases
from app.pipelines.experiments.clt_sweep import decreasing_verdicts
from app.schemas.experiment import CaseResult, ExperimentConfig, Report, Verdict
from app.services.loader import validate_experiment_config


def resolve_output_dir(cfg: ExperimentConfig, override: Optional[Path] = None) -> Path:
    """--out flag, then EQUINET_OUT, then the config's own output_dir, then output/<kind>."""
    if override is not None:
        return Path(override)
    if settings.OUT_DIR is not None:
        return Path(settings.OUT_DIR)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return settings.OUTPUT_DIR / cfg.kind


async def run_experiment(cfg: ExperimentConfig, jobs: Optional[int] = None,
                         output_dir: Optional[Path] = None) -> Report:
    """
    Execute one experiment end to end.

    Runs the LangGraph workflow (expand, run, judge, export) and returns the
    report; report.json and the CSV tables are written to the resolved
    output directory.

    Args:
        cfg: Validated experiment config
        jobs: Concurrent cases (default: settings.JOBS)
        output_dir: Explicit output directory, overriding every other source

    Returns:
        Report with per-case rows and verdicts

    Raises:
        OSError: If the report cannot be written
    """
    jobs = jobs or settings.JOBS
    target = resolve_output_dir(cfg, output_dir)
    logger.info(f"Pipeline: Starting {cfg.label} (seed {cfg.seed}, jobs {jobs}) -> {target}")

    try:
        initial_state: ExperimentState = {
            "experiment": cfg,
            "jobs": jobs,
            "output_dir": target,
        }
        graph = create_experiment_graph()
        final_state = await graph.ainvoke(initial_state)

        report = final_state.get("report")
        if report is None:
            logger.error("Pipeline: No report generated")
            raise ValueError("Failed to generate report")
        if final_state.get("error", "").startswith("Export failed"):
            raise OSError(final_state["error"])

        logger.info(f"Pipeline: {cfg.label} finished, verdict {report.verdict}")
        return report

    except Exception as e:
        logger.error(f"Pipeline: Error running {cfg.label}: {str(e)}")
        raise


async def run_kernel_sweep(pairs: Sequence[Tuple[int, int]], lambdas: Sequence[float],
                           jobs: int = 1) -> Tuple[List[CaseResult], List[Verdict]]:
    """
    Kernel-gap sweep without writing a report.

    Only the strict-decrease verdicts are returned.

    Raises:
        ConfigError: If the pairs or λ list are invalid
    """
    cfg = validate_experiment_config({"kind": "clt_sweep", "pairs": [list(p) for p in pairs],
                                      "lambdas": list(lambdas)})
    handler = get_handler(cfg.kind)
    results = await run_cases(handler, cfg, handler.expand(cfg), jobs)
    return results, decreasing_verdicts(cfg, results)
