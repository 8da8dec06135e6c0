"""Report assembly and number formatting."""
import math
from typing import Any

import numpy as np

from app.core.logging import logger
from app.core.state import ExperimentState
from app.schemas.experiment import Report
from app.services.loader import load_numerics


def float_digits() -> int:
    return load_numerics().float_digits


def round_floats(value: Any, digits: int = None) -> Any:
    """
    Round every float in a nested structure to ``digits`` significant digits.

    Non-finite floats become strings so the JSON stays standard.
    """
    digits = digits or float_digits()
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v, digits) for v in value]
    return value


def csv_cell(value: Any, digits: int = None) -> str:
    """One CSV cell; floats in %.{digits}g, missing values empty."""
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{digits or float_digits()}g}"
    return str(value)


def format_report(state: ExperimentState) -> Report:
    """
    Build the Report from a finished workflow state.

    Raises:
        ValueError: If the state carries no experiment config
    """
    cfg = state.get("experiment")
    if cfg is None:
        logger.error("Formatter: Missing experiment config in state")
        raise ValueError("Cannot format report: experiment config is missing")

    results = state.get("results") or []
    verdicts = state.get("verdicts") or []
    report = Report(config=cfg.model_dump(mode="json"), cases=results, verdicts=verdicts)
    logger.info(f"Formatter: {cfg.label} {len(results)} case(s), {len(verdicts)} verdict(s), {report.verdict}")
    return report
