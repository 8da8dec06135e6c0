"""State definitions for the LangGraph experiment workflow."""
from pathlib import Path
from typing import Dict, List, Optional, TypedDict

from app.schemas.experiment import Case, CaseResult, ExperimentConfig, Metric, Report, Verdict


class ExperimentState(TypedDict, total=False):
    """
    State for one experiment run.

    All fields are optional to allow partial updates from nodes.
    """

    # Input
    experiment: ExperimentConfig
    jobs: int
    output_dir: Path

    # Expansion and execution
    cases: Optional[List[Case]]
    results: Optional[List[CaseResult]]

    # Judgement
    verdicts: Optional[List[Verdict]]
    summary_tables: Optional[Dict[str, List[Dict[str, Metric]]]]

    # Final output
    report: Optional[Report]
    written: Optional[List[Path]]

    # Error handling
    error: Optional[str]
