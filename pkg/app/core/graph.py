"""LangGraph workflow definition."""
from typing import Any, Dict

from langgraph.graph import END, StateGraph

from app.core.logging import logger
from app.core.state import ExperimentState
from app.schemas.experiment import Verdict


def create_experiment_graph():
    """
    Create the experiment workflow graph.

    Flow: START → expand → run → judge → export → END, skipping straight to
    export when the config expands to no cases.

    Returns:
        Compiled graph
    """
    from app.pipelines.experiments import get_handler
    from app.pipelines.experiments.base import run_cases
    from app.output.formatter import format_report
    from app.output.exporter import export_report

    async def expand_node(state: ExperimentState) -> Dict[str, Any]:
        """List the experiment's cases in declared order."""
        cfg = state["experiment"]
        cases = get_handler(cfg.kind).expand(cfg)
        logger.info(f"Expand node: {cfg.label} expanded to {len(cases)} case(s)")
        if not cases:
            logger.warning("Expand node: no cases to run")
            return {
                "cases": [],
                "results": [],
                "verdicts": [Verdict(check="cases-completed", passed=False, detail="no cases")],
                "error": "Experiment expanded to no cases",
            }
        return {"cases": cases}

    async def run_node(state: ExperimentState) -> Dict[str, Any]:
        """Run every case; failures are recorded on their rows."""
        cfg = state["experiment"]
        jobs = state.get("jobs", 1)
        logger.info(f"Run node: {len(state['cases'])} case(s) on {jobs} worker(s)")
        results = await run_cases(get_handler(cfg.kind), cfg, state["cases"], jobs)
        failed = sum(1 for r in results if not r.ok)
        if failed:
            logger.warning(f"Run node: {failed} case(s) failed")
        return {"results": results}

    async def judge_node(state: ExperimentState) -> Dict[str, Any]:
        """Turn ordered results into verdicts and summary tables."""
        cfg = state["experiment"]
        handler = get_handler(cfg.kind)
        results = state.get("results", [])
        verdicts = handler.judge(cfg, results)
        for v in verdicts:
            logger.info(f"Judge node: {v.check} {'pass' if v.passed else 'FAIL'} {v.detail}")
        return {"verdicts": verdicts, "summary_tables": handler.summary_tables(cfg, results)}

    async def export_node(state: ExperimentState) -> Dict[str, Any]:
        """Assemble the report and write it with its tables."""
        logger.info("Export node: Writing report")
        try:
            report = format_report(state)
            written = export_report(report, state.get("summary_tables") or {}, state["output_dir"])
            return {"report": report, "written": written}
        except OSError as e:
            logger.error(f"Export node: Error - {str(e)}")
            return {"report": format_report(state), "written": [], "error": f"Export failed: {str(e)}"}

    workflow = StateGraph(ExperimentState)

    workflow.add_node("expand", expand_node)
    workflow.add_node("run", run_node)
    workflow.add_node("judge", judge_node)
    workflow.add_node("export", export_node)

    def has_cases(state: ExperimentState) -> str:
        """Skip execution when there is nothing to run."""
        if not state.get("cases"):
            logger.info("Router: No cases, skipping to export")
            return "export"
        return "run"

    workflow.set_entry_point("expand")
    workflow.add_conditional_edges(
        "expand",
        has_cases,
        {
            "run": "run",
            "export": "export",
        }
    )
    workflow.add_edge("run", "judge")
    workflow.add_edge("judge", "export")
    workflow.add_edge("export", END)

    logger.debug("Experiment workflow graph created")
    return workflow.compile()
