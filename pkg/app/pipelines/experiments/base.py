"""Shared pieces of the experiment handlers."""
import asyncio
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from app.core.logging import logger
from app.schemas.experiment import Case, CaseResult, Metric, Verdict


class ExperimentHandler(ABC):
    """
    One experiment kind.

    ``expand`` lists independent cases in a fixed order, ``run_case`` is a pure
    function of (config, case) and ``judge`` turns the ordered results into
    verdicts. Nothing here depends on execution order or wall-clock time.
    """

    kind: str = ""
    description: str = ""

    @abstractmethod
    def expand(self, cfg) -> List[Case]:
        ...

    @abstractmethod
    def run_case(self, cfg, case: Case) -> CaseResult:
        ...

    @abstractmethod
    def judge(self, cfg, results: List[CaseResult]) -> List[Verdict]:
        ...

    def summary_tables(self, cfg, results: List[CaseResult]) -> Dict[str, List[Dict[str, Metric]]]:
        """Tables derived from several cases at once; none by default."""
        return {}


def make_cases(specs: Iterable[Tuple[str, Dict[str, Any]]]) -> List[Case]:
    """Number (case_id, params) pairs in declaration order; the index seeds the case."""
    return [Case(case_id=case_id, params={"index": i, **params}) for i, (case_id, params) in enumerate(specs)]


def case_rng(cfg, case: Case) -> np.random.Generator:
    """Generator determined by the root seed and the case's declared position."""
    return np.random.default_rng([cfg.seed, case.params["index"]])


def lambda_tag(spacing: float) -> str:
    return f"lambda-{spacing:g}"


def completion_verdict(results: Sequence[CaseResult]) -> Verdict:
    failed = [r.case_id for r in results if not r.ok]
    detail = f"failed cases: {', '.join(failed)}" if failed else f"{len(results)} case(s) completed"
    return Verdict(check="cases-completed", passed=not failed, detail=detail)


def metric_values(results: Sequence[CaseResult], name: str) -> List[float]:
    """Values of one metric over the completed cases that report it."""
    return [float(r.metrics[name]) for r in results if r.ok and r.metrics.get(name) is not None]


def bound_verdict(check: str, values: Sequence[float], bound: float) -> Verdict:
    """Pass when every value is ≤ bound; an empty list fails."""
    if not values:
        return Verdict(check=check, passed=False, detail="no values")
    worst = max(values)
    return Verdict(check=check, passed=worst <= bound, detail=f"max {worst:.3e} (bound {bound:g})")


def execute_case(handler: ExperimentHandler, cfg, case: Case) -> CaseResult:
    """
    Run one case, timing it and turning any exception into a recorded error.

    A failing case never aborts the experiment; ``judge`` sees it as not ok.
    """
    start = time.perf_counter()
    try:
        result = handler.run_case(cfg, case)
    except Exception as e:
        logger.error(f"Runner: case {case.case_id} failed - {type(e).__name__}: {str(e)}")
        result = CaseResult(case_id=case.case_id, params=case.params, error=f"{type(e).__name__}: {e}")
    return result.model_copy(update={"seconds": time.perf_counter() - start})


async def run_cases(handler: ExperimentHandler, cfg, cases: Sequence[Case], jobs: int = 1) -> List[CaseResult]:
    """
    Run cases on worker threads, at most ``jobs`` at a time.

    Results come back in declared order whatever the completion order.
    """
    semaphore = asyncio.Semaphore(max(1, jobs))

    async def run_one(case: Case) -> CaseResult:
        async with semaphore:
            result = await asyncio.to_thread(execute_case, handler, cfg, case)
        logger.debug(f"Runner: {case.case_id} finished in {result.seconds:.3f}s")
        return result

    return list(await asyncio.gather(*(run_one(case) for case in cases)))
