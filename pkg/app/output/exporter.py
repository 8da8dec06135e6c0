"""Report exporter: report.json, one CSV per table and timings.csv."""
import csv
import json
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, TextIO

from app.core.logging import logger
from app.output.formatter import csv_cell, round_floats
from app.schemas.experiment import CaseResult, Metric, Report


def report_payload(report: Report) -> Dict:
    """
    JSON-ready report with floats rounded.

    Per-case tables live in the CSVs; timings live only in timings.csv.
    """
    return round_floats({
        "config": report.config,
        "cases": [r.model_dump(include={"case_id", "params", "metrics", "error"}) for r in report.cases],
        "verdicts": [v.model_dump() for v in report.verdicts],
        "verdict": report.verdict,
    })


def collect_tables(results: Sequence[CaseResult]) -> Dict[str, List[Dict[str, Metric]]]:
    """Concatenate per-case table rows in case order, tables in first-seen order."""
    tables: Dict[str, List[Dict[str, Metric]]] = {}
    for result in results:
        for name, rows in result.tables.items():
            tables.setdefault(name, []).extend(rows)
    return tables


def _columns(rows: Iterable[Dict[str, Metric]]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def write_rows(rows: Sequence[Dict[str, Metric]], stream: TextIO) -> None:
    """CSV with the union of the row keys as header; absent cells are empty."""
    columns = _columns(rows)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([csv_cell(row.get(column)) for column in columns])


def write_csv(rows: Sequence[Dict[str, Metric]], path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_rows(rows, f)
    return path


def export_report(report: Report, summary_tables: Dict[str, List[Dict[str, Metric]]],
                  output_dir: Path) -> List[Path]:
    """
    Write a finished report.

    Args:
        report: Report to export
        summary_tables: Tables derived from several cases, written after the per-case ones
        output_dir: Directory to write into (created if missing)

    Returns:
        Paths written, report.json first

    Raises:
        OSError: If the directory or files cannot be written
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    report_path = output_dir / "report.json"
    logger.info(f"Exporter: Writing report to {report_path}")
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report_payload(report), f, indent=2, ensure_ascii=False)
        f.write("\n")
    written = [report_path]

    tables = collect_tables(report.cases)
    for name, rows in summary_tables.items():
        tables.setdefault(name, []).extend(rows)
    for name, rows in tables.items():
        if rows:
            written.append(write_csv(rows, output_dir / f"{name}.csv"))

    timings = [{"case_id": r.case_id, "seconds": r.seconds, "ok": r.ok} for r in report.cases]
    written.append(write_csv(timings, output_dir / "timings.csv"))

    logger.info(f"Exporter: {len(written)} file(s) written to {output_dir}")
    return written
