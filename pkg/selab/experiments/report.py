"""
Report artifacts: JSON, CSV tables and two-column plot data.

Everything written here is a pure function of the ``MetricsReport``, so
re-running an identical configuration reproduces the files byte for byte.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping

import pandas as pd

from selab.core.exceptions import ReportError
from selab.core.logger_manager import get_logger

from .metrics import MetricsReport

logger = get_logger(__name__)

FLOAT_FORMAT = "%.6f"


def write_json(path: Path, doc: Any) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportError(str(path), str(e)) from e
    return path


def _write_csv(path: Path, rows: List[Dict[str, Any]], columns: List[str]) -> Path:
    try:
        pd.DataFrame(rows, columns=columns).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ReportError(str(path), str(e)) from e
    return path


def _write_dat(path: Path, points: List[tuple], header: str) -> Path:
    lines = [f"# {header}"] + [f"{x} {y:.6f}" for x, y in points]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportError(str(path), str(e)) from e
    return path


def success_rows(report: MetricsReport) -> List[Dict[str, Any]]:
    return [{"attack": c.attack, "phase": c.phase, "mean": c.mean, "std": c.std} for c in report.ordered_cells()]


def prob_shift_rows(report: MetricsReport) -> List[Dict[str, Any]]:
    rows = []
    for c in report.ordered_cells():
        before, after = c.mean_prob_before, c.mean_prob_after
        rows.append(
            {
                "attack": c.attack,
                "phase": c.phase,
                "prob_before": before,
                "prob_after": after,
                "shift": (after - before) if before is not None and after is not None else None,
            }
        )
    return rows


def emit_report(report: MetricsReport, directory: Path) -> List[Path]:
    """Write ``report.json``, ``success_rates.csv``, ``prob_shift.csv`` and ``plots/*.dat``."""
    out = Path(directory)
    plots = out / "plots"
    try:
        plots.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(str(out), str(e)) from e

    written = [
        write_json(out / "report.json", report.to_dict()),
        _write_csv(out / "success_rates.csv", success_rows(report), ["attack", "phase", "mean", "std"]),
        _write_csv(
            out / "prob_shift.csv",
            prob_shift_rows(report),
            ["attack", "phase", "prob_before", "prob_after", "shift"],
        ),
    ]
    for c in report.ordered_cells():
        stem = f"{c.attack}_{c.phase}"
        written.append(
            _write_dat(plots / f"success_{stem}.dat", list(zip(report.seeds, c.success)), "seed success_rate")
        )
        degree = [(label, rate) for label, rate in c.degree_rates().items() if rate is not None]
        written.append(_write_dat(plots / f"degree_{stem}.dat", degree, "degree_bucket success_rate"))
        if c.mean_prob_before is not None:
            written.append(
                _write_dat(
                    plots / f"prob_{stem}.dat",
                    [("before", c.mean_prob_before), ("after", c.mean_prob_after)],
                    "stage mean_target_probability",
                )
            )
    logger.info(f"Report '{report.name}' written to {out} ({len(written)} files)")
    return written


def emit_sweep(reports: Mapping[str, MetricsReport], directory: Path, column: str) -> List[Path]:
    """Summarize a sweep: one row per variant and attack against the clean detector."""
    out = Path(directory)
    rows = []
    for variant, report in reports.items():
        for c in report.ordered_cells():
            rows.append({column: variant, "attack": c.attack, "phase": c.phase, "mean": c.mean, "std": c.std})
    try:
        (out / "plots").mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(str(out), str(e)) from e
    written = [_write_csv(out / f"{column}_sweep.csv", rows, [column, "attack", "phase", "mean", "std"])]
    main = rows[0]["attack"] if rows else None
    points = [(r[column], r["mean"]) for r in rows if r["phase"] == "clean" and r["attack"] == main]
    written.append(_write_dat(out / "plots" / f"{column}_sweep.dat", points, f"{column} success_rate"))
    return written
