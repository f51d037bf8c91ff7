"""
Reporting

Renders metric summaries as CSV or JSON documents and pivots them into the
published table layouts. Numbers carry 6 significant digits.
"""

import json
import subprocess
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .exceptions import EmptyInput, UnsupportedFormat
from .harness import MetricsSummary

FORMATS = ("csv", "json")

RESULT_COLUMNS = (
    "delta",
    "K",
    "gap",
    "alpha",
    "noise_p",
    "algo",
    "reps",
    "success_rate",
    "failure_ratio",
    "mean_stop_time",
    "stop_time_se",
    "mean_rejection_rate",
)

ALGORITHM_LABELS = {"bair": "BAIR", "uni": "UNI", "exp3": "EXP3", "ts": "T&S"}


def significant(value: float, digits: int = 6) -> float:
    """Round to the given number of significant digits."""
    return float(f"{value:.{digits}g}")


def build_id(version: str) -> str:
    """`git describe --always --dirty` of the working tree, or the package version."""
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return version
    return described.stdout.strip() or version


def summary_rows(summaries: Sequence[MetricsSummary]) -> List[Dict[str, Any]]:
    """One flat record per (cell, algorithm), keys in RESULT_COLUMNS order plus the cell label."""
    rows = []
    for summary in summaries:
        cell = summary.cell
        for row in summary.rows:
            rows.append(
                {
                    "delta": cell.delta,
                    "K": cell.n_arms,
                    "gap": cell.gap,
                    "alpha": cell.alpha,
                    "noise_p": cell.noise_p,
                    "algo": row.algorithm,
                    "reps": row.replications,
                    "success_rate": row.success_rate,
                    "failure_ratio": row.failure_ratio,
                    "mean_stop_time": row.mean_stop_time,
                    "stop_time_se": row.stop_time_se,
                    "mean_rejection_rate": row.mean_rejection_rate,
                    "label": cell.label,
                }
            )
    return rows


def _check(summaries: Sequence[MetricsSummary], fmt: str) -> None:
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if not summaries:
        raise EmptyInput("no summaries to emit")


def _comment_header(metadata: Optional[Dict[str, Any]]) -> str:
    if not metadata:
        return ""
    return "".join(f"# {key}: {json.dumps(value, sort_keys=True)}\n" for key, value in metadata.items())


def _plain(value: Any) -> Any:
    value = value.item() if hasattr(value, "item") else value
    return significant(value) if isinstance(value, float) else value


def _rounded(records: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return [{key: _plain(value) for key, value in record.items()} for record in records]


def emit_results(
    summaries: Sequence[MetricsSummary],
    fmt: str = "csv",
    metadata: Optional[Dict[str, Any]] = None,
) -> str:
    """
    Render summaries as a results document.

    CSV: optional '# key: value' metadata lines, then the header
    delta,K,gap,alpha,noise_p,algo,reps,success_rate,failure_ratio,
    mean_stop_time,stop_time_se,mean_rejection_rate and one row per
    (cell, algorithm). JSON: {"metadata": ..., "results": [...]} with the
    same fields.

    Args:
        summaries: Non-empty list of cell summaries
        fmt: 'csv' or 'json'
        metadata: Run header (seed, build id, resolved config)

    Returns:
        The document as a string

    Raises:
        UnsupportedFormat, EmptyInput
    """
    _check(summaries, fmt)
    records = [{key: record[key] for key in RESULT_COLUMNS} for record in summary_rows(summaries)]
    if fmt == "json":
        return json.dumps({"metadata": metadata or {}, "results": _rounded(records)}, indent=2) + "\n"
    frame = pd.DataFrame.from_records(records, columns=list(RESULT_COLUMNS))
    return _comment_header(metadata) + frame.to_csv(index=False, float_format="%.6g", lineterminator="\n")


def parse_results(document: str, fmt: str = "csv") -> pd.DataFrame:
    """Load a document written by emit_results() back into a frame."""
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return pd.DataFrame.from_records(json.loads(document)["results"], columns=list(RESULT_COLUMNS))
    lines = [line for line in document.splitlines() if line and not line.startswith("#")]
    if not lines:
        raise EmptyInput("document holds no rows")
    return pd.read_csv(StringIO("\n".join(lines)))


def table_frame(summaries: Sequence[MetricsSummary], layout: str = "comparison") -> pd.DataFrame:
    """
    Pivot summaries into a published table layout.

    'comparison': rows (delta, K); column groups Stopping Time (self-stopping
    algorithms only), Rejection Rate (%), Prob. of Success.
    'n1_sweep': rows (delta, K); column groups Stopping Time and
    Prob. of Success, one column per N1 choice (the cell label).
    """
    if not summaries:
        raise EmptyInput("no summaries to tabulate")
    frame = pd.DataFrame.from_records(summary_rows(summaries))
    frame["rejection_pct"] = 100.0 * frame["mean_rejection_rate"]
    if layout == "n1_sweep":
        frame = frame[frame["algo"] == "bair"]
        order = list(dict.fromkeys(frame["label"]))
        values = {"Stopping Time": "mean_stop_time", "Prob. of Success": "success_rate"}
        column_key = "label"
    elif layout == "comparison":
        frame["label"] = frame["algo"].map(ALGORITHM_LABELS)
        order = list(dict.fromkeys(frame["label"]))
        values = {
            "Stopping Time": "mean_stop_time",
            "Rejection Rate (%)": "rejection_pct",
            "Prob. of Success": "success_rate",
        }
        column_key = "label"
    else:
        raise UnsupportedFormat(f"unknown table layout {layout!r}")

    blocks = []
    for title, column in values.items():
        block = frame.pivot_table(index=["delta", "K"], columns=column_key, values=column, sort=False)
        block = block.reindex(columns=[name for name in order if name in block.columns])
        if title == "Stopping Time" and layout == "comparison":
            # fixed-horizon baselines inherit BAIR's stopping time
            block = block[[name for name in block.columns if name in ("BAIR", "T&S")]]
        block.columns = pd.MultiIndex.from_product([[title], block.columns])
        blocks.append(block)
    table = pd.concat(blocks, axis=1)
    return table.sort_index(level=["delta", "K"], ascending=[False, True])


def emit_table(
    summaries: Sequence[MetricsSummary],
    fmt: str = "csv",
    layout: str = "comparison",
    metadata: Optional[Dict[str, Any]] = None,
) -> str:
    """
    Render a published-layout table.

    CSV flattens the two-level columns to 'group | algorithm'; JSON emits
    {"metadata": ..., "table": [{"delta", "K", "<group> | <algorithm>": value}]}.

    Raises:
        UnsupportedFormat, EmptyInput
    """
    _check(summaries, fmt)
    table = table_frame(summaries, layout)
    table.columns = [f"{group} | {name}" for group, name in table.columns]
    table = table.reset_index()
    if fmt == "json":
        records = _rounded(table.to_dict(orient="records"))
        return json.dumps({"metadata": metadata or {}, "table": records}, indent=2) + "\n"
    return _comment_header(metadata) + table.to_csv(index=False, float_format="%.6g", lineterminator="\n")
