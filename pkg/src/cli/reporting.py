"""Serialize experiment reports as CSV, JSON or markdown.

Everything here is a pure function of the report and the precision setting, so
identical reports always serialize to identical bytes.
"""
from typing import Any, Dict, List
import json
import math

import numpy as np
import pandas as pd

from ..core.models import ExperimentKind, ExperimentReport
from .models import OutputFormat, Precision
from .templates import TITLES, get_template

SIGNIFICANT_DIGITS = 6
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"

COLUMNS: Dict[ExperimentKind, List[str]] = {
    ExperimentKind.EPSILON: ["p", "eps", "d", "g", "eps_g", "worst_j", "max_abs_cos_sum", "threshold", "meets_bound", "states"],
    ExperimentKind.SIMULATE: ["p", "d", "j", "closed_form", "oracle", "abs_diff", "completion"],
    ExperimentKind.TABLE1: ["p", "eps", "d", "g", "eps_rand", "eps_g", "eps_rand_std", "states", "union_bound"],
    ExperimentKind.TABLE2: ["p", "eps", "d", "g", "eps_g", "max_abs_cos_sum", "threshold", "meets_bound"],
    ExperimentKind.MIN_GEN: ["p", "eps", "d", "g_min", "eps_g_min"],
    ExperimentKind.HYPOTHESIS: ["p", "g", "d", "j", "cos_sum", "threshold"],
    ExperimentKind.RANDOM_RATE: [
        "p", "eps", "d", "trials", "successes", "fraction", "wilson_center", "half_width",
        "failure_fraction", "union_bound",
    ],
    ExperimentKind.RANDOM_VS_CYCLIC: [
        "p", "eps", "d", "g", "eps_rand", "eps_g", "cyclic_wins", "bound", "sup_f_g", "sup_f_rand",
    ],
    ExperimentKind.AZUMA_TAIL: ["p", "d", "j", "lambda", "empirical", "bound", "margin", "passes"],
    ExperimentKind.AIKPS_BOUND: [
        "p", "eps_a", "log_base", "primes_r", "offsets_max", "t_size", "max_abs_exponential_sum",
        "argmax_k", "ratio", "bound_ratio", "bound", "within_bound", "max_abs_cosine_sum",
        "real_part_max_deviation", "degenerate",
    ],
    ExperimentKind.INSTANCE: ["p", "eps", "d", "sequence", "g", "trial", "sup_f", "eps_value", "bound", "meets_bound"],
    ExperimentKind.STATES: ["p", "eps", "d", "d_unrounded", "qfa_states", "classical_states"],
}


def _plain(value: Any, precision: Precision) -> Any:
    """Plain Python scalars; floats rounded to six significant digits unless full precision."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, dict):
        return {key: _plain(item, precision) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item, precision) for item in value]
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        if precision is Precision.SHORT:
            return float(FLOAT_FORMAT % value)
    return value


def _metadata(report: ExperimentReport, precision: Precision, timing: bool) -> Dict[str, Any]:
    exclude = None if timing else {"elapsed_ms"}
    return _plain(report.metadata.model_dump(mode="json", exclude=exclude), precision)


def render_csv(report: ExperimentReport, precision: Precision = Precision.SHORT) -> str:
    rows = [_plain(row, precision) for row in report.rows]
    frame = pd.DataFrame(rows, columns=COLUMNS[report.kind])
    float_format = FLOAT_FORMAT if precision is Precision.SHORT else None
    return frame.to_csv(index=False, lineterminator="\n", float_format=float_format)


def render_json(report: ExperimentReport, precision: Precision = Precision.SHORT, timing: bool = False) -> str:
    document = {
        "metadata": _metadata(report, precision, timing),
        "rows": [_plain(row, precision) for row in report.rows],
    }
    return json.dumps(document, indent=2) + "\n"


def render_markdown(report: ExperimentReport, precision: Precision = Precision.SHORT, timing: bool = False) -> str:
    metadata = _metadata(report, precision, timing)
    summary = metadata.pop("summary", {})
    return get_template(report.kind).render(
        title=TITLES[report.kind],
        metadata=metadata,
        columns=COLUMNS[report.kind],
        rows=[_plain(row, precision) for row in report.rows],
        summary=summary,
    )


def render(
    report: ExperimentReport,
    fmt: OutputFormat = OutputFormat.CSV,
    precision: Precision = Precision.SHORT,
    timing: bool = False,
) -> str:
    if fmt is OutputFormat.JSON:
        return render_json(report, precision, timing)
    if fmt is OutputFormat.MARKDOWN:
        return render_markdown(report, precision, timing)
    return render_csv(report, precision)
