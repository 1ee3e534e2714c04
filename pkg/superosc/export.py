import csv
import io
import json
import logging
import sys
from fractions import Fraction
from importlib import metadata

import mpmath

from constants import CSV_COLUMNS, OUTPUT_DIGITS
from superosc.errors import ConfigError, ProblemFileError
from superosc.numbers import is_inf

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def format_value(value):
    """
    JSON-friendly form of a library number: integral Fractions as ints, other
    Fractions as "p/q", mp reals as 30-digit strings, complex as {"re", "im"}.
    """
    if value is None:
        return None
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if is_inf(value):
        return "inf"
    if isinstance(value, mpmath.mpc):
        return {"re": format_value(value.real), "im": format_value(value.imag)}
    if isinstance(value, (mpmath.mpf, float)):
        return mpmath.nstr(mpmath.mpf(value), OUTPUT_DIGITS)
    if isinstance(value, (list, tuple)):
        return [format_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): format_value(v) for k, v in value.items()}
    return value


def _cell(value):
    value = format_value(value)
    if value is None:
        return ""
    if isinstance(value, dict):
        return f"{value['re']}{'' if str(value['im']).startswith('-') else '+'}{value['im']}j"
    return value


def package_versions():
    versions = {}
    for name in ("mpmath", "click", "pydantic", "PyYAML"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    versions["python"] = sys.version.split()[0]
    return versions


def report_to_dict(report):
    return {
        "columns": list(CSV_COLUMNS),
        "rows": [[format_value(v) for v in row] for row in report.rows()],
        "failures": {str(n): message for n, message in report.failures.items()},
        "worst_points": format_value(report.worst_points),
        "metadata": format_value(report.metadata),
    }


def render_plot_data(report, fmt="csv"):
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows():
            writer.writerow([_cell(v) for v in row])
        return buffer.getvalue()
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2) + "\n"
    raise ConfigError(f"Unknown plot data format {fmt!r}; choose from {list(FORMATS)}")


def emit_plot_data(report, fmt="csv", out=None):
    """Writes the report as CSV or JSON to `out` (a path) or returns the text when out is None."""
    text = render_plot_data(report, fmt)
    if out is None:
        return text
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        logger.error(f"Could not write plot data to {out}: {e}")
        raise ProblemFileError(f"Could not write {out}: {e}") from e
    logger.info(f"Wrote {len(report.n_values)} rows to {out}")
    return text
