"""Serialization of result tables and reports.

Tables are written as CSV with a header row and a fixed column order
``(N, s, quantity..., error_estimate, status)``, or as JSON carrying a
``schema_version`` field. Every file is written atomically, and identical
inputs give byte-identical files.
"""

import io
import json
import logging
import math
import os.path

import pandas as pd

from .utils import atomic_write

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

FLOAT_FORMAT = "%.12g"

LEADING_COLUMNS = ("N", "s")

TRAILING_COLUMNS = ("error_estimate", "status")


def order_columns(columns):
    """Return `columns` rearranged into the fixed report order."""
    columns = list(columns)
    leading = [c for c in LEADING_COLUMNS if c in columns]
    trailing = [c for c in TRAILING_COLUMNS if c in columns]
    middle = [c for c in columns if c not in leading and c not in trailing]
    return leading + middle + trailing


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def to_frame(rows, columns):
    """Return the rows (a list of dicts) as a data frame in report order."""
    columns = order_columns(columns)
    return pd.DataFrame([{c: row.get(c) for c in columns} for row in rows], columns=columns)


def render_csv(rows, columns):
    buffer = io.StringIO()
    to_frame(rows, columns).to_csv(buffer, index=False, float_format=FLOAT_FORMAT,
                                   lineterminator="\n")
    return buffer.getvalue()


def render_json(payload):
    """Return `payload` as JSON with the schema version attached."""
    document = dict(payload)
    document["schema_version"] = SCHEMA_VERSION
    return json.dumps(document, indent=2, sort_keys=True, default=_clean) + "\n"


def render_table_json(name, rows, columns, summary=None):
    columns = order_columns(columns)
    payload = {
        "table": name,
        "columns": columns,
        "rows": [{c: _clean(row.get(c)) for c in columns} for row in rows],
    }
    if summary is not None:
        payload["summary"] = summary
    return render_json(payload)


def write_table(directory, name, rows, columns, fmt="csv", summary=None):
    """Write a table named `name` into `directory` and return its path.

    In CSV format the optional `summary` goes into a JSON file next to the
    table.
    """
    if fmt == "csv":
        path = os.path.join(directory, name + ".csv")
        atomic_write(path, render_csv(rows, columns))
        if summary is not None:
            atomic_write(os.path.join(directory, name + ".summary.json"), render_json(summary))
    elif fmt == "json":
        path = os.path.join(directory, name + ".json")
        atomic_write(path, render_table_json(name, rows, columns, summary))
    else:
        raise ValueError("Unknown output format {!r}.".format(fmt))
    logger.info("Wrote %s (%d rows).", path, len(rows))
    return path


def write_report(directory, name, payload):
    """Write a JSON report and return its path."""
    path = os.path.join(directory, name + ".json")
    atomic_write(path, render_json(payload))
    logger.info("Wrote %s.", path)
    return path


def write_line_chart(directory, name, frame, x, ys, logy=False, title=None):
    """Write a static SVG line chart of the columns `ys` against `x`."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "critbubble"
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ys:
        data = frame[[x, y]].dropna()
        ax.plot(data[x], data[y], marker=".", label=y)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    if title:
        ax.set_title(title)
    ax.legend()
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    path = os.path.join(directory, name + ".svg")
    atomic_write(path, buffer.getvalue())
    return path
