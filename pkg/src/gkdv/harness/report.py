"""Result persistence: CSV rows, JSON summaries and SVG renderings.

CSV schema for ``run``::

    experiment_id,kind,seed,<metric columns of the kind>,passed

Floats are written with ``repr`` (shortest round-trip form), booleans as
``true``/``false``.  ``sweep`` prepends the axis column and appends
``sweep_slope``, ``sweep_spread`` and ``error``.  Nothing time-dependent goes
into the CSV, so a fixed config and seed give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

__all__ = ["format_value", "csv_text", "write_csv", "write_summary", "write_plots"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(row.get(h, "")) for h in header])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_summary(path, payload: dict) -> Path:
    path = Path(path)
    body = dict(payload)
    body["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    path.write_text(json.dumps(_clean(body), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "gkdv"
    fig, ax = plt.subplots(figsize=(6, 4))
    return plt, fig, ax


def _save(plt, fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def write_plots(kind: str, series: dict, out_dir) -> list:
    """Render the convenience plots for ``kind``; returns the written paths."""
    out_dir = Path(out_dir)
    written = []
    if kind == "conservation" and series:
        plt, fig, ax = _figure()
        ax.plot(series["t"], np.abs(series["mass"]) + 1e-18, label="mass")
        ax.plot(series["t"], np.abs(series["energy"]) + 1e-18, label="energy")
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("relative drift")
        ax.legend()
        written.append(_save(plt, fig, out_dir / "drift.svg"))
    elif kind == "decay" and series:
        plt, fig, ax = _figure()
        t = series["t"]
        for key in sorted(k for k in series if k.startswith("norm_")):
            lab = key[len("norm_"):]
            slope, (t0, t1) = series[f"fit_{lab}"]
            line, = ax.loglog(t, series[key], label=f"{lab}: slope {slope:.3f}")
            sel = (t >= t0) & (t <= t1)
            ref = series[key][sel][0] * (t[sel] / t[sel][0]) ** slope
            ax.loglog(t[sel], ref, "--", color=line.get_color())
        ax.set_xlabel("t")
        ax.set_ylabel("L^p norm of the free evolution")
        ax.legend()
        written.append(_save(plt, fig, out_dir / "decay.svg"))
    elif kind == "morawetz_truncated" and series and len(series["R"]) > 1:
        plt, fig, ax = _figure()
        ax.loglog(series["R"], series["defect"], "o-")
        ax.set_xlabel("R")
        ax.set_ylabel("max flux defect")
        written.append(_save(plt, fig, out_dir / "morawetz_defect.svg"))
    elif kind == "local_laws" and series:
        plt, fig, ax = _figure()
        for which, (h, err) in series.items():
            ax.loglog(h, err, "o-", label=which)
        ax.set_xlabel("recording stride")
        ax.set_ylabel("max residual")
        ax.legend()
        written.append(_save(plt, fig, out_dir / "local_laws.svg"))
    elif kind == "small_data" and series:
        plt, fig, ax = _figure()
        ax.loglog(series["epsilon"], series["tv"], "o-", label="profile variation")
        ax.set_xlabel("epsilon")
        ax.legend()
        written.append(_save(plt, fig, out_dir / "small_data.svg"))
    return written
