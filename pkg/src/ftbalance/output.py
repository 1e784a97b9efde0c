"""Deterministic file emitters: CSV tables, summary JSON, manifest."""

from __future__ import annotations

import json
import math
import os
from typing import Optional

import numpy as np

from .errors import IoError


def fmt(x) -> str:
    """Decimal with 17 significant digits; round-trips every float."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header, rows):
    """UTF-8, LF-terminated CSV; returns the number of data rows."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            count = 0
            for row in rows:
                fh.write(",".join(cell if isinstance(cell, str) else fmt(cell)
                                  for cell in row) + "\n")
                count += 1
        return count
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _snapshot_rows(report, times, dimension):
    for t in times:
        prof = report.snapshot(t)
        edges = np.concatenate([[-math.inf], prof.xs, [math.inf]])
        for j in range(prof.states.shape[0]):
            yield (t, edges[j], edges[j + 1], *prof.states[j])


def emit_outputs(report, ledger=None, curves=None, out_dir=".",
                 config_echo: Optional[dict] = None, snapshot_times=None,
                 summary_extra: Optional[dict] = None):
    """Write every artifact of a run; returns the file manifest."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    model = report.model
    n = model.dimension
    manifest = {}

    if snapshot_times is None:
        snapshot_times = [report.windows[-1].t1] if getattr(report, "windows", None) else []
    path = os.path.join(out_dir, "snapshots.csv")
    manifest["snapshots.csv"] = write_csv(
        path,
        ["t", "x_start", "x_end"] + [f"u_{k + 1}" for k in range(n)],
        _snapshot_rows(report, snapshot_times, n),
    )

    manifest["fronts.csv"] = write_csv(
        os.path.join(out_dir, "fronts.csv"),
        ["front_id", "family", "t_start", "x_start", "t_end", "x_end", "size", "kind"],
        ((s.id, s.family, s.t_start, s.x_start, s.t_end, s.x_end, s.size, s.kind)
         for s in report.front_segments()),
    )

    manifest["events.csv"] = write_csv(
        os.path.join(out_dir, "events.csv"),
        ["t", "x", "type", "incoming_ids", "outgoing_ids", "interaction_amount"],
        ((ev.t, ev.x, ev.kind,
          ";".join(str(i) for i in ev.incoming_ids),
          ";".join(str(i) for i in ev.outgoing_ids),
          ev.amount)
         for ev in report.events),
    )

    series = getattr(report, "series", None) or {}
    manifest["series.csv"] = write_csv(
        os.path.join(out_dir, "series.csv"),
        ["t", "tv", "v", "q", "upsilon"],
        zip(*(series[k] for k in ("t", "tv", "v", "q", "upsilon")))
        if series else [],
    )

    manifest["atoms.csv"] = write_csv(
        os.path.join(out_dir, "atoms.csv"),
        ["t", "x", "mu_I", "mu_IC"],
        ((a.t, a.x, a.mu_i, a.mu_ic) for a in (ledger.atoms if ledger else [])),
    )

    curve_rows = []
    for cid, curve in enumerate(curves or []):
        strengths = [curve.strengths[0]] + list(curve.strengths)
        for (t, x), strength in zip(curve.nodes, strengths):
            curve_rows.append((cid, curve.beta, curve.family, curve.index,
                               t, x, strength))
    manifest["curves.csv"] = write_csv(
        os.path.join(out_dir, "curves.csv"),
        ["curve_id", "beta", "family", "j", "t", "x", "strength"],
        curve_rows,
    )

    summary = {
        "model": model.name,
        "dimension": n,
        "accuracy": report.accuracy,
        "time_step": report.time_step,
        "events": len(report.events),
        "fronts": len(report.front_segments()),
        "atoms": manifest["atoms.csv"],
        "curves": len(curves or []),
        "fitted_growth": getattr(report, "fitted_growth", 0.0),
        "wall_seconds": getattr(report, "wall_seconds", 0.0),
    }
    if summary_extra:
        summary.update(summary_extra)
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    manifest["summary.json"] = 1
    if config_echo is not None:
        _write_json(os.path.join(out_dir, "config.json"), config_echo)
        manifest["config.json"] = 1
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def _write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
