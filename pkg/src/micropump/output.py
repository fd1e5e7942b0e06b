"""CSV and report writers. Boundary units: um, uN, A, T."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .model import TABLE_LIMITING_FORCE, DesignReport, FieldSample
from .plate import PlateField, RadialProfile

FIELD_COLUMNS = ("z_um", "bz_T", "dbz_dz_T_per_m")
RADIAL_COLUMNS = ("r_um", "w_um")
PLANE_COLUMNS = ("x_um", "y_um", "w_um")

REPORT_SCHEMA = 1


def fmt(value) -> str:
    """Full-precision scientific notation (17 significant digits)."""
    return f"{float(value):.16e}"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_csv(header, rows, path) -> None:
    write_text(csv_text(header, rows), path)


def profile_table(series):
    """(header, rows) for field samples, a radial profile or a 2-D plate field."""
    if isinstance(series, RadialProfile):
        return RADIAL_COLUMNS, [(r * 1e6, w * 1e6) for r, w in zip(series.r, series.w)]
    if isinstance(series, PlateField):
        xx, yy = np.meshgrid(series.x, series.y, indexing="ij")
        return PLANE_COLUMNS, list(zip(xx.ravel() * 1e6, yy.ravel() * 1e6, series.w.ravel() * 1e6))
    series = list(series)
    if not series:
        raise ValueError("profile is empty")
    if not all(isinstance(s, FieldSample) for s in series):
        raise TypeError("expected FieldSample items, a RadialProfile or a PlateField")
    return FIELD_COLUMNS, [(s.z * 1e6, s.bz, s.dbz_dz) for s in series]


def emit_profile_csv(series, path) -> None:
    header, rows = profile_table(series)
    if not rows:
        raise ValueError("profile is empty")
    write_csv(header, rows, path)


def read_csv(path):
    """(header, float array) from a file written by this module."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data)


def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def report_dict(report: DesignReport) -> dict:
    return {
        "report_schema": REPORT_SCHEMA,
        "config_hash": report.config_hash,
        "target_deflection_um": report.target_deflection * 1e6,
        "required_force_uN": report.required_force * 1e6,
        "required_current_a": report.required_current,
        "optimal_gap_um": report.optimal_gap * 1e6,
        "force_per_amp_uN": report.force_per_amp * 1e6,
        "attractive": report.attractive,
        "limiting_force_uN": report.limiting_force * 1e6,
        "limiting_force_branch": report.limiting_force_branch,
        "printed_limiting_force_uN": TABLE_LIMITING_FORCE * 1e6,
        "safety_factor_achieved": _finite_or_none(report.safety_factor_achieved),
        "feasible": report.feasible,
        "stage": report.stage,
        "notes": list(report.notes),
    }


def report_json(report: DesignReport) -> str:
    return json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n"


def report_text(report: DesignReport) -> str:
    d = report_dict(report)
    margin = d["safety_factor_achieved"]
    lines = [
        "micropump design report",
        f"  config sha256         {d['config_hash']}",
        f"  target deflection     {d['target_deflection_um']:.3f} um",
        f"  required force        {d['required_force_uN']:.3f} uN",
        f"  magnet gap            {d['optimal_gap_um']:.1f} um (coil plane to magnet mid-plane)",
        f"  force per ampere      {d['force_per_amp_uN']:.3f} uN/A ({'attractive' if report.attractive else 'repulsive'})",
        f"  required current      {d['required_current_a']:.4f} A",
        f"  limiting force        {d['limiting_force_uN']:.1f} uN (branch {d['limiting_force_branch']})",
        f"  safety factor         {'inf' if margin is None else f'{margin:.2f}'}",
        f"  feasible              {'yes' if report.feasible else 'no'}"
        + ("" if report.stage is None else f" (failed at {report.stage})"),
        "notes:",
    ]
    lines += [f"  - {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


def emit_report(report: DesignReport, path, format: str = "json") -> None:
    if format == "json":
        text = report_json(report)
    elif format == "text":
        text = report_text(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    write_text(text, Path(path))
