"""CSV writers. Every file starts with a provenance comment line."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .coupled import SCRunResult
from .single import PotentialCurve, ThresholdReport

__all__ = [
    "fmt",
    "provenance",
    "write_csv",
    "write_potential_curve",
    "write_stationary_points",
    "write_thresholds",
    "write_sc_trace",
    "write_sc_state",
]


def fmt(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def provenance(system: str, seed: int) -> str:
    return f"# saturation-lab v{__version__}, system={system}, seed={seed}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], system: str, seed: int = 0) -> Path:
    buf = io.StringIO()
    buf.write(provenance(system, seed) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
    return path


def write_potential_curve(path: Path, curve: PotentialCurve, seed: int = 0) -> Path:
    header = ["x"] + [f"U_{float(e)!r}" for e in curve.eps]
    rows = ([x, *curve.U[:, k]] for k, x in enumerate(curve.x))
    return write_csv(path, header, rows, curve.system, seed)


def write_stationary_points(path: Path, curve: PotentialCurve, seed: int = 0) -> Path:
    """Non-zero stationary points only; x = 0 is stationary for every eps."""
    rows = [(sp.eps, p.x, p.U, p.kind) for sp in curve.stationary for p in sp.nonzero()]
    return write_csv(path, ["eps", "x", "U", "kind"], rows, curve.system, seed)


def write_thresholds(path: Path, report: ThresholdReport, seed: int = 0) -> Path:
    rows = [
        ("eps_s_star", "", report.eps_s_star, "", ""),
        ("eps_star", "", report.eps_star, "", ""),
        ("K", "", report.K, "", ""),
    ]
    for r in report.gap_at:
        rows.append(("gap", r.eps, r.gap, r.u, r.w_min if r.w_min is not None else ""))
    return write_csv(path, ["quantity", "eps", "value", "u", "w_min"], rows, report.system, seed)


def write_sc_trace(path: Path, result: SCRunResult, system: str, seed: int = 0) -> Path:
    rows = enumerate(result.max_entry_trace)
    return write_csv(path, ["iteration", "max_entry"], rows, system, seed)


def write_sc_state(path: Path, result: SCRunResult, system: str, seed: int = 0) -> Path:
    st = result.fixed_point
    rows = zip((int(p) for p in st.positions), st.values)
    return write_csv(path, ["position", "value"], rows, system, seed)
