"""CSV/JSON artifact writers.

Floats are written with ``repr`` so files are locale independent and
round-trip exactly; identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .driver import RunReport
from .model import acf, esd

DB_FLOOR = -300.0


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def to_db(x: np.ndarray, power: bool = True) -> np.ndarray:
    x = np.abs(np.asarray(x))
    with np.errstate(divide="ignore"):
        out = (10.0 if power else 20.0) * np.log10(x)
    return np.maximum(out, DB_FLOOR)


def write_trace(path: Path, report: RunReport) -> Path:
    return write_csv(path, ("iter", "objective", "elapsed_s", "constraint_residual"),
                     ((t.k, t.objective, t.elapsed_s, t.constraint_residual) for t in report.trace))


def write_waveform(path: Path, s: np.ndarray) -> Path:
    return write_csv(path, ("index", "re", "im"), ((i, v.real, v.imag) for i, v in enumerate(np.asarray(s, complex))))


def read_waveform(path: Path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"index", "re", "im"} <= set(rows[0]):
        raise ValueError(f"{path}: expected header index,re,im")
    rows.sort(key=lambda r: int(r["index"]))
    return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])


def write_esd(path: Path, s: np.ndarray, nfft: int = 4096) -> Path:
    """ESD in dB relative to its peak."""
    f, d = esd(s, nfft, normalize=True)
    return write_csv(path, ("freq_norm", "esd_db"), zip(f, to_db(d)))


def write_acf(path: Path, s: np.ndarray) -> Path:
    r = acf(s)
    return write_csv(path, ("lag", "acf_db"), zip(range(r.size), to_db(r, power=False)))


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_run(out: Path, report: RunReport, extra: dict | None = None) -> dict:
    """Standard artifact set for a single design run."""
    out = Path(out)
    write_trace(out / "trace.csv", report)
    write_waveform(out / "waveform.csv", report.final_waveform)
    write_esd(out / "esd.csv", report.final_waveform)
    write_acf(out / "acf.csv", report.final_waveform)
    summary = {**report.summary(), **(extra or {})}
    write_json(out / "report.json", summary)
    return summary
