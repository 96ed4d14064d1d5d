"""Figure-data harness for the reference experiments.

Each figure id maps to a function that runs its canned scenario and
writes the plotted quantities as CSV under ``out``. Suffix ``a`` is the
MI metric and ``b`` the MMSE metric.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import max_sidelobe_db, notch_depth_db
from .driver import DEFAULT_EPS, LFMStart, RandomPhaseStart, RunReport, design
from .model import lfm_waveform, mmse_value, mutual_information
from .outputs import write_acf, write_csv, write_esd, write_json, write_trace, write_waveform
from .scenarios import Scenario, jamming_scenario, zcz_scenario

SWEEP_LENGTHS = (25, 50, 75, 100, 125, 150)
ZCZ_EPS = 1e-20
N_STARTS = 50


@dataclass(frozen=True)
class RunOptions:
    eps: float | None = None
    seed: int = 0
    starts: int = N_STARTS
    max_outer_iters: int = 10000
    lengths: tuple[int, ...] = SWEEP_LENGTHS


def _metric(fig: str) -> str:
    return "mi" if fig.endswith("a") else "mmse"


def _run(sc: Scenario, metric: str, kind: str, eps: float, opts: RunOptions, initial=None) -> RunReport:
    return design(sc.problem(metric, kind, 1.0, initial), eps=eps, max_outer_iters=opts.max_outer_iters)


def fig_traces(fig: str, out: Path, opts: RunOptions, kind: str) -> dict:
    """Objective vs time for the constrained design and its energy benchmark."""
    metric, sc = _metric(fig), jamming_scenario()
    eps = opts.eps or DEFAULT_EPS
    rep = _run(sc, metric, kind, eps, opts)
    bench = _run(sc, metric, "energy", eps, opts)
    write_trace(out / f"trace_{kind}.csv", rep)
    write_trace(out / "trace_energy.csv", bench)
    write_waveform(out / "waveform.csv", rep.final_waveform)
    return {"constrained": rep.summary(), "energy": bench.summary()}


def fig_esd(fig: str, out: Path, opts: RunOptions, kind: str) -> dict:
    metric, sc = _metric(fig), jamming_scenario()
    rep = _run(sc, metric, kind, opts.eps or DEFAULT_EPS, opts)
    s = rep.final_waveform
    write_esd(out / "esd.csv", s)
    write_waveform(out / "waveform.csv", s)
    summary = {"run": rep.summary(), "notch_depth_db": notch_depth_db(s, sc.jamming.band)}
    if kind == "spectral":
        summary["interference"] = float(np.vdot(s, sc.interference_matrix() @ s).real)
        summary["E_I"] = sc.E_I
        band = sc.bands.bands[0]
        summary["comm_band_depth_db"] = notch_depth_db(s, (band.f1, band.f2))
    return summary


def fig_starts(fig: str, out: Path, opts: RunOptions) -> dict:
    """Converged objective from seeded random-phase starts plus the LFM start."""
    metric, sc = _metric(fig), jamming_scenario()
    eps = opts.eps or DEFAULT_EPS
    rows = []
    for i in range(opts.starts):
        seed = opts.seed + i
        rep = _run(sc, metric, "papr", eps, opts, RandomPhaseStart(seed))
        rows.append((f"random-{seed}", rep.final_objective, _mmse(rep, sc), len(rep.trace) - 1))
    rep = _run(sc, metric, "papr", eps, opts, LFMStart())
    rows.append(("lfm", rep.final_objective, _mmse(rep, sc), len(rep.trace) - 1))
    write_csv(out / "starts.csv", ("start", "objective", "mmse", "iterations"), rows)
    obj = np.array([r[1] for r in rows[:-1]])
    return {"relative_spread": float((obj.max() - obj.min()) / np.median(obj)), "starts": opts.starts}


def _mmse(rep: RunReport, sc: Scenario) -> float:
    return mmse_value(rep.final_waveform, sc.prior(), sc.disturbance())


def sweep(kind: str, opts: RunOptions) -> list[dict]:
    """MI and MMSE of the MI design, the MMSE design and LFM for each ``L``."""
    eps = opts.eps or DEFAULT_EPS
    rows = []
    for L in opts.lengths:
        sc = jamming_scenario(L)
        prior, dist = sc.prior(), sc.disturbance()
        codes = {"lfm": lfm_waveform(L, sc.energy)}
        for metric in ("mi", "mmse"):
            codes[f"{metric}-design"] = _run(sc, metric, kind, eps, opts).final_waveform
        for name, s in codes.items():
            rows.append({"L": L, "waveform": name, "mi": mutual_information(s, prior, dist),
                         "mmse": mmse_value(s, prior, dist)})
    return rows


def fig_sweep(fig: str, out: Path, opts: RunOptions, kind: str) -> dict:
    rows = sweep(kind, opts)
    write_csv(out / "sweep.csv", ("L", "waveform", "mi", "mmse"),
              ((r["L"], r["waveform"], r["mi"], r["mmse"]) for r in rows))
    return {"rows": rows}


def fig_zcz(fig: str, out: Path, opts: RunOptions, what: str) -> dict:
    metric, sc = _metric(fig), zcz_scenario()
    rep = _run(sc, metric, "papr", opts.eps or ZCZ_EPS, opts)
    s = rep.final_waveform
    if what == "trace":
        write_trace(out / "trace.csv", rep)
    else:
        write_acf(out / "acf.csv", s)
    write_waveform(out / "waveform.csv", s)
    return {"run": rep.summary(), "max_sidelobe_db": max_sidelobe_db(s, sc.P)}


FIGURES: dict[str, Callable[[str, Path, RunOptions], dict]] = {}
for _s in "ab":
    FIGURES[f"1{_s}"] = lambda f, o, r: fig_traces(f, o, r, "papr")
    FIGURES[f"2{_s}"] = lambda f, o, r: fig_esd(f, o, r, "papr")
    FIGURES[f"3_5{_s}"] = fig_starts
    FIGURES[f"3{_s}"] = lambda f, o, r: fig_sweep(f, o, r, "papr")
    FIGURES[f"4{_s}"] = lambda f, o, r: fig_traces(f, o, r, "spectral")
    FIGURES[f"5{_s}"] = lambda f, o, r: fig_esd(f, o, r, "spectral")
    FIGURES[f"6{_s}"] = lambda f, o, r: fig_sweep(f, o, r, "spectral")
    FIGURES[f"7{_s}"] = lambda f, o, r: fig_zcz(f, o, r, "trace")
    FIGURES[f"8{_s}"] = lambda f, o, r: fig_zcz(f, o, r, "acf")


def reproduce(fig: str, out: Path, opts: RunOptions | None = None) -> dict:
    if fig not in FIGURES:
        raise KeyError(fig)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"figure": fig, **FIGURES[fig](fig, out, opts or RunOptions())}
    write_json(out / "report.json", summary)
    return summary
