"""Scalar diagnostics of a designed waveform."""
from __future__ import annotations

import math

import numpy as np

from .model import (
    DisturbanceModel,
    TargetPrior,
    acf,
    band_mask,
    energy,
    esd,
    mmse_value,
    mutual_information,
    papr,
)

DB_FLOOR = -300.0


def notch_depth_db(s, band: tuple[float, float], nfft: int = 4096) -> float:
    """Mean out-of-band ESD over mean in-band ESD, in dB (linear means)."""
    f, d = esd(s, nfft)
    inside = band_mask(f, *band)
    return float(10.0 * math.log10(d[~inside].mean() / max(d[inside].mean(), 1e-300)))


def max_sidelobe_db(s, P: int) -> float:
    """Largest ``|r_p|`` over lags ``1..P-1`` in dB, floored at -300."""
    r = np.abs(acf(s)[1:P])
    if r.size == 0 or r.max() == 0:
        return DB_FLOOR
    return max(float(20.0 * np.log10(r.max())), DB_FLOOR)


def waveform_metrics(s, prior: TargetPrior, dist: DisturbanceModel, R_I: np.ndarray | None = None,
                     jam_band: tuple[float, float] | None = None) -> dict:
    s = np.asarray(s, dtype=complex)
    out = {
        "L": int(s.size),
        "energy": energy(s),
        "papr": papr(s),
        "mutual_information": mutual_information(s, prior, dist),
        "mmse": mmse_value(s, prior, dist),
        "max_sidelobe_db": max_sidelobe_db(s, prior.P),
    }
    if R_I is not None:
        out["interference"] = float(np.vdot(s, R_I @ s).real)
    if jam_band is not None:
        out["notch_depth_db"] = notch_depth_db(s, jam_band)
    return out
