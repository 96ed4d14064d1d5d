"""JSON scenario files.

Every field is optional; omitted fields take the jamming-experiment
defaults. Dense matrices are given as CSV files (entries parseable by
``complex()``), resolved relative to the config file.

Example::

    {
      "L": 100, "P": 10, "metric": "mi",
      "constraint": {"type": "papr", "rho": 1.0},
      "prior": {"mean": 5.0, "covariance": {"type": "scaled-identity", "scale": 1.0}},
      "disturbance": {"type": "jamming", "jam_power": 1000, "noise_power": 1, "band": [0.1, 0.3]},
      "init": {"type": "lfm"},
      "eps": 1e-4
    }
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .driver import DEFAULT_EPS, DEFAULT_MAX_OUTER, DesignProblem, LFMStart, MinEigStart, RandomPhaseStart
from .errors import RangeProfError
from .model import DisturbanceModel, JammingSpec, SpectralBandSet, TargetPrior, jamming_covariance, spectral_interference_matrix
from .qpsolve import Energy, Papr, SolverTolerances, Spectral

DEFAULTS: dict[str, Any] = {
    "L": 100,
    "P": 10,
    "e_t": None,
    "metric": "mi",
    "constraint": {"type": "papr", "rho": 1.0},
    "prior": {"mean": 5.0, "covariance": {"type": "identity"}},
    "disturbance": {"type": "jamming", "jam_power": 1000.0, "noise_power": 1.0, "band": [0.1, 0.3]},
    "bands": [{"f1": 0.7, "f2": 0.8, "weight": 1.0}],
    "init": {"type": "lfm"},
    "tolerances": {},
    "eps": DEFAULT_EPS,
    "max_outer_iters": DEFAULT_MAX_OUTER,
    "output": "out",
}

_CONSTRAINT_FIELDS = {"energy": set(), "papr": {"rho"}, "spectral": {"E_I"}}
_CONSTRAINT_DEFAULTS = {"papr": {"rho": 1.0}, "spectral": {"E_I": 0.05}}


class ConfigError(RangeProfError, ValueError):
    """Invalid scenario file; ``field`` is a dotted path into the document."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ResolvedConfig:
    data: dict
    base_dir: Path

    def __getitem__(self, key):
        return self.data[key]

    def dumps(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(k, "unknown field")
        if k == "prior":
            if not isinstance(v, dict):
                raise ConfigError("prior", "must be an object")
            unknown = set(v) - {"mean", "covariance"}
            if unknown:
                raise ConfigError(f"prior.{sorted(unknown)[0]}", "unknown field")
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ResolvedConfig:
    """Parse, merge with defaults and validate; raises ``ConfigError``."""
    raw: dict = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        base = path.parent
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read ({exc.strerror})") from exc
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "expected a JSON object")
    data = _merge(DEFAULTS, raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    cfg = ResolvedConfig(data, base)
    _validate(cfg)
    return cfg


def _validate(cfg: ResolvedConfig) -> None:
    d = cfg.data
    for key in ("L", "P"):
        if not isinstance(d[key], int) or isinstance(d[key], bool) or d[key] < 1:
            raise ConfigError(key, f"must be a positive integer, got {d[key]!r}")
    if d["e_t"] is not None and not _positive(d["e_t"]):
        raise ConfigError("e_t", "must be a positive number or null")
    if d["metric"] not in ("mi", "mmse"):
        raise ConfigError("metric", f"must be 'mi' or 'mmse', got {d['metric']!r}")
    c = d["constraint"]
    if not isinstance(c, dict) or not c:
        raise ConfigError("constraint", "block is empty; give at least a 'type' (energy | papr | spectral)")
    kind = c.get("type")
    if kind not in _CONSTRAINT_FIELDS:
        raise ConfigError("constraint.type", f"must be one of energy, papr, spectral; got {kind!r}")
    extra = set(c) - {"type"} - _CONSTRAINT_FIELDS[kind]
    if extra:
        raise ConfigError(f"constraint.{sorted(extra)[0]}", f"not a parameter of the {kind} constraint")
    d["constraint"] = {"type": kind, **_CONSTRAINT_DEFAULTS.get(kind, {}), **{k: v for k, v in c.items() if k != "type"}}
    for k, v in d["constraint"].items():
        if k != "type" and not _positive(v):
            raise ConfigError(f"constraint.{k}", "must be a positive number")
    if not _positive(d["eps"]):
        raise ConfigError("eps", "must be a positive number")
    if not isinstance(d["max_outer_iters"], int) or d["max_outer_iters"] < 1:
        raise ConfigError("max_outer_iters", "must be a positive integer")
    init = d["init"]
    if not isinstance(init, dict) or init.get("type") not in ("lfm", "random", "min-eig"):
        raise ConfigError("init.type", "must be one of lfm, random, min-eig")
    if init["type"] == "random" and not isinstance(init.get("seed", 0), int):
        raise ConfigError("init.seed", "must be an integer")
    if not isinstance(d["bands"], list):
        raise ConfigError("bands", "must be a list of {f1, f2, weight} objects")
    try:
        SolverTolerances(**d["tolerances"])
    except TypeError as exc:
        raise ConfigError("tolerances", str(exc)) from exc
    except RangeProfError as exc:
        raise ConfigError("tolerances", str(exc)) from exc


def _positive(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0


def _read_matrix(cfg: ResolvedConfig, field: str, file: str, n: int) -> np.ndarray:
    p = Path(file)
    if not p.is_absolute():
        p = cfg.base_dir / p
    try:
        M = np.loadtxt(p, delimiter=",", dtype=complex, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(field, f"cannot load matrix from {p}: {exc}") from exc
    if M.shape != (n, n):
        raise ConfigError(field, f"expected a {n}x{n} matrix, {p} is {M.shape[0]}x{M.shape[1]}")
    return M


def build_prior(cfg: ResolvedConfig) -> TargetPrior:
    P = cfg["P"]
    block = cfg["prior"]
    mean = block.get("mean", 5.0)
    mean = np.full(P, complex(mean)) if np.isscalar(mean) else np.asarray(mean, dtype=complex)
    if mean.shape != (P,):
        raise ConfigError("prior.mean", f"must be a scalar or a length-{P} list")
    cov = block.get("covariance", {"type": "identity"})
    kind = cov.get("type")
    if kind == "identity":
        R = np.eye(P)
    elif kind == "scaled-identity":
        scale = cov.get("scale", 1.0)
        if not _positive(scale):
            raise ConfigError("prior.covariance.scale", "must be positive")
        R = scale * np.eye(P)
    elif kind == "file":
        R = _read_matrix(cfg, "prior.covariance.path", cov.get("path", ""), P)
    else:
        raise ConfigError("prior.covariance.type", "must be one of identity, scaled-identity, file")
    try:
        return TargetPrior(mean, R)
    except RangeProfError as exc:
        raise ConfigError("prior.covariance", str(exc)) from exc


def build_disturbance(cfg: ResolvedConfig) -> DisturbanceModel:
    L0 = cfg["L"] + cfg["P"] - 1
    block = cfg["disturbance"]
    kind = block.get("type")
    try:
        if kind == "jamming":
            spec = JammingSpec(float(block.get("jam_power", 1000.0)), float(block.get("noise_power", 1.0)),
                               tuple(block.get("band", (0.1, 0.3))))
            return jamming_covariance(spec, L0)
        if kind in ("identity", "white"):
            return DisturbanceModel.white(L0, float(block.get("sigma2", 1.0)))
        if kind == "file":
            return DisturbanceModel(_read_matrix(cfg, "disturbance.path", block.get("path", ""), L0))
    except RangeProfError as exc:
        raise ConfigError("disturbance", str(exc)) from exc
    raise ConfigError("disturbance.type", "must be one of jamming, identity, file")


def build_problem(cfg: ResolvedConfig) -> DesignProblem:
    """Assemble the design problem; infeasible sets raise ``ConfigError``."""
    L = cfg["L"]
    e_t = float(L if cfg["e_t"] is None else cfg["e_t"])
    c = cfg["constraint"]
    try:
        if c["type"] == "energy":
            spec = Energy(e_t)
        elif c["type"] == "papr":
            if c["rho"] > L:
                raise ConfigError("constraint.rho", f"must not exceed L={L}")
            spec = Papr(e_t, float(c["rho"]))
        else:
            bands = SpectralBandSet(tuple((b["f1"], b["f2"], b.get("weight", 1.0)) for b in cfg["bands"]))
            spec = Spectral(e_t, spectral_interference_matrix(bands, L), float(c["E_I"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError("bands", f"malformed band entry ({exc})") from exc
    except ConfigError:
        raise
    except RangeProfError as exc:
        raise ConfigError("constraint", str(exc)) from exc
    init = cfg["init"]
    start = {"lfm": LFMStart(), "random": RandomPhaseStart(init.get("seed", 0)), "min-eig": MinEigStart()}[init["type"]]
    if init["type"] == "min-eig" and c["type"] != "spectral":
        raise ConfigError("init.type", "min-eig start requires a spectral constraint")
    return DesignProblem(cfg["metric"], spec, build_prior(cfg), build_disturbance(cfg), start)


def tolerances(cfg: ResolvedConfig) -> SolverTolerances:
    return SolverTolerances(**cfg["tolerances"])
