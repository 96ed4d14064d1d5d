"""Outer minorization-maximization loop and run reports."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from . import qpsolve
from .errors import InvalidArgument, RangeProfError
from .minorize import Metric, build_minorizer
from .model import (
    DisturbanceModel,
    TargetPrior,
    _as_code,
    lfm_waveform,
    min_eig_waveform,
    mmse_reward,
    mutual_information,
    random_phase_waveform,
)
from .qpsolve import ConstraintSpec, Energy, Papr, SolverTolerances, Spectral

log = logging.getLogger(__name__)

MONOTONE_RTOL = 1e-8
DEFAULT_EPS = 1e-4
DEFAULT_MAX_OUTER = 10000

Status = Literal["converged", "max_iters", "degenerate"]


@dataclass(frozen=True)
class LFMStart:
    pass


@dataclass(frozen=True)
class RandomPhaseStart:
    seed: int = 0


@dataclass(frozen=True)
class MinEigStart:
    pass


InitSpec = Union[LFMStart, RandomPhaseStart, MinEigStart, np.ndarray]


@dataclass(eq=False)
class DesignProblem:
    metric: Metric
    constraint: ConstraintSpec
    prior: TargetPrior
    dist: DisturbanceModel
    initial: InitSpec | None = None

    def __post_init__(self):
        if self.metric not in ("mi", "mmse"):
            raise InvalidArgument(f"metric must be 'mi' or 'mmse', got {self.metric!r}")
        if self.dist.L0 - self.prior.P + 1 < 1:
            raise InvalidArgument("disturbance is smaller than the target extent")

    @property
    def L(self) -> int:
        return self.dist.L0 - self.prior.P + 1

    def initial_waveform(self) -> np.ndarray:
        """Resolve the start point and make it feasible for the constraint."""
        init = self.initial
        e_t = self.constraint.e_t
        if init is None:
            init = MinEigStart() if isinstance(self.constraint, Spectral) else LFMStart()
        if isinstance(init, LFMStart):
            s = lfm_waveform(self.L, e_t)
        elif isinstance(init, RandomPhaseStart):
            s = random_phase_waveform(self.L, e_t, init.seed)
        elif isinstance(init, MinEigStart):
            if not isinstance(self.constraint, Spectral):
                raise InvalidArgument("min-eigenvector start needs a spectral constraint")
            s = min_eig_waveform(self.constraint.R_I, e_t)
        else:
            s = _as_code(init)
            if s.size != self.L:
                raise InvalidArgument(f"initial waveform has length {s.size}, expected {self.L}")
        if not self.constraint.is_feasible(s):
            log.info("initial waveform infeasible for %s; projecting", type(self.constraint).__name__)
            s = self.constraint.project(s)
        return s


@dataclass
class TraceEntry:
    k: int
    objective: float
    elapsed_s: float
    constraint_residual: float


@dataclass
class RunReport:
    metric: Metric
    final_waveform: np.ndarray
    status: Status
    trace: list[TraceEntry] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None
    monotonicity_violations: list[int] = field(default_factory=list)
    inner_iterations: list[int] = field(default_factory=list)
    admm_residuals: list[tuple[float, float, bool]] = field(default_factory=list)
    rejected_steps: list[int] = field(default_factory=list)
    trace_R_h: float = 0.0
    eps: float = DEFAULT_EPS

    @property
    def objectives(self) -> np.ndarray:
        return np.array([t.objective for t in self.trace])

    @property
    def final_objective(self) -> float:
        return self.trace[-1].objective

    @property
    def mmse_trace(self) -> np.ndarray:
        """MMSE along the run (only meaningful for the MMSE metric)."""
        return self.trace_R_h - self.objectives

    @property
    def final_mmse(self) -> float:
        return self.trace_R_h - self.final_objective if self.metric == "mmse" else float("nan")

    @property
    def stopping_statistic(self) -> float:
        f = self.objectives
        if f.size < 2:
            return float("inf")
        return abs(f[-1] - f[-2]) / abs(f[-1])

    def summary(self) -> dict:
        return {
            "metric": self.metric,
            "status": self.status,
            "iterations": len(self.trace) - 1,
            "final_objective": self.final_objective,
            "final_mmse": None if self.metric != "mmse" else self.final_mmse,
            "stopping_statistic": self.stopping_statistic,
            "elapsed_s": self.trace[-1].elapsed_s,
            "final_constraint_residual": self.trace[-1].constraint_residual,
            "monotonicity_violations": list(self.monotonicity_violations),
            "rejected_steps": list(self.rejected_steps),
            "eps": self.eps,
        }


def objective(metric: Metric, s, prior: TargetPrior, dist: DisturbanceModel) -> float:
    """Maximised design objective: MI for ``"mi"``, ``tr(R_h) - MMSE`` for ``"mmse"``."""
    if metric == "mi":
        return mutual_information(s, prior, dist)
    if metric == "mmse":
        return mmse_reward(s, prior, dist)
    raise InvalidArgument(f"unknown metric {metric!r}")


def design(problem: DesignProblem, tol: SolverTolerances | None = None, eps: float = DEFAULT_EPS,
           max_outer_iters: int = DEFAULT_MAX_OUTER, store_iterates: bool = False) -> RunReport:
    """Run the MM iteration until ``|f_{k+1} - f_k| / |f_{k+1}| <= eps``.

    Each outer step builds the minorizer of the chosen metric at ``s_k`` and
    maximises it over the constraint set. A spectral step whose surrogate
    value falls below the anchor's (the ADMM solution carries no optimality
    guarantee) is rejected, which ends the run with the anchor.
    """
    tol = tol or SolverTolerances()
    spec = problem.constraint
    prior, dist = problem.prior, problem.dist
    s = problem.initial_waveform()
    t0 = time.perf_counter()
    f = objective(problem.metric, s, prior, dist)
    report = RunReport(metric=problem.metric, final_waveform=s, status="max_iters",
                       trace_R_h=float(np.trace(prior.covariance).real), eps=eps,
                       iterates=[s.copy()] if store_iterates else None)
    report.trace.append(TraceEntry(0, f, 0.0, spec.residual(s)))
    for k in range(1, max_outer_iters + 1):
        try:
            m = build_minorizer(problem.metric, s, prior, dist)
            res = qpsolve.solve(m, spec, s, tol)
        except (RangeProfError, np.linalg.LinAlgError) as exc:
            log.error("outer iteration %d failed: %s", k, exc)
            report.status = "degenerate"
            break
        s_new = res.s
        report.inner_iterations.append(res.iterations)
        if isinstance(spec, Spectral):
            report.admm_residuals.append((res.primal_residual, res.dual_residual, res.converged))
            if m.evaluate(s_new) < m.evaluate(s) - 1e-12 * max(abs(f), 1.0):
                log.warning("spectral step %d lowers the surrogate; keeping the anchor", k)
                report.rejected_steps.append(k)
                s_new = s
        if res.degenerate:
            report.status = "degenerate"
        f_new = objective(problem.metric, s_new, prior, dist)
        if f_new < f - MONOTONE_RTOL * abs(f):
            report.monotonicity_violations.append(k)
        report.trace.append(TraceEntry(k, f_new, time.perf_counter() - t0, spec.residual(s_new)))
        if store_iterates:
            report.iterates.append(s_new.copy())
        stat = abs(f_new - f) / abs(f_new) if f_new != 0 else abs(f_new - f)
        s, f = s_new, f_new
        if res.degenerate:
            break
        if stat <= eps:
            report.status = "converged"
            break
    report.final_waveform = s
    return report


def run_monotonicity_audit(report: RunReport, rtol: float = MONOTONE_RTOL) -> list[int]:
    """Indices ``k`` with ``f_{k} < f_{k-1} - rtol |f_{k-1}|``."""
    f = report.objectives
    bad = [k for k in range(1, f.size) if f[k] < f[k - 1] - rtol * abs(f[k - 1])]
    if bad:
        log.warning("objective decreased at outer iterations %s", bad)
    return bad
