"""Solvers for ``max c + 2 Re(s^H a) + s^H A s`` over the three feasible sets.

* energy ball ``s^H s <= e_t``: KKT system with a secular equation,
* PAPR set ``s^H s = e_t, PAPR(s) <= rho``: inner MM with a projection step,
* spectral set ``s^H s = e_t, s^H R_I s <= E_I``: ADMM with two secular
  equations (sphere s-update, ellipsoid u-update).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .errors import InvalidArgument, NoSolution
from .minorize import QuadraticMinorizer
from .model import energy, papr

log = logging.getLogger(__name__)

FEAS_RTOL = 1e-8


# ---------------------------------------------------------------------------
# constraint specifications


@dataclass(frozen=True)
class Energy:
    e_t: float

    def __post_init__(self):
        if not self.e_t > 0:
            raise InvalidArgument("e_t must be positive")

    def residual(self, s) -> float:
        """Positive part of the energy excess, relative to ``e_t``."""
        return max(energy(s) - self.e_t, 0.0) / self.e_t

    def is_feasible(self, s, rtol: float = FEAS_RTOL) -> bool:
        return self.residual(s) <= rtol

    def project(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        e = energy(s)
        return s * math.sqrt(self.e_t / e) if e > self.e_t else s.copy()


@dataclass(frozen=True)
class Papr:
    e_t: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.e_t > 0:
            raise InvalidArgument("e_t must be positive")
        if self.rho < 1:
            raise InvalidArgument("rho must be >= 1")

    def residual(self, s) -> float:
        s = np.asarray(s)
        if self.rho > s.size:
            raise InvalidArgument(f"rho={self.rho} exceeds code length {s.size}")
        return max(abs(energy(s) - self.e_t) / self.e_t, max(papr(s) - self.rho, 0.0))

    def is_feasible(self, s, rtol: float = FEAS_RTOL) -> bool:
        return self.residual(s) <= rtol

    def project(self, s) -> np.ndarray:
        return papr_project(s, self.e_t, self.rho)


@dataclass(frozen=True, eq=False)
class Spectral:
    e_t: float
    R_I: np.ndarray
    E_I: float

    def __post_init__(self):
        if not self.e_t > 0 or not self.E_I > 0:
            raise InvalidArgument("e_t and E_I must be positive")
        R = np.asarray(self.R_I, dtype=complex)
        object.__setattr__(self, "R_I", 0.5 * (R + R.conj().T))
        if self.e_t * self.eig[0][0] > self.E_I:
            raise InvalidArgument(
                f"spectral set is empty: e_t * lambda_min(R_I) = {self.e_t * self.eig[0][0]:.4g} > E_I = {self.E_I}")

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.R_I)
        return np.clip(w, 0.0, None), v

    def interference(self, s) -> float:
        s = np.asarray(s)
        return float(np.vdot(s, self.R_I @ s).real)

    def residual(self, s) -> float:
        return max(abs(energy(s) - self.e_t) / self.e_t, max(self.interference(s) - self.E_I, 0.0) / self.E_I)

    def is_feasible(self, s, rtol: float = FEAS_RTOL) -> bool:
        return self.residual(s) <= rtol

    def strictly_feasible_point(self) -> np.ndarray:
        return math.sqrt(self.e_t) * self.eig[1][:, 0]

    def project(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        e = energy(s)
        s = s * math.sqrt(self.e_t / e) if e > 0 else self.strictly_feasible_point()
        return _pull_into_spectral_set(s, self)


ConstraintSpec = Union[Energy, Papr, Spectral]


@dataclass(frozen=True)
class SolverTolerances:
    secular_tol: float = 1e-12
    inner_max_iters: int = 5000
    inner_rel_tol: float = 1e-9
    admm_rho: float = 1.0
    admm_residual_tol: float | None = None  # default 1e-6 * sqrt(L)
    admm_max_iters: int = 5000

    def __post_init__(self):
        for name in ("secular_tol", "inner_max_iters", "inner_rel_tol", "admm_rho", "admm_max_iters"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.admm_residual_tol is not None and not self.admm_residual_tol > 0:
            raise InvalidArgument("admm_residual_tol must be positive")

    def residual_tol(self, L: int) -> float:
        return self.admm_residual_tol if self.admm_residual_tol is not None else 1e-6 * math.sqrt(L)


@dataclass
class SubproblemResult:
    s: np.ndarray
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False
    trace: list[float] = field(default_factory=list)
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    multiplier: float | None = None


# ---------------------------------------------------------------------------
# secular equation


def _phi(mu, eigvals, weights):
    return float(np.sum(weights / (mu - eigvals) ** 2))


def secular_solve(eigvals, weights, target: float, lower_bracket: float = -np.inf,
                  tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root ``mu`` of ``sum_i w_i / (mu - lambda_i)^2 = target`` right of the poles.

    The search is restricted to ``mu > max(lower_bracket, max lambda_i over
    w_i > 0)`` where the left-hand side is strictly decreasing. If
    ``lower_bracket`` lies right of every pole and the left-hand side there is
    already ``<= target`` the bracket itself is returned (inactive constraint).

    Newton steps are taken on ``phi(mu)^{-1/2}``, which is close to linear,
    and safeguarded by bisection inside a maintained bracket.
    """
    eigvals = np.asarray(eigvals, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not target > 0:
        raise InvalidArgument("target must be positive")
    active = weights > 0
    if not np.any(active):
        raise NoSolution("all secular weights are zero; target is unreachable")
    lam, w = eigvals[active], weights[active]
    pole = lam.max()
    W = w.sum()
    if lower_bracket > pole:
        lo = float(lower_bracket)
        if _phi(lo, lam, w) <= target:
            return lo
    else:
        lo = float(pole)
    hi = pole + math.sqrt(W / target)  # phi(hi) <= target
    if hi <= lo:
        return lo
    # phi(mu) - target changes sign on (lo, hi]
    rt = 1.0 / math.sqrt(target)
    mu = hi
    for _ in range(max_iter):
        d = mu - lam
        phi = float(np.sum(w / d**2))
        if abs(phi - target) <= tol * target:
            return mu
        if phi > target:
            lo = mu
        else:
            hi = mu
        dphi = -2.0 * float(np.sum(w / d**3))
        # psi = phi^{-1/2}; psi' = -0.5 phi^{-3/2} phi'
        psi = phi ** -0.5
        dpsi = -0.5 * phi ** -1.5 * dphi
        step = mu - (psi - rt) / dpsi if dpsi > 0 else np.nan
        mu = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(abs(hi), abs(lo), 1.0):
            return hi
    return mu


def _sphere_minimize(m_eig: np.ndarray, V: np.ndarray, b: np.ndarray, radius2: float,
                     tol: float) -> tuple[np.ndarray, float]:
    """Global minimiser of ``s^H M s + 2 Re(s^H b)`` on ``|s|^2 = radius2``.

    ``M = V diag(m_eig) V^H``. The solution is ``s = -(M + alpha I)^{-1} b``
    with ``alpha`` the secular root right of ``-min(m_eig)``; this root is the
    global minimiser of the sphere-constrained problem (the multiplier may be
    negative). The hard case, where ``b`` has no component along the bottom
    eigenspace, is completed with an eigenvector component.
    """
    c = V.conj().T @ b
    w = np.abs(c) ** 2
    scale = max(np.abs(m_eig).max(), 1.0)
    bottom = m_eig.min()
    in_bottom = m_eig <= bottom + 1e-12 * scale
    hard = np.sum(w[in_bottom]) <= (1e-14 * max(w.sum(), 1e-300))
    if hard:
        alpha = -bottom
        rest = ~in_bottom
        coef = np.zeros_like(c)
        coef[rest] = -c[rest] / (m_eig[rest] + alpha)
        deficit = radius2 - float(np.sum(np.abs(coef) ** 2))
        if deficit >= 0:
            idx = int(np.flatnonzero(in_bottom)[0])
            coef[idx] = math.sqrt(deficit)
            return V @ coef, alpha
    if not np.any(w > 0):
        # b = 0 and bottom eigenspace handled above; unreachable in practice
        return math.sqrt(radius2) * V[:, int(np.argmin(m_eig))], -bottom
    alpha = secular_solve(-m_eig, w, radius2, tol=tol)
    return V @ (-c / (m_eig + alpha)), alpha


# ---------------------------------------------------------------------------
# energy ball


def solve_energy(m: QuadraticMinorizer, e_t: float, tol: SolverTolerances | None = None,
                 eig: tuple[np.ndarray, np.ndarray] | None = None) -> SubproblemResult:
    """Maximise the surrogate over ``s^H s <= e_t``.

    The problem is convex since ``A`` is NSD. If ``-A`` is invertible and the
    unconstrained maximiser ``-A^{-1} a`` lies inside the ball it is
    returned; otherwise the KKT multiplier ``mu > max(0, lambda_max(A))``
    solves ``sum |b_i|^2 / (mu - lambda_i)^2 = e_t`` with ``b = V^H a``.
    """
    tol = tol or SolverTolerances()
    if np.allclose(m.a, 0.0, atol=1e-300):
        log.warning("linear term vanishes; surrogate maximised by the anchor")
        return SubproblemResult(s=m.anchor.copy(), degenerate=True)
    lam, V = eig if eig is not None else np.linalg.eigh(m.A)
    b = V.conj().T @ m.a
    w = np.abs(b) ** 2
    scale = max(np.abs(lam).max(), 1e-300)
    neg = lam < -1e-13 * scale
    if np.all(neg):
        interior = V @ (-b / lam)
        if energy(interior) <= e_t:
            return SubproblemResult(s=interior, multiplier=0.0)
    elif np.sum(w[~neg]) <= 1e-28 * w.sum():
        # a orthogonal to the null space of A: the minimum-norm stationary point may be interior
        coef = np.zeros_like(b)
        coef[neg] = -b[neg] / lam[neg]
        interior = V @ coef
        if energy(interior) <= e_t:
            return SubproblemResult(s=interior, multiplier=0.0)
    # mu > 0 branch: sphere with multiplier mu = alpha, M = -A
    s, mu = _sphere_minimize(-lam, V, -m.a, e_t, tol.secular_tol)
    return SubproblemResult(s=s, multiplier=mu)


# ---------------------------------------------------------------------------
# PAPR


def papr_project(t, e_t: float, rho: float) -> np.ndarray:
    """Maximise ``Re(s^H t)`` subject to ``s^H s = e_t`` and ``PAPR(s) <= rho``.

    The maximiser keeps the phases of ``t`` and clips scaled magnitudes:
    ``|s_l| = min(gamma |t_l|, beta)`` with ``beta = sqrt(rho e_t / L)`` and
    ``gamma`` set by the energy equality. Zero entries of ``t`` get phase 0.
    """
    t = np.asarray(t, dtype=complex).ravel()
    L = t.size
    if rho < 1 or rho > L * (1 + 1e-12):
        raise InvalidArgument(f"rho must lie in [1, L={L}], got {rho}")
    phase = np.exp(1j * np.angle(t))
    mag = np.abs(t)
    if rho <= 1.0:
        return math.sqrt(e_t / L) * phase
    nz = mag > 0
    if not np.any(nz):
        log.warning("projection of a zero vector; returning a constant-modulus point")
        return np.full(L, math.sqrt(e_t / L), dtype=complex)
    beta2 = min(rho, L) * e_t / L
    beta = math.sqrt(beta2)
    n_nz = int(nz.sum())
    if n_nz * beta2 <= e_t:
        # every non-zero entry saturates; spread the remaining energy over the zero entries
        s = np.where(nz, beta * phase, 0.0).astype(complex)
        if n_nz < L:
            s[~nz] = math.sqrt((e_t - n_nz * beta2) / (L - n_nz))
        return s
    order = np.argsort(mag)[::-1]
    sorted_mag = mag[order]
    tail = np.cumsum((sorted_mag**2)[::-1])[::-1]  # tail[k] = sum_{i >= k} |t_(i)|^2
    for k in range(n_nz):
        # k largest entries clipped, the rest scaled by gamma
        rem = e_t - k * beta2
        if tail[k] <= 0:
            break
        gamma = math.sqrt(rem / tail[k])
        if gamma * sorted_mag[k] <= beta * (1 + 1e-12) and (k == 0 or gamma * sorted_mag[k - 1] >= beta * (1 - 1e-12)):
            out_mag = np.minimum(gamma * mag, beta)
            return out_mag * phase
    raise NoSolution("no clipping level satisfies the energy equality")  # pragma: no cover


def solve_papr(m: QuadraticMinorizer, spec: Papr, s_init, tol: SolverTolerances | None = None,
               eig: tuple[np.ndarray, np.ndarray] | None = None) -> SubproblemResult:
    """Inner MM for the PAPR-constrained surrogate.

    ``s^H A s`` is minorized with ``A_pos = A - lambda_min(A) I``, giving
    linear subproblems ``max Re(s^H (a + A_pos s_j))`` solved by
    ``papr_project``. The surrogate value never decreases along the
    iterations.
    """
    tol = tol or SolverTolerances()
    s = np.asarray(s_init, dtype=complex).copy()
    if not spec.is_feasible(s, 1e-6):
        raise InvalidArgument("initial point is not PAPR-feasible")
    lam = eig[0] if eig is not None else np.linalg.eigvalsh(m.A)
    A_pos = m.A - lam[0] * np.eye(m.L)
    val = m.variable_part(s)
    trace = [val]
    converged = False
    it = 0
    for it in range(1, tol.inner_max_iters + 1):
        t = m.a + A_pos @ s
        s_new = papr_project(t, spec.e_t, spec.rho)
        new_val = m.variable_part(s_new)
        if new_val < val:
            # round-off guard for the ascent property
            if new_val < val - 1e-12 * max(abs(val), 1.0):
                log.debug("inner PAPR step decreased surrogate by %.3e", val - new_val)
            trace.append(val)
            converged = True
            break
        change = abs(new_val - val) / max(abs(m.c + new_val), 1e-300)
        s, val = s_new, new_val
        trace.append(val)
        if change <= tol.inner_rel_tol:
            converged = True
            break
    return SubproblemResult(s=s, iterations=it, converged=converged, trace=trace)


# ---------------------------------------------------------------------------
# spectral (ADMM)


def _ellipsoid_project(d: np.ndarray, spec: Spectral, tol: float) -> np.ndarray:
    """Closest point to ``d`` in ``{u : u^H R_I u <= E_I}``."""
    r, U = spec.eig
    c = U.conj().T @ d
    if float(np.sum(r * np.abs(c) ** 2)) <= spec.E_I:
        return d.copy()
    pos = r > 0
    # u^H R_I u = sum r |c|^2 / (1 + alpha r)^2 = sum (|c|^2 / r) / (alpha + 1/r)^2
    alpha = secular_solve(-1.0 / r[pos], np.abs(c[pos]) ** 2 / r[pos], spec.E_I, lower_bracket=0.0, tol=tol)
    return U @ (c / (1.0 + alpha * r))


def _pull_into_spectral_set(s: np.ndarray, spec: Spectral) -> np.ndarray:
    """Move a sphere point along the great circle towards the least-interfering
    direction until the interference budget holds exactly."""
    if spec.interference(s) <= spec.E_I:
        return s
    z = spec.strictly_feasible_point()
    z = z * np.exp(1j * np.angle(np.vdot(z, s)))  # align phase to shorten the arc

    def point(tau):
        x = (1 - tau) * s + tau * z
        return x * math.sqrt(spec.e_t / energy(x))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spec.interference(point(mid)) <= spec.E_I:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    return point(hi)


def solve_spectral(m: QuadraticMinorizer, spec: Spectral, s_init, tol: SolverTolerances | None = None,
                   eig: tuple[np.ndarray, np.ndarray] | None = None) -> SubproblemResult:
    """ADMM for the surrogate over ``s^H s = e_t``, ``s^H R_I s <= E_I``.

    With ``Abar = -A`` the iterations are: a sphere-constrained s-update
    (eigendecomposition of ``Abar`` computed once), an ellipsoid projection
    for ``u`` and dual ascent on ``lambda``. Termination uses the primal
    residual ``s_j - u_j`` and the dual residual ``varrho (s_j - s_{j+1})``.
    The returned point is moved to exact feasibility.
    """
    tol = tol or SolverTolerances()
    L = m.L
    varrho = tol.admm_rho
    res_tol = tol.residual_tol(L)
    lam, V = eig if eig is not None else np.linalg.eigh(m.A)
    m_eig = -lam + varrho  # eigenvalues of Abar + varrho I
    abar = -m.a
    s = np.asarray(s_init, dtype=complex).copy()
    u = np.zeros(L, dtype=complex)
    dual = np.zeros(L, dtype=complex)
    best, best_val = None, -np.inf
    r_norm = d_norm = np.inf
    converged = False
    j = 0
    for j in range(1, tol.admm_max_iters + 1):
        b = abar + dual - varrho * u
        s_new, _ = _sphere_minimize(m_eig, V, b, spec.e_t, tol.secular_tol)
        d = s_new + dual / varrho
        u = _ellipsoid_project(d, spec, tol.secular_tol)
        dual = dual + varrho * (s_new - u)
        r_norm = float(np.linalg.norm(s_new - u))
        d_norm = float(varrho * np.linalg.norm(s - s_new))
        s = s_new
        if r_norm <= 10 * res_tol:
            cand = _pull_into_spectral_set(s, spec)
            val = m.variable_part(cand)
            if val > best_val:
                best, best_val = cand, val
        if r_norm <= res_tol and d_norm <= res_tol:
            converged = True
            break
    out = _pull_into_spectral_set(s, spec)
    if not converged:
        log.warning("ADMM hit %d iterations (primal %.2e, dual %.2e)", j, r_norm, d_norm)
        if best is not None and best_val > m.variable_part(out):
            out = best
    return SubproblemResult(s=out, iterations=j, converged=converged,
                            primal_residual=r_norm, dual_residual=d_norm)


def solve(m: QuadraticMinorizer, spec: ConstraintSpec, s_init, tol: SolverTolerances | None = None) -> SubproblemResult:
    """Dispatch to the solver matching ``spec``."""
    tol = tol or SolverTolerances()
    eig = np.linalg.eigh(m.A)
    if isinstance(spec, Energy):
        return solve_energy(m, spec.e_t, tol, eig=eig)
    if isinstance(spec, Papr):
        return solve_papr(m, spec, s_init, tol, eig=eig)
    if isinstance(spec, Spectral):
        return solve_spectral(m, spec, s_init, tol, eig=eig)
    raise InvalidArgument(f"unknown constraint {spec!r}")
