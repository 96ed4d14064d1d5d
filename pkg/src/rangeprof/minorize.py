"""Quadratic minorizers of the mutual-information and MMSE objectives.

Both surrogates have the form ``g(s) = c + 2 Re(s^H a) + s^H A s`` with ``A``
Hermitian negative semi-definite. The ``L0 P x L`` selection matrix ``E``
with ``vec(S) = E s`` is never formed; ``ShiftStackOperator`` applies it
and its adjoint by slicing, and ``gram_contract`` evaluates
``E^H (R^* kron W) E`` block by block.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgument, NumericalDegeneracy
from .model import (
    DisturbanceModel,
    TargetPrior,
    _as_code,
    _check_dims,
    convolution_matrix,
    mmse_reward,
    mutual_information,
)

Metric = Literal["mi", "mmse"]


@dataclass(frozen=True)
class ShiftStackOperator:
    """The stacked shift matrix ``E = [E_1; ...; E_P]`` applied implicitly."""

    L: int
    P: int

    @property
    def L0(self) -> int:
        return self.L + self.P - 1

    def forward(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        if s.shape != (self.L,):
            raise InvalidArgument(f"expected length {self.L}, got {s.shape}")
        out = np.zeros((self.P, self.L0), dtype=complex)
        for p in range(self.P):
            out[p, p:p + self.L] = s
        return out.ravel()

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.L0 * self.P,):
            raise InvalidArgument(f"expected length {self.L0 * self.P}, got {v.shape}")
        blocks = v.reshape(self.P, self.L0)
        out = np.zeros(self.L, dtype=complex)
        for p in range(self.P):
            out += blocks[p, p:p + self.L]
        return out

    def dense(self) -> np.ndarray:
        """Materialised ``E``; only for small oracles and tests."""
        E = np.zeros((self.L0 * self.P, self.L))
        for p in range(self.P):
            E[p * self.L0 + p + np.arange(self.L), np.arange(self.L)] = 1.0
        return E


def vec(X: np.ndarray) -> np.ndarray:
    """Column-major stacking."""
    return np.asarray(X).T.ravel()


def gram_contract(R: np.ndarray, W: np.ndarray, L: int | None = None) -> np.ndarray:
    """``E^H (R^* kron W) E`` for ``P x P`` ``R`` and ``L0 x L0`` ``W``.

    Entry ``(l, m)`` is ``sum_{p,q} conj(R[p, q]) W[p + l, q + m]``; the cost is
    ``O(L^2 P^2)``.
    """
    R = np.asarray(R)
    W = np.asarray(W)
    P = R.shape[0]
    if L is None:
        L = W.shape[0] - P + 1
    if W.shape != (L + P - 1, L + P - 1):
        raise InvalidArgument(f"W must be {(L + P - 1,) * 2}, got {W.shape}")
    Rc = np.conj(R)
    out = np.zeros((L, L), dtype=complex)
    for p in range(P):
        for q in range(P):
            if Rc[p, q] != 0:
                out += Rc[p, q] * W[p:p + L, q:q + L]
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True, eq=False)
class QuadraticMinorizer:
    """Surrogate ``g(s) = c + 2 Re(s^H a) + s^H A s`` expanded at ``anchor``."""

    A: np.ndarray
    a: np.ndarray
    c: float
    metric: Metric
    anchor: np.ndarray

    @property
    def L(self) -> int:
        return self.a.size

    def evaluate(self, s) -> float:
        s = np.asarray(s, dtype=complex)
        if s.shape != self.a.shape:
            raise InvalidArgument(f"expected length {self.L}, got {s.shape}")
        return self.c + self.variable_part(s)

    def variable_part(self, s) -> float:
        return float(2.0 * np.vdot(s, self.a).real + np.vdot(s, self.A @ s).real)

    def gradient(self, s) -> np.ndarray:
        """Wirtinger gradient ``a + A s`` (half the real-coordinate gradient)."""
        return self.a + self.A @ s


def evaluate(m: QuadraticMinorizer, s) -> float:
    return m.evaluate(s)


def _received_factor(S: np.ndarray, prior: TargetPrior, dist: DisturbanceModel):
    R_s = S @ prior.covariance @ S.conj().T + dist.covariance
    try:
        return sla.cho_factor(0.5 * (R_s + R_s.conj().T), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracy("received-signal covariance is singular at the anchor") from exc


def _with_tangent_constant(A, a, s_k, f_k, metric) -> QuadraticMinorizer:
    part = 2.0 * np.vdot(s_k, a).real + np.vdot(s_k, A @ s_k).real
    return QuadraticMinorizer(A=A, a=a, c=float(f_k - part), metric=metric, anchor=s_k.copy())


def mi_minorizer(s_k, prior: TargetPrior, dist: DisturbanceModel) -> QuadraticMinorizer:
    """Supporting-hyperplane minorizer of the mutual information at ``s_k``.

    Uses the off-diagonal gradient block ``G21 = R_n^{-1} S_k R_h^{1/2}``
    (minus the (2,1) block of the inverse bordered matrix) and
    ``G22 = R_{s,k}^{-1} - R_n^{-1}``; the constant is fixed by tangency.
    """
    s_k = _as_code(s_k)
    _check_dims(s_k, prior, dist)
    L, P = s_k.size, prior.P
    op = ShiftStackOperator(L, P)
    S = convolution_matrix(s_k, P)
    cho = _received_factor(S, prior, dist)
    eye = np.eye(dist.L0, dtype=complex)
    G22 = sla.cho_solve(cho, eye) - dist.inverse
    G21 = dist.solve(S @ prior.sqrt_cov)
    a = op.adjoint(vec(G21 @ prior.sqrt_cov))
    A = gram_contract(prior.covariance, G22, L)
    return _with_tangent_constant(A, a, s_k, mutual_information(s_k, prior, dist), "mi")


def mmse_minorizer(s_k, prior: TargetPrior, dist: DisturbanceModel) -> QuadraticMinorizer:
    """Minorizer of ``tr(R_h S^H R_s^{-1} S R_h)`` from the matrix-fractional bound.

    ``H = R_{s,k}^{-1} S_k R_h^2`` gives the linear term and
    ``T = R_{s,k}^{-1} S_k R_h^2 S_k^H R_{s,k}^{-1}`` the quadratic one.
    """
    s_k = _as_code(s_k)
    _check_dims(s_k, prior, dist)
    L, P = s_k.size, prior.P
    op = ShiftStackOperator(L, P)
    S = convolution_matrix(s_k, P)
    cho = _received_factor(S, prior, dist)
    Y = sla.cho_solve(cho, S @ prior.covariance)  # R_s^{-1} S R_h
    H = Y @ prior.covariance
    T = Y @ Y.conj().T
    a = op.adjoint(vec(H))
    A = -gram_contract(prior.covariance, T, L)
    return _with_tangent_constant(A, a, s_k, mmse_reward(s_k, prior, dist), "mmse")


def build_minorizer(metric: Metric, s_k, prior: TargetPrior, dist: DisturbanceModel) -> QuadraticMinorizer:
    if metric == "mi":
        return mi_minorizer(s_k, prior, dist)
    if metric == "mmse":
        return mmse_minorizer(s_k, prior, dist)
    raise InvalidArgument(f"unknown metric {metric!r}")
