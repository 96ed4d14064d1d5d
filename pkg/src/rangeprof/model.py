"""Scenario construction, waveform generators and metric evaluators.

Waveforms are plain 1-D complex numpy arrays of length ``L``. The received
signal model is ``y = S h + n`` where ``S`` is the ``L0 x P`` banded
convolution matrix of the code (``L0 = L + P - 1``), ``h ~ CN(mu_h, R_h)``
is the target impulse response and ``n ~ CN(0, R_n)`` the disturbance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgument, InvalidModel, NumericalDegeneracy, UndefinedInput

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
# R_h eigenvalues below this fraction of the largest are clamped to zero.
SQRT_CLAMP_REL = 1e-10
MMSE_COND_SWITCH = 1e12
DEFAULT_NFFT = 4096


def _as_code(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex).ravel()
    if s.size == 0:
        raise InvalidArgument("waveform must have at least one sample")
    if not np.all(np.isfinite(s)):
        raise InvalidArgument("waveform samples must be finite")
    return s


def _check_hermitian(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidModel(f"{name} must be square, got shape {mat.shape}")
    if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=HERMITIAN_ATOL * max(1.0, np.abs(mat).max())):
        raise InvalidModel(f"{name} is not Hermitian")
    return 0.5 * (mat + mat.conj().T)


def energy(s) -> float:
    s = np.asarray(s)
    return float(np.vdot(s, s).real)


# ---------------------------------------------------------------------------
# scenario types


@dataclass(frozen=True, eq=False)
class TargetPrior:
    """Gaussian prior ``h ~ CN(mean, covariance)`` over ``P`` range cells."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        cov = _check_hermitian(self.covariance, "target covariance")
        mean = np.asarray(self.mean, dtype=complex).ravel()
        if mean.size != cov.shape[0]:
            raise InvalidModel(f"mean has length {mean.size} but covariance is {cov.shape[0]}x{cov.shape[0]}")
        w = np.linalg.eigvalsh(cov)
        if w[0] < -PSD_ATOL * max(1.0, w[-1]):
            raise InvalidModel(f"target covariance is not PSD (min eigenvalue {w[0]:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def scaled_identity(cls, P: int, scale: float = 1.0, mean: complex | Sequence = 0.0) -> "TargetPrior":
        mean = np.broadcast_to(np.asarray(mean, dtype=complex), (P,)).copy()
        return cls(mean, scale * np.eye(P, dtype=complex))

    @property
    def P(self) -> int:
        return self.covariance.shape[0]

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.covariance)
        w = np.where(w < SQRT_CLAMP_REL * max(w[-1], 0.0), 0.0, w)
        return w, v

    @cached_property
    def sqrt_cov(self) -> np.ndarray:
        w, v = self.eig
        root = (v * np.sqrt(w)) @ v.conj().T
        return 0.5 * (root + root.conj().T)

    @cached_property
    def cov_squared(self) -> np.ndarray:
        return self.covariance @ self.covariance

    @property
    def is_diagonal(self) -> bool:
        c = self.covariance
        return bool(np.allclose(c - np.diag(np.diag(c)), 0.0, atol=HERMITIAN_ATOL))

    @cached_property
    def condition_number(self) -> float:
        w, _ = self.eig
        return float(w[-1] / w[0]) if w[0] > 0 else np.inf


@dataclass(frozen=True, eq=False)
class DisturbanceModel:
    """Zero-mean Gaussian disturbance with Hermitian PD covariance of size ``L0``."""

    covariance: np.ndarray

    def __post_init__(self):
        cov = _check_hermitian(self.covariance, "disturbance covariance")
        object.__setattr__(self, "covariance", cov)
        _ = self.cholesky  # validates positive definiteness

    @classmethod
    def white(cls, L0: int, sigma2: float = 1.0) -> "DisturbanceModel":
        return cls(sigma2 * np.eye(L0, dtype=complex))

    @property
    def L0(self) -> int:
        return self.covariance.shape[0]

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor ``C`` with ``R_n = C C^H``."""
        try:
            return np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError as exc:
            raise InvalidModel("disturbance covariance is not positive definite") from exc

    def whiten(self, x: np.ndarray) -> np.ndarray:
        """``C^{-1} x`` for vectors or matrices."""
        return sla.solve_triangular(self.cholesky, x, lower=True)

    def solve(self, x: np.ndarray) -> np.ndarray:
        """``R_n^{-1} x``."""
        return sla.cho_solve((self.cholesky, True), x)

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = self.solve(np.eye(self.L0, dtype=complex))
        return 0.5 * (inv + inv.conj().T)

    @property
    def is_white(self) -> bool:
        c = self.covariance
        return bool(np.allclose(c, c[0, 0] * np.eye(self.L0), atol=HERMITIAN_ATOL))


@dataclass(frozen=True)
class JammingSpec:
    """Barrage jammer occupying ``band`` plus white receiver noise."""

    jam_power: float = 1000.0
    noise_power: float = 1.0
    band: tuple[float, float] = (0.1, 0.3)

    def __post_init__(self):
        f1, f2 = self.band
        if self.jam_power < 0 or self.noise_power <= 0:
            raise InvalidArgument("jam_power must be >= 0 and noise_power > 0")
        if not (0.0 <= f1 < f2 <= 1.0):
            raise InvalidArgument(f"jamming band must satisfy 0 <= f1 < f2 <= 1, got {self.band}")


@dataclass(frozen=True)
class SpectralBand:
    f1: float
    f2: float
    weight: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.f1 < self.f2 <= 1.0):
            raise InvalidArgument(f"band must satisfy 0 <= f1 < f2 <= 1, got ({self.f1}, {self.f2})")
        if self.weight < 0:
            raise InvalidArgument("band weight must be non-negative")


@dataclass(frozen=True)
class SpectralBandSet:
    bands: tuple[SpectralBand, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(
            b if isinstance(b, SpectralBand) else SpectralBand(*b) for b in self.bands))

    def __len__(self):
        return len(self.bands)


# ---------------------------------------------------------------------------
# waveform generators


def _check_length_energy(L: int, e_t: float):
    if int(L) != L or L < 1:
        raise InvalidArgument(f"code length must be a positive integer, got {L}")
    if not e_t > 0:
        raise InvalidArgument(f"energy must be positive, got {e_t}")


def lfm_waveform(L: int, e_t: float) -> np.ndarray:
    """Chirp code ``sqrt(e_t/L) exp(j pi (k-1)^2 / L)``, k = 1..L."""
    _check_length_energy(L, e_t)
    k = np.arange(L)
    return np.sqrt(e_t / L) * np.exp(1j * np.pi * k**2 / L)


def random_phase_waveform(L: int, e_t: float, seed: int | None = None) -> np.ndarray:
    _check_length_energy(L, e_t)
    rng = np.random.default_rng(seed)
    return np.sqrt(e_t / L) * np.exp(2j * np.pi * rng.random(L))


def min_eig_waveform(R_I: np.ndarray, e_t: float) -> np.ndarray:
    """Scaled eigenvector of the smallest eigenvalue of ``R_I``.

    This is the least-interfering unit-energy direction, used to start the
    spectrally constrained designs.
    """
    _, v = np.linalg.eigh(R_I)
    s = v[:, 0]
    return np.sqrt(e_t) * _canonical_phase(s)


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so that the first non-negligible entry is real positive."""
    mag = np.abs(v)
    idx = int(np.argmax(mag > 1e-12 * mag.max()))
    return v * np.exp(-1j * np.angle(v[idx]))


# ---------------------------------------------------------------------------
# structural helpers


def papr(s) -> float:
    s = _as_code(s)
    p = np.abs(s) ** 2
    mean = p.mean()
    if mean == 0:
        raise UndefinedInput("PAPR of an all-zero waveform is undefined")
    return float(p.max() / mean)


def convolution_matrix(s, P: int) -> np.ndarray:
    """Banded ``(L+P-1) x P`` matrix whose column ``p`` is ``s`` delayed by ``p``."""
    s = _as_code(s)
    if P < 1:
        raise InvalidArgument("P must be >= 1")
    L = s.size
    S = np.zeros((L + P - 1, P), dtype=complex)
    for p in range(P):
        S[p:p + L, p] = s
    return S


def jamming_covariance(spec: JammingSpec, L0: int) -> DisturbanceModel:
    """Disturbance covariance ``jam_power * R_J + noise_power * I``.

    The jammer power spectrum is sampled on ``N = 2 L0 - 1`` frequencies
    ``(p-1)/N``; bin ``p`` (counted from 1) is occupied when
    ``floor(N f1) <= p <= floor(N f2)``. The lags ``q_m`` are the inverse DFT
    ``(1/N) sum_p eta_p exp(+j 2 pi (p-1) m / N)`` so that ``q_0`` is the
    occupied fraction of the band.
    """
    N = 2 * L0 - 1
    p = np.arange(1, N + 1)
    lo, hi = np.floor(N * spec.band[0]), np.floor(N * spec.band[1])
    eta = ((p >= lo) & (p <= hi)).astype(float)
    q = np.fft.ifft(eta)
    R_J = sla.toeplitz(q[:L0])  # first row defaults to conj(first column)
    cov = spec.jam_power * R_J + spec.noise_power * np.eye(L0)
    try:
        return DisturbanceModel(cov)
    except InvalidModel as exc:
        raise NumericalDegeneracy("jamming covariance is not positive definite") from exc


def band_interference_matrix(f1: float, f2: float, L: int) -> np.ndarray:
    """``R(m, n) = integral_{f1}^{f2} exp(j 2 pi f (m - n)) df``."""
    d = np.subtract.outer(np.arange(L), np.arange(L)).astype(float)
    off = d != 0
    R = np.full((L, L), f2 - f1, dtype=complex)
    dd = d[off]
    R[off] = (np.exp(2j * np.pi * f2 * dd) - np.exp(2j * np.pi * f1 * dd)) / (2j * np.pi * dd)
    return R


def spectral_interference_matrix(bands: SpectralBandSet | Sequence, L: int) -> np.ndarray:
    """Weighted sum of band matrices; ``s^H R_I s`` is the in-band energy."""
    if not isinstance(bands, SpectralBandSet):
        bands = SpectralBandSet(tuple(bands))
    R = np.zeros((L, L), dtype=complex)
    for b in bands.bands:
        R += b.weight * band_interference_matrix(b.f1, b.f2, L)
    return 0.5 * (R + R.conj().T)


# ---------------------------------------------------------------------------
# metrics


def _check_dims(s: np.ndarray, prior: TargetPrior, dist: DisturbanceModel):
    if s.size + prior.P - 1 != dist.L0:
        raise InvalidModel(f"L + P - 1 = {s.size + prior.P - 1} does not match disturbance size {dist.L0}")


def mutual_information(s, prior: TargetPrior, dist: DisturbanceModel) -> float:
    """``log det(I + R_h^{1/2} S^H R_n^{-1} S R_h^{1/2})`` in nats."""
    s = _as_code(s)
    _check_dims(s, prior, dist)
    W = dist.whiten(convolution_matrix(s, prior.P) @ prior.sqrt_cov)
    G = np.eye(prior.P) + W.conj().T @ W
    return float(2.0 * np.log(np.diag(np.linalg.cholesky(G)).real).sum())


def _whitened_cross(s: np.ndarray, prior: TargetPrior, dist: DisturbanceModel) -> np.ndarray:
    """``C_s^{-1} S R_h`` with ``R_s = C_s C_s^H = S R_h S^H + R_n``."""
    S = convolution_matrix(s, prior.P)
    SR = S @ prior.covariance
    R_s = SR @ S.conj().T + dist.covariance
    try:
        C = np.linalg.cholesky(0.5 * (R_s + R_s.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracy("received-signal covariance is singular") from exc
    return sla.solve_triangular(C, SR, lower=True)


def mmse_reward(s, prior: TargetPrior, dist: DisturbanceModel) -> float:
    """``tr(R_h S^H (S R_h S^H + R_n)^{-1} S R_h)``; equals ``tr(R_h) - MMSE``."""
    s = _as_code(s)
    _check_dims(s, prior, dist)
    Z = _whitened_cross(s, prior, dist)
    return float(np.sum(np.abs(Z) ** 2))


def mmse_value(s, prior: TargetPrior, dist: DisturbanceModel, form: str = "auto") -> float:
    """Bayesian MMSE of the impulse-response estimate.

    ``form`` selects ``"inverse"`` (``tr[(R_h^{-1} + S^H R_n^{-1} S)^{-1}]``),
    ``"subtraction"`` (``tr(R_h) - tr(R_h S^H R_s^{-1} S R_h)``) or ``"auto"``,
    which uses the subtraction form when ``R_h`` is ill conditioned. A
    singular ``R_h`` always falls back to the subtraction form.
    """
    s = _as_code(s)
    _check_dims(s, prior, dist)
    if form not in ("auto", "inverse", "subtraction"):
        raise InvalidArgument(f"unknown MMSE form {form!r}")
    cond = prior.condition_number
    if form == "subtraction" or cond > MMSE_COND_SWITCH or not np.isfinite(cond):
        return float(np.trace(prior.covariance).real) - mmse_reward(s, prior, dist)
    W = dist.whiten(convolution_matrix(s, prior.P))
    info = np.linalg.inv(prior.covariance) + W.conj().T @ W
    C = np.linalg.cholesky(0.5 * (info + info.conj().T))
    Cinv = sla.solve_triangular(C, np.eye(prior.P), lower=True)
    return float(np.sum(np.abs(Cinv) ** 2))


def mmse_estimate(y, s, prior: TargetPrior, dist: DisturbanceModel) -> np.ndarray:
    """Posterior mean ``mu_h + R_h S^H R_s^{-1} (y - S mu_h)``.

    ``y`` may be a single received vector or an ``(L0, n)`` stack of them.
    """
    s = _as_code(s)
    _check_dims(s, prior, dist)
    y = np.asarray(y, dtype=complex)
    S = convolution_matrix(s, prior.P)
    R_s = S @ prior.covariance @ S.conj().T + dist.covariance
    innov = y - (S @ prior.mean if y.ndim == 1 else (S @ prior.mean)[:, None])
    gain = sla.solve(R_s, innov, assume_a="her")
    est = prior.covariance @ S.conj().T @ gain
    return prior.mean + est if y.ndim == 1 else prior.mean[:, None] + est


def esd(s, nfft: int = DEFAULT_NFFT, normalize: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Energy spectral density ``|sum_l s_l exp(-j 2 pi f l)|^2`` on ``f = k / nfft``."""
    s = _as_code(s)
    if nfft < s.size:
        raise InvalidArgument(f"nfft={nfft} must be >= L={s.size}")
    dens = np.abs(np.fft.fft(s, nfft)) ** 2
    if normalize:
        dens = dens / dens.max()
    return np.arange(nfft) / nfft, dens


def band_mask(freqs: np.ndarray, f1: float, f2: float) -> np.ndarray:
    return (freqs >= f1) & (freqs <= f2)


def acf(s) -> np.ndarray:
    """Aperiodic correlation ``r_p = (1/e) sum_k conj(s_k) s_{k+p}``, p = 0..L-1."""
    s = _as_code(s)
    e = energy(s)
    if e == 0:
        raise UndefinedInput("ACF of an all-zero waveform is undefined")
    L = s.size
    full = np.correlate(s, s, mode="full")  # full[L-1+p] = sum_n s[n+p] conj(s[n])
    return full[L - 1:] / e


def zcz_bounds(prior: TargetPrior, sigma0sq: float, e_t: float) -> tuple[float, float]:
    """Hadamard-type MI upper bound and MMSE lower bound for white noise.

    Both are attained exactly by codes whose correlations vanish at lags
    ``1..P-1``.
    """
    if not prior.is_diagonal:
        raise InvalidModel("ZCZ bounds require a diagonal target covariance")
    lam = np.diag(prior.covariance).real
    snr = e_t / sigma0sq
    mi = float(np.sum(np.log1p(snr * lam)))
    mmse = float(np.sum(lam / (1.0 + snr * lam)))
    return mi, mmse


def low_snr_energy_design(prior: TargetPrior, dist: DisturbanceModel, e_t: float) -> np.ndarray:
    """Principal eigenvector of ``E^H (R_h^* kron R_n^{-1}) E`` scaled to energy ``e_t``.

    At low SNR the mutual information is close to this quadratic form, so the
    eigenvector is the energy-constrained optimum. Ties in the leading
    eigenspace are broken by projecting the first coordinate vector with a
    non-zero projection onto the eigenspace and fixing its global phase.
    """
    from .minorize import gram_contract

    if not e_t > 0:
        raise InvalidArgument("energy must be positive")
    L = dist.L0 - prior.P + 1
    Q = gram_contract(prior.covariance, dist.inverse, L)
    w, v = np.linalg.eigh(Q)
    top = w[-1]
    span = v[:, w >= top - 1e-10 * max(abs(top), 1.0)]
    if span.shape[1] == 1:
        u = span[:, 0]
    else:
        proj = span @ span.conj().T
        col = int(np.argmax(np.linalg.norm(proj, axis=0) > 1e-8))
        u = proj[:, col] / np.linalg.norm(proj[:, col])
    return np.sqrt(e_t) * _canonical_phase(u)
