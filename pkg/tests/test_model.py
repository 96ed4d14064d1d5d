import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from rangeprof.errors import InvalidArgument, InvalidModel, UndefinedInput
from rangeprof.model import (
    DisturbanceModel,
    JammingSpec,
    SpectralBand,
    TargetPrior,
    acf,
    band_interference_matrix,
    band_mask,
    convolution_matrix,
    energy,
    esd,
    jamming_covariance,
    lfm_waveform,
    low_snr_energy_design,
    min_eig_waveform,
    mmse_estimate,
    mmse_reward,
    mmse_value,
    mutual_information,
    papr,
    random_phase_waveform,
    spectral_interference_matrix,
    zcz_bounds,
)
from rangeprof.verify import crandn, random_instance, random_pd


def conv_oracle(s, P):
    L = len(s)
    S = np.zeros((L + P - 1, P), complex)
    for i in range(L + P - 1):
        for j in range(P):
            if 0 <= i - j < L:
                S[i, j] = s[i - j]
    return S


@given(st.integers(1, 12), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_convolution_matrix_matches_double_loop(L, P, seed):
    s = crandn(np.random.default_rng(seed), L)
    np.testing.assert_array_equal(convolution_matrix(s, P), conv_oracle(s, P))


def test_convolution_matrix_p1_is_column():
    s = np.arange(5) + 1j
    np.testing.assert_array_equal(convolution_matrix(s, 1)[:, 0], s)


def test_convolution_matrix_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        convolution_matrix([], 2)
    with pytest.raises(InvalidArgument):
        convolution_matrix([1, np.nan], 2)
    with pytest.raises(InvalidArgument):
        convolution_matrix([1, 2], 0)


def test_lfm_and_random_phase_are_constant_modulus():
    for s in (lfm_waveform(100, 100.0), random_phase_waveform(64, 10.0, seed=3)):
        assert papr(s) == pytest.approx(1.0, abs=1e-12)
    assert energy(lfm_waveform(100, 100.0)) == pytest.approx(100.0)
    np.testing.assert_allclose(lfm_waveform(4, 4.0), np.exp(1j * np.pi * np.arange(4) ** 2 / 4))


def test_random_phase_seeded_and_uniform():
    a = random_phase_waveform(2000, 1.0, seed=7)
    np.testing.assert_array_equal(a, random_phase_waveform(2000, 1.0, seed=7))
    phases = (np.angle(a) % (2 * np.pi)) / (2 * np.pi)
    counts, _ = np.histogram(phases, bins=20, range=(0, 1))
    assert stats.chisquare(counts).pvalue > 1e-3


def test_generators_reject_bad_parameters():
    with pytest.raises(InvalidArgument):
        lfm_waveform(0, 1.0)
    with pytest.raises(InvalidArgument):
        random_phase_waveform(4, -1.0)


def test_papr_values():
    assert papr([2, 0, 0, 0]) == pytest.approx(4.0)
    with pytest.raises(UndefinedInput):
        papr([0, 0])


def test_prior_validation():
    with pytest.raises(InvalidModel):
        TargetPrior(np.zeros(2), np.array([[1, 2], [0, 1]]))
    with pytest.raises(InvalidModel):
        TargetPrior(np.zeros(2), -np.eye(2))
    with pytest.raises(InvalidModel):
        TargetPrior(np.zeros(3), np.eye(2))
    with pytest.raises(InvalidModel):
        DisturbanceModel(np.diag([1.0, 0.0]))


def test_prior_sqrt(rng):
    R = random_pd(rng, 5)
    prior = TargetPrior(np.zeros(5), R)
    np.testing.assert_allclose(prior.sqrt_cov @ prior.sqrt_cov, R, atol=1e-12)


def test_jamming_covariance_default_scenario():
    L0 = 109
    dist = jamming_covariance(JammingSpec(1000.0, 1.0, (0.1, 0.3)), L0)
    R = dist.covariance
    np.testing.assert_allclose(R, R.conj().T, atol=1e-12)
    # Toeplitz structure
    for k in range(1, 5):
        np.testing.assert_allclose(np.diag(R, k), np.diag(R, k)[0], atol=1e-9)
    assert np.linalg.eigvalsh(R)[0] >= 1.0 - 1e-9


def test_jamming_full_band_is_impulse():
    # every bin occupied: the lag sequence is an impulse, so R_J = I
    R = jamming_covariance(JammingSpec(5.0, 1.0, (0.0, 1.0)), 20).covariance
    np.testing.assert_allclose(R, 6.0 * np.eye(20), atol=1e-12)


def test_jamming_band_validation():
    with pytest.raises(InvalidArgument):
        JammingSpec(1.0, 1.0, (0.3, 0.1))
    with pytest.raises(InvalidArgument):
        JammingSpec(1.0, 0.0)


def test_jamming_psd_sits_in_band():
    L0 = 60
    R = jamming_covariance(JammingSpec(1.0, 1e-9, (0.1, 0.3)), L0).covariance
    def power(f):
        v = np.exp(2j * np.pi * f * np.arange(L0)) / math.sqrt(L0)
        return np.vdot(v, R @ v).real
    assert power(0.2) > 50 * power(0.6)


def test_band_interference_matches_quadrature():
    L, f1, f2 = 6, 0.7, 0.8
    R = band_interference_matrix(f1, f2, L)
    for m in range(L):
        for n in range(L):
            re = integrate.quad(lambda f: math.cos(2 * math.pi * f * (m - n)), f1, f2)[0]
            im = integrate.quad(lambda f: math.sin(2 * math.pi * f * (m - n)), f1, f2)[0]
            assert abs(R[m, n] - (re + 1j * im)) < 1e-12


def test_interference_equals_in_band_energy(rng):
    L = 16
    s = crandn(rng, L)
    R = spectral_interference_matrix([SpectralBand(0.2, 0.45, 2.0)], L)
    f = np.linspace(0.2, 0.45, 20001)
    dens = np.abs(np.exp(-2j * np.pi * np.outer(f, np.arange(L))) @ s) ** 2
    assert np.vdot(s, R @ s).real == pytest.approx(2.0 * np.trapezoid(dens, f), rel=1e-6)


def test_mi_matches_determinant(small_instance):
    prior, dist, s = small_instance
    S = convolution_matrix(s, prior.P)
    M = np.eye(prior.P) + prior.sqrt_cov @ S.conj().T @ np.linalg.inv(dist.covariance) @ S @ prior.sqrt_cov
    assert mutual_information(s, prior, dist) == pytest.approx(np.log(np.linalg.det(M).real), rel=1e-12)


def test_mmse_forms_agree():
    rng = np.random.default_rng(4)
    for _ in range(100):
        prior, dist = random_instance(rng, 7, 3)
        s = crandn(rng, 7)
        a = mmse_value(s, prior, dist, "inverse")
        b = mmse_value(s, prior, dist, "subtraction")
        assert abs(a - b) <= 1e-9 * abs(a)
    S = convolution_matrix(s, prior.P)
    R_s = S @ prior.covariance @ S.conj().T + dist.covariance
    direct = np.trace(prior.covariance @ S.conj().T @ np.linalg.inv(R_s) @ S @ prior.covariance).real
    assert mmse_reward(s, prior, dist) == pytest.approx(direct, rel=1e-12)


def test_mmse_singular_prior_falls_back():
    prior = TargetPrior(np.zeros(2), np.diag([1.0, 0.0]))
    dist = DisturbanceModel.white(5)
    s = np.ones(4)
    assert mmse_value(s, prior, dist) == pytest.approx(1 / (1 + 4.0))
    with pytest.raises(InvalidArgument):
        mmse_value(s, prior, dist, "cholesky")


def test_p1_scalar_formulas():
    rng = np.random.default_rng(9)
    for _ in range(20):
        lam = 0.1 + rng.random()
        prior = TargetPrior(np.zeros(1), np.array([[lam]]))
        dist = DisturbanceModel(random_pd(rng, 6))
        s = crandn(rng, 6)
        snr = np.vdot(s, np.linalg.solve(dist.covariance, s)).real
        assert mutual_information(s, prior, dist) == pytest.approx(math.log1p(lam * snr), rel=1e-10)
        assert mmse_value(s, prior, dist) == pytest.approx(1 / (1 / lam + snr), rel=1e-10)


def test_mmse_estimate_monte_carlo():
    rng = np.random.default_rng(0)
    L, P, n = 10, 3, 20000
    prior = TargetPrior(np.array([1.0, -0.5j, 0.2]), random_pd(rng, P))
    dist = DisturbanceModel(random_pd(rng, L + P - 1))
    s = crandn(rng, L)
    h = prior.mean[:, None] + np.linalg.cholesky(prior.covariance) @ crandn(rng, P, n)
    noise = np.linalg.cholesky(dist.covariance) @ crandn(rng, L + P - 1, n)
    y = convolution_matrix(s, P) @ h + noise
    est = mmse_estimate(y, s, prior, dist)
    emp = np.mean(np.sum(np.abs(est - h) ** 2, axis=0))
    assert emp == pytest.approx(mmse_value(s, prior, dist), rel=0.03)
    np.testing.assert_allclose(mmse_estimate(y[:, 0], s, prior, dist), est[:, 0])


def test_dimension_mismatch_raises(small_instance):
    prior, dist, s = small_instance
    with pytest.raises(InvalidModel):
        mutual_information(s[:-1], prior, dist)


def test_esd_notch_location():
    L = 64
    f0 = 0.25
    s = np.exp(2j * np.pi * f0 * np.arange(L))
    f, d = esd(s)
    assert f[np.argmax(d)] == pytest.approx(f0, abs=1 / 4096)
    assert d.sum() / 4096 == pytest.approx(energy(s))  # Parseval
    assert band_mask(np.array([0.1, 0.2, 0.35]), 0.1, 0.3).tolist() == [True, True, False]
    with pytest.raises(InvalidArgument):
        esd(np.ones(10), nfft=4)


def test_acf_definition(rng):
    s = crandn(rng, 9)
    r = acf(s)
    e = energy(s)
    for p in range(9):
        assert r[p] == pytest.approx(np.sum(np.conj(s[: 9 - p]) * s[p:]) / e)
    assert r[0] == pytest.approx(1.0)
    with pytest.raises(UndefinedInput):
        acf(np.zeros(3))


def test_zcz_bounds_values():
    prior = TargetPrior.scaled_identity(10, 0.1)
    mi, mmse = zcz_bounds(prior, 1.0, 100.0)
    assert mmse == pytest.approx(10 / 110)
    assert mi == pytest.approx(10 * math.log(11))
    with pytest.raises(InvalidModel):
        zcz_bounds(TargetPrior(np.zeros(2), np.array([[1, 0.5], [0.5, 1]])), 1.0, 1.0)


def test_zcz_bounds_p1_scalar():
    prior = TargetPrior(np.zeros(1), np.array([[0.4]]))
    mi, mmse = zcz_bounds(prior, 2.0, 10.0)
    assert mi == pytest.approx(math.log1p(0.4 * 5))
    assert mmse == pytest.approx(1 / (1 / 0.4 + 5))


def test_low_snr_design_is_principal_eigvec():
    rng = np.random.default_rng(2)
    prior, dist = random_instance(rng, 8, 3)
    s = low_snr_energy_design(prior, dist, 8.0)
    # power iteration on the dense quadratic form
    from rangeprof.minorize import ShiftStackOperator

    E = ShiftStackOperator(8, 3).dense()
    Q = E.T @ np.kron(prior.covariance.conj(), np.linalg.inv(dist.covariance)) @ E
    v = crandn(rng, 8)
    for _ in range(3000):
        v = Q @ v
        v /= np.linalg.norm(v)
    assert energy(s) == pytest.approx(8.0)
    assert abs(np.vdot(v, s)) / math.sqrt(8.0) == pytest.approx(1.0, abs=1e-8)


def test_min_eig_waveform():
    R = spectral_interference_matrix([(0.7, 0.8)], 20)
    s = min_eig_waveform(R, 20.0)
    assert energy(s) == pytest.approx(20.0)
    assert np.vdot(s, R @ s).real == pytest.approx(20.0 * np.linalg.eigvalsh(R)[0], abs=1e-10)
