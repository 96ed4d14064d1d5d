import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangeprof.errors import InvalidArgument
from rangeprof.minorize import (
    ShiftStackOperator,
    build_minorizer,
    gram_contract,
    mi_minorizer,
    mmse_minorizer,
    vec,
)
from rangeprof.model import convolution_matrix, mmse_reward, mutual_information
from rangeprof.verify import crandn, random_instance, random_pd

seeds = st.integers(0, 2**32 - 1)
BUILDERS = {"mi": (mi_minorizer, mutual_information), "mmse": (mmse_minorizer, mmse_reward)}


@given(st.integers(1, 9), st.integers(1, 5), seeds)
def test_shift_stack_matches_dense(L, P, seed):
    rng = np.random.default_rng(seed)
    op = ShiftStackOperator(L, P)
    E = op.dense()
    s, v = crandn(rng, L), crandn(rng, op.L0 * P)
    np.testing.assert_allclose(op.forward(s), E @ s)
    np.testing.assert_allclose(op.forward(s), vec(convolution_matrix(s, P)))
    np.testing.assert_allclose(op.adjoint(v), E.T @ v)


def test_shift_stack_p1_zero_pads():
    op = ShiftStackOperator(4, 1)
    np.testing.assert_array_equal(op.forward(np.arange(4)), np.arange(4))
    with pytest.raises(InvalidArgument):
        op.forward(np.ones(3))
    with pytest.raises(InvalidArgument):
        op.adjoint(np.ones(3))


@given(st.integers(1, 7), st.integers(1, 4), seeds)
def test_gram_contract_matches_kron(L, P, seed):
    rng = np.random.default_rng(seed)
    R = random_pd(rng, P)
    W = random_pd(rng, L + P - 1) - random_pd(rng, L + P - 1)
    E = ShiftStackOperator(L, P).dense()
    np.testing.assert_allclose(gram_contract(R, W), E.T @ np.kron(R.conj(), W) @ E, atol=1e-12)


def test_gram_contract_p1_block():
    W = random_pd(np.random.default_rng(0), 5)
    np.testing.assert_allclose(gram_contract(np.array([[2.0]]), W), 2.0 * W)
    with pytest.raises(InvalidArgument):
        gram_contract(np.eye(2), np.eye(3), L=4)


@pytest.mark.parametrize("metric", ["mi", "mmse"])
@given(seed=seeds)
def test_minorizer_tangent_and_dominated(metric, seed):
    rng = np.random.default_rng(seed)
    prior, dist = random_instance(rng, 6, 3)
    build, f = BUILDERS[metric]
    s_k = crandn(rng, 6)
    m = build(s_k, prior, dist)
    assert m.evaluate(s_k) == pytest.approx(f(s_k, prior, dist), rel=1e-10, abs=1e-12)
    for _ in range(10):
        s = crandn(rng, 6) * rng.uniform(0.1, 3.0)
        assert f(s, prior, dist) >= m.evaluate(s) - 1e-9 * max(1.0, abs(f(s, prior, dist)))
    assert np.linalg.eigvalsh(m.A)[-1] <= 1e-9 * np.linalg.norm(m.A, 2)


@pytest.mark.parametrize("metric", ["mi", "mmse"])
def test_minorizer_gradient_matches_objective(metric):
    """Tangency of first order: surrogate and objective share the gradient."""
    rng = np.random.default_rng(11)
    prior, dist = random_instance(rng, 6, 2)
    build, f = BUILDERS[metric]
    s_k = crandn(rng, 6)
    m = build(s_k, prior, dist)
    h = 1e-6
    for _ in range(4):
        d = crandn(rng, 6)
        num = (f(s_k + h * d, prior, dist) - f(s_k - h * d, prior, dist)) / (2 * h)
        ana = 2 * np.vdot(d, m.gradient(s_k)).real
        assert num == pytest.approx(ana, rel=1e-5, abs=1e-7)


def test_build_minorizer_dispatch(small_instance):
    prior, dist, s = small_instance
    assert build_minorizer("mi", s, prior, dist).metric == "mi"
    assert build_minorizer("mmse", s, prior, dist).metric == "mmse"
    with pytest.raises(InvalidArgument):
        build_minorizer("snr", s, prior, dist)
    m = build_minorizer("mi", s, prior, dist)
    with pytest.raises(InvalidArgument):
        m.evaluate(s[:-1])
