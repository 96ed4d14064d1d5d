import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangeprof.errors import InvalidArgument, NoSolution
from rangeprof.minorize import QuadraticMinorizer
from rangeprof.model import energy, papr, spectral_interference_matrix
from rangeprof.qpsolve import (
    Energy,
    Papr,
    SolverTolerances,
    Spectral,
    _sphere_minimize,
    papr_project,
    secular_solve,
    solve,
    solve_energy,
    solve_papr,
    solve_spectral,
)
from rangeprof.verify import crandn, oracle_small_qp, random_minorizer

seeds = st.integers(0, 2**32 - 1)


@given(st.integers(1, 8), seeds, st.floats(1e-3, 1e3))
def test_secular_root(n, seed, target):
    rng = np.random.default_rng(seed)
    lam = rng.normal(size=n)
    w = rng.random(n) + 1e-3
    mu = secular_solve(lam, w, target)
    assert mu > lam.max()
    assert np.sum(w / (mu - lam) ** 2) == pytest.approx(target, rel=1e-9)


def test_secular_bracket_and_errors():
    # phi at the bracket already below target: bracket returned
    assert secular_solve([0.0], [1.0], 1.0, lower_bracket=5.0) == 5.0
    with pytest.raises(NoSolution):
        secular_solve([1.0], [0.0], 1.0)
    with pytest.raises(InvalidArgument):
        secular_solve([1.0], [1.0], 0.0)


def test_papr_project_rho1_closed_form(rng):
    t = crandn(rng, 10)
    s = papr_project(t, 5.0, 1.0)
    np.testing.assert_allclose(s, math.sqrt(0.5) * np.exp(1j * np.angle(t)))
    s0 = papr_project(np.array([0, 1j]), 2.0, 1.0)
    assert s0[0] == 1.0


def test_papr_project_rho_L_is_scaling(rng):
    t = crandn(rng, 8)
    np.testing.assert_allclose(papr_project(t, 3.0, 8.0), math.sqrt(3.0) * t / np.linalg.norm(t))


def test_papr_project_rho2_kkt_and_random_search():
    rng = np.random.default_rng(5)
    L, e_t, rho = 8, 8.0, 2.0
    t = crandn(rng, L)
    s = papr_project(t, e_t, rho)
    beta = math.sqrt(rho * e_t / L)
    assert energy(s) == pytest.approx(e_t)
    assert papr(s) <= rho * (1 + 1e-12)
    np.testing.assert_allclose(np.angle(s), np.angle(t))
    free = np.abs(s) < beta * (1 - 1e-9)
    ratios = np.abs(s[free]) / np.abs(t[free])
    np.testing.assert_allclose(ratios, ratios[0])
    # 10^5 random feasible points
    best = np.vdot(s, t).real
    X = papr_project_batch(rng, 100000, L, e_t, rho)
    assert (X.conj() @ t).real.max() <= best + 1e-12


def papr_project_batch(rng, n, L, e_t, rho):
    out = np.empty((n, L), complex)
    for i in range(n):
        out[i] = papr_project(crandn(rng, L), e_t, rho)
    return out


def test_papr_project_validation():
    with pytest.raises(InvalidArgument):
        papr_project(np.ones(4), 1.0, 0.5)
    with pytest.raises(InvalidArgument):
        papr_project(np.ones(4), 1.0, 5.0)


def test_solve_energy_interior_case():
    A = -np.diag([1.0, 2.0, 4.0]).astype(complex)
    a = np.array([0.1, 0.1, 0.1], complex)
    m = QuadraticMinorizer(A, a, 0.0, "mi", np.zeros(3, complex))
    res = solve_energy(m, 100.0)
    np.testing.assert_allclose(res.s, -np.linalg.solve(A, a))
    assert res.multiplier == 0.0


def test_solve_energy_active_matches_oracle():
    rng = np.random.default_rng(3)
    for metric in ("mi", "mmse"):
        m = random_minorizer(rng, 6, metric=metric)
        s = solve_energy(m, 6.0).s
        o = oracle_small_qp(m, Energy(6.0), restarts=3, seed=1)
        assert energy(s) <= 6.0 * (1 + 1e-10)
        assert m.evaluate(s) >= m.evaluate(o) - 1e-6 * abs(m.evaluate(o))


def test_solve_energy_degenerate_returns_anchor():
    anchor = np.ones(3, complex)
    m = QuadraticMinorizer(np.zeros((3, 3), complex), np.zeros(3, complex), 0.0, "mi", anchor)
    res = solve_energy(m, 3.0)
    assert res.degenerate
    np.testing.assert_array_equal(res.s, anchor)


def test_solve_energy_flat_direction():
    # A has a null direction with no linear term along it: an interior optimum exists
    A = -np.diag([0.0, 1.0, 3.0]).astype(complex)
    a = np.array([0.0, 1.0, 1.0], complex)
    m = QuadraticMinorizer(A, a, 0.0, "mi", np.zeros(3, complex))
    res = solve_energy(m, 10.0)
    assert energy(res.s) <= 10.0
    rng = np.random.default_rng(0)
    pts = crandn(rng, 20000, 3)
    pts *= (math.sqrt(10.0) * rng.random(20000) ** (1 / 6) / np.linalg.norm(pts, axis=1))[:, None]
    assert m.variable_part(res.s) >= max(m.variable_part(p) for p in pts) - 1e-12


def test_sphere_hard_case():
    # b orthogonal to the bottom eigenvector and radius beyond the regular branch
    M = np.diag([0.0, 1.0, 3.0])
    b = np.array([0.0, -1.0, -1.0], complex)
    s, alpha = _sphere_minimize(np.diag(M), np.eye(3, dtype=complex), b, 10.0, 1e-12)
    assert energy(s) == pytest.approx(10.0)
    assert alpha == pytest.approx(0.0)
    obj = lambda x: np.vdot(x, M @ x).real + 2 * np.vdot(x, b).real
    pts = crandn(np.random.default_rng(1), 20000, 3)
    pts *= (math.sqrt(10.0) / np.linalg.norm(pts, axis=1))[:, None]
    assert obj(s) <= min(obj(p) for p in pts) + 1e-12


def test_solve_papr_is_monotone_and_feasible():
    rng = np.random.default_rng(8)
    m = random_minorizer(rng, 10)
    spec = Papr(10.0, 1.0)
    res = solve_papr(m, spec, papr_project(m.anchor, 10.0, 1.0))
    assert np.all(np.diff(res.trace) >= -1e-12 * max(abs(v) for v in res.trace))
    assert spec.is_feasible(res.s)
    with pytest.raises(InvalidArgument):
        solve_papr(m, spec, 2 * np.ones(10))


def test_solve_papr_general_rho():
    rng = np.random.default_rng(9)
    m = random_minorizer(rng, 8)
    spec = Papr(8.0, 2.5)
    res = solve_papr(m, spec, spec.project(m.anchor))
    assert spec.is_feasible(res.s)
    assert m.evaluate(res.s) >= m.evaluate(spec.project(m.anchor)) - 1e-12


def test_spectral_emptiness_and_feasibility():
    R = spectral_interference_matrix([(0.0, 1.0)], 6)  # identity
    with pytest.raises(InvalidArgument):
        Spectral(6.0, R, 1.0)
    spec = Spectral(10.0, spectral_interference_matrix([(0.7, 0.8)], 10), 0.05)
    x = spec.project(crandn(np.random.default_rng(0), 10))
    assert spec.is_feasible(x)
    assert spec.interference(x) <= 0.05 * (1 + 1e-12)


def test_solve_spectral_active_budget():
    rng = np.random.default_rng(10)
    m = random_minorizer(rng, 10)
    spec = Spectral(10.0, spectral_interference_matrix([(0.7, 0.8)], 10), 0.05)
    res = solve_spectral(m, spec, spec.strictly_feasible_point())
    assert res.converged
    assert abs(energy(res.s) - 10.0) <= 1e-8 * 10.0
    assert spec.interference(res.s) <= 0.05 * (1 + 1e-6)
    assert res.primal_residual <= SolverTolerances().residual_tol(10)
    # no worse than the feasible start
    assert m.evaluate(res.s) >= m.evaluate(spec.strictly_feasible_point())


def test_dispatch_rejects_unknown_constraint():
    m = random_minorizer(np.random.default_rng(0), 4)
    with pytest.raises(InvalidArgument):
        solve(m, object(), m.anchor)


def test_tolerances_validation():
    with pytest.raises(InvalidArgument):
        SolverTolerances(inner_rel_tol=0)
    with pytest.raises(InvalidArgument):
        SolverTolerances(admm_residual_tol=-1.0)
    assert SolverTolerances().residual_tol(100) == pytest.approx(1e-5)
