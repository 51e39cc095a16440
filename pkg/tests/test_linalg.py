import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helstrom_flow.dephasing import DephasingConfig, initial_global_state
from helstrom_flow.ensembles import random_density, random_hermitian, random_unitary
from helstrom_flow.linalg import (
    SIGMA_X,
    SIGMA_Z,
    BipartiteState,
    DensityOperator,
    WeightPair,
    basis_ket,
    coherent_state,
    helstrom,
    hermitian_eig,
    hermitian_expm,
    kron,
    partial_trace_env,
    partial_trace_sys,
    projector,
    trace_distance,
    trace_norm,
    trace_norm_2x2,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_kron_identity():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_basis_projector_placement():
    # |10> sits at index 1 * 2 + 0 = 2
    np.testing.assert_array_equal(kron(projector(1, 2), projector(0, 2)), projector(2, 4))


def test_kron_sigma_z_on_01():
    ket01 = np.kron(basis_ket(0, 2), basis_ket(1, 2))
    np.testing.assert_allclose(kron(SIGMA_Z, SIGMA_Z) @ ket01, -ket01)


def test_kron_entry_formula(rng):
    a, b = rng.normal(size=(2, 2)), rng.normal(size=(3, 3))
    k = kron(a, b)
    for i, j, m, n in [(0, 1, 2, 0), (1, 0, 1, 2), (1, 1, 0, 0)]:
        assert k[i * 3 + m, j * 3 + n] == pytest.approx(a[i, j] * b[m, n])


def test_partial_trace_product(rng):
    rs, re = random_density(2, rng).matrix, random_density(3, rng).matrix
    np.testing.assert_allclose(partial_trace_env(kron(rs, re), 2, 3), rs, atol=1e-14)
    np.testing.assert_allclose(partial_trace_sys(kron(rs, re), 2, 3), re, atol=1e-14)


def test_partial_trace_entangled_marginal():
    psi = (np.kron(basis_ket(1, 2), basis_ket(0, 2)) + np.kron(basis_ket(0, 2), basis_ket(1, 2))) / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(partial_trace_env(rho, 2, 2), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_preserves_trace(rng):
    for _ in range(100):
        ds, de = rng.integers(1, 5, size=2)
        x = random_hermitian(ds * de, rng)
        assert np.trace(partial_trace_env(x, ds, de)) == pytest.approx(np.trace(x), abs=1e-12)
        assert np.trace(partial_trace_sys(x, ds, de)) == pytest.approx(np.trace(x), abs=1e-12)


def test_partial_trace_sys_dephasing_vacuum():
    cfg = DephasingConfig(lam=0.0, alpha=0.6, beta=0.8)
    s = initial_global_state(cfg, 10)
    expected = projector(0, 10)
    np.testing.assert_allclose(partial_trace_sys(s.matrix, 2, 10), expected, atol=1e-14)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace_env(np.eye(6), 4, 2)
    with pytest.raises(ValueError):
        partial_trace_sys(np.eye(6), 4, 2)


def test_bipartite_marginal_traces(rng):
    s = BipartiteState(random_density(6, rng), 2, 3)
    assert np.trace(s.marginal_s.matrix) == pytest.approx(1.0)
    assert np.trace(s.marginal_e.matrix) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        BipartiteState(random_density(6, rng), 2, 2)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_pauli(method):
    w, _ = hermitian_eig(SIGMA_Z, method)
    np.testing.assert_allclose(w, [-1, 1])
    w, v = hermitian_eig(SIGMA_X, method)
    np.testing.assert_allclose(w, [-1, 1], atol=1e-15)
    minus = np.array([1, -1]) / math.sqrt(2)
    plus = np.array([1, 1]) / math.sqrt(2)
    assert abs(np.vdot(minus, v[:, 0])) == pytest.approx(1.0)
    assert abs(np.vdot(plus, v[:, 1])) == pytest.approx(1.0)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_cnot_helstrom_offdiagonal_only(method):
    # gamma = delta = 0, theta = 1/4 -> eigenvalues (0 +- sqrt(4/16)) / 2 = +-1/4
    delta = np.array([[0, 0.25], [0.25, 0]], dtype=complex)
    w, _ = hermitian_eig(delta, method)
    np.testing.assert_allclose(w, [-0.25, 0.25], atol=1e-15)


@pytest.mark.parametrize("method,dims", [("lapack", [1, 2, 5, 17, 64, 128]), ("jacobi", [1, 2, 5, 17, 40])])
def test_eig_residuals_and_reconstruction(method, dims, rng):
    for n in dims:
        h = random_hermitian(n, rng)
        w, v = hermitian_eig(h, method)
        assert np.all(np.diff(w) >= 0)
        resid = np.max(np.abs(h @ v - v * w), axis=0)
        assert np.all(resid <= 1e-10 * (1 + np.max(np.abs(w))))
        np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
        assert np.max(np.abs((v * w) @ v.conj().T - h)) <= 1e-10


def test_jacobi_matches_lapack(rng):
    for n in (3, 8, 20):
        h = random_hermitian(n, rng)
        np.testing.assert_allclose(hermitian_eig(h, "jacobi")[0], hermitian_eig(h)[0], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        trace_norm(np.array([[0, 1], [0, 0]]))


def test_trace_norm_examples(rng):
    for _ in range(20):
        assert trace_norm(random_density(4, rng)) == pytest.approx(1.0, abs=1e-12)
    rho = random_density(3, rng)
    assert trace_norm(helstrom(rho, rho, WeightPair(0.8))) == pytest.approx(0.6, abs=1e-12)
    assert trace_norm(np.diag([0.3, -0.7])) == pytest.approx(1.0)


def test_trace_norm_2x2_matches_eigen(rng):
    for _ in range(200):
        h = random_hermitian(2, rng)
        closed = trace_norm_2x2(h[0, 0].real, h[1, 1].real, h[1, 0])
        assert closed == pytest.approx(trace_norm(h), abs=1e-13)


def test_trace_distance_examples():
    assert trace_distance(projector(0, 2), projector(1, 2)) == pytest.approx(1.0)
    rho = DensityOperator(np.diag([0.2, 0.8]))
    assert trace_distance(rho, rho) == 0.0
    with pytest.raises(ValueError):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_helstrom_examples(rng):
    r1, r2 = random_density(3, rng), random_density(3, rng)
    half = trace_norm(helstrom(r1, r2, WeightPair(0.5)))
    assert half == pytest.approx(trace_distance(r1, r2), abs=1e-14)
    assert trace_norm(helstrom(r1, r2, WeightPair(1.0))) == pytest.approx(1.0, abs=1e-12)
    w = WeightPair(0.3)
    assert np.trace(helstrom(r1, r2, w)).real == pytest.approx(w.p1 - w.p2)
    with pytest.raises(ValueError):
        helstrom(r1, random_density(2, rng), w)


def test_weight_pair():
    w = WeightPair(0.25)
    assert w.p1 + w.p2 == 1.0
    assert w.swapped().p1 == 0.75
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            WeightPair(bad)


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityOperator(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        DensityOperator(np.array([[np.nan, 0], [0, 1]]))
    rho = DensityOperator(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_expm_examples(rng):
    h = random_hermitian(4, rng)
    np.testing.assert_allclose(hermitian_expm(h, 0.0), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(hermitian_expm(SIGMA_Z, math.pi), -np.eye(2), atol=1e-15)
    for _ in range(10):
        h = random_hermitian(5, rng)
        t, s = rng.normal(size=2)
        u = hermitian_expm(h, t)
        assert np.max(np.abs(u @ u.conj().T - np.eye(5))) <= 1e-10
        np.testing.assert_allclose(u @ hermitian_expm(h, s), hermitian_expm(h, t + s), atol=1e-10)


def test_coherent_state():
    psi, deficit = coherent_state(0.0, 5)
    np.testing.assert_array_equal(psi, basis_ket(0, 5))
    assert deficit == 0.0
    raw, _ = coherent_state(1.0, 30, renormalize=False)
    assert raw[0].real == pytest.approx(math.exp(-0.5))
    assert raw[0].real == pytest.approx(0.60653, abs=1e-5)
    psi, deficit = coherent_state(1.0, 30)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-15)
    assert deficit < 1e-12
    _, deficit = coherent_state(2.0, 5)
    assert deficit > 0.1


# -- properties ------------------------------------------------------------------


def test_trace_norm_contracts_under_partial_trace(rng):
    for k in range(1000):
        ds, de = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        x = random_hermitian(ds * de, rng)
        assert trace_norm(partial_trace_env(x, ds, de)) <= trace_norm(x) + 1e-12


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    x, u = random_hermitian(n, rng), random_unitary(n, rng)
    assert trace_norm(u @ x @ u.conj().T) == pytest.approx(trace_norm(x), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_multiplicativity(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(int(rng.integers(1, 5)), rng)
    b = random_hermitian(int(rng.integers(1, 5)), rng)
    assert trace_norm(kron(a, b)) == pytest.approx(trace_norm(a) * trace_norm(b), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_triangle_inequalities(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    a, b = random_hermitian(n, rng), random_hermitian(n, rng)
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12
    assert abs(trace_norm(a) - trace_norm(b)) <= trace_norm(a - b) + 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(min_value=0.0, max_value=1.0))
def test_helstrom_norm_range(seed, p1):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    w = WeightPair(p1)
    norm = trace_norm(helstrom(random_density(n, rng), random_density(n, rng), w))
    assert w.bias - 1e-12 <= norm <= 1 + 1e-12
