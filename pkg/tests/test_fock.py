import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qumodeprep.fock import (
    DimensionError,
    FockCutoff,
    GeneratorError,
    annihilation,
    creation,
    expm_anti_hermitian,
    is_unitary,
    kron,
    partial_trace_qubit,
)

from conftest import random_anti_hermitian, random_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def taylor_expm(g, terms=60):
    out = np.eye(g.shape[0], dtype=complex)
    term = np.eye(g.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ g / k
        out = out + term
    return out


class TestCutoff:
    def test_minimum(self):
        with pytest.raises(ValueError):
            FockCutoff(1)

    def test_int(self):
        assert int(FockCutoff(10)) == 10


class TestLadder:
    def test_two_levels(self):
        np.testing.assert_array_equal(annihilation(2), [[0, 1], [0, 0]])

    def test_three_levels(self):
        a = annihilation(FockCutoff(3))
        expected = np.zeros((3, 3))
        expected[0, 1] = 1.0
        expected[1, 2] = np.sqrt(2)
        np.testing.assert_allclose(a, expected, atol=0)

    def test_creation_is_adjoint(self):
        np.testing.assert_array_equal(creation(5), annihilation(5).conj().T)

    def test_commutator_two_levels(self):
        a = annihilation(2)
        comm = a @ a.conj().T - a.conj().T @ a
        np.testing.assert_allclose(comm, np.diag([1, -1]), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 20, 64])
    def test_truncated_commutator(self, n):
        a = annihilation(n)
        comm = a @ a.conj().T - a.conj().T @ a
        expected = np.eye(n)
        expected[n - 1, n - 1] = 1 - n
        np.testing.assert_allclose(comm, expected, atol=1e-12, rtol=0)


class TestKron:
    def test_identities(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_sigma_z(self):
        np.testing.assert_array_equal(kron(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_scalar_factor(self):
        np.testing.assert_array_equal(kron(SX, [[2]]), [[0, 2], [2, 0]])

    def test_overflow(self):
        with pytest.raises(DimensionError):
            kron(np.eye(100), np.eye(100))

    def test_associative(self, rng):
        for _ in range(20):
            a, b, c = (rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3)) for _ in range(3))
            np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


class TestExpm:
    def test_zero(self):
        np.testing.assert_allclose(expm_anti_hermitian(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        u = expm_anti_hermitian(np.diag([1j * np.pi, 0]))
        np.testing.assert_allclose(u, np.diag([-1, 1]), atol=1e-14)

    def test_pauli_x_quarter_turn(self):
        g = 1j * np.pi / 2 * SX
        expected = taylor_expm(g)
        np.testing.assert_allclose(expected, [[0, 1j], [1j, 0]], atol=1e-14)
        np.testing.assert_allclose(expm_anti_hermitian(g), expected, atol=1e-14)

    def test_matches_series(self, rng):
        g = random_anti_hermitian(rng, 6, scale=0.5)
        np.testing.assert_allclose(expm_anti_hermitian(g), taylor_expm(g), atol=1e-12)

    def test_rejects_hermitian(self):
        with pytest.raises(GeneratorError):
            expm_anti_hermitian(SX)

    def test_rejects_non_square(self):
        with pytest.raises(GeneratorError):
            expm_anti_hermitian(np.zeros((2, 3)))

    def test_unitarity_many(self, rng):
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 21))
            u = expm_anti_hermitian(random_anti_hermitian(rng, n, scale=rng.uniform(0.1, 5)))
            worst = max(worst, np.max(np.abs(u.conj().T @ u - np.eye(n))))
        assert worst <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_inverse(self, n, seed):
        g = random_anti_hermitian(np.random.default_rng(seed), n)
        prod = expm_anti_hermitian(g) @ expm_anti_hermitian(-g)
        np.testing.assert_allclose(prod, np.eye(n), atol=1e-10)


class TestPartialTrace:
    def test_product_state(self):
        psi = np.zeros(20, dtype=complex)
        psi[3] = 1.0
        rho = partial_trace_qubit(psi, FockCutoff(10))
        expected = np.zeros((10, 10))
        expected[3, 3] = 1.0
        np.testing.assert_allclose(rho, expected, atol=1e-15)

    def test_bell_like(self):
        psi = np.zeros(20, dtype=complex)
        psi[0] = psi[10 + 1] = 1 / np.sqrt(2)
        rho = partial_trace_qubit(psi, 10)
        np.testing.assert_allclose(rho, np.diag([0.5, 0.5] + [0] * 8), atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace_qubit(np.ones(7), 4)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 16), st.integers(0, 2**32 - 1))
    def test_density_matrix_properties(self, n, seed):
        psi = random_state(np.random.default_rng(seed), 2 * n)
        rho = partial_trace_qubit(psi, n)
        assert abs(np.trace(rho) - 1) <= 1e-10
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_is_unitary():
    assert is_unitary(np.eye(3))
    assert not is_unitary(2 * np.eye(3))
