import numpy as np
import pytest

from resetchannel.spin_ops import (
    BasisMismatchError,
    ChainLayout,
    DenseOperator,
    ghz_state,
    neel_state,
    partial_trace,
    pauli_on_site,
    product_state,
    projector0_on_site,
    sz_of_index,
    total_sz,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_chain(ops):
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


class TestPauli:
    def test_single_qubit_x(self):
        assert np.array_equal(pauli_on_site("x", 0, 1).mat, SX)

    def test_z_on_msb_site(self):
        assert np.allclose(pauli_on_site("z", 0, 2).mat, np.diag([1, 1, -1, -1]))

    def test_matches_kron_oracle(self):
        eye = np.eye(2)
        expected = kron_chain([eye, SY])
        assert np.allclose(pauli_on_site("y", 1, 2).mat, expected)
        expected = kron_chain([eye, SX, eye, eye])
        assert np.allclose(pauli_on_site("x", 1, 4).mat, expected)

    def test_unitary_hermitian_involution(self):
        for axis in "xyz":
            op = pauli_on_site(axis, 2, 3).mat
            assert np.allclose(op @ op, np.eye(8))
            assert np.allclose(op, op.conj().T)

    def test_distinct_sites_commute(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            s1, s2 = rng.choice(4, size=2, replace=False)
            a = pauli_on_site(rng.choice(list("xyz")), s1, 4).mat
            b = pauli_on_site(rng.choice(list("xyz")), s2, 4).mat
            assert np.linalg.norm(a @ b - b @ a) < 1e-12

    def test_site_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            pauli_on_site("x", 3, 3)

    def test_bad_axis(self):
        with pytest.raises(ValueError, match="axis"):
            pauli_on_site("w", 0, 2)


class TestProjector:
    def test_single_site(self):
        assert np.allclose(projector0_on_site(0, 1).mat, np.diag([1, 0]))

    def test_idempotent_hermitian_half_rank(self):
        p = projector0_on_site(2, 4).mat
        assert np.allclose(p @ p, p)
        assert np.allclose(p, p.conj().T)
        assert np.linalg.matrix_rank(p) == 8

    def test_completeness_with_z_complement(self):
        p = projector0_on_site(1, 3).mat
        z = pauli_on_site("z", 1, 3).mat
        complement = (np.eye(8) - z) / 2
        assert np.allclose(p + complement, np.eye(8))


class TestStates:
    def test_product_state_is_basis_vector(self):
        psi = product_state("00")
        assert np.array_equal(psi.vec, [1, 0, 0, 0])
        assert product_state("10").vec[2] == 1.0

    def test_ghz(self):
        psi = ghz_state(2)
        assert np.allclose(psi.vec, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_neel(self):
        assert neel_state(3).vec[int("010", 2)] == 1.0

    def test_unit_norm(self):
        for psi in (product_state("0110"), ghz_state(3), neel_state(5)):
            assert abs(np.linalg.norm(psi.vec) - 1.0) < 1e-12

    def test_empty_bits_rejected(self):
        with pytest.raises(ValueError):
            product_state("")


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(1)
        rho_s = np.diag([0.25, 0.75]).astype(complex)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho_b = a @ a.conj().T
        joint = DenseOperator(np.kron(rho_s, rho_b), "qubits:2")
        reduced = partial_trace(joint, [0], 2)
        assert np.allclose(reduced.mat, rho_s * np.trace(rho_b))

    def test_bell_pair_reduces_to_mixed(self):
        rho = ghz_state(2).density_matrix()
        assert np.allclose(partial_trace(rho, [0], 2).mat, np.eye(2) / 2)

    def test_matches_index_summation_oracle(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        # keep sites {0,1}: rho'[ab, cd] = sum_k rho[abk, cdk]
        expected = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                for k in range(2):
                    expected[i, j] += rho[2 * i + k, 2 * j + k]
        got = partial_trace(DenseOperator(rho, "qubits:3"), [0, 1], 3)
        assert np.allclose(got.mat, expected)
        assert abs(np.trace(got.mat) - np.trace(rho)) < 1e-12

    def test_trace_preserved_nonadjacent_keep(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        got = partial_trace(DenseOperator(rho, "qubits:4"), [0, 2], 4)
        assert abs(np.trace(got.mat) - 1.0) < 1e-12

    def test_basis_mismatch_rejected(self):
        op = DenseOperator(np.eye(4), "qubits:2")
        with pytest.raises(BasisMismatchError):
            partial_trace(op, [0], 3)


class TestTotalSz:
    def test_small_chains(self):
        assert np.allclose(total_sz(1).mat, np.diag([1, -1]))
        assert np.allclose(total_sz(2).mat, np.diag([2, 0, 0, -2]))

    def test_eigenvalue_range_and_parity(self):
        vals = np.real(np.diag(total_sz(5).mat))
        assert vals.max() == 5 and vals.min() == -5
        assert np.all((vals - 5) % 2 == 0)

    def test_sz_of_index(self):
        assert sz_of_index(0, 3) == 3
        assert sz_of_index(int("101", 2), 3) == -1


class TestLayout:
    def test_dimensions(self):
        layout = ChainLayout(3, 4)
        assert layout.n_h == 7
        assert (layout.dim_s, layout.dim_b, layout.dim_joint) == (8, 16, 128)
        assert list(layout.bath_block) == [3, 4, 5, 6]

    def test_constrained_dimensions_are_fibonacci(self):
        layout = ChainLayout(5, 5, constrained=True)
        assert (layout.dim_s, layout.dim_b, layout.dim_joint) == (13, 13, 144)

    def test_invalid_layout(self):
        with pytest.raises(ValueError):
            ChainLayout(0, 2)
