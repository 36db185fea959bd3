import numpy as np
import pytest

from resetchannel.hamiltonians import (
    AahParams,
    ConstrainedBasis,
    PxpParams,
    XxParams,
    XxxParams,
    build_aah,
    build_pxp,
    build_xx,
    build_xxx,
    hermitian_eigensystem,
    joint_constrained_maps,
)
from resetchannel.spin_ops import DenseOperator, projector0_on_site, total_sz

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def comm_norm(a, b):
    return np.linalg.norm(a @ b - b @ a)


class TestAah:
    def test_two_site_hopping_block(self):
        h = build_aah(AahParams(j2=1.0), 2).mat
        expected = np.zeros((4, 4))
        expected[1, 2] = expected[2, 1] = 2.0  # XX + YY on |01>,|10>
        assert np.allclose(h, expected)

    def test_onsite_coefficient_at_first_site(self):
        h = build_aah(AahParams(jz=1.0), 2).mat
        # site-0 contribution is jz*cos(0): average over the site-1 value
        assert abs((h[0, 0] + h[1, 1]) / 2 - 1.0) < 1e-12

    def test_hermitian_and_real(self):
        h = build_aah(AahParams(jzz=0.3, jz=0.7), 5).mat
        assert np.linalg.norm(h - h.conj().T) < 1e-12 * np.linalg.norm(h)
        assert np.linalg.norm(h.imag) < 1e-12

    def test_conserves_total_magnetization(self):
        h = build_aah(AahParams(jzz=0.1, jz=0.1), 6).mat
        assert comm_norm(h, total_sz(6).mat) < 1e-12

    def test_too_short_chain(self):
        with pytest.raises(ValueError):
            build_aah(AahParams(), 1)


class TestXxx:
    def test_reduces_to_aah(self):
        params = XxxParams(AahParams(jzz=0.2, jz=0.4), 0.0)
        assert np.array_equal(build_xxx(params, 4).mat, build_aah(params.aah, 4).mat)

    def test_three_site_term_matches_kron_oracle(self):
        h = build_xxx(XxxParams(AahParams(j2=1e-30), 1.0), 3).mat
        expected = np.kron(np.kron(SX, SX), SX)
        assert np.allclose(h, expected, atol=1e-12)

    def test_breaks_magnetization_conservation(self):
        h = build_xxx(XxxParams(AahParams(jzz=0.1, jz=0.1), 2.0), 6).mat
        assert comm_norm(h, total_sz(6).mat) > 0.1


class TestXx:
    def test_symmetric_point_equals_aah(self):
        h_xx = build_xx(XxParams(jxx=1.0, jyy=1.0, jzz=0.3, jz=0.2), 4).mat
        h_aah = build_aah(AahParams(jzz=0.3, jz=0.2), 4).mat
        assert np.array_equal(h_xx, h_aah)

    def test_symmetric_point_conserves_sz(self):
        h = build_xx(XxParams(jxx=0.7, jyy=0.7, jzz=0.1, jz=0.1), 4).mat
        assert comm_norm(h, total_sz(4).mat) < 1e-12

    def test_anisotropy_breaks_sz(self):
        h = build_xx(XxParams(jxx=0.8, jyy=1.0, jzz=0.1, jz=0.1), 4).mat
        assert comm_norm(h, total_sz(4).mat) > 0.1

    def test_two_site_matrix_vs_kron_oracle(self):
        p = XxParams(jxx=0.8, jyy=1.0, jzz=0.3, jz=0.5)
        expected = (0.8 * np.kron(SX, SX) + 1.0 * np.kron(SY, SY) + 0.3 * np.kron(SZ, SZ)
                    + 0.5 * np.cos(0) * np.kron(SZ, np.eye(2))
                    + 0.5 * np.cos(p.omega) * np.kron(np.eye(2), SZ))
        assert np.allclose(build_xx(p, 2).mat, expected)


class TestConstrainedBasis:
    @pytest.mark.parametrize("n,dim", [(1, 2), (2, 3), (4, 8), (6, 21), (10, 144)])
    def test_fibonacci_dimension(self, n, dim):
        assert ConstrainedBasis(n).dim == dim

    def test_states_sorted_and_blockaded(self):
        basis = ConstrainedBasis(5)
        assert basis.states == sorted(basis.states)
        assert all((b & (b >> 1)) == 0 for b in basis.states)

    def test_joint_maps_respect_boundary(self):
        sys_b, bath_b, joint_b, joint_index = joint_constrained_maps(2, 2)
        # system ...1 with bath 1... violates the blockade at the cut
        si = sys_b.index[0b01]
        bi = bath_b.index[0b10]
        assert joint_index(si, bi) is None
        assert joint_index(sys_b.index[0b10], bi) is not None
        covered = sum(joint_index(s, b) is not None
                      for s in range(sys_b.dim) for b in range(bath_b.dim))
        assert covered == joint_b.dim


class TestPxp:
    def test_two_site_constrained_hand_enumeration(self):
        h = build_pxp(PxpParams(omega_rabi=2.0), 2).mat
        # basis order {00, 01, 10}; flips couple 00<->01 and 00<->10
        expected = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=complex)
        assert np.allclose(h, expected)

    def test_full_basis_commutes_with_blockade_projectors(self):
        n = 4
        h = build_pxp(PxpParams(), n, basis="full").mat
        for m in range(n - 1):
            blockade = projector0_on_site(m, n).mat + (
                np.eye(2 ** n) - projector0_on_site(m, n).mat
            ) @ projector0_on_site(m + 1, n).mat
            # P0_m + P1_m P0_{m+1} projects onto no-double-excitation at the bond
            assert comm_norm(h, blockade) < 1e-12

    def test_constrained_equals_projected_full(self):
        n = 5
        basis = ConstrainedBasis(n)
        h_full = build_pxp(PxpParams(omega_rabi=1.3), n, basis="full").mat
        h_proj = h_full[np.ix_(basis.states, basis.states)]
        assert np.allclose(build_pxp(PxpParams(omega_rabi=1.3), n).mat, h_proj)

    def test_full_basis_preserves_constrained_subspace(self):
        n = 4
        basis = ConstrainedBasis(n)
        h_full = build_pxp(PxpParams(), n, basis="full").mat
        outside = [b for b in range(2 ** n) if b not in basis.index]
        assert np.allclose(h_full[np.ix_(outside, basis.states)], 0.0)

    def test_bad_basis_name(self):
        with pytest.raises(ValueError):
            build_pxp(PxpParams(), 3, basis="momentum")


class TestEigensystem:
    def test_diagonal_input(self):
        vals, vecs = hermitian_eigensystem(DenseOperator(np.diag([1.0, 2.0, 3.0]), "qubits:0"))
        assert np.allclose(vals, [1, 2, 3])
        assert np.allclose(np.abs(vecs), np.eye(3))

    def test_pauli_x(self):
        vals, _ = hermitian_eigensystem(DenseOperator(SX, "qubits:1"))
        assert np.allclose(vals, [-1, 1])

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
        h = (a + a.conj().T) / 2
        vals, vecs = hermitian_eigensystem(DenseOperator(h, "qubits:5"))
        recon = (vecs * vals) @ vecs.conj().T
        assert np.linalg.norm(recon - h) < 1e-9 * np.linalg.norm(h)
        assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(32)) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            hermitian_eigensystem(DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex), "x"))


class TestParamValidation:
    def test_j2_must_be_positive(self):
        with pytest.raises(ValueError):
            AahParams(j2=0.0)

    def test_rabi_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            PxpParams(omega_rabi=-1.0)
