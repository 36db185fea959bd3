import numpy as np
import pytest
import scipy.linalg

from conftest import make_channel, random_density_matrix, swap_unitary
from resetchannel.channel import (
    KrausSet,
    Propagator,
    apply_channel,
    extend_with_ancilla,
    kraus_from_unitary,
    magnetization_violation,
    propagate,
    reversal_form,
    superoperator_matrix,
    transpose_swap,
    unvec,
    vec,
)
from resetchannel.hamiltonians import PxpParams, build_pxp
from resetchannel.spin_ops import ChainLayout, DenseOperator, pauli_on_site


class TestPropagate:
    def test_zero_hamiltonian(self):
        h = DenseOperator(np.zeros((4, 4)), "qubits:2")
        assert np.allclose(propagate(h, 3.0).u.mat, np.eye(4))

    def test_pauli_z_quarter_period(self):
        prop = propagate(pauli_on_site("z", 0, 1), np.pi / 2)
        assert np.allclose(prop.u.mat, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]))

    def test_matches_scaling_and_squaring_oracle(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        h = (a + a.conj().T) / 2
        got = propagate(DenseOperator(h, "qubits:4"), 1.0).u.mat
        expected = scipy.linalg.expm(-1j * h)
        assert np.linalg.norm(got - expected) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            propagate(DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex), "qubits:1"), 1.0)

    def test_propagator_validates_unitarity(self):
        with pytest.raises(ValueError, match="unitary"):
            Propagator(DenseOperator(np.diag([1.0, 0.5]), "qubits:1"), 1.0)


class TestKrausExtraction:
    def test_identity_unitary(self):
        layout = ChainLayout(1, 1)
        prop = Propagator(DenseOperator(np.eye(4), "qubits:2"), 0.0)
        kraus = kraus_from_unitary(prop, layout)
        assert np.allclose(kraus.ops[0], np.eye(2))
        assert np.allclose(kraus.ops[1], 0.0)

    def test_swap_gives_reset_channel(self):
        layout = ChainLayout(1, 1)
        kraus = kraus_from_unitary(Propagator(swap_unitary(), 1.0), layout)
        for m in range(2):
            expected = np.zeros((2, 2))
            expected[0, m] = 1.0  # |0><m|
            assert np.allclose(kraus.ops[m], expected)

    def test_chaotic_preset_completeness(self, chaotic_channel):
        assert chaotic_channel.completeness_residual() < 1e-9

    def test_constrained_completeness(self):
        layout = ChainLayout(3, 3, constrained=True)
        h = build_pxp(PxpParams(), 6)
        kraus = kraus_from_unitary(propagate(h, 7.0), layout)
        assert kraus.completeness_residual() < 1e-9
        assert len(kraus.ops) == layout.dim_b

    def test_completeness_violation_raises(self):
        layout = ChainLayout(1, 1)
        bad = KrausSet([np.eye(2) * 0.5], layout)
        assert bad.completeness_residual() > 0.5
        prop = Propagator(DenseOperator(np.eye(4), "qubits:2"), 0.0)
        with pytest.raises(ValueError):
            kraus_from_unitary(prop, ChainLayout(2, 2))  # basis mismatch

    def test_configurable_reset_index(self):
        layout = ChainLayout(1, 1)
        kraus = kraus_from_unitary(Propagator(swap_unitary(), 1.0), layout, reset_index=1)
        for m in range(2):
            expected = np.zeros((2, 2))
            expected[1, m] = 1.0  # |1><m|: channel resets the system to |1>
            assert np.allclose(kraus.ops[m], expected)
        assert kraus.completeness_residual() < 1e-12

    def test_bad_reset_index(self):
        layout = ChainLayout(1, 1)
        prop = Propagator(DenseOperator(np.eye(4), "qubits:2"), 0.0)
        with pytest.raises(ValueError, match="reset index"):
            kraus_from_unitary(prop, layout, reset_index=5)


class TestApplyChannel:
    def test_identity_kraus(self):
        kraus = KrausSet([np.eye(2)], ChainLayout(1, 1))
        rho = random_density_matrix(np.random.default_rng(0), 2)
        assert np.allclose(apply_channel(kraus, rho), rho)

    def test_swap_resets_any_state(self):
        layout = ChainLayout(1, 1)
        kraus = kraus_from_unitary(Propagator(swap_unitary(), 1.0), layout)
        rho = random_density_matrix(np.random.default_rng(1), 2)
        out = apply_channel(kraus, rho)
        assert np.allclose(out, np.diag([1.0, 0.0]))

    def test_agrees_with_superoperator_action(self, small_channel):
        rng = np.random.default_rng(2)
        sop = superoperator_matrix(small_channel)
        for _ in range(20):
            rho = random_density_matrix(rng, small_channel.dim)
            direct = apply_channel(small_channel, rho)
            via_matrix = unvec(sop.mat @ vec(rho))
            assert np.max(np.abs(direct - via_matrix)) < 1e-12

    def test_output_is_state(self, small_channel):
        rho = random_density_matrix(np.random.default_rng(3), small_channel.dim)
        out = apply_channel(small_channel, rho)
        assert np.linalg.norm(out - out.conj().T) < 1e-10
        assert abs(np.trace(out) - 1.0) < 1e-10
        assert np.linalg.eigvalsh(out).min() > -1e-8

    def test_dimension_mismatch(self, small_channel):
        with pytest.raises(ValueError, match="shape"):
            apply_channel(small_channel, np.eye(3))


class TestSuperoperator:
    def test_identity_channel(self):
        sop = superoperator_matrix(KrausSet([np.eye(2)], ChainLayout(1, 1)))
        assert np.allclose(sop.mat, np.eye(4))

    def test_swap_reset_eigenvalues(self):
        layout = ChainLayout(1, 1)
        kraus = kraus_from_unitary(Propagator(swap_unitary(), 1.0), layout)
        lam = np.sort_complex(np.linalg.eigvals(superoperator_matrix(kraus).mat))
        assert np.allclose(lam, [0, 0, 0, 1], atol=1e-12)

    def test_spectral_radius_and_fixed_point(self, small_channel):
        lam = np.linalg.eigvals(superoperator_matrix(small_channel).mat)
        assert np.max(np.abs(lam)) <= 1 + 1e-8
        assert np.min(np.abs(lam - 1.0)) < 1e-8

    def test_conjugate_closure(self, small_channel):
        lam = np.linalg.eigvals(superoperator_matrix(small_channel).mat)
        for z in lam:
            assert np.min(np.abs(lam - np.conj(z))) < 1e-8

    def test_reversal_form_same_magnitude_fixed_point(self, small_channel):
        sop = reversal_form(superoperator_matrix(small_channel))
        lam = np.linalg.eigvals(sop.mat)
        assert np.max(np.abs(lam)) <= 1 + 1e-8
        assert np.min(np.abs(lam - 1.0)) < 1e-8
        assert sop.form == "reversal"

    def test_reversal_rejects_double_application(self, small_channel):
        sop = reversal_form(superoperator_matrix(small_channel))
        with pytest.raises(ValueError):
            reversal_form(sop)

    def test_transpose_swap_involution(self):
        s = transpose_swap(3)
        assert np.allclose(s @ s, np.eye(9))
        rho = np.arange(9).reshape(3, 3)
        assert np.allclose(unvec(s @ vec(rho)), rho.T)


class TestMagnetizationStructure:
    def test_symmetric_channel_is_block_triangular(self, ergodic_channel):
        sop = superoperator_matrix(ergodic_channel)
        assert magnetization_violation(sop, ergodic_channel.layout) < 1e-10

    def test_symmetry_breaking_destroys_triangularity(self):
        kraus = make_channel(2, 2, 10.0, jzz=0.1, jz=0.1, jxxx=1.0)
        sop = superoperator_matrix(kraus)
        assert magnetization_violation(sop, kraus.layout) > 1e-3


class TestAncillaExtension:
    def test_identity_extends_to_identity(self):
        kraus = KrausSet([np.eye(2)], ChainLayout(1, 1))
        assert np.allclose(extend_with_ancilla(kraus).ops[0], np.eye(4))

    def test_completeness_preserved(self, small_channel):
        extended = extend_with_ancilla(small_channel)
        assert extended.completeness_residual() < 1e-9

    def test_product_ancilla_stays_uncorrelated(self, small_channel):
        from resetchannel.dynamics import renyi2_qmi

        extended = extend_with_ancilla(small_channel)
        d = small_channel.dim
        rho_s = random_density_matrix(np.random.default_rng(4), d)
        rho = np.kron(np.diag([1.0, 0.0]).astype(complex), rho_s)
        for _ in range(3):
            rho = apply_channel(extended, rho)
            assert abs(renyi2_qmi(rho, small_channel.layout.n_s)) < 1e-10


class TestPositivity:
    def test_outputs_positive_on_random_states(self, ergodic_channel):
        rng = np.random.default_rng(5)
        for _ in range(5):
            rho = random_density_matrix(rng, ergodic_channel.dim)
            out = apply_channel(ergodic_channel, rho)
            assert np.linalg.eigvalsh(out).min() > -1e-8

    def test_complete_positivity_via_choi(self, small_channel):
        d = small_channel.dim
        choi = np.zeros((d * d, d * d), dtype=complex)
        for k in small_channel.ops:
            v = k.reshape(-1)
            choi += np.outer(v, v.conj())
        evals = np.linalg.eigvalsh(choi)
        assert evals.min() > -1e-10
        assert abs(np.trace(choi) - d) < 1e-9  # trace preservation
