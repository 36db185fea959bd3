"""Shared fixtures: preset-parameter channels at desk scale and small random
state helpers."""

import numpy as np
import pytest
from scipy.stats import unitary_group

from resetchannel import (
    AahParams,
    ChainLayout,
    KrausSet,
    XxxParams,
    build_aah,
    build_xxx,
    kraus_from_unitary,
    propagate,
)
from resetchannel.channel import reversal_form, superoperator_matrix
from resetchannel.spectra import full_spectrum
from resetchannel.spin_ops import DenseOperator


def make_channel(n_s, n_b, t, jzz=0.0, jz=0.0, jxxx=0.0):
    layout = ChainLayout(n_s, n_b)
    params = XxxParams(AahParams(jzz=jzz, jz=jz), jxxx)
    h = build_xxx(params, layout.n_h) if layout.n_h >= 3 else build_aah(params.aah, layout.n_h)
    return kraus_from_unitary(propagate(h, t), layout)


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_product_density(rng, n_sites):
    """Random Bloch-sphere product state as a density matrix."""
    vec = np.ones(1, dtype=complex)
    for _ in range(n_sites):
        theta = rng.uniform(0, np.pi)
        phi = rng.uniform(0, 2 * np.pi)
        vec = np.kron(vec, np.array([np.cos(theta / 2),
                                     np.exp(1j * phi) * np.sin(theta / 2)]))
    return np.outer(vec, vec.conj())


def haar_channel(n_s, n_b, seed):
    layout = ChainLayout(n_s, n_b)
    u = unitary_group.rvs(layout.dim_joint, random_state=np.random.default_rng(seed))
    ds, db = layout.dim_s, layout.dim_b
    u4 = u.reshape(ds, db, ds, db)
    ops = [np.ascontiguousarray(u4[:, m, :, 0]) for m in range(db)]
    return KrausSet(ops, layout, 0, {"seed": seed})


@pytest.fixture(scope="session")
def ergodic_channel():
    """Criterion-3 parameters: symmetry-constrained ergodic regime."""
    return make_channel(3, 4, 100.0, jzz=0.3, jz=0.1)


@pytest.fixture(scope="session")
def chaotic_channel():
    """Fig-2 parameters at desk scale: strongly chaotic regime."""
    return make_channel(4, 4, 100.0, jzz=0.1, jz=0.1, jxxx=2.0)


@pytest.fixture(scope="session")
def mbl_channel():
    """Criterion-9 parameters: localized regime."""
    return make_channel(3, 5, 200.0, jzz=0.0, jz=5.0)


@pytest.fixture(scope="session")
def small_channel():
    """Fast 2+2 channel for oracle-style unit tests."""
    return make_channel(2, 2, 10.0, jzz=0.2, jz=0.3, jxxx=0.4)


@pytest.fixture(scope="session")
def chaotic_reversal_spectrum(chaotic_channel):
    return full_spectrum(reversal_form(superoperator_matrix(chaotic_channel)))


@pytest.fixture(scope="session")
def mbl_reversal_spectrum(mbl_channel):
    return full_spectrum(reversal_form(superoperator_matrix(mbl_channel)))


@pytest.fixture(scope="session")
def ergodic_reversal_spectrum(ergodic_channel):
    return full_spectrum(reversal_form(superoperator_matrix(ergodic_channel)))


def swap_unitary():
    """Two-qubit SWAP as a DenseOperator on the 1+1 joint chain."""
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = u[3, 3] = 1.0
    u[1, 2] = u[2, 1] = 1.0
    return DenseOperator(u, "qubits:2")
