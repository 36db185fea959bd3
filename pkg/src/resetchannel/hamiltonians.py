"""Dense spin-chain Hamiltonians: quasiperiodic XY chain, its chaos-driving
three-body extension, the anisotropic variant, and the blockade-constrained
PXP model.

All couplings are dimensionless ratios to the XY scale (or to the Rabi scale
for PXP); hbar = 1. Chains are open.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spin_ops import (
    DenseOperator,
    PAULI,
    _embed_single_site,
    fibonacci_basis_tag,
    qubit_basis,
)

GOLDEN_OMEGA = 2 * np.pi * (np.sqrt(5) - 1) / 2  # inverse golden ratio modulation


@dataclass(frozen=True)
class AahParams:
    """Quasiperiodic XY chain couplings: XY scale ``j2``, Ising ``jzz``,
    on-site cosine field amplitude ``jz`` with frequency ``omega``."""

    j2: float = 1.0
    jzz: float = 0.0
    jz: float = 0.0
    omega: float = GOLDEN_OMEGA

    def __post_init__(self):
        if self.j2 <= 0:
            raise ValueError("j2 sets the energy unit and must be positive")


@dataclass(frozen=True)
class XxxParams:
    """AAH chain plus a three-site XXX coupling that breaks U(1)."""

    aah: AahParams = field(default_factory=AahParams)
    jxxx: float = 0.0


@dataclass(frozen=True)
class XxParams:
    """Anisotropic chain: unequal XX/YY couplings break U(1)."""

    jxx: float = 1.0
    jyy: float = 1.0
    jzz: float = 0.0
    jz: float = 0.0
    omega: float = GOLDEN_OMEGA


@dataclass(frozen=True)
class PxpParams:
    """Blockaded spin-flip model; ``omega_rabi`` sets the energy scale."""

    omega_rabi: float = 1.0

    def __post_init__(self):
        if self.omega_rabi <= 0:
            raise ValueError("omega_rabi must be positive")


def _two_site_terms(n_sites: int, jxx: float, jyy: float, jzz: float) -> np.ndarray:
    dim = 2 ** n_sites
    h = np.zeros((dim, dim), dtype=complex)
    for m in range(n_sites - 1):
        for coeff, axis in ((jxx, "x"), (jyy, "y"), (jzz, "z")):
            if coeff != 0.0:
                a = _embed_single_site(PAULI[axis], m, n_sites)
                b = _embed_single_site(PAULI[axis], m + 1, n_sites)
                h += coeff * (a @ b)
    return h


def _field_terms(n_sites: int, jz: float, omega: float) -> np.ndarray:
    diag = np.zeros(2 ** n_sites)
    for m in range(n_sites):
        z = _embed_single_site(PAULI["z"], m, n_sites)
        diag += jz * np.cos(omega * m) * np.real(np.diag(z))
    return np.diag(diag).astype(complex)


def build_aah(params: AahParams, n_sites: int) -> DenseOperator:
    """Quasiperiodic XY chain; commutes with total sigma^z."""
    if n_sites < 2:
        raise ValueError("chain needs at least 2 sites")
    h = _two_site_terms(n_sites, params.j2, params.j2, params.jzz)
    h += _field_terms(n_sites, params.jz, params.omega)
    return DenseOperator(h, qubit_basis(n_sites))


def build_xxx(params: XxxParams, n_sites: int) -> DenseOperator:
    """AAH chain plus the three-site XXX term on interior sites."""
    if n_sites < 3:
        raise ValueError("three-site coupling needs at least 3 sites")
    h = build_aah(params.aah, n_sites).mat
    if params.jxxx != 0.0:
        xs = [_embed_single_site(PAULI["x"], m, n_sites) for m in range(n_sites)]
        for m in range(1, n_sites - 1):
            h += params.jxxx * (xs[m - 1] @ xs[m] @ xs[m + 1])
    return DenseOperator(h, qubit_basis(n_sites))


def build_xx(params: XxParams, n_sites: int) -> DenseOperator:
    """Anisotropic chain; reduces to the AAH chain at jxx == jyy == j2."""
    if n_sites < 2:
        raise ValueError("chain needs at least 2 sites")
    h = _two_site_terms(n_sites, params.jxx, params.jyy, params.jzz)
    h += _field_terms(n_sites, params.jz, params.omega)
    return DenseOperator(h, qubit_basis(n_sites))


class ConstrainedBasis:
    """Rydberg-blockade subspace of an ``n``-site chain: bit-strings with no
    two adjacent 1s, sorted; dimension is the Fibonacci number F(n+2)."""

    def __init__(self, n_sites: int):
        if n_sites < 1:
            raise ValueError("need at least one site")
        self.n_sites = n_sites
        self.states: list[int] = [b for b in range(1 << n_sites) if (b & (b >> 1)) == 0]
        self.index: dict[int, int] = {b: i for i, b in enumerate(self.states)}
        self.tag = fibonacci_basis_tag(n_sites)

    @property
    def dim(self) -> int:
        return len(self.states)

    def embed_vector(self, amplitudes: np.ndarray) -> np.ndarray:
        """Scatter constrained amplitudes into the full 2^n qubit space."""
        full = np.zeros(2 ** self.n_sites, dtype=complex)
        full[self.states] = amplitudes
        return full


def joint_constrained_maps(n_s: int, n_b: int):
    """Factorization helpers for a blockaded chain split into a system block
    (first ``n_s`` sites) and bath block (last ``n_b`` sites).

    Returns (system basis, bath basis, joint basis, joint_index) where
    joint_index(si, bi) gives the joint constrained index or None when the
    boundary pair would violate the blockade.
    """
    sys_basis = ConstrainedBasis(n_s)
    bath_basis = ConstrainedBasis(n_b)
    joint_basis = ConstrainedBasis(n_s + n_b)

    def joint_index(si: int, bi: int):
        joint_bits = (sys_basis.states[si] << n_b) | bath_basis.states[bi]
        return joint_basis.index.get(joint_bits)

    return sys_basis, bath_basis, joint_basis, joint_index


def build_pxp(params: PxpParams, n_sites: int, basis: str = "constrained") -> DenseOperator:
    """Blockaded spin-flip Hamiltonian with open boundaries (edge projectors
    replaced by identity).

    ``basis="full"`` builds the projector-dressed operator on the full qubit
    space; ``basis="constrained"`` builds its restriction to the blockade
    subspace directly from bit operations.
    """
    if n_sites < 2:
        raise ValueError("chain needs at least 2 sites")
    half = params.omega_rabi / 2
    if basis == "full":
        dim = 2 ** n_sites
        h = np.zeros((dim, dim), dtype=complex)
        for m in range(n_sites):
            term = _embed_single_site(PAULI["x"], m, n_sites)
            if m > 0:
                term = _proj0(m - 1, n_sites) @ term
            if m < n_sites - 1:
                term = term @ _proj0(m + 1, n_sites)
            h += half * term
        return DenseOperator(h, qubit_basis(n_sites))
    if basis == "constrained":
        cb = ConstrainedBasis(n_sites)
        h = np.zeros((cb.dim, cb.dim), dtype=complex)
        for b in cb.states:
            for m in range(n_sites):
                pos = n_sites - 1 - m
                left_clear = m == 0 or not (b >> (pos + 1)) & 1
                right_clear = m == n_sites - 1 or not (b >> (pos - 1)) & 1
                if left_clear and right_clear:
                    h[cb.index[b ^ (1 << pos)], cb.index[b]] += half
        return DenseOperator(h, cb.tag)
    raise ValueError(f"basis must be 'full' or 'constrained', got {basis!r}")


def _proj0(site: int, n_sites: int) -> np.ndarray:
    return _embed_single_site(np.diag([1.0, 0.0]).astype(complex), site, n_sites)


def hermitian_eigensystem(h: DenseOperator, tol: float = 1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
    operator; rejects inputs that are not Hermitian within ``tol``."""
    scale = max(np.linalg.norm(h.mat), 1.0)
    if np.linalg.norm(h.mat - h.mat.conj().T) > tol * scale:
        raise ValueError("operator is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(h.mat)
    return vals, vecs
