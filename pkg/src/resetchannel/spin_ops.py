"""Elementary qubit-chain operators and states: Pauli algebra, projectors,
partial trace, and canonical initial states.

Conventions, fixed package-wide:

* site 0 is the most significant bit of a computational-basis index,
* |0> is the sigma^z = +1 eigenstate,
* bath sites are the last ``n_b`` sites of the chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY_2 = np.eye(2, dtype=complex)
PROJ_0 = np.diag([1.0, 0.0]).astype(complex)

NORM_ATOL = 1e-12


class BasisMismatchError(ValueError):
    """Operands carry different basis tags."""


def qubit_basis(n_sites: int) -> str:
    return f"qubits:{n_sites}"


def fibonacci_basis_tag(n_sites: int) -> str:
    return f"fib:{n_sites}"


@dataclass(frozen=True)
class ChainLayout:
    """System/bath split of a chain: ``n_s`` system qubits followed by
    ``n_b`` bath qubits.

    With ``constrained=True`` dimensions refer to the Rydberg-blockade
    (Fibonacci) subspace instead of the full qubit space.
    """

    n_s: int
    n_b: int
    constrained: bool = False

    def __post_init__(self):
        if self.n_s < 1 or self.n_b < 1:
            raise ValueError(f"layout needs n_s >= 1 and n_b >= 1, got ({self.n_s}, {self.n_b})")

    @property
    def n_h(self) -> int:
        return self.n_s + self.n_b

    @property
    def bath_block(self) -> range:
        """Bath sites: the last ``n_b`` sites of the chain."""
        return range(self.n_s, self.n_h)

    @property
    def dim_s(self) -> int:
        return _fibonacci(self.n_s + 2) if self.constrained else 2 ** self.n_s

    @property
    def dim_b(self) -> int:
        return _fibonacci(self.n_b + 2) if self.constrained else 2 ** self.n_b

    @property
    def dim_joint(self) -> int:
        return _fibonacci(self.n_h + 2) if self.constrained else 2 ** self.n_h

    @property
    def basis_system(self) -> str:
        return fibonacci_basis_tag(self.n_s) if self.constrained else qubit_basis(self.n_s)

    @property
    def basis_joint(self) -> str:
        return fibonacci_basis_tag(self.n_h) if self.constrained else qubit_basis(self.n_h)


def _fibonacci(k: int) -> int:
    a, b = 1, 1
    for _ in range(k - 2):
        a, b = b, a + b
    return b


@dataclass
class DenseOperator:
    """Complex square matrix on a labeled basis."""

    mat: np.ndarray
    basis: str

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        if self.mat.ndim != 2 or self.mat.shape[0] != self.mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {self.mat.shape}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass
class PureState:
    """Normalized state vector on a labeled basis."""

    vec: np.ndarray
    basis: str

    def __post_init__(self):
        self.vec = np.asarray(self.vec, dtype=complex).ravel()
        nrm = np.linalg.norm(self.vec)
        if abs(nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: |psi| = {nrm}")

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def density_matrix(self) -> DenseOperator:
        return DenseOperator(np.outer(self.vec, self.vec.conj()), self.basis)


def _embed_single_site(op2: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} sites")
    left = np.eye(2 ** site, dtype=complex)
    right = np.eye(2 ** (n_sites - site - 1), dtype=complex)
    return np.kron(np.kron(left, op2), right)


def pauli_on_site(axis: str, site: int, n_sites: int) -> DenseOperator:
    """Pauli operator on one site of an ``n_sites`` qubit chain."""
    if axis not in PAULI:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    return DenseOperator(_embed_single_site(PAULI[axis], site, n_sites), qubit_basis(n_sites))


def projector0_on_site(site: int, n_sites: int) -> DenseOperator:
    """Projector onto |0> at one site, identity elsewhere."""
    return DenseOperator(_embed_single_site(PROJ_0, site, n_sites), qubit_basis(n_sites))


def product_state(bits: str) -> PureState:
    """Computational basis state from a bit-string, site 0 first."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"bits must be a non-empty string over 0/1, got {bits!r}")
    n = len(bits)
    vec = np.zeros(2 ** n, dtype=complex)
    vec[int(bits, 2)] = 1.0
    return PureState(vec, qubit_basis(n))


def ghz_state(n_sites: int) -> PureState:
    """(|00...0> + |11...1>)/sqrt(2)."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    vec = np.zeros(2 ** n_sites, dtype=complex)
    vec[0] = vec[-1] = 1 / np.sqrt(2)
    return PureState(vec, qubit_basis(n_sites))


def neel_state(n_sites: int) -> PureState:
    """Alternating |0101...>."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    return product_state("".join("01"[m % 2] for m in range(n_sites)))


def partial_trace(op: DenseOperator, keep: list[int] | tuple[int, ...], n_sites: int) -> DenseOperator:
    """Trace out all qubits not in ``keep``; preserves the total trace."""
    if op.basis != qubit_basis(n_sites):
        raise BasisMismatchError(f"expected {qubit_basis(n_sites)}, got {op.basis}")
    keep = sorted(keep)
    if any(not 0 <= s < n_sites for s in keep):
        raise ValueError(f"keep sites {keep} out of range for {n_sites} sites")
    traced = [s for s in range(n_sites) if s not in keep]
    tensor = op.mat.reshape([2] * (2 * n_sites))
    for offset, s in enumerate(traced):
        ax = s - offset  # axes shift as earlier sites are traced out
        tensor = np.trace(tensor, axis1=ax, axis2=ax + n_sites - offset)
    dk = 2 ** len(keep)
    return DenseOperator(tensor.reshape(dk, dk), qubit_basis(len(keep)))


def total_sz(n_sites: int) -> DenseOperator:
    """Diagonal total magnetization sum_m sigma_m^z."""
    idx = np.arange(2 ** n_sites)
    popcount = np.array([bin(i).count("1") for i in idx])
    return DenseOperator(np.diag(n_sites - 2.0 * popcount).astype(complex), qubit_basis(n_sites))


def sz_of_index(index: int, n_sites: int) -> int:
    """Magnetization eigenvalue of one computational basis state."""
    return n_sites - 2 * bin(index).count("1")
