"""Iterated-channel observables and eigenmode diagnostics: rescaled
eigenstate overlaps, scar identification, Renyi-2 mutual information
trajectories, imbalance, and the localization phase scan.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import KrausSet, apply_channel, extend_with_ancilla
from .hamiltonians import ConstrainedBasis, joint_constrained_maps
from .spectra import EigenMode
from .spin_ops import ChainLayout, DenseOperator, ghz_state, neel_state, partial_trace, qubit_basis

QMI_MONOTONE_ATOL = 1e-9


class UndefinedOverlapError(ValueError):
    """Eigenstate has (numerically) no weight in the bath reset sector."""


@dataclass
class OverlapRecord:
    mode_index: int
    magnitude: float
    xi: float
    reference: str


@dataclass
class TrajectoryRecord:
    n_k: int
    qmi: float
    imbalance: float
    sz: float
    purity_a: float
    purity_s: float
    purity_as: float


@dataclass
class ScarCandidates:
    indices: list[int]
    energies: np.ndarray
    entropies: np.ndarray
    bulk_median_entropy: float
    states: np.ndarray  # columns are constrained-basis eigenvectors


def bath_vacuum_projection(psi: np.ndarray, layout: ChainLayout) -> np.ndarray:
    """System-space amplitudes <s, 0_b|psi> of a joint state."""
    psi = np.asarray(psi, dtype=complex)
    if layout.constrained:
        sys_basis, _, joint_basis, joint_index = joint_constrained_maps(layout.n_s, layout.n_b)
        if psi.shape[0] != joint_basis.dim:
            raise ValueError(f"state dim {psi.shape[0]} != joint constrained dim {joint_basis.dim}")
        return np.array([psi[joint_index(si, 0)] for si in range(sys_basis.dim)])
    if psi.shape[0] != layout.dim_joint:
        raise ValueError(f"state dim {psi.shape[0]} != joint dim {layout.dim_joint}")
    return psi.reshape(layout.dim_s, layout.dim_b)[:, 0].copy()


def eigen_overlap(mode: EigenMode, psi: np.ndarray, layout: ChainLayout) -> float:
    """Rescaled overlap xi = N_s |Tr(rho_psi right_m)| between a channel
    eigenmode and a Hamiltonian eigenstate.

    rho_psi is the bath-vacuum projection of |psi><psi|, trace-normalized;
    the mode's right eigenoperator carries unit Frobenius norm. Bulk modes of
    scrambled dynamics sit near xi ~ 1; anomalously slow modes show xi >> 1
    against the states they are built from.
    """
    v = bath_vacuum_projection(psi, layout)
    norm2 = float(np.real(v.conj() @ v))
    if norm2 < 1e-12:
        raise UndefinedOverlapError("eigenstate has no weight on the bath reset configuration")
    return float(layout.dim_s * abs(v.conj() @ mode.right @ v) / norm2)


def half_chain_renyi2(vec: np.ndarray, basis: ConstrainedBasis) -> float:
    """Renyi-2 entanglement entropy of the left half-chain for a
    constrained-basis pure state."""
    full = basis.embed_vector(np.asarray(vec, dtype=complex))
    n = basis.n_sites
    half = n // 2
    amps = full.reshape(2 ** half, 2 ** (n - half))
    svals = np.linalg.svd(amps, compute_uv=False)
    purity = float(np.sum(svals ** 4))
    return -np.log(purity)


def scar_candidates(energies: np.ndarray, eigenvectors: np.ndarray, basis: ConstrainedBasis,
                    count: int = 4, edge_fraction: float = 1 / 6) -> ScarCandidates:
    """Lowest-entanglement eigenstates in the middle of the spectrum.

    Scans eigenstates in the central (1 - 2*edge_fraction) band of the energy
    spectrum and returns the ``count`` with the smallest half-chain Renyi-2
    entropy -- the anomalously thermalization-resistant states.
    """
    dim = len(energies)
    lo = int(dim * edge_fraction)
    hi = dim - lo
    if hi - lo <= count:
        raise ValueError(f"spectrum too small to exclude edges: bulk has {hi - lo} states")
    bulk = np.arange(lo, hi)
    entropies = np.array([half_chain_renyi2(eigenvectors[:, k], basis) for k in bulk])
    order = np.argsort(entropies, kind="stable")[:count]
    picked = bulk[order]
    return ScarCandidates(
        indices=[int(k) for k in picked],
        energies=energies[picked],
        entropies=entropies[order],
        bulk_median_entropy=float(np.median(entropies)),
        states=eigenvectors[:, picked],
    )


def scar_overlap_avg(mode: EigenMode, scar_states: np.ndarray, layout: ChainLayout) -> float:
    """Arithmetic mean of the rescaled overlaps against each scar state."""
    xis = [eigen_overlap(mode, scar_states[:, j], layout) for j in range(scar_states.shape[1])]
    return float(np.mean(xis))


def renyi2_qmi(rho_as: np.ndarray, n_system_qubits: int) -> float:
    """Renyi-2 mutual information S = -ln Tr(rho_a^2) - ln Tr(rho_s^2)
    + ln Tr(rho_as^2) between a single leading ancilla qubit and the system."""
    n_tot = 1 + n_system_qubits
    op = DenseOperator(np.asarray(rho_as, dtype=complex), qubit_basis(n_tot))
    rho_a = partial_trace(op, [0], n_tot).mat
    rho_s = partial_trace(op, list(range(1, n_tot)), n_tot).mat
    purities = (
        float(np.real(np.trace(rho_a @ rho_a))),
        float(np.real(np.trace(rho_s @ rho_s))),
        float(np.real(np.trace(op.mat @ op.mat))),
    )
    if min(purities) <= 0:
        raise ValueError(f"non-positive purity {purities}; state is numerically invalid")
    return -np.log(purities[0]) - np.log(purities[1]) + np.log(purities[2])


def _site_sz_diagonals(n_sites: int) -> np.ndarray:
    """Row m holds the diagonal of sigma_m^z / 2."""
    idx = np.arange(2 ** n_sites)
    out = np.zeros((n_sites, 2 ** n_sites))
    for m in range(n_sites):
        bit = (idx >> (n_sites - 1 - m)) & 1
        out[m] = 0.5 * (1.0 - 2.0 * bit)
    return out


def imbalance(rho_t: np.ndarray, rho_0: np.ndarray, n_sites: int) -> float:
    """Memory diagnostic B = sum_i Tr(rho_t S_i^z) Tr(rho_0 S_i^z) with
    S_i^z = sigma_i^z / 2."""
    rho_t = np.asarray(rho_t, dtype=complex)
    rho_0 = np.asarray(rho_0, dtype=complex)
    if rho_t.shape != rho_0.shape or rho_t.shape[0] != 2 ** n_sites:
        raise ValueError("state dimensions do not match the chain size")
    sz = _site_sz_diagonals(n_sites)
    now = sz @ np.real(np.diag(rho_t))
    init = sz @ np.real(np.diag(rho_0))
    return float(now @ init)


def qmi_trajectory(kraus: KrausSet, n_max: int) -> list[TrajectoryRecord]:
    """Iterate the ancilla-extended channel from an (ancilla + system) GHZ
    state, recording mutual information, imbalance, magnetization, and
    purities at every step.

    Monotonicity violations of the mutual information (beyond 1e-9) are
    logged as warnings, not raised.
    """
    if kraus.layout.constrained:
        raise ValueError("mutual-information trajectories assume the full qubit basis")
    n_s = kraus.layout.n_s
    extended = extend_with_ancilla(kraus)
    rho = ghz_state(1 + n_s).density_matrix().mat
    sz = _site_sz_diagonals(n_s)
    records: list[TrajectoryRecord] = []
    rho_s0 = None
    for n in range(n_max + 1):
        op = DenseOperator(rho, qubit_basis(1 + n_s))
        rho_a = partial_trace(op, [0], 1 + n_s).mat
        rho_s = partial_trace(op, list(range(1, 1 + n_s)), 1 + n_s).mat
        if rho_s0 is None:
            rho_s0 = rho_s
        purity_a = float(np.real(np.trace(rho_a @ rho_a)))
        purity_s = float(np.real(np.trace(rho_s @ rho_s)))
        purity_as = float(np.real(np.trace(rho @ rho)))
        s_val = -np.log(purity_a) - np.log(purity_s) + np.log(purity_as)
        records.append(TrajectoryRecord(
            n_k=n,
            qmi=float(s_val),
            imbalance=imbalance(rho_s, rho_s0, n_s),
            sz=float(2.0 * (sz @ np.real(np.diag(rho_s))).sum()),
            purity_a=purity_a,
            purity_s=purity_s,
            purity_as=purity_as,
        ))
        if n < n_max:
            rho = apply_channel(extended, rho)
    for prev, cur in zip(records, records[1:]):
        if cur.qmi > prev.qmi + QMI_MONOTONE_ATOL:
            warnings.warn(
                f"mutual information rose by {cur.qmi - prev.qmi:.2e} "
                f"at step {cur.n_k}", RuntimeWarning,
            )
    return records


def magnetization_trajectory(kraus: KrausSet, rho0: np.ndarray, n_steps: int) -> np.ndarray:
    """Total system magnetization <sum_m sigma_m^z> along the iteration."""
    if kraus.layout.constrained:
        raise ValueError("magnetization trajectories assume the full qubit basis")
    n_s = kraus.layout.n_s
    sz_total = 2.0 * _site_sz_diagonals(n_s).sum(axis=0)
    rho = np.asarray(rho0, dtype=complex)
    out = np.zeros(n_steps + 1)
    for n in range(n_steps + 1):
        out[n] = float(sz_total @ np.real(np.diag(rho)))
        if n < n_steps:
            rho = apply_channel(kraus, rho)
    return out


@dataclass
class PhaseScanPoint:
    value: float
    qmi: float
    imbalance_plus_one: float


def phase_scan(channel_factory: Callable[[float], KrausSet], values: np.ndarray,
               n_k: int) -> tuple[list[PhaseScanPoint], list[tuple[int, str]]]:
    """Final mutual information (from the GHZ protocol) and final imbalance
    + 1 (from the alternating product state) after ``n_k`` channel rounds,
    for each parameter value. Per-point failures are recorded and skipped.
    """
    points: list[PhaseScanPoint] = []
    failures: list[tuple[int, str]] = []
    for i, value in enumerate(np.asarray(values, dtype=float)):
        try:
            kraus = channel_factory(float(value))
            n_s = kraus.layout.n_s
            traj = qmi_trajectory(kraus, n_k)
            rho0 = neel_state(n_s).density_matrix().mat
            rho = rho0
            for _ in range(n_k):
                rho = apply_channel(kraus, rho)
            points.append(PhaseScanPoint(
                value=float(value),
                qmi=traj[-1].qmi,
                imbalance_plus_one=1.0 + imbalance(rho, rho0, n_s),
            ))
        except Exception as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
    return points, failures


def write_trajectory_csv(records_by_case: dict[str, list[TrajectoryRecord]], path) -> None:
    """Columns: case, n_k, qmi, imbalance, sz, purity_a, purity_s, purity_as."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case", "n_k", "qmi", "imbalance", "sz",
                         "purity_a", "purity_s", "purity_as"])
        for case, records in records_by_case.items():
            for r in records:
                writer.writerow([
                    case, r.n_k, f"{r.qmi:.17g}", f"{r.imbalance:.17g}", f"{r.sz:.17g}",
                    f"{r.purity_a:.17g}", f"{r.purity_s:.17g}", f"{r.purity_as:.17g}",
                ])


def write_phase_scan_csv(parameter: str, points: list[PhaseScanPoint], path) -> None:
    """Columns: value, qmi, imbalance_plus_one."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([parameter, "qmi", "imbalance_plus_one"])
        for p in points:
            writer.writerow([f"{p.value:.17g}", f"{p.qmi:.17g}",
                             f"{p.imbalance_plus_one:.17g}"])


def write_overlaps_csv(records: list[OverlapRecord], path) -> None:
    """Columns: mode, abs_lambda, xi, reference."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "abs_lambda", "xi", "reference"])
        for r in records:
            writer.writerow([r.mode_index, f"{r.magnitude:.17g}", f"{r.xi:.17g}", r.reference])
