"""
POD Tools Module

Pure functions for the offline/online reduced order model: frequency
sampling, snapshot collection, truncated SVD, Galerkin projection of the
affine system and online evaluation of the tensors from small dense
contractions.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging
import time

import numpy as np

from tools.errors import DimensionMismatchError, InvalidArgumentError, SolverError
from tools.mpt_tools import MPTSample, asymmetry, make_sample, n0_from_affine, symmetrize
from tools.transmission_tools import AffineSystem, solve_theta1_full

logger = logging.getLogger(__name__)

SPACINGS = ("log", "lin")
SVD_METHODS = ("qr", "gram")


# ============================================================================
# FREQUENCY SAMPLING
# ============================================================================

def frequency_samples(omega_min: float, omega_max: float, n: int, spacing: str = "log") -> np.ndarray:
    """
    Inclusive frequency grid.

    Args:
        omega_min: Lowest frequency (rad/s, > 0)
        omega_max: Highest frequency (rad/s, > omega_min)
        n: Number of points (n = 1 returns [omega_min])
        spacing: "log" (uniform in log10) or "lin"

    Returns:
        Strictly increasing array of n frequencies
    """
    if spacing not in SPACINGS:
        raise InvalidArgumentError(f"spacing must be one of {SPACINGS}, got {spacing!r}")
    if n < 1:
        raise InvalidArgumentError(f"Need at least one frequency, got {n}")
    if omega_min <= 0:
        raise InvalidArgumentError(f"omega_min must be positive, got {omega_min}")
    if n == 1:
        return np.array([float(omega_min)])
    if omega_max <= omega_min:
        raise InvalidArgumentError(f"Invalid frequency range [{omega_min}, {omega_max}]")
    if spacing == "log":
        grid = np.logspace(np.log10(omega_min), np.log10(omega_max), n)
    else:
        grid = np.linspace(omega_min, omega_max, n)
    grid[0], grid[-1] = omega_min, omega_max
    return grid


def verification_frequencies(omega_min: float, omega_max: float, n_snapshots: int,
                             count: int = 20, spacing: str = "log") -> np.ndarray:
    """
    Frequencies for checking the ROM between snapshots.

    The grid starts and ends half a snapshot step inside the band; points
    landing on a snapshot are nudged by a quarter step.
    """
    if n_snapshots < 2:
        raise InvalidArgumentError("Verification grid needs at least two snapshots")
    to_axis, from_axis = (np.log10, lambda x: 10.0 ** x) if spacing == "log" else (lambda x: x, lambda x: x)
    lo, hi = to_axis(omega_min), to_axis(omega_max)
    step = (hi - lo) / (n_snapshots - 1)
    axis = np.linspace(lo + 0.5 * step, hi - 0.5 * step, count)
    offsets = (axis - lo) / step
    on_snapshot = np.abs(offsets - np.round(offsets)) < 1e-6
    axis[on_snapshot] += 0.25 * step
    return from_axis(axis)


# ============================================================================
# SNAPSHOTS
# ============================================================================

@dataclass(frozen=True, eq=False)
class SnapshotSet:
    """Columns q(omega_n) per direction: matrices[i] has shape (n_dof, N)."""
    frequencies: np.ndarray
    matrices: Tuple[np.ndarray, np.ndarray, np.ndarray]
    spacing: str
    elapsed: float = 0.0

    @property
    def n_snapshots(self) -> int:
        return len(self.frequencies)


def solve_frequencies(affine: AffineSystem, frequencies: Sequence[float], tol: float = 1e-10,
                      method: str = "direct", threads: int = 1) -> List[np.ndarray]:
    """Full-order solutions at each frequency, returned in input order."""
    def solve(omega):
        return solve_theta1_full(affine, float(omega), tol=tol, method=method)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(solve, frequencies))
    return [solve(omega) for omega in frequencies]


def build_snapshots(affine: AffineSystem, samples: Sequence[float], tol: float = 1e-10,
                    method: str = "direct", threads: int = 1, spacing: str = "log") -> SnapshotSet:
    """
    Collect 3N full-order solutions at the sample frequencies.

    Args:
        affine: Affine system
        samples: Snapshot frequencies (sorted internally)
        tol: Relative residual of each solve
        method: Solver method
        threads: Worker threads for the independent solves
        spacing: Tag recorded on the set

    Returns:
        SnapshotSet with columns ordered by increasing frequency
    """
    frequencies = np.sort(np.asarray(samples, dtype=float))
    if len(frequencies) == 0:
        raise InvalidArgumentError("At least one snapshot frequency is required")
    if np.any(np.diff(frequencies) <= 0):
        raise InvalidArgumentError("Snapshot frequencies must be distinct")

    start = time.perf_counter()
    solutions = solve_frequencies(affine, frequencies, tol=tol, method=method, threads=threads)
    matrices = tuple(np.column_stack([s[:, i] for s in solutions]) for i in range(3))
    elapsed = time.perf_counter() - start
    logger.info(f"Collected {len(frequencies)} snapshots x 3 directions in {elapsed:.2f}s")
    return SnapshotSet(frequencies, matrices, spacing, elapsed)


def snapshot_residuals(affine: AffineSystem, snapshots: SnapshotSet) -> np.ndarray:
    """Relative residual of every snapshot column, shape (3, N)."""
    residuals = np.zeros((3, snapshots.n_snapshots))
    for n, omega in enumerate(snapshots.frequencies):
        matrix, rhs = affine.matrix(omega), affine.rhs(omega)
        for i in range(3):
            b = rhs[:, i]
            norm_b = np.linalg.norm(b)
            r = np.linalg.norm(matrix @ snapshots.matrices[i][:, n] - b)
            residuals[i, n] = r / norm_b if norm_b > 0 else r
    return residuals


# ============================================================================
# TRUNCATED SVD
# ============================================================================

@dataclass(frozen=True, eq=False)
class DirectionBasis:
    u: np.ndarray                     # (n_dof, M) orthonormal
    singular_values: np.ndarray       # all N values, descending
    v: np.ndarray                     # (N, M)
    rank: int

    @property
    def sigma(self) -> np.ndarray:
        return self.singular_values[:self.rank]

    @property
    def ratios(self) -> np.ndarray:
        return self.singular_values / self.singular_values[0]


@dataclass(frozen=True, eq=False)
class TSVDBasis:
    directions: Tuple[DirectionBasis, DirectionBasis, DirectionBasis]
    tol: float

    @property
    def ranks(self) -> Tuple[int, int, int]:
        return tuple(b.rank for b in self.directions)


def _svd_qr(d: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(d)
    ur, s, vh = np.linalg.svd(r)
    return q @ ur, s, vh.conj().T


def _svd_gram(d: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gram = d.conj().T @ d
    w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    w, v = w[::-1], v[:, ::-1]
    s = np.sqrt(np.clip(w, 0.0, None))
    keep = s > 0
    u = np.zeros((d.shape[0], len(s)), dtype=np.result_type(d.dtype, np.complex128))
    u[:, keep] = (d @ v[:, keep]) / s[keep]
    if np.any(keep):
        q, r = np.linalg.qr(u[:, keep])
        phases = np.diag(r) / np.where(np.abs(np.diag(r)) > 0, np.abs(np.diag(r)), 1.0)
        u[:, keep] = q * phases[None, :]
    return u, s, v


def truncated_svd(snapshots: np.ndarray, tol: float, method: str = "qr") -> DirectionBasis:
    """
    Truncated SVD D ~ U^M Sigma^M (V^M)^H keeping sigma_i / sigma_1 > tol.

    Args:
        snapshots: Snapshot matrix D, shape (n_dof, N)
        tol: Truncation tolerance (0 keeps every non-zero singular value)
        method: "qr" (thin QR then SVD of the small factor) or "gram"
            (eigen-decomposition of D^H D; loses modes below sqrt(machine eps))

    Returns:
        DirectionBasis with rank M >= 1
    """
    d = np.asarray(snapshots)
    if d.ndim != 2 or d.shape[1] == 0:
        raise DimensionMismatchError(f"Snapshot matrix must be 2D with at least one column, got {d.shape}")
    if tol < 0:
        raise InvalidArgumentError(f"TOL must be non-negative, got {tol}")
    if not np.any(d):
        raise InvalidArgumentError("Snapshot matrix is zero")

    if method == "qr":
        u, s, v = _svd_qr(d)
    elif method == "gram":
        u, s, v = _svd_gram(d)
    else:
        raise InvalidArgumentError(f"Unknown SVD method: {method}")

    # Fix the phase of each singular pair so the first row of V is real and non-negative
    lead = v[0, :]
    phase = np.where(np.abs(lead) > 0, np.conj(lead) / np.where(np.abs(lead) > 0, np.abs(lead), 1.0), 1.0)
    u, v = u * phase[None, :], v * phase[None, :]

    rank = max(1, int(np.sum((s / s[0] > tol) & (s > 0))))
    logger.info(f"TSVD: N={d.shape[1]}, rank M={rank}, sigma_N/sigma_1={s[-1] / s[0]:.3e}")
    return DirectionBasis(u[:, :rank], s, v[:, :rank], rank)


def build_bases(snapshots: SnapshotSet, tol: float, method: str = "qr") -> TSVDBasis:
    return TSVDBasis(tuple(truncated_svd(snapshots.matrices[i], tol, method) for i in range(3)), tol)


def reconstruction_errors(snapshots: np.ndarray, basis: DirectionBasis) -> np.ndarray:
    """Relative error of each snapshot against U^M Sigma^M (V^M)^H."""
    d = np.asarray(snapshots)
    approx = basis.u @ (basis.sigma[:, None] * basis.v.conj().T)
    norms = np.linalg.norm(d, axis=0)
    errors = np.linalg.norm(d - approx, axis=0)
    return errors / np.where(norms > 0, norms, 1.0)


# ============================================================================
# PROJECTION AND ONLINE STAGE
# ============================================================================

@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """
    Projected operators and output contractions.

    a0m[i] = U_i^H A0 U_i and a1m[i] = U_i^H A1 U_i, r1m[i] = U_i^H r1_i;
    t0[i][j] = U_i^T A0 U_j, ts[i][j] = U_i^T S U_j and us[i][j] = U_i^H s_j
    feed the tensor formulae without touching full-size vectors online.
    """
    a0m: Tuple[np.ndarray, ...]
    a1m: Tuple[np.ndarray, ...]
    r1m: Tuple[np.ndarray, ...]
    t0: Tuple[Tuple[np.ndarray, ...], ...]
    ts: Tuple[Tuple[np.ndarray, ...], ...]
    us: Tuple[Tuple[np.ndarray, ...], ...]
    theta0_pairing: np.ndarray
    n0: np.ndarray
    alpha: float
    ranks: Tuple[int, int, int]

    def matrix(self, i: int, omega: float) -> np.ndarray:
        return self.a0m[i] + omega * self.a1m[i]


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    omega: float
    coefficients: Tuple[np.ndarray, ...]
    sample: MPTSample


def project_affine(affine: AffineSystem, basis: TSVDBasis) -> ReducedSystem:
    """
    Galerkin-project the affine system onto the per-direction bases.

    Args:
        affine: Full-order affine system
        basis: Bases built on the same free dofs

    Returns:
        ReducedSystem holding only M-sized dense objects
    """
    us_basis = [b.u for b in basis.directions]
    for u in us_basis:
        if u.shape[0] != affine.n_dof:
            raise DimensionMismatchError(f"Basis has {u.shape[0]} rows, system has {affine.n_dof} dofs")

    a0u = [affine.a0 @ u for u in us_basis]
    su = [affine.s_mass @ u for u in us_basis]
    t0 = tuple(tuple(us_basis[i].T @ a0u[j] for j in range(3)) for i in range(3))
    ts = tuple(tuple(us_basis[i].T @ su[j] for j in range(3)) for i in range(3))
    us = tuple(tuple(us_basis[i].conj().T @ affine.s_vectors[:, j] for j in range(3)) for i in range(3))

    reduced = ReducedSystem(
        a0m=tuple(us_basis[i].conj().T @ a0u[i] for i in range(3)),
        a1m=tuple(-1j * (us_basis[i].conj().T @ su[i]) for i in range(3)),
        r1m=tuple(1j * us[i][i] for i in range(3)),
        t0=t0, ts=ts, us=us,
        theta0_pairing=affine.theta0_pairing.copy(),
        n0=n0_from_affine(affine),
        alpha=affine.alpha,
        ranks=basis.ranks,
    )
    logger.info(f"Projected affine system onto ranks {basis.ranks}")
    return reduced


def reduced_tensors(reduced: ReducedSystem, coefficients: Sequence[np.ndarray],
                    omega: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    R and I from reduced coefficients p_i, using only the stored contractions.

    The object pairing s_i^T q_j is replaced by its residual-corrected form
    s_i^T q_j + q_i^T s_j - q_i^T A q_j / (i omega) with q = U p. It equals the
    pairing for full-order solutions and differs from it by e_i^T A e_j / (i omega)
    otherwise, which is the quantity the output certificates bound.
    """
    scale = reduced.alpha ** 3 * omega / 4.0
    r = np.zeros((3, 3))
    i_raw = np.zeros((3, 3))
    for i in range(3):
        pi = coefficients[i]
        for j in range(3):
            pj = coefficients[j]
            pairing = (reduced.us[j][i].conj() @ pj + pi @ reduced.us[i][j].conj()
                       + pi @ reduced.ts[i][j] @ pj + 1j * (pi @ reduced.t0[i][j] @ pj) / omega)
            r[i, j] = -scale * np.imag(pairing)
            i_raw[i, j] = scale * (np.real(pairing) + reduced.theta0_pairing[i, j])
    return symmetrize(r), symmetrize(i_raw), max(asymmetry(r), asymmetry(i_raw))


def online_solve(reduced: ReducedSystem, omega: float) -> ReducedSolution:
    """
    Solve the M x M systems A^M(omega) p = omega r1^M and evaluate the tensors.

    Raises:
        SolverError: a reduced matrix is singular
    """
    if omega <= 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega}")
    coefficients = []
    kappa = np.zeros(3)
    for i in range(3):
        matrix = reduced.matrix(i, omega)
        kappa[i] = np.linalg.cond(matrix)
        try:
            coefficients.append(np.linalg.solve(matrix, omega * reduced.r1m[i]))
        except np.linalg.LinAlgError as e:
            raise SolverError(f"Reduced matrix is singular (kappa={kappa[i]:.3e})",
                              residual=float("inf"), omega=omega, direction=i + 1) from e
    r, i_tensor, asym = reduced_tensors(reduced, coefficients, omega)
    sample = make_sample(omega, reduced.n0, r, i_tensor, asym, kappa=kappa)
    return ReducedSolution(float(omega), tuple(coefficients), sample)


def reconstruct(basis: TSVDBasis, solution: ReducedSolution) -> np.ndarray:
    """Full free-dof field U^M p^M per direction, shape (n_dof, 3)."""
    return np.column_stack([basis.directions[i].u @ solution.coefficients[i] for i in range(3)])


def online_sweep(reduced: ReducedSystem, frequencies: Sequence[float],
                 threads: int = 1) -> List[ReducedSolution]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda w: online_solve(reduced, float(w)), frequencies))
    return [online_solve(reduced, float(w)) for w in frequencies]
