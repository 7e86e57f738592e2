"""
Certificate Tools Module

Pure functions for a posteriori output certificates of the reduced model:
offline Riesz-representation data of the affine residual, the stability
constant and the online bound

    Delta_ij = alpha^3 / (8 alpha_LB) (|r_i|^2 + |r_j|^2 + |r_i - r_j|^2)

on the errors of the reduced R and I tensors.

The residual of direction i at frequency omega is W_i w_i with
W_i = [r1_i, A0 U_i, A1 U_i] and w_i = (omega, -p_i, -omega p_i).

The bound applies to the residual-corrected outputs of pod_tools, whose
error is alpha^3/4 e_i^T A e_j. With E(e) = e^H (A0 + omega S) e it holds
that |e^T A e| <= E(e) <= sqrt(2) |e^H A e| and E(e) >= gamma |e|_X^2,
so E(e) <= 2 |r|^2 / gamma. The stability operator (A0 + omega' S) / 2
turns gamma / 2 into alpha_LB.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple
import logging

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from tools.errors import CertificateUnavailableError, DimensionMismatchError, InvalidArgumentError
from tools.fem_tools import apply_dirichlet, assemble_mass
from tools.mpt_tools import MPTSample
from tools.pod_tools import ReducedSolution, TSVDBasis
from tools.transmission_tools import AffineSystem

logger = logging.getLogger(__name__)

PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
INNER_PRODUCTS = ("energy", "mass")
EVALUATIONS = ("stabilized", "expansion")
DENSE_EIGEN_LIMIT = 300
ENERGY_LAMBDA_MIN = 0.5


@dataclass(frozen=True, eq=False)
class CertificateData:
    """
    Offline certificate data.

    gram[(i, j)] = W_i^H X^-1 W_j for the upper pairs; factor is the
    triangular R of W = Q R with Q orthonormal in the X^-1 inner product,
    and blocks[i] selects the columns of direction i.
    """
    gram: Dict[Tuple[int, int], np.ndarray]
    factor: np.ndarray
    blocks: Tuple[slice, slice, slice]
    lambda_min: float
    omega_prime: float
    ranks: Tuple[int, int, int]
    inner_product: str = "energy"

    def alpha_lb(self, omega: float) -> float:
        return alpha_lb(self.lambda_min, omega, self.omega_prime)


@dataclass(frozen=True)
class CertificateBand:
    """Intervals (N0 + R) +- Delta and I +- Delta."""
    real_lower: np.ndarray
    real_upper: np.ndarray
    imag_lower: np.ndarray
    imag_upper: np.ndarray


# ============================================================================
# INNER PRODUCT AND STABILITY
# ============================================================================

def riesz_operator(affine: AffineSystem, omega_prime: float, inner_product: str = "energy") -> sp.csc_matrix:
    """
    Matrix X of the Riesz inner product on the free dofs.

    "energy" is the real coercive reference A0 + omega' S; "mass" is the
    unit-weight lowest-order mass matrix.
    Under "mass" the stability constant is of the order of the gauge
    regularisation epsilon, which makes the certificate valid but loose.
    """
    if inner_product == "mass":
        space = affine.space
        mass = assemble_mass(space, {tag: 1.0 for tag in space.mesh.region_tags()})
        x, _ = apply_dirichlet(mass, None, space)
    elif inner_product == "energy":
        x = affine.a0 + omega_prime * affine.s_mass
    else:
        raise InvalidArgumentError(f"inner_product must be one of {INNER_PRODUCTS}, got {inner_product!r}")
    return sp.csc_matrix(x)


def stability_operator(affine: AffineSystem, omega_prime: float) -> sp.csc_matrix:
    """H(omega') = (A0 + omega' S) / 2."""
    return sp.csc_matrix((affine.a0 + omega_prime * affine.s_mass) / 2.0)


def stability_constant(affine: AffineSystem, omega_prime: float, inner_product: str = "energy",
                       riesz: sp.spmatrix = None) -> float:
    """
    Smallest eigenvalue of H(omega') x = lambda X x.

    Args:
        affine: Affine system
        omega_prime: Reference (smallest) frequency of the sweep
        inner_product: "energy" or "mass"
        riesz: Precomputed X (built if omitted)

    Returns:
        lambda_min > 0; exactly 1/2 for the energy product

    Raises:
        CertificateUnavailableError: lambda_min is not positive
    """
    if omega_prime <= 0:
        raise InvalidArgumentError(f"omega_prime must be positive, got {omega_prime}")
    if inner_product not in INNER_PRODUCTS:
        raise InvalidArgumentError(f"inner_product must be one of {INNER_PRODUCTS}, got {inner_product!r}")
    if inner_product == "energy":
        return ENERGY_LAMBDA_MIN

    h = stability_operator(affine, omega_prime)
    x = riesz_operator(affine, omega_prime, inner_product) if riesz is None else sp.csc_matrix(riesz)
    n = h.shape[0]
    try:
        if n <= DENSE_EIGEN_LIMIT:
            values = la.eigh(h.toarray(), x.toarray(), eigvals_only=True, subset_by_index=[0, 0])
        else:
            values = spla.eigsh(h, k=1, M=x, sigma=0.0, which="LM", tol=1e-10, return_eigenvectors=False)
    except (RuntimeError, la.LinAlgError, spla.ArpackNoConvergence) as e:
        raise CertificateUnavailableError(f"Stability eigenproblem failed at omega'={omega_prime:.3e}: {e}") from e

    lam = float(np.min(values))
    if not lam > 0:
        raise CertificateUnavailableError(f"Non-positive stability constant {lam:.3e} at omega'={omega_prime:.3e}")
    logger.info(f"Stability constant lambda_min={lam:.6e} at omega'={omega_prime:.3e} ({inner_product})")
    return lam


def alpha_lb(lambda_min: float, omega: float, omega_prime: float) -> float:
    """alpha_LB(omega) = lambda_min * min(1, omega / omega')"""
    return lambda_min * min(1.0, omega / omega_prime)


# ============================================================================
# OFFLINE
# ============================================================================

def residual_blocks(affine: AffineSystem, basis: TSVDBasis) -> List[np.ndarray]:
    """W_i = [r1_i, A0 U_i, A1 U_i] per direction."""
    blocks = []
    for i, direction in enumerate(basis.directions):
        u = direction.u
        if u.shape[0] != affine.n_dof:
            raise DimensionMismatchError(f"Basis has {u.shape[0]} rows, system has {affine.n_dof} dofs")
        blocks.append(np.column_stack([affine.r1[:, i], affine.a0 @ u, affine.a1 @ u]))
    return blocks


def _apply_inverse(lu, w: np.ndarray) -> np.ndarray:
    return lu.solve(np.ascontiguousarray(w.real)) + 1j * lu.solve(np.ascontiguousarray(w.imag))


def _orthogonal_factor(w: np.ndarray, solve: Callable[[np.ndarray], np.ndarray],
                       rtol: float = 1e-13) -> np.ndarray:
    """
    Triangular factor R of W = Q R with Q orthonormal in the X^-1 inner product.

    Then |W w|_{X^-1} = |R w| for every weight vector w. Modified Gram-Schmidt
    with one reorthogonalisation pass on columns scaled to unit norm; X^-1 is
    applied to each remainder after orthogonalisation.

    Args:
        w: Columns to factor, shape (n, k)
        solve: Applies X^-1 to a vector or a block of columns
        rtol: Columns whose remainder falls below rtol times their norm are dependent

    Returns:
        R with shape (rank, k)
    """
    n, k = w.shape
    scales = np.sqrt(np.maximum(np.real(np.sum(w.conj() * solve(w), axis=0)), 0.0))
    q = np.zeros((n, k), dtype=complex)
    zq = np.zeros((n, k), dtype=complex)
    r = np.zeros((k, k), dtype=complex)
    m = 0
    for col in range(k):
        if scales[col] == 0.0:
            continue
        u = w[:, col].astype(complex) / scales[col]
        coeff = np.zeros(m, dtype=complex)
        for _ in range(2):
            for a in range(m):
                c = np.vdot(zq[:, a], u)
                u = u - c * q[:, a]
                coeff[a] += c
        zu = solve(u)
        norm = np.sqrt(max(np.real(np.vdot(u, zu)), 0.0))
        r[:m, col] = coeff * scales[col]
        if norm > rtol:
            q[:, m], zq[:, m] = u / norm, zu / norm
            r[m, col] = norm * scales[col]
            m += 1
    return r[:m]


def build_certificate_offline(affine: AffineSystem, basis: TSVDBasis, omega_prime: float,
                              inner_product: str = "energy") -> CertificateData:
    """
    Precompute everything the online bound needs.

    Args:
        affine: Affine system
        basis: Reduced bases per direction
        omega_prime: Smallest frequency of interest
        inner_product: Riesz inner product, "energy" or "mass"

    Returns:
        CertificateData

    Raises:
        CertificateUnavailableError: the inner product matrix cannot be factorised
            or the stability constant is not positive
    """
    x = riesz_operator(affine, omega_prime, inner_product)
    try:
        lu = spla.splu(x)
    except RuntimeError as e:
        raise CertificateUnavailableError(f"Riesz operator factorisation failed: {e}") from e

    blocks = residual_blocks(affine, basis)
    w_all = np.hstack(blocks)
    z_all = _apply_inverse(lu, w_all)

    offsets = np.cumsum([0] + [b.shape[1] for b in blocks])
    slices = tuple(slice(offsets[i], offsets[i + 1]) for i in range(3))
    gram = {}
    for i, j in PAIRS:
        g = w_all[:, slices[i]].conj().T @ z_all[:, slices[j]]
        gram[(i, j)] = 0.5 * (g + g.conj().T) if i == j else g

    factor = _orthogonal_factor(w_all, lambda b: _apply_inverse(lu, b))
    lam = stability_constant(affine, omega_prime, inner_product, riesz=x)
    if inner_product == "mass":
        logger.warning(f"Mass inner product: lambda_min={lam:.3e} is set by the gauge regularisation, "
                       f"so the radii scale with 1/lambda_min={1.0 / lam:.1e} and are loose")
    logger.info(f"Certificate offline: residual columns={w_all.shape[1]}, factor rank={factor.shape[0]}")
    return CertificateData(gram, factor, slices, lam, float(omega_prime), basis.ranks, inner_product)


# ============================================================================
# ONLINE
# ============================================================================

def residual_weights(solution: ReducedSolution) -> List[np.ndarray]:
    """w_i = (omega, -p_i, -omega p_i)."""
    omega = solution.omega
    return [np.concatenate([[omega], -p, -omega * p]) for p in solution.coefficients]


def _roundoff_floor(g: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Rounding error bound of a^H G b evaluated in floating point."""
    return len(a) * np.finfo(float).eps * float(np.abs(a) @ np.abs(g) @ np.abs(b))


def residual_norms(cert: CertificateData, solution: ReducedSolution,
                   evaluation: str = "stabilized") -> Tuple[np.ndarray, np.ndarray]:
    """
    Squared Riesz norms of the residuals.

    The expansion evaluation w^H G w cannot resolve norms below its rounding
    floor, so the floor is added to every value it returns; "stabilized"
    works on the triangular factor and has no such floor.

    Returns:
        (norms, differences) with norms[i] = |r_i|^2 and differences[i, j] = |r_i - r_j|^2
    """
    weights = residual_weights(solution)
    for i, w in enumerate(weights):
        expected = cert.blocks[i].stop - cert.blocks[i].start
        if len(w) != expected:
            raise DimensionMismatchError(f"Direction {i + 1}: weight length {len(w)}, certificate expects {expected}")

    norms = np.zeros(3)
    differences = np.zeros((3, 3))
    if evaluation == "stabilized":
        y = [cert.factor[:, cert.blocks[i]] @ weights[i] for i in range(3)]
        for i in range(3):
            norms[i] = np.real(np.vdot(y[i], y[i]))
        for i, j in PAIRS:
            d = y[i] - y[j]
            differences[i, j] = differences[j, i] = np.real(np.vdot(d, d))
    elif evaluation == "expansion":
        raw = np.zeros(3)
        floor = np.zeros((3, 3))
        for i, j in PAIRS:
            floor[i, j] = floor[j, i] = _roundoff_floor(cert.gram[(i, j)], weights[i], weights[j])
        for i in range(3):
            raw[i] = np.real(weights[i].conj() @ cert.gram[(i, i)] @ weights[i])
            norms[i] = max(raw[i], 0.0) + floor[i, i]
        unresolved = int(np.sum(raw < np.diag(floor)))
        for i, j in PAIRS:
            if i == j:
                continue
            cross = np.real(weights[i].conj() @ cert.gram[(i, j)] @ weights[j])
            value = raw[i] + raw[j] - 2.0 * cross
            bound = floor[i, i] + floor[j, j] + 2.0 * floor[i, j]
            unresolved += int(value < bound)
            differences[i, j] = differences[j, i] = max(value, 0.0) + bound
        if unresolved:
            logger.warning(f"Expansion evaluation at omega={solution.omega:.6g}: {unresolved} residual norms "
                           f"below the rounding floor; reporting the floor")
    else:
        raise InvalidArgumentError(f"evaluation must be one of {EVALUATIONS}, got {evaluation!r}")
    return norms, differences


def online_delta(cert: CertificateData, solution: ReducedSolution, alpha: float,
                 evaluation: str = "stabilized") -> np.ndarray:
    """
    Certificate radii Delta[omega] for the reduced R and I.

    Args:
        cert: Offline certificate data
        solution: Reduced solution at omega (all three directions)
        alpha: Object size in metres
        evaluation: "stabilized" (triangular factor) or "expansion" (w^H G w)

    Returns:
        Symmetric non-negative 3x3 array
    """
    norms, differences = residual_norms(cert, solution, evaluation)
    scale = alpha ** 3 / (8.0 * cert.alpha_lb(solution.omega))
    delta = scale * (norms[:, None] + norms[None, :] + differences)
    return np.maximum(0.5 * (delta + delta.T), 0.0)


def certified_samples(cert: CertificateData, solutions: Sequence[ReducedSolution], alpha: float,
                      evaluation: str = "stabilized") -> List[MPTSample]:
    return [s.sample.with_delta(online_delta(cert, s, alpha, evaluation)) for s in solutions]


def certificate_band(sample: MPTSample) -> CertificateBand:
    """Per-entry intervals around N0 + R and I."""
    if sample.delta is None:
        raise InvalidArgumentError(f"Sample at omega={sample.omega:.6g} carries no certificate")
    real = sample.n0 + sample.r
    return CertificateBand(real - sample.delta, real + sample.delta,
                           sample.i - sample.delta, sample.i + sample.delta)
