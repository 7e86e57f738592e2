"""
Transmission Tools Module

Pure functions that set up and solve the discrete magnetostatic (theta0)
and eddy-current (theta1) transmission problems, and expose the affine
frequency dependence A(omega) = A0 + omega * A1 of the theta1 system.

All parameters enter the theta1 system through nu = alpha^2 omega mu0 sigma,
so the material factor c = alpha^2 mu0 sigma is assembled once per region
and omega multiplies it afterwards.
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union
import logging

import numpy as np
import scipy.sparse as sp

from tools.errors import DimensionMismatchError, InvalidArgumentError, SolverError
from tools.fem_tools import (
    MU0,
    EdgeSpace,
    apply_dirichlet,
    assemble_curlcurl,
    assemble_mass,
    assemble_theta0_rhs,
    extend,
    materials_by_tag,
    quadrature_points,
    solve_sparse,
    tet_weights,
    whitney_at_quadrature,
    QUADRATURE_WEIGHTS,
)
from tools.mesh_tools import Material

logger = logging.getLogger(__name__)

Materials = Union[Mapping[str, Material], Iterable[Material]]


@dataclass(frozen=True, eq=False)
class Theta0Solution:
    """Free-dof coefficients of theta0_tilde_i = theta0_i - e_i x xi, one column per direction."""
    space: EdgeSpace
    coefficients: np.ndarray          # (n_dof, 3) real
    epsilon: float

    def direction(self, i: int) -> np.ndarray:
        return self.coefficients[:, i - 1]

    def full(self, i: int) -> np.ndarray:
        return extend(self.direction(i), self.space)


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """
    Free-dof theta1 system A(omega) q = omega r1.

    a0 is the mu-weighted curl-curl plus the epsilon mass outside the object,
    a1 = -i * s_mass with s_mass the mass weighted by alpha^2 mu0 sigma, and
    r1[:, i] = i * s_vectors[:, i] with s_vectors the same weighted pairing
    against theta0_i (analytic e_i x xi part included). The remaining fields
    are the pieces the tensor formulae reuse.
    """
    space: EdgeSpace
    theta0: Theta0Solution
    alpha: float
    epsilon: float
    a0: sp.csr_matrix
    s_mass: sp.csr_matrix
    s_vectors: np.ndarray             # (n_dof, 3) real
    theta0_pairing: np.ndarray        # (3, 3) real: int c theta0_i . theta0_j
    curlcurl_mu: sp.csr_matrix        # mu-weighted curl-curl, no epsilon
    object_contrast: float            # int_B (1 - 1/mu_r)
    a1: sp.csr_matrix = field(init=False, repr=False)
    r1: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a1", (-1j * self.s_mass).tocsr())
        object.__setattr__(self, "r1", 1j * self.s_vectors)

    @property
    def n_dof(self) -> int:
        return self.a0.shape[0]

    def matrix(self, omega: float) -> sp.csr_matrix:
        return (self.a0 + omega * self.a1).tocsr()

    def rhs(self, omega: float) -> np.ndarray:
        return omega * self.r1


def region_factors(materials: Materials, alpha: float) -> dict:
    """Per-region factor c = alpha^2 mu0 sigma, so that nu = c * omega."""
    return {tag: alpha ** 2 * MU0 * m.sigma_star for tag, m in materials_by_tag(materials).items()}


def inverse_permeability(materials: Materials) -> dict:
    return {tag: 1.0 / m.mu_r for tag, m in materials_by_tag(materials).items()}


# ============================================================================
# THETA0
# ============================================================================

def solve_theta0(space: EdgeSpace, materials: Materials, epsilon: float,
                 tol: float = 1e-10, method: str = "direct") -> Theta0Solution:
    """
    Solve (curl-curl / mu + epsilon * mass on the whole domain) x = b_i for i = 1, 2, 3.

    Args:
        space: Edge space
        materials: Materials for every region tag
        epsilon: Regularisation parameter (> 0)
        tol: Relative residual for the solves
        method: Solver method passed to solve_sparse

    Returns:
        Theta0Solution on the free dofs
    """
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    by_tag = materials_by_tag(materials)
    stiffness = assemble_curlcurl(space, inverse_permeability(by_tag))
    stiffness = stiffness + epsilon * assemble_mass(space, {tag: 1.0 for tag in by_tag})
    rhs = np.column_stack([assemble_theta0_rhs(space, i, by_tag) for i in (1, 2, 3)])
    matrix, rhs_free = apply_dirichlet(stiffness, rhs, space)

    solution = np.zeros((space.n_dof, 3))
    for i in range(3):
        try:
            solution[:, i] = solve_sparse(matrix, rhs_free[:, i], tol=tol, method=method).real
        except SolverError as e:
            raise SolverError("theta0 solve failed", e.residual, direction=i + 1) from e
    logger.info(f"Solved theta0 for 3 directions on {space.n_dof} dofs")
    return Theta0Solution(space, solution, epsilon)


# ============================================================================
# AFFINE THETA1 SYSTEM
# ============================================================================

def _cross_basis(points: np.ndarray, i: int) -> np.ndarray:
    """Values of e_i x xi at points (..., 3)."""
    e = np.zeros(3)
    e[i - 1] = 1.0
    return np.cross(np.broadcast_to(e, points.shape), points)


def analytic_pairings(space: EdgeSpace, factors: Mapping[str, float]):
    """
    Integrals involving the analytic field e_i x xi, weighted by c per tet.

    Returns:
        (g, t) where g[:, i] is the edge vector int c (e_i x xi) . N_k and
        t[i, j] = int c (e_i x xi) . (e_j x xi); both exact by degree-2 quadrature
    """
    c = tet_weights(space.mesh, factors)
    tets = np.flatnonzero(c > 0)
    g = np.zeros((space.n_edges, 3))
    t = np.zeros((3, 3))
    if len(tets) == 0:
        return g, t
    points = quadrature_points(space.mesh, tets)                        # (n, 4, 3)
    basis = whitney_at_quadrature(space, tets)                          # (n, 4, 6, 3)
    scale = (c[tets] * space.volumes[tets])[:, None] * QUADRATURE_WEIGHTS[None, :]
    fields = [_cross_basis(points, i) for i in (1, 2, 3)]
    for i in range(3):
        local = np.einsum("nq,nqd,nqed->ne", scale, fields[i], basis)
        g[:, i] = np.bincount(space.mesh.tet_edges[tets].ravel(), weights=local.ravel(),
                              minlength=space.n_edges)
        for j in range(3):
            t[i, j] = np.einsum("nq,nqd,nqd->", scale, fields[i], fields[j])
    return g, t


def build_affine_system(space: EdgeSpace, materials: Materials, theta0: Theta0Solution,
                        alpha: float, epsilon: Optional[float] = None) -> AffineSystem:
    """
    Build A0, A1 and r1 for the theta1 problem.

    Args:
        space: Edge space
        materials: Materials for every region tag
        theta0: Magnetostatic solution on the same space
        alpha: Object size in metres
        epsilon: Regularisation (defaults to the one theta0 was solved with)

    Returns:
        AffineSystem on the free dofs
    """
    if theta0.coefficients.shape[0] != space.n_dof:
        raise DimensionMismatchError(
            f"theta0 has {theta0.coefficients.shape[0]} dofs, space has {space.n_dof}"
        )
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    eps = theta0.epsilon if epsilon is None else epsilon
    by_tag = materials_by_tag(materials)
    factors = region_factors(by_tag, alpha)

    curlcurl = assemble_curlcurl(space, inverse_permeability(by_tag))
    exterior = {tag: (0.0 if m.is_object else 1.0) for tag, m in by_tag.items()}
    a0_full = curlcurl + eps * assemble_mass(space, exterior) if any(exterior.values()) else curlcurl
    if any(v > 0 for v in factors.values()):
        s_full = assemble_mass(space, factors)
    else:
        s_full = sp.csr_matrix((space.n_edges, space.n_edges))

    g_full, analytic = analytic_pairings(space, factors)
    a0, _ = apply_dirichlet(a0_full, None, space)
    s_mass, g = apply_dirichlet(s_full, g_full, space)
    k_mu, _ = apply_dirichlet(curlcurl, None, space)

    x = theta0.coefficients
    sx = s_mass @ x
    s_vectors = sx + g
    pairing = x.T @ sx + x.T @ g + g.T @ x + analytic

    volumes = space.volumes
    contrast = tet_weights(space.mesh, {tag: 1.0 - 1.0 / m.mu_r for tag, m in by_tag.items()})
    object_contrast = float(np.sum(contrast * volumes))

    system = AffineSystem(space, theta0, alpha, eps, a0.tocsr(), s_mass.tocsr(), s_vectors,
                          0.5 * (pairing + pairing.T), k_mu.tocsr(), object_contrast)
    logger.info(f"Affine system built: n_dof={system.n_dof}, nnz(A0)={a0.nnz}, nnz(A1)={s_mass.nnz}")
    return system


def assemble_theta1_matrix(space: EdgeSpace, materials: Materials, alpha: float,
                           epsilon: float, omega: float) -> sp.csr_matrix:
    """A(omega) assembled directly with the per-tet weight nu, for checking the affine split."""
    by_tag = materials_by_tag(materials)
    nu = {tag: alpha ** 2 * omega * MU0 * m.sigma_star for tag, m in by_tag.items()}
    exterior = {tag: (0.0 if m.is_object else epsilon) for tag, m in by_tag.items()}
    matrix = assemble_curlcurl(space, inverse_permeability(by_tag)).astype(complex)
    if any(v > 0 for v in exterior.values()):
        matrix = matrix + assemble_mass(space, exterior)
    if any(v > 0 for v in nu.values()):
        matrix = matrix - 1j * assemble_mass(space, nu)
    reduced, _ = apply_dirichlet(matrix, None, space)
    return reduced


def solve_theta1_full(affine: AffineSystem, omega: float, tol: float = 1e-10,
                      method: str = "direct") -> np.ndarray:
    """
    Full-order theta1 solve at one frequency.

    Args:
        affine: Affine system
        omega: Angular frequency in rad/s (> 0)
        tol: Relative residual
        method: Solver method passed to solve_sparse

    Returns:
        Complex free-dof coefficients, shape (n_dof, 3)
    """
    if omega <= 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega}")
    matrix = affine.matrix(omega)
    rhs = affine.rhs(omega)
    solution = np.zeros((affine.n_dof, 3), dtype=complex)
    for i in range(3):
        try:
            solution[:, i] = solve_sparse(matrix, rhs[:, i], tol=tol, method=method)
        except SolverError as e:
            raise SolverError("theta1 solve failed", e.residual, omega=omega, direction=i + 1) from e
    return solution
