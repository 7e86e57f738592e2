"""
FEM Tools Module

Pure functions for lowest-order (Whitney) edge elements on tetrahedral
meshes: basis evaluation, sparse assembly of weighted curl-curl and mass
forms, essential boundary conditions and linear solves.

Matrices and right sides are assembled over all mesh edges; apply_dirichlet
restricts them to the free degrees of freedom.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union
import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from tools.errors import InvalidArgumentError, SolverError, UnknownRegionError
from tools.mesh_tools import LOCAL_EDGES, Material, Mesh, tet_volumes

logger = logging.getLogger(__name__)

MU0 = 4.0e-7 * np.pi
SOLVER_METHODS = ("direct", "bicgstab", "gmres")

# Symmetric 4-point rule on the reference tet, exact for quadratics
_QA, _QB = 0.5854101966249685, 0.1381966011250105
QUADRATURE_BARYCENTRIC = np.array([
    [_QA, _QB, _QB, _QB],
    [_QB, _QA, _QB, _QB],
    [_QB, _QB, _QA, _QB],
    [_QB, _QB, _QB, _QA],
])
QUADRATURE_WEIGHTS = np.full(4, 0.25)


# ============================================================================
# EDGE SPACE
# ============================================================================

@dataclass(frozen=True, eq=False)
class EdgeSpace:
    """Lowest-order edge-element space with n x u = 0 on the domain boundary."""
    mesh: Mesh
    dirichlet_flags: np.ndarray
    free_edges: np.ndarray = field(init=False, repr=False)
    edge_to_dof: np.ndarray = field(init=False, repr=False)
    gradients: np.ndarray = field(init=False, repr=False)
    volumes: np.ndarray = field(init=False, repr=False)
    curls: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        flags = np.asarray(self.dirichlet_flags, dtype=bool)
        free = np.flatnonzero(~flags)
        edge_to_dof = np.full(len(flags), -1, dtype=np.int64)
        edge_to_dof[free] = np.arange(len(free))
        gradients = barycentric_gradients(self.mesh)
        a, b = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
        curls = 2.0 * np.cross(gradients[:, a, :], gradients[:, b, :]) * self.mesh.tet_edge_signs[:, :, None]

        for name, value in (("dirichlet_flags", flags), ("free_edges", free),
                            ("edge_to_dof", edge_to_dof), ("gradients", gradients),
                            ("volumes", tet_volumes(self.mesh)), ("curls", curls)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_edges(self) -> int:
        return self.mesh.n_edges

    @property
    def n_dof(self) -> int:
        return len(self.free_edges)


def barycentric_gradients(mesh: Mesh) -> np.ndarray:
    """Constant gradients of the four barycentric coordinates per tet, shape (T, 4, 3)."""
    pts = mesh.vertices[mesh.tets]
    affine = np.concatenate([np.ones((mesh.n_tets, 4, 1)), pts], axis=2)
    coeffs = np.linalg.inv(affine)            # column k holds lambda_k's coefficients
    return np.transpose(coeffs[:, 1:, :], (0, 2, 1))


def boundary_edge_flags(mesh: Mesh) -> np.ndarray:
    """Flag edges bordering a boundary face."""
    flags = np.zeros(mesh.n_edges, dtype=bool)
    if len(mesh.boundary_faces) == 0:
        return flags
    faces = mesh.boundary_faces
    pairs = np.vstack([faces[:, [0, 1]], faces[:, [0, 2]], faces[:, [1, 2]]])
    keys = mesh.edges[:, 0] * mesh.n_vertices + mesh.edges[:, 1]
    wanted = pairs[:, 0] * mesh.n_vertices + pairs[:, 1]
    flags[np.searchsorted(keys, wanted)] = True
    return flags


def build_edge_space(mesh: Mesh, constrain_boundary: bool = True) -> EdgeSpace:
    """
    Build the edge space of a mesh.

    Args:
        mesh: Validated mesh
        constrain_boundary: Flag boundary edges as essential (False keeps every edge free)

    Returns:
        EdgeSpace with its free-dof numbering
    """
    flags = boundary_edge_flags(mesh) if constrain_boundary else np.zeros(mesh.n_edges, dtype=bool)
    space = EdgeSpace(mesh, flags)
    logger.info(f"Edge space: {space.n_edges} edges, {space.n_dof} free dofs")
    return space


def evaluate_basis(space: EdgeSpace, tet: int, barycentric: np.ndarray) -> np.ndarray:
    """
    Values of the six signed Whitney functions of one tet.

    Args:
        space: Edge space
        tet: Tet index
        barycentric: Points as barycentric coordinates, shape (n, 4)

    Returns:
        Array (n, 6, 3)
    """
    lam = np.atleast_2d(barycentric)
    grads = space.gradients[tet]
    a, b = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    values = lam[:, a, None] * grads[None, b, :] - lam[:, b, None] * grads[None, a, :]
    return values * space.mesh.tet_edge_signs[tet][None, :, None]


def quadrature_points(mesh: Mesh, tets: Optional[np.ndarray] = None) -> np.ndarray:
    """Physical quadrature points, shape (n_tets, 4, 3)."""
    idx = np.arange(mesh.n_tets) if tets is None else np.asarray(tets)
    pts = mesh.vertices[mesh.tets[idx]]
    return np.einsum("qk,tkd->tqd", QUADRATURE_BARYCENTRIC, pts)


def whitney_at_quadrature(space: EdgeSpace, tets: Optional[np.ndarray] = None) -> np.ndarray:
    """Signed Whitney values at the quadrature points, shape (n_tets, 4, 6, 3)."""
    idx = np.arange(space.mesh.n_tets) if tets is None else np.asarray(tets)
    grads = space.gradients[idx]
    a, b = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    lam = QUADRATURE_BARYCENTRIC
    values = (lam[None, :, a, None] * grads[:, None, b, :]
              - lam[None, :, b, None] * grads[:, None, a, :])
    return values * space.mesh.tet_edge_signs[idx][:, None, :, None]


# ============================================================================
# ASSEMBLY
# ============================================================================

def materials_by_tag(materials: Union[Mapping[str, Material], Iterable[Material]]) -> Dict[str, Material]:
    if isinstance(materials, Mapping):
        return dict(materials)
    return {m.region_tag: m for m in materials}


def tet_weights(mesh: Mesh, weight_per_region: Mapping[str, float]) -> np.ndarray:
    """Per-tet weight looked up from the region tag."""
    weights = np.empty(mesh.n_tets)
    for tag in mesh.region_tags():
        if tag not in weight_per_region:
            raise UnknownRegionError(f"No weight given for region {tag!r}")
        weights[mesh.tags == tag] = float(weight_per_region[tag])
    return weights


def _check_weights(weights: np.ndarray) -> None:
    if np.any(weights < 0):
        raise InvalidArgumentError("Region weights must be non-negative")
    if weights.size and not np.any(weights > 0):
        raise InvalidArgumentError("At least one region weight must be positive")


def _scatter(space: EdgeSpace, local: np.ndarray) -> sp.csr_matrix:
    """Assemble per-tet (6, 6) blocks into a global edge-by-edge CSR matrix."""
    idx = space.mesh.tet_edges
    rows = np.broadcast_to(idx[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(idx[:, None, :], local.shape).ravel()
    n = space.n_edges
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def local_curlcurl(space: EdgeSpace) -> np.ndarray:
    """Unweighted element curl-curl blocks, shape (T, 6, 6)."""
    return space.volumes[:, None, None] * np.einsum("tid,tjd->tij", space.curls, space.curls)


def local_mass(space: EdgeSpace) -> np.ndarray:
    """Unweighted element mass blocks, shape (T, 6, 6), exact for Whitney functions."""
    g = space.gradients
    gg = np.einsum("tid,tjd->tij", g, g)
    a, b = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    ia, ib = a[:, None], b[:, None]
    ic, id_ = a[None, :], b[None, :]

    def delta(x, y):
        return 1.0 + (x == y)

    # int lambda_p lambda_q = vol (1 + delta_pq) / 20
    block = (delta(ia, ic) * gg[:, ib, id_] - delta(ia, id_) * gg[:, ib, ic]
             - delta(ib, ic) * gg[:, ia, id_] + delta(ib, id_) * gg[:, ia, ic])
    signs = space.mesh.tet_edge_signs
    return block * (space.volumes / 20.0)[:, None, None] * signs[:, :, None] * signs[:, None, :]


def assemble_curlcurl(space: EdgeSpace, weight_per_region: Mapping[str, float]) -> sp.csr_matrix:
    """
    Assemble K_kl = sum_T w(region) * int_T curl N_k . curl N_l.

    Args:
        space: Edge space
        weight_per_region: Region tag -> non-negative weight (e.g. 1/mu_r)

    Returns:
        Real symmetric PSD matrix over all edges
    """
    weights = tet_weights(space.mesh, weight_per_region)
    _check_weights(weights)
    matrix = _scatter(space, local_curlcurl(space) * weights[:, None, None])
    logger.debug(f"Curl-curl assembled: nnz={matrix.nnz}")
    return matrix


def assemble_mass(space: EdgeSpace, weight_per_region: Mapping[str, float]) -> sp.csr_matrix:
    """
    Assemble M_kl = sum_T w(region) * int_T N_k . N_l.

    Args:
        space: Edge space
        weight_per_region: Region tag -> non-negative weight, at least one positive

    Returns:
        Real symmetric PSD matrix over all edges
    """
    weights = tet_weights(space.mesh, weight_per_region)
    _check_weights(weights)
    matrix = _scatter(space, local_mass(space) * weights[:, None, None])
    logger.debug(f"Mass assembled: nnz={matrix.nnz}")
    return matrix


def assemble_theta0_rhs(space: EdgeSpace, direction: int,
                        materials: Union[Mapping[str, Material], Iterable[Material]]) -> np.ndarray:
    """
    Right side b_k = 2 int_B (1 - 1/mu_r) e_i . curl N_k of the magnetostatic problem.

    Args:
        space: Edge space
        direction: Field direction i in {1, 2, 3}
        materials: Materials covering every region tag

    Returns:
        Real vector over all edges (restrict with apply_dirichlet)
    """
    if direction not in (1, 2, 3):
        raise InvalidArgumentError(f"direction must be 1, 2 or 3, got {direction}")
    by_tag = materials_by_tag(materials)
    contrast = tet_weights(space.mesh, {tag: 1.0 - 1.0 / m.mu_r for tag, m in by_tag.items()})
    coeff = 2.0 * contrast * space.volumes
    local = coeff[:, None] * space.curls[:, :, direction - 1]
    return np.bincount(space.mesh.tet_edges.ravel(), weights=local.ravel(), minlength=space.n_edges)


def discrete_gradient(mesh: Mesh) -> sp.csr_matrix:
    """
    Edge-by-vertex incidence matrix G: column v holds the edge coefficients of grad(hat_v).

    Entry is +1 where v is the higher-index end of the edge and -1 where it is the lower.
    """
    n = mesh.n_edges
    rows = np.concatenate([np.arange(n), np.arange(n)])
    cols = np.concatenate([mesh.edges[:, 1], mesh.edges[:, 0]])
    data = np.concatenate([np.ones(n), -np.ones(n)])
    return sp.coo_matrix((data, (rows, cols)), shape=(n, mesh.n_vertices)).tocsr()


def default_epsilon(space: EdgeSpace, factor: float = 1e-10) -> float:
    """Regularisation scaled to the mean diagonal of the unit-weight curl-curl matrix."""
    diag = np.einsum("tii->ti", local_curlcurl(space))
    per_edge = np.bincount(space.mesh.tet_edges.ravel(), weights=diag.ravel(), minlength=space.n_edges)
    return float(factor * per_edge.mean())


def check_symmetry(matrix: sp.spmatrix, hermitian: bool = False, tol: float = 1e-12) -> bool:
    """True when the matrix equals its transpose (conjugate transpose if hermitian) to tol relative."""
    other = matrix.conj().T if hermitian else matrix.T
    diff = abs(matrix - other)
    scale = abs(matrix).max() if matrix.nnz else 0.0
    return bool(diff.max() <= tol * scale) if diff.nnz else True


# ============================================================================
# BOUNDARY CONDITIONS
# ============================================================================

def restrict(vector: np.ndarray, space: EdgeSpace) -> np.ndarray:
    """Edge-indexed vector (or stacked columns) restricted to free dofs."""
    return np.asarray(vector)[space.free_edges]


def extend(vector: np.ndarray, space: EdgeSpace) -> np.ndarray:
    """Free-dof vector extended by zeros on the constrained edges."""
    values = np.asarray(vector)
    full = np.zeros((space.n_edges,) + values.shape[1:], dtype=values.dtype)
    full[space.free_edges] = values
    return full


def apply_dirichlet(matrix: sp.spmatrix, rhs: Optional[np.ndarray],
                    space: EdgeSpace) -> Tuple[sp.csr_matrix, Optional[np.ndarray]]:
    """
    Remove the rows and columns of constrained edges.

    Args:
        matrix: Edge-by-edge matrix
        rhs: Edge-indexed right side or None
        space: Edge space with its boundary flags

    Returns:
        (free-by-free matrix, free right side)
    """
    free = space.free_edges
    reduced = sp.csr_matrix(matrix)[free][:, free]
    return reduced, (None if rhs is None else restrict(rhs, space))


# ============================================================================
# LINEAR SOLVES
# ============================================================================

def _relative_residual(matrix: sp.spmatrix, x: np.ndarray, b: np.ndarray) -> float:
    norm_b = np.linalg.norm(b, axis=0)
    norm_r = np.linalg.norm(matrix @ x - b, axis=0)
    ratio = np.where(norm_b > 0, norm_r / np.where(norm_b > 0, norm_b, 1.0), norm_r)
    return float(np.max(ratio)) if np.size(ratio) else 0.0


def solve_sparse(matrix: sp.spmatrix, rhs: np.ndarray, tol: float = 1e-10,
                 method: str = "direct", maxiter: int = 2000, refinement_steps: int = 3) -> np.ndarray:
    """
    Solve A x = b to a relative residual of tol.

    Complex-symmetric systems are handled without assuming Hermitian structure.

    Args:
        matrix: Square sparse matrix
        rhs: Right side vector, or matrix of right-side columns
        tol: Required relative residual ||Ax - b|| / ||b||
        method: "direct" (sparse LU with iterative refinement), "bicgstab" or "gmres" (ILU-preconditioned)
        maxiter: Iteration cap for the Krylov methods
        refinement_steps: Refinement sweeps for the direct method

    Returns:
        Solution with the shape of rhs

    Raises:
        SolverError: residual above tol after the solve
    """
    b = np.asarray(rhs)
    n = matrix.shape[0]
    dtype = np.result_type(matrix.dtype, b.dtype, np.float64)
    if n == 0:
        return np.zeros(b.shape, dtype=dtype)
    if not np.any(b):
        return np.zeros(b.shape, dtype=dtype)

    a = sp.csc_matrix(matrix, dtype=dtype)
    if method == "direct":
        try:
            lu = spla.splu(a)
        except RuntimeError as e:
            raise SolverError(f"Sparse factorisation failed: {e}", residual=float("inf")) from e
        x = lu.solve(b.astype(dtype))
        for _ in range(refinement_steps):
            if _relative_residual(a, x, b) <= tol:
                break
            x = x + lu.solve((b - a @ x).astype(dtype))
    elif method in ("bicgstab", "gmres"):
        ilu = spla.spilu(a)
        precond = spla.LinearOperator(a.shape, ilu.solve, dtype=dtype)
        krylov = spla.bicgstab if method == "bicgstab" else spla.gmres
        columns = b.reshape(n, -1)
        x = np.empty(columns.shape, dtype=dtype)
        for k in range(columns.shape[1]):
            x[:, k], info = krylov(a, columns[:, k].astype(dtype), rtol=tol, M=precond, maxiter=maxiter)
            if info < 0:
                raise SolverError(f"{method} breakdown (info={info})",
                                  residual=_relative_residual(a, x[:, k], columns[:, k]))
        x = x.reshape(b.shape)
    else:
        raise InvalidArgumentError(f"Unknown solver method: {method}")

    residual = _relative_residual(a, x, b)
    if residual > tol:
        raise SolverError(f"{method} solve did not reach tol={tol:.1e}", residual=residual)
    logger.debug(f"Solved n={n} with {method}: residual={residual:.2e}")
    return x
