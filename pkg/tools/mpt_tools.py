"""
MPT Tools Module

Pure functions for turning transmission-problem solutions into the
magnetic polarizability tensor splitting M = N0 + R + i I, and for the
eigenvalues used as spectral signatures.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple
import logging

import numpy as np

from tools.errors import DimensionMismatchError, InvalidArgumentError
from tools.fem_tools import apply_dirichlet, assemble_curlcurl, materials_by_tag, tet_weights
from tools.transmission_tools import AffineSystem, Materials, Theta0Solution, inverse_permeability

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MPTSample:
    """Tensors at one frequency; n0, r and i are stored symmetrised (m^3)."""
    omega: float
    n0: np.ndarray
    r: np.ndarray
    i: np.ndarray
    asymmetry_norm: float = 0.0
    delta: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None
    eigs_real: np.ndarray = field(init=False)
    eigs_imag: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eigs_real", tensor_eigenvalues(self.n0 + self.r))
        object.__setattr__(self, "eigs_imag", tensor_eigenvalues(self.i))

    @property
    def tensor(self) -> np.ndarray:
        """Complex tensor N0 + R + i I."""
        return self.n0 + self.r + 1j * self.i

    def with_delta(self, delta: np.ndarray) -> "MPTSample":
        return replace(self, delta=np.asarray(delta, dtype=float))


def symmetrize(tensor: np.ndarray) -> np.ndarray:
    return 0.5 * (tensor + tensor.T)


def asymmetry(tensor: np.ndarray) -> float:
    """max |(T - T^T)_jk|"""
    return float(np.max(np.abs(tensor - tensor.T)))


def tensor_eigenvalues(tensor: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """
    Ascending eigenvalues of a symmetric 3x3 tensor.

    Raises:
        InvalidArgumentError: the input is asymmetric beyond tol * max|T|
    """
    t = np.asarray(tensor, dtype=float)
    if t.shape != (3, 3):
        raise DimensionMismatchError(f"Expected a 3x3 tensor, got shape {t.shape}")
    scale = np.max(np.abs(t))
    if asymmetry(t) > tol * scale:
        raise InvalidArgumentError(f"Tensor is not symmetric: asymmetry {asymmetry(t):.3e}")
    return np.linalg.eigvalsh(symmetrize(t))


# ============================================================================
# TENSOR FORMULAE
# ============================================================================

def compute_n0(theta0: Theta0Solution, materials: Materials, alpha: float) -> np.ndarray:
    """
    N0_ij = alpha^3 delta_ij int_B (1 - 1/mu_r) + alpha^3/4 int mu^-1 curl th_i . curl th_j.

    Args:
        theta0: Magnetostatic solution
        materials: Materials for every region tag
        alpha: Object size in metres

    Returns:
        Symmetric 3x3 tensor in m^3
    """
    space = theta0.space
    by_tag = materials_by_tag(materials)
    curlcurl, _ = apply_dirichlet(assemble_curlcurl(space, inverse_permeability(by_tag)), None, space)
    contrast = tet_weights(space.mesh, {tag: 1.0 - 1.0 / m.mu_r for tag, m in by_tag.items()})
    volume_term = float(np.sum(contrast * space.volumes))
    x = theta0.coefficients
    n0 = alpha ** 3 * (volume_term * np.eye(3) + 0.25 * (x.T @ (curlcurl @ x)))
    return symmetrize(n0)


def n0_from_affine(affine: AffineSystem) -> np.ndarray:
    """N0 from the pieces already stored on the affine system."""
    x = affine.theta0.coefficients
    n0 = affine.alpha ** 3 * (affine.object_contrast * np.eye(3) + 0.25 * (x.T @ (affine.curlcurl_mu @ x)))
    return symmetrize(n0)


def _check_solution(affine: AffineSystem, theta1: np.ndarray) -> np.ndarray:
    q = np.asarray(theta1)
    if q.shape != (affine.n_dof, 3):
        raise DimensionMismatchError(f"theta1 has shape {q.shape}, expected ({affine.n_dof}, 3)")
    return q


def raw_r_i(affine: AffineSystem, theta1: np.ndarray, omega: float) -> Tuple[np.ndarray, np.ndarray]:
    """Unsymmetrised R and I from the curl-curl and nu-weighted pairings."""
    q = _check_solution(affine, theta1)
    scale = affine.alpha ** 3 / 4.0
    qh = q.conj().T
    # The epsilon block is part of the pairing so the alternative form matches exactly
    r = -scale * np.real(qh @ (affine.a0 @ q))
    s = affine.s_vectors
    i = scale * omega * np.real(qh @ (affine.s_mass @ q) + qh @ s + s.T @ q + affine.theta0_pairing)
    return r, i


def compute_r_i(affine: AffineSystem, theta1: np.ndarray, omega: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    R and I at one frequency from the field pairings over the whole domain and the object.

    Args:
        affine: Affine system the solution was computed with
        theta1: Free-dof solution, shape (n_dof, 3)
        omega: Angular frequency (rad/s)

    Returns:
        (R, I, asymmetry_norm) with R and I symmetrised
    """
    r, i = raw_r_i(affine, theta1, omega)
    return symmetrize(r), symmetrize(i), max(asymmetry(r), asymmetry(i))


def compute_r_i_alt(affine: AffineSystem, theta1: np.ndarray, omega: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    R and I from the object-only pairings with theta0.

    R_ij = -alpha^3/4 <nu Im theta1_j, theta0_i>,
    I_ij = alpha^3/4 (<nu Re theta1_j, theta0_i> + <nu theta0_j, theta0_i>).
    """
    q = _check_solution(affine, theta1)
    scale = affine.alpha ** 3 * omega / 4.0
    pairing = affine.s_vectors.T @ q
    r = -scale * np.imag(pairing)
    i = scale * (np.real(pairing) + affine.theta0_pairing)
    return symmetrize(r), symmetrize(i), max(asymmetry(r), asymmetry(i))


def make_sample(omega: float, n0: np.ndarray, r: np.ndarray, i: np.ndarray,
                asymmetry_norm: float = 0.0, delta: Optional[np.ndarray] = None,
                kappa: Optional[np.ndarray] = None) -> MPTSample:
    return MPTSample(float(omega), np.asarray(n0, float), np.asarray(r, float), np.asarray(i, float),
                     float(asymmetry_norm), delta, kappa)


def full_order_sample(affine: AffineSystem, theta1: np.ndarray, omega: float,
                      n0: Optional[np.ndarray] = None) -> MPTSample:
    """MPTSample from a full-order solution."""
    n0 = n0_from_affine(affine) if n0 is None else n0
    r, i, asym = compute_r_i(affine, theta1, omega)
    return make_sample(omega, n0, r, i, asym)
