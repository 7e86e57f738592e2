import numpy as np
import pytest

from conftest import ALPHA, make_model
from tools.errors import DimensionMismatchError, InvalidArgumentError
from tools.mpt_tools import (
    asymmetry,
    compute_n0,
    compute_r_i,
    compute_r_i_alt,
    full_order_sample,
    make_sample,
    n0_from_affine,
    symmetrize,
    tensor_eigenvalues,
)
from tools.transmission_tools import solve_theta1_full


def test_symmetrize_and_asymmetry():
    t = np.array([[1.0, 2.0, 0.0], [4.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert asymmetry(t) == 2.0
    s = symmetrize(t)
    assert np.allclose(s, s.T)
    assert s[0, 1] == 3.0


def test_eigenvalues_are_ascending():
    t = np.diag([3.0, -1.0, 2.0])
    assert np.allclose(tensor_eigenvalues(t), [-1.0, 2.0, 3.0])


def test_eigenvalues_reject_bad_input():
    with pytest.raises(InvalidArgumentError):
        tensor_eigenvalues(np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        tensor_eigenvalues(np.eye(2))


def test_sample_carries_eigenvalues_and_delta():
    n0 = np.eye(3)
    r = np.diag([-0.1, -0.2, -0.3])
    i = np.diag([0.3, 0.2, 0.1])
    sample = make_sample(10.0, n0, r, i)
    assert np.allclose(sample.eigs_real, [0.7, 0.8, 0.9])
    assert np.allclose(sample.eigs_imag, [0.1, 0.2, 0.3])
    assert np.allclose(sample.tensor, n0 + r + 1j * i)
    assert sample.delta is None
    certified = sample.with_delta(np.full((3, 3), 1e-3))
    assert certified.delta[0, 0] == 1e-3
    assert certified.omega == sample.omega


def test_n0_routes_agree(cube_model):
    direct = compute_n0(cube_model["theta0"], cube_model["materials"], ALPHA)
    stored = n0_from_affine(cube_model["affine"])
    assert np.allclose(direct, stored, rtol=1e-12, atol=0.0)
    assert np.allclose(direct, direct.T)


def test_n0_positive_for_permeable_object(cube_model):
    assert np.all(np.linalg.eigvalsh(n0_from_affine(cube_model["affine"])) > 0)


def test_n0_vanishes_without_contrast():
    model = make_model(mu_r=1.0, sigma_star=1e6)
    assert not np.any(n0_from_affine(model["affine"]))


def test_cube_n0_diagonal_is_permutation_invariant(cube_model):
    # the mesh and the cube are both invariant under permutations of the axes
    diag = np.diag(n0_from_affine(cube_model["affine"]))
    assert np.allclose(diag, diag[0], rtol=1e-6, atol=0.0)


def test_conductor_free_object_has_no_eddy_terms(insulating_model):
    affine = insulating_model["affine"]
    sample = full_order_sample(affine, solve_theta1_full(affine, 1e4), 1e4)
    assert not np.any(sample.r)
    assert not np.any(sample.i)


def test_tensor_forms_agree(cube_model):
    affine = cube_model["affine"]
    for omega in (1e3, 1e5):
        q = solve_theta1_full(affine, omega)
        r, i, asym = compute_r_i(affine, q, omega)
        r_alt, i_alt, _ = compute_r_i_alt(affine, q, omega)
        scale = max(np.abs(r).max(), np.abs(i).max())
        assert np.abs(r - r_alt).max() <= 1e-6 * scale
        assert np.abs(i - i_alt).max() <= 1e-6 * scale
        assert asym <= 1e-6 * scale


def test_dissipation_is_positive(cube_model):
    affine = cube_model["affine"]
    sample = full_order_sample(affine, solve_theta1_full(affine, 1e4), 1e4)
    assert np.all(sample.eigs_imag > 0)
    assert np.all(np.diag(sample.r) < 0)


def test_solution_shape_is_checked(cube_model):
    with pytest.raises(DimensionMismatchError):
        compute_r_i(cube_model["affine"], np.zeros((3, 3)), 1e3)


@pytest.mark.slow
def test_n0_converges_under_refinement():
    n0 = [n0_from_affine(make_model(refinement=level)["affine"]) for level in range(3)]
    steps = [np.abs(b - a).max() for a, b in zip(n0, n0[1:])]
    assert steps[1] < steps[0]
    assert steps[1] <= 0.1 * np.abs(n0[-1]).max()
