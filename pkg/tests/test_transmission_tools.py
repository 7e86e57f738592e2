import numpy as np
import pytest

from conftest import ALPHA, make_materials, make_model
from tools.errors import DimensionMismatchError, InvalidArgumentError
from tools.fem_tools import build_edge_space, check_symmetry
from tools.mesh_tools import generate_box_mesh
from tools.mpt_tools import full_order_sample
from tools.transmission_tools import (
    Theta0Solution,
    assemble_theta1_matrix,
    build_affine_system,
    region_factors,
    solve_theta0,
    solve_theta1_full,
)


def test_region_factors():
    factors = region_factors(make_materials(sigma_star=2e6), 0.01)
    assert np.isclose(factors["obj"], 0.01 ** 2 * 4e-7 * np.pi * 2e6)
    assert factors["air"] == 0.0


def test_affine_split_matches_direct_assembly(cube_model):
    affine = cube_model["affine"]
    for omega in (1e2, 3.7e4, 1e7):
        direct = assemble_theta1_matrix(cube_model["space"], cube_model["materials"], ALPHA, affine.epsilon, omega)
        split = affine.matrix(omega)
        scale = abs(direct).max()
        assert abs(direct - split).max() <= 1e-12 * scale


def test_system_matrices_are_symmetric(cube_model):
    affine = cube_model["affine"]
    assert check_symmetry(affine.a0)
    assert check_symmetry(affine.s_mass)
    assert check_symmetry(affine.matrix(1e5))
    assert not check_symmetry(affine.matrix(1e5), hermitian=True)


def test_rhs_is_linear_in_omega(cube_model):
    affine = cube_model["affine"]
    assert np.allclose(affine.rhs(2e3), 2.0 * affine.rhs(1e3))
    assert np.allclose(affine.r1, 1j * affine.s_vectors)


def test_theta0_vanishes_without_contrast():
    model = make_model(mu_r=1.0, sigma_star=1e6)
    assert not np.any(model["theta0"].coefficients)


def test_theta0_is_real_and_constrained(cube_model):
    theta0 = cube_model["theta0"]
    space = cube_model["space"]
    assert theta0.coefficients.shape == (space.n_dof, 3)
    assert np.isrealobj(theta0.coefficients)
    full = theta0.full(1)
    assert not np.any(full[space.dirichlet_flags])


def test_theta0_rejects_non_positive_epsilon(cube_model):
    with pytest.raises(InvalidArgumentError):
        solve_theta0(cube_model["space"], cube_model["materials"], 0.0)


def test_theta1_solve_residual(cube_model):
    affine = cube_model["affine"]
    omega = 5e4
    q = solve_theta1_full(affine, omega)
    assert q.shape == (affine.n_dof, 3)
    residual = affine.matrix(omega) @ q - affine.rhs(omega)
    for i in range(3):
        assert np.linalg.norm(residual[:, i]) <= 1e-10 * np.linalg.norm(affine.rhs(omega)[:, i])


def test_theta1_vanishes_without_conductivity(insulating_model):
    affine = insulating_model["affine"]
    assert not np.any(affine.s_vectors)
    assert not np.any(solve_theta1_full(affine, 1e5))


def test_theta1_rejects_non_positive_frequency(cube_model):
    with pytest.raises(InvalidArgumentError):
        solve_theta1_full(cube_model["affine"], 0.0)


def test_affine_system_dimension_checks(cube_model):
    other = build_edge_space(generate_box_mesh(2.0, 3))
    foreign = Theta0Solution(other, np.zeros((other.n_dof, 3)), 1e-10)
    with pytest.raises(DimensionMismatchError):
        build_affine_system(cube_model["space"], cube_model["materials"], foreign, ALPHA)
    with pytest.raises(InvalidArgumentError):
        build_affine_system(cube_model["space"], cube_model["materials"], cube_model["theta0"], 0.0)


def test_theta0_pairing_is_symmetric_positive(cube_model):
    t = cube_model["affine"].theta0_pairing
    assert np.allclose(t, t.T)
    assert np.all(np.linalg.eigvalsh(t) > 0)


def test_outputs_are_insensitive_to_regularisation(cube_model):
    space, materials = cube_model["space"], cube_model["materials"]
    epsilon = cube_model["affine"].epsilon
    stiffer = build_affine_system(space, materials, solve_theta0(space, materials, 10.0 * epsilon), ALPHA)
    assert stiffer.epsilon == 10.0 * epsilon
    omega = 1e4
    base = full_order_sample(cube_model["affine"], solve_theta1_full(cube_model["affine"], omega), omega)
    other = full_order_sample(stiffer, solve_theta1_full(stiffer, omega), omega)
    for a, b in ((base.n0, other.n0), (base.r, other.r), (base.i, other.i)):
        assert np.abs(a - b).max() <= 1e-6 * np.abs(a).max()
