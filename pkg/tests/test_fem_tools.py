import numpy as np
import pytest
import scipy.sparse as sp

from tools.errors import InvalidArgumentError, SolverError, UnknownRegionError
from tools.fem_tools import (
    QUADRATURE_BARYCENTRIC,
    apply_dirichlet,
    assemble_curlcurl,
    assemble_mass,
    assemble_theta0_rhs,
    boundary_edge_flags,
    build_edge_space,
    check_symmetry,
    default_epsilon,
    discrete_gradient,
    evaluate_basis,
    extend,
    restrict,
    solve_sparse,
    whitney_at_quadrature,
)
from tools.mesh_tools import EXTERIOR_MATERIAL, EXTERIOR_TAG, Material, Shape, generate_box_mesh, tag_regions

UNIT = {EXTERIOR_TAG: 1.0}


def constant_field_coefficients(mesh, field):
    """Edge interpolant of a constant field: u . (x_b - x_a)."""
    tangents = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
    return tangents @ np.asarray(field, dtype=float)


# ============================================================================
# SPACE AND BASIS
# ============================================================================

def test_single_cell_has_one_interior_edge():
    mesh = generate_box_mesh(1.0, 1)
    flags = boundary_edge_flags(mesh)
    assert flags.sum() == 18
    space = build_edge_space(mesh)
    assert space.n_dof == 1
    assert space.n_edges == 19


def test_unconstrained_space_keeps_every_edge(single_tet):
    space = build_edge_space(single_tet, constrain_boundary=False)
    assert space.n_dof == 6
    assert np.array_equal(space.edge_to_dof, np.arange(6))


def test_whitney_tangential_moments_are_unit(single_tet):
    # Along global edge (a, b) the basis has tangential component 1 / |x_b - x_a| on that edge only
    space = build_edge_space(single_tet, constrain_boundary=False)
    mesh = single_tet
    for e, (a, b) in enumerate(mesh.edges):
        lam = np.zeros((1, 4))
        lam[0, a], lam[0, b] = 0.5, 0.5
        values = evaluate_basis(space, 0, lam)[0]
        local = list(mesh.tet_edges[0]).index(e)
        tangent = mesh.vertices[b] - mesh.vertices[a]
        moments = values @ tangent
        assert np.isclose(moments[local], 1.0)
        assert np.allclose(np.delete(moments, local), 0.0)


def test_quadrature_values_match_pointwise_evaluation(single_tet):
    space = build_edge_space(single_tet, constrain_boundary=False)
    at_quadrature = whitney_at_quadrature(space)[0]
    pointwise = evaluate_basis(space, 0, QUADRATURE_BARYCENTRIC)
    assert np.allclose(at_quadrature, pointwise)


# ============================================================================
# ASSEMBLY
# ============================================================================

def test_single_tet_matrices(single_tet):
    space = build_edge_space(single_tet, constrain_boundary=False)
    mass = assemble_mass(space, {"obj": 1.0}).toarray()
    curl = assemble_curlcurl(space, {"obj": 1.0}).toarray()
    assert mass.shape == curl.shape == (6, 6)
    assert np.allclose(mass, mass.T)
    assert np.allclose(curl, curl.T)
    assert np.all(np.linalg.eigvalsh(mass) > 0)
    eigs = np.linalg.eigvalsh(curl)
    assert np.sum(eigs > 1e-10 * eigs.max()) == 3
    assert np.all(eigs > -1e-12)


def test_mass_reproduces_constant_fields(unit_box):
    space = build_edge_space(unit_box, constrain_boundary=False)
    mass = assemble_mass(space, UNIT)
    for field in ([1, 0, 0], [0, 2, 0], [1, -1, 3]):
        c = constant_field_coefficients(unit_box, field)
        assert np.isclose(c @ (mass @ c), 8.0 * np.dot(field, field))


def test_curlcurl_annihilates_gradients(unit_box):
    space = build_edge_space(unit_box, constrain_boundary=False)
    curl = assemble_curlcurl(space, UNIT)
    gradient = discrete_gradient(unit_box)
    assert gradient.shape == (unit_box.n_edges, unit_box.n_vertices)
    assert np.abs((curl @ gradient).toarray()).max() <= 1e-12
    constant = constant_field_coefficients(unit_box, [0.3, -1.0, 2.0])
    assert np.abs(curl @ constant).max() <= 1e-12


def test_weights_scale_regions():
    mesh = tag_regions(generate_box_mesh(2.0, 2), [Shape.box((0, 0, 0), (2, 2, 2), "obj")])
    space = build_edge_space(mesh, constrain_boundary=False)
    both = assemble_mass(space, {"obj": 3.0, EXTERIOR_TAG: 1.0})
    parts = 3.0 * assemble_mass(space, {"obj": 1.0, EXTERIOR_TAG: 0.0}) + assemble_mass(space, {"obj": 0.0, EXTERIOR_TAG: 1.0})
    assert np.allclose(both.toarray(), parts.toarray())


def test_weight_validation(unit_box):
    space = build_edge_space(unit_box)
    with pytest.raises(InvalidArgumentError):
        assemble_mass(space, {EXTERIOR_TAG: -1.0})
    with pytest.raises(InvalidArgumentError):
        assemble_curlcurl(space, {EXTERIOR_TAG: 0.0})
    with pytest.raises(UnknownRegionError):
        assemble_mass(space, {"obj": 1.0})


def test_theta0_rhs_vanishes_without_contrast():
    mesh = tag_regions(generate_box_mesh(2.0, 4), [Shape.sphere((0, 0, 0), 1.2, "obj")])
    space = build_edge_space(mesh)
    materials = [Material("obj", mu_r=1.0), EXTERIOR_MATERIAL]
    for i in (1, 2, 3):
        assert not np.any(assemble_theta0_rhs(space, i, materials))
    with pytest.raises(InvalidArgumentError):
        assemble_theta0_rhs(space, 4, materials)


def test_theta0_rhs_is_supported_on_object_edges():
    mesh = tag_regions(generate_box_mesh(2.0, 4), [Shape.sphere((0, 0, 0), 1.2, "obj")])
    space = build_edge_space(mesh)
    rhs = assemble_theta0_rhs(space, 1, [Material("obj", mu_r=1.5), EXTERIOR_MATERIAL])
    object_edges = np.unique(mesh.tet_edges[mesh.tags == "obj"])
    assert np.any(rhs[object_edges])
    outside = np.setdiff1d(np.arange(mesh.n_edges), object_edges)
    assert not np.any(rhs[outside])


def test_default_epsilon_is_small_and_positive(unit_box):
    space = build_edge_space(unit_box)
    eps = default_epsilon(space)
    assert 0 < eps < 1e-8
    assert np.isclose(default_epsilon(space, 1.0), eps * 1e10)


def test_check_symmetry():
    a = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 3.0]]))
    assert check_symmetry(a)
    assert not check_symmetry(sp.csr_matrix(np.array([[2.0, 1.0], [0.0, 3.0]])))
    h = sp.csr_matrix(np.array([[2.0, 1j], [-1j, 3.0]]))
    assert check_symmetry(h, hermitian=True)
    assert not check_symmetry(h)


# ============================================================================
# BOUNDARY CONDITIONS AND SOLVES
# ============================================================================

def test_restrict_extend(unit_box):
    space = build_edge_space(unit_box)
    values = np.arange(space.n_edges, dtype=float)
    free = restrict(values, space)
    full = extend(free, space)
    assert np.array_equal(full[space.free_edges], values[space.free_edges])
    assert not np.any(full[space.dirichlet_flags])


def test_fully_constrained_system_is_empty(single_tet):
    space = build_edge_space(single_tet)
    assert space.n_dof == 0
    matrix, rhs = apply_dirichlet(assemble_mass(space, {"obj": 1.0}), np.ones(6), space)
    assert matrix.shape == (0, 0)
    assert solve_sparse(matrix, rhs).shape == (0,)


def _test_system(n=40, complex_shift=0.0):
    rng = np.random.default_rng(3)
    a = sp.random(n, n, density=0.1, random_state=rng)
    a = a + a.T + sp.eye(n) * (n / 2.0)
    if complex_shift:
        a = a - 1j * complex_shift * sp.eye(n)
    return sp.csr_matrix(a), rng.standard_normal(n)


@pytest.mark.parametrize("method", ["direct", "bicgstab", "gmres"])
def test_solve_sparse_reaches_tolerance(method):
    a, b = _test_system(complex_shift=0.5)
    x = solve_sparse(a, b, tol=1e-10, method=method)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_sparse_handles_columns_and_zero_rhs():
    a, b = _test_system()
    rhs = np.column_stack([b, 2 * b])
    x = solve_sparse(a, rhs)
    assert x.shape == (40, 2)
    assert np.allclose(x[:, 1], 2 * x[:, 0])
    assert not np.any(solve_sparse(a, np.zeros(40)))


def test_solve_sparse_rejects_unknown_method():
    a, b = _test_system()
    with pytest.raises(InvalidArgumentError):
        solve_sparse(a, b, method="cg")


def test_singular_system_raises_solver_error():
    a = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(SolverError):
        solve_sparse(a, np.array([1.0, 1.0]))
