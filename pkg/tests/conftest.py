import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from tools.fem_tools import build_edge_space, default_epsilon
from tools.mesh_tools import (
    EXTERIOR_MATERIAL,
    Material,
    Mesh,
    Shape,
    generate_box_mesh,
    refine_toward_object,
    tag_regions,
)
from tools.transmission_tools import build_affine_system, solve_theta0


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


ALPHA = 0.01
OBJECT_BOX = Shape.box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), "obj")


def make_materials(mu_r=2.0, sigma_star=1e6):
    return (Material("obj", mu_r=mu_r, sigma_star=sigma_star), EXTERIOR_MATERIAL)


def make_model(mu_r=2.0, sigma_star=1e6, alpha=ALPHA, divisions=4, refinement=0):
    """Cube object [-1, 1]^3 inside [-2, 2]^3, Kuhn mesh with unit cells."""
    mesh = refine_toward_object(tag_regions(generate_box_mesh(2.0, divisions), [OBJECT_BOX]), refinement)
    space = build_edge_space(mesh)
    materials = make_materials(mu_r, sigma_star)
    epsilon = default_epsilon(space)
    theta0 = solve_theta0(space, materials, epsilon)
    affine = build_affine_system(space, materials, theta0, alpha, epsilon)
    return {"mesh": mesh, "space": space, "materials": materials, "theta0": theta0, "affine": affine}


@pytest.fixture
def single_tet():
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return Mesh(vertices, np.array([[0, 1, 2, 3]]), np.array(["obj"], dtype=object))


@pytest.fixture
def unit_box():
    return generate_box_mesh(1.0, 2)


@pytest.fixture(scope="session")
def cube_model():
    return make_model()


@pytest.fixture(scope="session")
def insulating_model():
    return make_model(mu_r=2.0, sigma_star=0.0)


@pytest.fixture
def sphere_config_document():
    return {
        "object": {"alpha": ALPHA},
        "mesh": {
            "half_width": 2.0,
            "divisions": 4,
            "refinement_levels": 0,
            "shapes": [{"sphere": {"center": [0.0, 0.0, 0.0], "radius": 1.2}, "tag": "sphere"}],
        },
        "materials": {"sphere": {"mu_r": 1.5, "sigma_star": 1e6}},
        "sweep": {"omega_min": 1e2, "omega_max": 1e6, "snapshots": 5, "spacing": "log", "outputs": 5},
        "pod": {"tol": 0.0},
        "certificate": {"enabled": True},
    }
