"""
Model Agent

Builds the discrete model shared by every sweep: the tagged mesh, the edge
space, the magnetostatic solutions and the affine frequency system.
"""

from typing import Any, Dict
import logging

from agents import require, stage_timer
from agents.config_agent import RunConfig
from tools.errors import ConfigError
from tools.fem_tools import build_edge_space, default_epsilon
from tools.mesh_tools import (
    Mesh,
    generate_box_mesh,
    object_volume,
    read_mesh_file,
    refine_toward_object,
    tag_regions,
    validate_mesh,
)
from tools.mpt_tools import n0_from_affine
from tools.transmission_tools import build_affine_system, solve_theta0

logger = logging.getLogger(__name__)


def build_mesh(config: RunConfig) -> Mesh:
    """Mesh from file, or a generated box tagged by the configured shapes, then refined."""
    known = [m.region_tag for m in config.materials]
    if config.mesh.file is not None:
        mesh = read_mesh_file(config.mesh.file, known_tags=known)
        if config.mesh.shapes:
            mesh = tag_regions(mesh, config.mesh.shapes)
    else:
        mesh = tag_regions(generate_box_mesh(config.mesh.half_width, config.mesh.divisions), config.mesh.shapes)
    mesh = refine_toward_object(mesh, config.mesh.refinement_levels)
    validate_mesh(mesh, known_tags=known)
    if object_volume(mesh) <= 0:
        raise ConfigError("No tet is tagged as object; refine the mesh or enlarge the shape")
    return mesh


def build_model(config: RunConfig) -> Dict[str, Any]:
    """
    Assemble everything the sweeps need from a configuration.

    Returns:
        Dictionary with mesh, space, epsilon, theta0, affine, n0 and timings
    """
    timings: Dict[str, float] = {}
    with stage_timer(timings, "mesh"):
        mesh = build_mesh(config)
        space = build_edge_space(mesh)
    logger.info(f"Mesh: {mesh.n_vertices} vertices, {mesh.n_tets} tets, {mesh.n_edges} edges, {space.n_dof} dofs")

    epsilon = config.solver.epsilon or default_epsilon(space, config.solver.epsilon_factor)
    with stage_timer(timings, "theta0"):
        theta0 = solve_theta0(space, config.materials, epsilon,
                              tol=config.solver.tol, method=config.solver.method)
    with stage_timer(timings, "assembly"):
        affine = build_affine_system(space, config.materials, theta0, config.alpha, epsilon)
        n0 = n0_from_affine(affine)

    return {
        "mesh": mesh,
        "space": space,
        "epsilon": epsilon,
        "theta0": theta0,
        "affine": affine,
        "n0": n0,
        "timings": timings,
    }


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Build the discrete model for the configured object.

    Args:
        state: Pipeline state holding config

    Returns:
        {"model": dict from build_model}
    """
    logger.info("Model Agent: Building mesh, edge space and affine system")
    try:
        config = require(state, "config", "Config Agent")
        model = build_model(config)
        logger.info(f"Model Agent: epsilon={model['epsilon']:.3e}, "
                    f"N0 diagonal={[float(f'{v:.6g}') for v in model['n0'].diagonal()]}")
        return {"model": model}
    except Exception as e:
        logger.error(f"Model Agent error: {str(e)}")
        raise
