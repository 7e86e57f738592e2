"""
Full-Order Agent

Frequency sweep with the full-order model: one sparse solve per direction
and output frequency.
"""

from typing import Any, Dict, Sequence
import logging

import numpy as np

from agents import require, stage_timer
from agents.config_agent import RunConfig
from tools.mpt_tools import full_order_sample
from tools.pod_tools import frequency_samples, solve_frequencies
from tools.scaling_tools import Sweep
from tools.transmission_tools import AffineSystem

logger = logging.getLogger(__name__)


def full_order_sweep(affine: AffineSystem, n0: np.ndarray, frequencies: Sequence[float],
                     tol: float = 1e-10, method: str = "direct", threads: int = 1):
    """MPTSamples at each frequency from full-order solves."""
    solutions = solve_frequencies(affine, frequencies, tol=tol, method=method, threads=threads)
    return [full_order_sample(affine, q, float(w), n0) for w, q in zip(frequencies, solutions)]


def run_full_order(config: RunConfig, model: Dict[str, Any]) -> Sweep:
    timings = dict(model["timings"])
    frequencies = frequency_samples(config.sweep.omega_min, config.sweep.omega_max,
                                    config.sweep.outputs, config.sweep.spacing)
    with stage_timer(timings, "fom_sweep"):
        samples = full_order_sweep(model["affine"], model["n0"], frequencies,
                                   tol=config.solver.tol, method=config.solver.method,
                                   threads=config.solver.threads)
    metadata = {
        "config": config.echo(),
        "n_dof": model["affine"].n_dof,
        "epsilon": model["epsilon"],
        "timings": timings,
    }
    return Sweep(config.alpha, config.materials, samples, "full", (), metadata)


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run the full-order sweep over the output frequencies.

    Args:
        state: Pipeline state holding config and model

    Returns:
        {"sweep": Sweep}
    """
    logger.info("Full-Order Agent: Starting full-order sweep")
    try:
        config = require(state, "config", "Config Agent")
        model = require(state, "model", "Model Agent")
        sweep = run_full_order(config, model)
        logger.info(f"Full-Order Agent: {len(sweep.samples)} frequencies in "
                    f"{sweep.metadata['timings']['fom_sweep']:.2f}s")
        return {"sweep": sweep}
    except Exception as e:
        logger.error(f"Full-Order Agent error: {str(e)}")
        raise
