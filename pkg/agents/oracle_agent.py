"""
Oracle Agent

Compares the reduced sweep of a spherical object with the closed-form
sphere polarizability. For a sphere every eigenvalue of the tensor equals
m(omega); the first eigenvalue pair is compared.
"""

from typing import Any, Dict, List, Sequence
from dataclasses import replace
import logging

import numpy as np
import pandas as pd

from agents import require
from agents.config_agent import RunConfig
from agents.fullorder_agent import full_order_sweep
from agents.reduced_agent import run_reduced
from tools.errors import OracleRangeError
from tools.mpt_tools import MPTSample
from tools.oracle_tools import SphereAnalytic, sphere_mpt_exact, sphere_mpt_radial
from tools.pod_tools import SPACINGS, frequency_samples
from tools.report_tools import oracle_frame
from tools.scaling_tools import Sweep

logger = logging.getLogger(__name__)


def sphere_from_config(config: RunConfig) -> SphereAnalytic:
    """Physical sphere alpha * B for the single sphere shape in the config."""
    shape = config.mesh.shapes[0]
    radius = shape.params[1][0]
    material = next(m for m in config.materials if m.is_object)
    return SphereAnalytic(config.alpha * radius, material.mu_r, material.sigma_star)


def first_eigenvalue(samples: Sequence[MPTSample]) -> np.ndarray:
    return np.array([s.eigs_real[0] + 1j * s.eigs_imag[0] for s in samples])


def radial_values(sphere: SphereAnalytic, omegas: Sequence[float]) -> np.ndarray:
    """Radial-integration values, NaN where the integration range is exceeded."""
    values = np.full(len(omegas), np.nan, dtype=complex)
    for k, omega in enumerate(omegas):
        try:
            values[k] = sphere_mpt_radial(sphere, float(omega))
        except OracleRangeError as e:
            logger.debug(f"Radial check skipped at omega={omega:.3e}: {e}")
    return values


def compare_oracle(config: RunConfig, model: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run the comparison.

    Returns:
        Dictionary with sweep (the configured spacing), tables and summary
    """
    sphere = sphere_from_config(config)
    omegas = frequency_samples(config.sweep.omega_min, config.sweep.omega_max,
                               config.sweep.outputs, config.sweep.spacing)
    exact = np.array([sphere_mpt_exact(sphere, float(w)) for w in omegas])
    degenerate = bool(np.all(exact == 0))

    tables: Dict[str, pd.DataFrame] = {}
    computed: Dict[str, np.ndarray] = {}
    if sphere.sigma_star == 0:
        # theta1 vanishes, so the full-order sweep is exact and costs nothing
        samples = full_order_sweep(model["affine"], model["n0"], omegas,
                                   tol=config.solver.tol, method=config.solver.method)
        sweep = Sweep(config.alpha, config.materials, samples, "full", (),
                      {"config": config.echo(), "timings": dict(model["timings"])})
        computed["full"] = first_eigenvalue(samples)
    else:
        spacings: List[str] = list(SPACINGS) if config.pod.compare_spacings else [config.sweep.spacing]
        sweep = None
        for spacing in spacings:
            reduced_sweep, reduced_tables = run_reduced(config, model, spacing)
            computed[f"pod_{spacing}"] = first_eigenvalue(reduced_sweep.samples)
            for name, frame in reduced_tables.items():
                tables[f"{name}_{spacing}"] = frame
            if spacing == config.sweep.spacing:
                sweep = reduced_sweep

    frame = oracle_frame(omegas, exact, computed)
    radial = radial_values(sphere, omegas)
    frame["radial_re"], frame["radial_im"] = radial.real, radial.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        frame["radial_error"] = np.where(np.abs(exact) > 0, np.abs(radial - exact) / np.abs(exact), np.abs(radial - exact))
    tables["oracle"] = frame

    summary = {
        "sphere": {"radius": sphere.alpha, "mu_r": sphere.mu_r, "sigma_star": sphere.sigma_star},
        "degenerate": degenerate,
        "max_error": {label: float(np.nanmax(frame[f"{label}_error"])) for label in computed},
    }
    if degenerate:
        logger.info("Oracle comparison is degenerate: mu_r = 1 and sigma_star = 0, absolute errors reported")
    sweep = replace(sweep, metadata={**sweep.metadata, "oracle": summary})
    return {"sweep": sweep, "tables": tables, "summary": summary}


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Compare computed sphere eigenvalues with the closed form.

    Args:
        state: Pipeline state holding config and model

    Returns:
        {"sweep": Sweep, "tables": {...}}
    """
    logger.info("Oracle Agent: Comparing against the analytic sphere")
    try:
        config = require(state, "config", "Config Agent")
        model = require(state, "model", "Model Agent")
        result = compare_oracle(config, model)
        for label, error in result["summary"]["max_error"].items():
            logger.info(f"Oracle Agent: max |e(Lambda_1)| for {label} = {error:.3e}")
        return {"sweep": result["sweep"], "tables": result["tables"]}
    except Exception as e:
        logger.error(f"Oracle Agent error: {str(e)}")
        raise
