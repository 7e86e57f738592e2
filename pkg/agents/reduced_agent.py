"""
Reduced Agent

Projection-based reduced order sweep. Offline: snapshots, truncated SVD,
projection and certificate precomputation. Online: small dense solves,
tensor evaluation and certificate radii at every output frequency.
"""

from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from agents import exit_code_for, require, stage_timer
from agents.config_agent import RunConfig
from agents.fullorder_agent import full_order_sweep
from tools.certificate_tools import build_certificate_offline, certified_samples
from tools.errors import CertificateViolationError, ConfigError
from tools.mpt_tools import MPTSample
from tools.pod_tools import (
    build_bases,
    build_snapshots,
    frequency_samples,
    online_sweep,
    project_affine,
    reconstruction_errors,
    verification_frequencies,
)
from tools.report_tools import singular_value_frame
from tools.scaling_tools import Sweep

logger = logging.getLogger(__name__)


def verification_frame(reference: List[MPTSample], reduced: List[MPTSample],
                       tol: float = 1e-12) -> pd.DataFrame:
    """
    Per-frequency comparison of reduced samples against full-order ones.

    The error columns are max-entry differences; the validity flags report
    whether every entry of the full-order tensor lies inside the certified
    interval (NaN flags when no certificate is attached). The full-order
    reference is only accurate to its solver tolerance, so entries are
    compared with a slack of tol times the largest reference entry.
    """
    rows = []
    for fom, rom in zip(reference, reduced):
        err_real = np.abs((fom.n0 + fom.r) - (rom.n0 + rom.r))
        err_imag = np.abs(fom.i - rom.i)
        row = {
            "omega": fom.omega,
            "error_real": float(err_real.max()),
            "error_imag": float(err_imag.max()),
            "relative_error": float(np.linalg.norm(fom.tensor - rom.tensor) / max(np.linalg.norm(fom.tensor), 1e-300)),
        }
        if rom.delta is None:
            row.update(delta_max=np.nan, valid_real=np.nan, valid_imag=np.nan)
        else:
            slack = tol * max(np.abs(fom.tensor).max(), 1e-300)
            row.update(
                delta_max=float(rom.delta.max()),
                valid_real=bool(np.all(err_real <= rom.delta + slack)),
                valid_imag=bool(np.all(err_imag <= rom.delta + slack)),
            )
        rows.append(row)
    return pd.DataFrame(rows)


def certificate_violations(table: pd.DataFrame) -> List[float]:
    """Frequencies of a verification table whose certified interval was missed."""
    if "valid_real" not in table or table["valid_real"].isna().all():
        return []
    valid = table["valid_real"].astype(bool) & table["valid_imag"].astype(bool)
    return [float(w) for w in table.loc[~valid, "omega"]]


def run_reduced(config: RunConfig, model: Dict[str, Any],
                spacing: Optional[str] = None) -> Tuple[Sweep, Dict[str, pd.DataFrame]]:
    """
    Offline and online stages of the reduced sweep.

    Args:
        config: Run configuration
        model: Output of the Model Agent
        spacing: Snapshot spacing overriding the configured one

    Returns:
        (Sweep of the N0 output frequencies, tables keyed by name)

    Raises:
        ConfigError: no object region conducts, so there is nothing to reduce
    """
    if not any(m.is_object and m.sigma_star > 0 for m in config.materials):
        raise ConfigError("No conducting object region: the reduced sweep needs sigma_star > 0 (use sweep-full)")

    affine = model["affine"]
    spacing = spacing or config.sweep.spacing
    solver = config.solver
    offline: Dict[str, float] = {}
    online: Dict[str, float] = {}

    with stage_timer(offline, "snapshots"):
        snapshot_omegas = frequency_samples(config.sweep.omega_min, config.sweep.omega_max,
                                            config.sweep.snapshots, spacing)
        snapshots = build_snapshots(affine, snapshot_omegas, tol=solver.tol, method=solver.method,
                                    threads=solver.threads, spacing=spacing)
    with stage_timer(offline, "svd"):
        basis = build_bases(snapshots, config.pod.tol, config.pod.svd_method)
    with stage_timer(offline, "projection"):
        reduced = project_affine(affine, basis)
    cert = None
    if config.certificate.enabled:
        with stage_timer(offline, "certificate"):
            cert = build_certificate_offline(affine, basis, config.omega_prime, config.certificate.inner_product)

    outputs = frequency_samples(config.sweep.omega_min, config.sweep.omega_max,
                                config.sweep.outputs, config.sweep.spacing)
    with stage_timer(online, "solves"):
        solutions = online_sweep(reduced, outputs, threads=solver.threads)
    with stage_timer(online, "certificates"):
        if cert is None:
            samples = [s.sample for s in solutions]
        else:
            samples = certified_samples(cert, solutions, config.alpha, config.certificate.evaluation)
    logger.info(f"Reduced sweep ({spacing}): ranks={basis.ranks}, {len(samples)} outputs, "
                f"online {sum(online.values()):.3f}s vs offline {sum(offline.values()):.3f}s")

    tables = {"singular_values": singular_value_frame([b.singular_values for b in basis.directions])}
    metadata: Dict[str, Any] = {
        "config": config.echo(),
        "n_dof": affine.n_dof,
        "epsilon": model["epsilon"],
        "snapshot_spacing": spacing,
        "snapshot_frequencies": snapshots.frequencies,
        "ranks": list(basis.ranks),
        "singular_values": [b.singular_values for b in basis.directions],
        "reconstruction_errors": [reconstruction_errors(snapshots.matrices[i], basis.directions[i])
                                  for i in range(3)],
        "lambda_min": None if cert is None else cert.lambda_min,
        "omega_prime": None if cert is None else cert.omega_prime,
        "inner_product": None if cert is None else cert.inner_product,
        "timings": {"model": dict(model["timings"]), "offline": offline, "online": online},
    }

    if config.pod.verify:
        checks = verification_frequencies(config.sweep.omega_min, config.sweep.omega_max,
                                          config.sweep.snapshots, config.pod.verification_count, spacing)
        reference = full_order_sweep(affine, model["n0"], checks, tol=solver.tol,
                                     method=solver.method, threads=solver.threads)
        check_solutions = online_sweep(reduced, checks, threads=solver.threads)
        check_samples = ([s.sample for s in check_solutions] if cert is None
                         else certified_samples(cert, check_solutions, config.alpha, config.certificate.evaluation))
        table = verification_frame(reference, check_samples, tol=solver.tol)
        tables["verification"] = table
        metadata["certificate_violations"] = certificate_violations(table)

    sweep = Sweep(config.alpha, config.materials, samples, "pod", (), metadata)
    return sweep, tables


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run the reduced sweep.

    Args:
        state: Pipeline state holding config and model

    Returns:
        {"sweep": Sweep, "tables": {name: DataFrame}}, plus errors and exit
        code 4 when a verification frequency falls outside its certificate.
        The sweep is kept so the report still records the failing checks.
    """
    logger.info("Reduced Agent: Starting offline stage")
    try:
        config = require(state, "config", "Config Agent")
        model = require(state, "model", "Model Agent")
        sweep, tables = run_reduced(config, model)
        logger.info(f"Reduced Agent: ranks {sweep.metadata['ranks']}")
        result: Dict[str, Any] = {"sweep": sweep, "tables": tables}
        violations = sweep.metadata.get("certificate_violations") or []
        if violations:
            error = CertificateViolationError(
                f"Certificate violated at {len(violations)} verification frequencies "
                f"(first omega={violations[0]:.6g})")
            logger.error(f"Reduced Agent: {error}")
            result.update(errors=[f"Reduced Agent: {error}"], exit_codes=[exit_code_for(error)])
        return result
    except Exception as e:
        logger.error(f"Reduced Agent error: {str(e)}")
        raise
