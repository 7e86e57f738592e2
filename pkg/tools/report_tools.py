"""
Report Tools Module

Pure functions for turning sweeps into tables and files: the fixed CSV
row schema, the JSON report, singular value tables, oracle comparison
tables, and reading a written sweep back for rescaling.
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import json
import logging

import numpy as np
import pandas as pd

from tools.errors import ConfigError
from tools.mesh_tools import Material
from tools.mpt_tools import MPTSample, make_sample
from tools.scaling_tools import Sweep

logger = logging.getLogger(__name__)

ENTRIES = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
ENTRY_NAMES = [f"{i + 1}{j + 1}" for i, j in ENTRIES]

COLUMNS = (
    ["omega"]
    + [name for e in ENTRY_NAMES for name in (f"R{e}_re", f"I{e}_im")]
    + [f"N0_{e}" for e in ENTRY_NAMES]
    + [f"eig_real_{k}" for k in (1, 2, 3)]
    + [f"eig_imag_{k}" for k in (1, 2, 3)]
    + [f"delta_{e}" for e in ENTRY_NAMES]
    + ["asymmetry_norm"]
)
CSV_FORMAT = "%.17g"


# ============================================================================
# ROW SCHEMA
# ============================================================================

def sample_row(sample: MPTSample) -> Dict[str, float]:
    row = {"omega": sample.omega}
    for (i, j), e in zip(ENTRIES, ENTRY_NAMES):
        row[f"R{e}_re"] = float(sample.r[i, j])
        row[f"I{e}_im"] = float(sample.i[i, j])
    for (i, j), e in zip(ENTRIES, ENTRY_NAMES):
        row[f"N0_{e}"] = float(sample.n0[i, j])
    for k in range(3):
        row[f"eig_real_{k + 1}"] = float(sample.eigs_real[k])
    for k in range(3):
        row[f"eig_imag_{k + 1}"] = float(sample.eigs_imag[k])
    for (i, j), e in zip(ENTRIES, ENTRY_NAMES):
        row[f"delta_{e}"] = float("nan") if sample.delta is None else float(sample.delta[i, j])
    row["asymmetry_norm"] = sample.asymmetry_norm
    return row


def _symmetric(values: Sequence[float]) -> np.ndarray:
    t = np.zeros((3, 3))
    for (i, j), v in zip(ENTRIES, values):
        t[i, j] = t[j, i] = v
    return t


def row_sample(row: Dict[str, float]) -> MPTSample:
    r = _symmetric([row[f"R{e}_re"] for e in ENTRY_NAMES])
    i = _symmetric([row[f"I{e}_im"] for e in ENTRY_NAMES])
    n0 = _symmetric([row[f"N0_{e}"] for e in ENTRY_NAMES])
    deltas = [row[f"delta_{e}"] for e in ENTRY_NAMES]
    delta = None if any(d is None or np.isnan(d) for d in deltas) else _symmetric(deltas)
    return make_sample(row["omega"], n0, r, i, row["asymmetry_norm"], delta)


def samples_to_frame(samples: Sequence[MPTSample]) -> pd.DataFrame:
    return pd.DataFrame([sample_row(s) for s in samples], columns=COLUMNS)


def frame_to_samples(frame: pd.DataFrame) -> List[MPTSample]:
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"Sweep table is missing columns: {missing}")
    return [row_sample(row) for row in frame.to_dict(orient="records")]


def singular_value_frame(singular_values: Sequence[Sequence[float]]) -> pd.DataFrame:
    """Singular values and ratios sigma_k / sigma_1 per direction."""
    data = {"k": np.arange(1, len(singular_values[0]) + 1)}
    for i, sigma in enumerate(singular_values, start=1):
        sigma = np.asarray(sigma, dtype=float)
        data[f"sigma_{i}"] = sigma
        data[f"ratio_{i}"] = sigma / sigma[0]
    return pd.DataFrame(data)


def oracle_frame(omegas: Sequence[float], exact: Sequence[complex],
                 computed: Dict[str, Sequence[complex]]) -> pd.DataFrame:
    """
    Per-frequency comparison |Lambda_exact - Lambda| / |Lambda_exact|.

    Args:
        omegas: Frequencies
        exact: Closed-form values
        computed: Label -> computed complex eigenvalue per frequency
    """
    exact = np.asarray(exact, dtype=complex)
    data = {"omega": np.asarray(omegas, dtype=float), "exact_re": exact.real, "exact_im": exact.imag}
    scale = np.abs(exact)
    for label, values in computed.items():
        values = np.asarray(values, dtype=complex)
        data[f"{label}_re"] = values.real
        data[f"{label}_im"] = values.imag
        with np.errstate(divide="ignore", invalid="ignore"):
            data[f"{label}_error"] = np.where(scale > 0, np.abs(exact - values) / scale, np.abs(exact - values))
    return pd.DataFrame(data)


# ============================================================================
# FILES
# ============================================================================

def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        return None if np.isnan(value) else float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Path):
        return str(value)
    return value


def sweep_report(sweep: Sweep, extra: Optional[Dict] = None) -> Dict:
    """JSON-ready report of a sweep."""
    frame = samples_to_frame(sweep.samples)
    report = {
        "kind": sweep.kind,
        "alpha": sweep.alpha,
        "materials": [
            {"tag": m.region_tag, "mu_r": m.mu_r, "sigma_star": m.sigma_star, "is_object": m.is_object}
            for m in sweep.materials
        ],
        "columns": list(COLUMNS),
        "rows": frame.to_dict(orient="records"),
        "kappa": [None if s.kappa is None else s.kappa for s in sweep.samples],
        "provenance": list(sweep.provenance),
    }
    report.update(sweep.metadata)
    if extra:
        report.update(extra)
    return _jsonable(report)


def write_sweep(sweep: Sweep, out_dir: Union[str, Path], stem: str = "sweep",
                extra: Optional[Dict] = None) -> Dict[str, Path]:
    """
    Write <stem>.csv and <stem>.json into out_dir.

    Returns:
        Paths of the written files
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    samples_to_frame(sweep.samples).to_csv(csv_path, index=False, float_format=CSV_FORMAT)
    json_path.write_text(json.dumps(sweep_report(sweep, extra), indent=2), encoding="utf-8")
    logger.info(f"Wrote {len(sweep.samples)} rows to {csv_path} and {json_path}")
    return {"csv": csv_path, "json": json_path}


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FORMAT)
    return path


def read_sweep_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip", dtype=float)


def read_sweep(path: Union[str, Path]) -> Sweep:
    """
    Read a sweep written by write_sweep.

    A CSV path is resolved to its sibling JSON report, which carries the
    configuration needed for rescaling.
    """
    path = Path(path)
    if path.suffix == ".csv":
        path = path.with_suffix(".json")
    if not path.exists():
        raise ConfigError(f"Sweep report not found: {path}")
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
        materials = [Material(m["tag"], m["mu_r"], m["sigma_star"], m["is_object"]) for m in report["materials"]]
        samples = frame_to_samples(pd.DataFrame(report["rows"], columns=COLUMNS))
        kappas = report.get("kappa") or [None] * len(samples)
        samples = [s if k is None else _with_kappa(s, k) for s, k in zip(samples, kappas)]
        known = {"kind", "alpha", "materials", "columns", "rows", "kappa", "provenance"}
        metadata = {k: v for k, v in report.items() if k not in known}
        return Sweep(report["alpha"], materials, samples, report.get("kind", "full"),
                     tuple(report.get("provenance", [])), metadata)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed sweep report {path}: {e}") from e


def _with_kappa(sample: MPTSample, kappa) -> MPTSample:
    return replace(sample, kappa=np.asarray(kappa, dtype=float))
