"""
Report Agent

Writes the sweep CSV and JSON report plus any auxiliary tables.
"""

from pathlib import Path
from typing import Any, Dict
import logging

from agents import env_value, require
from tools.report_tools import write_sweep, write_table

logger = logging.getLogger(__name__)

DEFAULT_STEMS = {
    "sweep-full": "sweep_full",
    "sweep-pod": "sweep_pod",
    "compare-oracle": "oracle",
    "scale": "scaled",
}


def output_location(state: Dict[str, Any]) -> Path:
    config = state.get("config")
    if config is not None:
        return Path(config.output.directory)
    overrides = state.get("overrides") or {}
    return Path(overrides.get("out") or env_value("MPT_OUT_DIR", str) or "results")


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Emit result files.

    Args:
        state: Pipeline state holding sweep, optional tables, config and command

    Returns:
        {"outputs": {name: path}}
    """
    logger.info("Report Agent: Writing results")
    try:
        sweep = require(state, "sweep", "the sweep stage")
        command = state.get("command", "sweep-full")
        config = state.get("config")
        stem = (config.output.stem if config is not None else None) or DEFAULT_STEMS.get(command, "sweep")
        out_dir = output_location(state)

        outputs: Dict[str, Path] = {}
        for name, frame in (state.get("tables") or {}).items():
            outputs[name] = write_table(frame, out_dir / f"{stem}_{name}.csv")

        extra = {"command": command, "tables": {name: path.name for name, path in outputs.items()}}
        outputs.update(write_sweep(sweep, out_dir, stem, extra))
        logger.info(f"Report Agent: {len(outputs)} files written to {out_dir}")
        return {"outputs": {name: str(path) for name, path in outputs.items()}}
    except Exception as e:
        logger.error(f"Report Agent error: {str(e)}")
        raise
