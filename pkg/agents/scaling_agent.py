"""
Scaling Agent

Rescales a previously written sweep to a new conductivity or object size
without solving anything.
"""

from typing import Any, Dict
import logging

from agents import require
from tools.errors import ConfigError
from tools.report_tools import read_sweep
from tools.scaling_tools import scale_conductivity, scale_size

logger = logging.getLogger(__name__)

LEMMAS = {
    "conductivity": scale_conductivity,
    "size": scale_size,
}


def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Apply a scaling transform to a sweep file.

    Args:
        state: Pipeline state with scale_request = {"input", "lemma", "factor"}

    Returns:
        {"sweep": scaled Sweep}
    """
    logger.info("Scaling Agent: Rescaling sweep")
    try:
        request = require(state, "scale_request", "command line")
        lemma = request.get("lemma")
        if lemma not in LEMMAS:
            raise ConfigError(f"lemma must be one of {sorted(LEMMAS)}, got {lemma!r}")
        try:
            factor = float(request.get("factor"))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"factor must be a number, got {request.get('factor')!r}") from e

        source = read_sweep(request["input"])
        scaled = LEMMAS[lemma](source, factor)
        logger.info(f"Scaling Agent: {lemma} x {factor:g} applied to {len(scaled.samples)} samples "
                    f"from {request['input']}")
        return {"sweep": scaled}
    except Exception as e:
        logger.error(f"Scaling Agent error: {str(e)}")
        raise
