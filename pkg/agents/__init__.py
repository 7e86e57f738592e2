"""
Agent Infrastructure Module

Core utilities for all pipeline agents: environment loading, stage timing
and the mapping from failures to command-line exit codes.
"""

from dotenv import load_dotenv
load_dotenv()

from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, Optional
import logging
import os
import time

from tools.errors import (
    CertificateUnavailableError,
    CertificateViolationError,
    ConfigError,
    InvalidArgumentError,
    MeshError,
    SolverError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CERTIFICATE = 4


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    Args:
        error: Exception raised by a pipeline stage

    Returns:
        2 for configuration/input errors, 3 for solver failures,
        4 when no certificate can be produced or a check violates it,
        1 otherwise
    """
    if isinstance(error, (CertificateUnavailableError, CertificateViolationError)):
        return EXIT_CERTIFICATE
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    if isinstance(error, (ConfigError, MeshError, InvalidArgumentError)):
        return EXIT_CONFIG
    return EXIT_FAILURE


def env_value(name: str, cast: Callable[[str], Any], default: Any = None) -> Any:
    """
    Read an environment variable and convert it.

    Raises:
        ConfigError: the variable is set but cannot be converted
    """
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigError(f"Environment variable {name}={raw!r} is invalid: {e}") from e


def log_level(default: str = "INFO") -> int:
    name = (os.environ.get("MPT_LOG_LEVEL") or default).upper()
    return getattr(logging, name, logging.INFO)


@contextmanager
def stage_timer(timings: Dict[str, float], name: str) -> Iterator[None]:
    """Record the wall time of a block under timings[name] (seconds)."""
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = timings.get(name, 0.0) + (time.perf_counter() - start)
        logger.debug(f"Stage {name}: {timings[name]:.3f}s")


def require(state: Dict[str, Any], key: str, producer: str) -> Any:
    value: Optional[Any] = state.get(key)
    if value is None:
        raise ConfigError(f"No {key} available from {producer}")
    return value
