"""
Errors Module

Exception hierarchy shared by all tools and agents. The CLI maps these to
exit codes; everything else is reported as a generic failure.
"""

from typing import Optional


class MPTError(Exception):
    """Base class for all polarizability-tensor pipeline errors."""


class InvalidArgumentError(MPTError, ValueError):
    """A parameter is outside its documented range."""


class DimensionMismatchError(MPTError, ValueError):
    """Two objects that must share a dimension do not."""


# ============================================================================
# MESH ERRORS
# ============================================================================

class MeshError(MPTError, ValueError):
    """A mesh violates one of its structural invariants."""


class MeshParseError(MeshError):
    """Neutral mesh file could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NegativeVolumeError(MeshError):
    """A tetrahedron is inverted or degenerate."""

    def __init__(self, tet_index: int, volume: float):
        super().__init__(f"tet {tet_index} has non-positive volume {volume:.3e}")
        self.tet_index = tet_index
        self.volume = volume


class UnknownRegionError(MeshError):
    """A region tag has no declared material."""


class AmbiguousRegionError(MeshError):
    """Two shapes with different tags claim the same tetrahedron."""


# ============================================================================
# SOLVER / CERTIFICATE ERRORS
# ============================================================================

class SolverError(MPTError):
    """Linear solve failed to reach the requested relative residual."""

    def __init__(self, message: str, residual: float,
                 omega: Optional[float] = None, direction: Optional[int] = None):
        details = f"{message} (residual={residual:.3e}"
        if omega is not None:
            details += f", omega={omega:.6g}"
        if direction is not None:
            details += f", direction={direction}"
        super().__init__(details + ")")
        self.residual = residual
        self.omega = omega
        self.direction = direction


class CertificateUnavailableError(MPTError):
    """Stability constant is not positive, so no bound can be certified."""


class CertificateViolationError(MPTError):
    """A full-order check fell outside the certified interval."""


class OracleRangeError(MPTError, ValueError):
    """Analytic oracle evaluated outside its stable range."""


class ConfigError(MPTError, ValueError):
    """Run configuration is missing or invalid."""
