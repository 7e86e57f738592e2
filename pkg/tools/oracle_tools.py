"""
Oracle Tools Module

Closed-form polarizability of a permeable conducting sphere, its limiting
values, and an independent radial ODE integration used to check the closed
form. For a sphere the tensor is m(omega) times the identity.
"""

from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np
from scipy.integrate import solve_ivp

from tools.errors import OracleRangeError
from tools.fem_tools import MU0
from tools.mesh_tools import Material

logger = logging.getLogger(__name__)

MAX_ARGUMENT = 1e6
SERIES_RADIUS = 0.1


@dataclass(frozen=True)
class SphereAnalytic:
    alpha: float
    mu_r: float
    sigma_star: float

    def __post_init__(self):
        Material("sphere", self.mu_r, self.sigma_star)
        if not self.alpha > 0:
            raise OracleRangeError(f"alpha must be positive, got {self.alpha}")

    def argument(self, omega: float) -> complex:
        """u = k alpha with u^2 = i nu mu_r, Im u >= 0."""
        nu = self.alpha ** 2 * omega * MU0 * self.sigma_star
        return np.sqrt(1j * nu * self.mu_r)


def sphere_limits(cfg: SphereAnalytic) -> Tuple[float, float]:
    """(magnetostatic value, perfect-conductor value) of m."""
    static = 4.0 * np.pi * cfg.alpha ** 3 * (cfg.mu_r - 1.0) / (cfg.mu_r + 2.0)
    pec = -2.0 * np.pi * cfg.alpha ** 3
    return static, pec


def _reduced_functions(u: complex) -> Tuple[complex, complex]:
    """F = 1 - u cot u and G = 3F - u^2, by series near zero."""
    if abs(u) < SERIES_RADIUS:
        u2 = u * u
        f = u2 / 3 + u2 ** 2 / 45 + 2 * u2 ** 3 / 945 + u2 ** 4 / 4725
        g = u2 ** 2 / 15 + 2 * u2 ** 3 / 315 + u2 ** 4 / 1575 + 2 * u2 ** 5 / 31185
        return f, g
    e = np.exp(2j * u)
    cot = 1j * (e + 1) / (e - 1)
    f = 1 - u * cot
    return f, 3 * f - u * u


def sphere_mpt_exact(cfg: SphereAnalytic, omega: float) -> complex:
    """
    Exact m(omega) for the sphere.

    Args:
        cfg: Sphere parameters
        omega: Angular frequency (rad/s, >= 0)

    Returns:
        Complex m in m^3

    Raises:
        OracleRangeError: |k alpha| beyond the stable range or a non-finite result
    """
    if omega < 0:
        raise OracleRangeError(f"omega must be non-negative, got {omega}")
    static, _ = sphere_limits(cfg)
    u = cfg.argument(omega)
    if u == 0:
        return complex(static)
    if abs(u) > MAX_ARGUMENT:
        raise OracleRangeError(f"|k alpha|={abs(u):.3e} exceeds {MAX_ARGUMENT:.0e}")
    f, g = _reduced_functions(u)
    mu = cfg.mu_r
    m = 2 * np.pi * cfg.alpha ** 3 * (2 * (mu - 1) * f + g) / ((mu - 1) * f + u * u)
    if not np.isfinite(m):
        raise OracleRangeError(f"Non-finite sphere value at omega={omega:.6g}")
    return complex(m)


def sphere_mpt_radial(cfg: SphereAnalytic, omega: float, start: float = 1e-3, rtol: float = 1e-11) -> complex:
    """
    m(omega) from integrating the l=1 interior radial equation.

    Solves rho^2 f'' + 2 rho f' + (u^2 rho^2 - 2) f = 0 on [start, 1] from the
    regular series and matches to the exterior dipole at rho = 1.
    """
    static, _ = sphere_limits(cfg)
    u = cfg.argument(omega)
    if u == 0:
        return complex(static)
    if abs(u) > 50:
        raise OracleRangeError(f"Radial integration is limited to |k alpha| <= 50, got {abs(u):.3e}")

    def rhs(rho, y):
        f, df = y
        return [df, -(2 * rho * df + (u * u * rho * rho - 2) * f) / (rho * rho)]

    x = u * start
    y0 = [x / 3 - x ** 3 / 30 + x ** 5 / 840, u * (1 / 3 - x ** 2 / 10 + x ** 4 / 168)]
    result = solve_ivp(rhs, (start, 1.0), np.asarray(y0, dtype=complex), method="DOP853",
                       rtol=rtol, atol=1e-14 * abs(y0[0]))
    if not result.success:
        raise OracleRangeError(f"Radial integration failed: {result.message}")
    j, dj = result.y[0, -1], result.y[1, -1]
    q = j + dj
    mu = cfg.mu_r
    return complex(2 * np.pi * cfg.alpha ** 3 * (2 * mu * j - q) / (mu * j + q))
