"""
Scaling Tools Module

Pure functions that transform a computed sweep into the sweep of a scaled
object without new solves. Both transforms rest on the model depending on
frequency, size and conductivity only through nu = alpha^2 omega mu0 sigma
and the alpha^3 prefactor:

    M[alpha, omega, mu, s sigma] = M[alpha, s omega, mu, sigma]
    M[s alpha, omega, mu, sigma] = s^3 M[alpha, s^2 omega, mu, sigma]
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple
import logging

import numpy as np

from tools.errors import InvalidArgumentError
from tools.mesh_tools import Material
from tools.mpt_tools import MPTSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Sweep:
    """Tensor samples of one configuration, ordered by frequency."""
    alpha: float
    materials: Tuple[Material, ...]
    samples: Tuple[MPTSample, ...]
    kind: str = "full"
    provenance: Tuple[Dict, ...] = ()
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "materials", tuple(self.materials))
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        omegas = self.frequencies
        if len(omegas) > 1 and np.any(np.diff(omegas) <= 0):
            raise InvalidArgumentError("Sweep samples must be strictly increasing in omega")

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([s.omega for s in self.samples])

    def material(self, tag: str) -> Material:
        for m in self.materials:
            if m.region_tag == tag:
                return m
        raise KeyError(tag)


def _check_factor(s: float) -> float:
    s = float(s)
    if not s > 0 or not np.isfinite(s):
        raise InvalidArgumentError(f"Scaling factor must be positive and finite, got {s}")
    return s


def _record(sweep: Sweep, lemma: str, s: float) -> Dict:
    return {
        "lemma": lemma,
        "factor": s,
        "source_alpha": sweep.alpha,
        "source_sigma": {m.region_tag: m.sigma_star for m in sweep.materials if m.is_object},
        "source_band": [float(sweep.frequencies.min()), float(sweep.frequencies.max())] if sweep.samples else [],
    }


def scale_conductivity(sweep: Sweep, s: float) -> Sweep:
    """
    Sweep of the same object with every conductivity multiplied by s.

    Tensor values and certificate radii are unchanged; frequencies become omega / s.
    """
    s = _check_factor(s)
    materials = [replace(m, sigma_star=m.sigma_star * s) if m.is_object else m for m in sweep.materials]
    samples = [replace(sample, omega=sample.omega / s) for sample in sweep.samples]
    logger.info(f"Scaled conductivity by {s:g}: {len(samples)} samples remapped")
    return Sweep(sweep.alpha, materials, samples, sweep.kind,
                 sweep.provenance + (_record(sweep, "conductivity", s),), dict(sweep.metadata))


def scale_size(sweep: Sweep, s: float) -> Sweep:
    """
    Sweep of the object enlarged by s.

    Tensors and certificate radii gain s^3; frequencies become omega / s^2.
    """
    s = _check_factor(s)
    cube = s ** 3
    samples: List[MPTSample] = []
    for sample in sweep.samples:
        samples.append(replace(
            sample,
            omega=sample.omega / s ** 2,
            n0=cube * sample.n0,
            r=cube * sample.r,
            i=cube * sample.i,
            asymmetry_norm=cube * sample.asymmetry_norm,
            delta=None if sample.delta is None else cube * sample.delta,
        ))
    logger.info(f"Scaled size by {s:g}: alpha {sweep.alpha:g} -> {sweep.alpha * s:g}")
    return Sweep(sweep.alpha * s, sweep.materials, samples, sweep.kind,
                 sweep.provenance + (_record(sweep, "size", s),), dict(sweep.metadata))
