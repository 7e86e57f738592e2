"""
Config Agent

Reads the YAML run configuration and resolves every setting with the
precedence command-line flag > environment variable > YAML > default.
"""

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple
import logging

import yaml

from agents import env_value
from tools.certificate_tools import EVALUATIONS, INNER_PRODUCTS
from tools.errors import ConfigError, InvalidArgumentError
from tools.fem_tools import SOLVER_METHODS
from tools.mesh_tools import EXTERIOR_MATERIAL, EXTERIOR_TAG, Material, Shape
from tools.pod_tools import SPACINGS, SVD_METHODS

logger = logging.getLogger(__name__)

SECTIONS = ("mesh", "materials", "object", "sweep", "pod", "solver", "certificate", "output")


@dataclass(frozen=True)
class MeshConfig:
    file: Optional[str] = None
    half_width: float = 10.0
    divisions: int = 6
    refinement_levels: int = 1
    shapes: Tuple[Shape, ...] = ()


@dataclass(frozen=True)
class SweepConfig:
    omega_min: float = 1e2
    omega_max: float = 1e8
    snapshots: int = 13
    spacing: str = "log"
    outputs: int = 40


@dataclass(frozen=True)
class PODConfig:
    tol: float = 1e-4
    svd_method: str = "qr"
    verify: bool = False
    verification_count: int = 20
    compare_spacings: bool = False


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    method: str = "direct"
    epsilon: Optional[float] = None
    epsilon_factor: float = 1e-10
    threads: int = 1


@dataclass(frozen=True)
class CertificateConfig:
    enabled: bool = True
    inner_product: str = "energy"
    evaluation: str = "stabilized"
    omega_prime: Optional[float] = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    stem: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    """Everything one command needs, validated."""
    alpha: float
    materials: Tuple[Material, ...]
    mesh: MeshConfig = field(default_factory=MeshConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    pod: PODConfig = field(default_factory=PODConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    certificate: CertificateConfig = field(default_factory=CertificateConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: Optional[str] = None

    @property
    def omega_prime(self) -> float:
        return self.certificate.omega_prime or self.sweep.omega_min

    def echo(self) -> Dict[str, Any]:
        """Plain-data copy for the JSON report."""
        return {
            "alpha": self.alpha,
            "materials": [asdict(m) for m in self.materials],
            "mesh": {**asdict(self.mesh), "shapes": [_shape_echo(s) for s in self.mesh.shapes]},
            "sweep": asdict(self.sweep),
            "pod": asdict(self.pod),
            "solver": asdict(self.solver),
            "certificate": asdict(self.certificate),
            "output": asdict(self.output),
            "source": self.source,
        }


def _shape_echo(shape: Shape) -> Dict[str, Any]:
    return {"kind": shape.kind, "tag": shape.region_tag, "params": [list(p) for p in shape.params]}


# ============================================================================
# PARSING
# ============================================================================

def _number(value: Any, name: str, cast=float, positive: bool = True, allow_zero: bool = False):
    try:
        number = cast(float(value)) if cast is int else cast(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be a number, got {value!r}") from e
    if cast is int and float(value) != number:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if positive and not (number > 0 or (allow_zero and number == 0)):
        raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value!r}")
    return number


def _choice(value: Any, name: str, options: Tuple[str, ...]) -> str:
    if value not in options:
        raise ConfigError(f"{name} must be one of {options}, got {value!r}")
    return value


def _section(document: Mapping, name: str) -> Dict[str, Any]:
    section = document.get(name) or {}
    if not isinstance(section, Mapping):
        raise ConfigError(f"Section '{name}' must be a mapping")
    return dict(section)


def _parse_materials(section: Mapping) -> Tuple[Material, ...]:
    if not section:
        raise ConfigError("At least one object material is required under 'materials'")
    materials = []
    for tag, props in section.items():
        props = props or {}
        if not isinstance(props, Mapping):
            raise ConfigError(f"Material '{tag}' must be a mapping")
        try:
            materials.append(Material(
                str(tag),
                mu_r=_number(props.get("mu_r", 1.0), f"materials.{tag}.mu_r"),
                sigma_star=_number(props.get("sigma_star", 0.0), f"materials.{tag}.sigma_star", allow_zero=True),
                is_object=str(tag) != EXTERIOR_TAG,
            ))
        except InvalidArgumentError as e:
            raise ConfigError(f"Material '{tag}': {e}") from e
    if not any(m.is_object for m in materials):
        raise ConfigError("At least one object material is required under 'materials'")
    if all(m.region_tag != EXTERIOR_TAG for m in materials):
        materials.append(EXTERIOR_MATERIAL)
    return tuple(materials)


def _parse_mesh(section: Mapping, base: Optional[Path]) -> MeshConfig:
    defaults = MeshConfig()
    file = section.get("file")
    if file is not None and base is not None and not Path(file).is_absolute():
        file = str(base / file)
    shapes = []
    for entry in section.get("shapes") or []:
        try:
            shapes.append(Shape.from_dict(entry))
        except (InvalidArgumentError, KeyError, TypeError) as e:
            raise ConfigError(f"Invalid shape {entry!r}: {e}") from e
    if file is None and not shapes:
        raise ConfigError("mesh needs either 'file' or at least one entry under 'shapes'")
    return MeshConfig(
        file=file,
        half_width=_number(section.get("half_width", defaults.half_width), "mesh.half_width"),
        divisions=_number(section.get("divisions", defaults.divisions), "mesh.divisions", int),
        refinement_levels=_number(section.get("refinement_levels", defaults.refinement_levels),
                                  "mesh.refinement_levels", int, allow_zero=True),
        shapes=tuple(shapes),
    )


def _parse_sweep(section: Mapping) -> SweepConfig:
    d = SweepConfig()
    sweep = SweepConfig(
        omega_min=_number(section.get("omega_min", d.omega_min), "sweep.omega_min"),
        omega_max=_number(section.get("omega_max", d.omega_max), "sweep.omega_max"),
        snapshots=_number(section.get("snapshots", d.snapshots), "sweep.snapshots", int),
        spacing=_choice(section.get("spacing", d.spacing), "sweep.spacing", SPACINGS),
        outputs=_number(section.get("outputs", d.outputs), "sweep.outputs", int),
    )
    if sweep.omega_max < sweep.omega_min:
        raise ConfigError(f"sweep.omega_max ({sweep.omega_max}) is below sweep.omega_min ({sweep.omega_min})")
    return sweep


def _parse_pod(section: Mapping) -> PODConfig:
    d = PODConfig()
    return PODConfig(
        tol=_number(section.get("tol", d.tol), "pod.tol", allow_zero=True),
        svd_method=_choice(section.get("svd_method", d.svd_method), "pod.svd_method", SVD_METHODS),
        verify=bool(section.get("verify", d.verify)),
        verification_count=_number(section.get("verification_count", d.verification_count),
                                   "pod.verification_count", int),
        compare_spacings=bool(section.get("compare_spacings", d.compare_spacings)),
    )


def _parse_solver(section: Mapping) -> SolverConfig:
    d = SolverConfig()
    epsilon = section.get("epsilon")
    return SolverConfig(
        tol=_number(section.get("tol", d.tol), "solver.tol"),
        method=_choice(section.get("method", d.method), "solver.method", SOLVER_METHODS),
        epsilon=None if epsilon is None else _number(epsilon, "solver.epsilon"),
        epsilon_factor=_number(section.get("epsilon_factor", d.epsilon_factor), "solver.epsilon_factor"),
        threads=_number(section.get("threads", d.threads), "solver.threads", int),
    )


def _parse_certificate(section: Mapping) -> CertificateConfig:
    d = CertificateConfig()
    omega_prime = section.get("omega_prime")
    return CertificateConfig(
        enabled=bool(section.get("enabled", d.enabled)),
        inner_product=_choice(section.get("inner_product", d.inner_product),
                              "certificate.inner_product", INNER_PRODUCTS),
        evaluation=_choice(section.get("evaluation", d.evaluation), "certificate.evaluation", EVALUATIONS),
        omega_prime=None if omega_prime is None else _number(omega_prime, "certificate.omega_prime"),
    )


def parse_config(document: Mapping, base: Optional[Path] = None, source: Optional[str] = None) -> RunConfig:
    """
    Build a RunConfig from a parsed YAML document.

    Args:
        document: Mapping with the sections mesh, materials, object, sweep, pod,
            solver, certificate and output
        base: Directory relative mesh paths are resolved against
        source: Where the document came from, echoed in reports

    Returns:
        RunConfig

    Raises:
        ConfigError: unknown sections or invalid values
    """
    if not isinstance(document, Mapping):
        raise ConfigError("Configuration must be a mapping of sections")
    unknown = sorted(set(document) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Unknown configuration sections: {unknown}")

    obj = _section(document, "object")
    if "alpha" not in obj:
        raise ConfigError("object.alpha is required")
    output = _section(document, "output")
    return RunConfig(
        alpha=_number(obj["alpha"], "object.alpha"),
        materials=_parse_materials(_section(document, "materials")),
        mesh=_parse_mesh(_section(document, "mesh"), base),
        sweep=_parse_sweep(_section(document, "sweep")),
        pod=_parse_pod(_section(document, "pod")),
        solver=_parse_solver(_section(document, "solver")),
        certificate=_parse_certificate(_section(document, "certificate")),
        output=OutputConfig(directory=str(output.get("dir", OutputConfig.directory)), stem=output.get("stem")),
        source=source,
    )


def load_config(path: str) -> RunConfig:
    """Read and parse a YAML configuration file."""
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Configuration file not found: {config_path}")
    try:
        document = yaml.safe_load(config_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {config_path}: {e}") from e
    return parse_config(document or {}, base=config_path.parent, source=str(config_path))


# ============================================================================
# OVERRIDES
# ============================================================================

def _replace(obj, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(obj, **changes) if changes else obj


def apply_overrides(config: RunConfig, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Layer environment variables, then command-line flags, over a parsed config.

    Recognised override keys: out, threads, tol, snapshots, spacing, outputs.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    env_out = env_value("MPT_OUT_DIR", str)
    env_threads = env_value("MPT_THREADS", int)
    env_solver_tol = env_value("MPT_SOLVER_TOL", float)

    directory = overrides.get("out", env_out)
    threads = overrides.get("threads", env_threads)
    solver_tol = env_solver_tol
    if threads is not None:
        threads = _number(threads, "threads", int)
    if solver_tol is not None:
        solver_tol = _number(solver_tol, "MPT_SOLVER_TOL")

    sweep = _replace(
        config.sweep,
        snapshots=None if "snapshots" not in overrides else _number(overrides["snapshots"], "snapshots", int),
        spacing=None if "spacing" not in overrides else _choice(overrides["spacing"], "spacing", SPACINGS),
        outputs=None if "outputs" not in overrides else _number(overrides["outputs"], "outputs", int),
    )
    pod = _replace(config.pod, tol=None if "tol" not in overrides
                   else _number(overrides["tol"], "tol", allow_zero=True))
    solver = _replace(config.solver, threads=threads, tol=solver_tol)
    output = _replace(config.output, directory=None if directory is None else str(directory))
    return _replace(config, sweep=sweep, pod=pod, solver=solver, output=output)


def validate_for_command(config: RunConfig, command: str) -> None:
    """Checks that depend on the command being run."""
    if command in ("sweep-pod", "compare-oracle") and config.sweep.outputs < config.sweep.snapshots:
        raise ConfigError(
            f"outputs ({config.sweep.outputs}) must be at least the number of snapshots ({config.sweep.snapshots})"
        )
    if command == "compare-oracle":
        objects = [m for m in config.materials if m.is_object]
        spheres = [s for s in config.mesh.shapes if s.kind == "sphere"]
        if config.mesh.file is not None or len(spheres) != 1 or len(config.mesh.shapes) != 1 or len(objects) != 1:
            raise ConfigError("compare-oracle needs a generated mesh with exactly one sphere of one material")


# ============================================================================
# AGENT ENTRY POINT
# ============================================================================

def execute(state: Dict[str, Any]) -> Dict[str, Any]:
    """
    Resolve the run configuration.

    Args:
        state: Pipeline state with config_path, command and overrides

    Returns:
        {"config": RunConfig}
    """
    logger.info("Config Agent: Resolving run configuration")
    try:
        path = state.get("config_path")
        if not path:
            raise ConfigError("No configuration file given (use --config PATH)")
        config = apply_overrides(load_config(path), state.get("overrides"))
        validate_for_command(config, state.get("command", "sweep-full"))
        logger.info(
            f"Config Agent: alpha={config.alpha:g}, band=[{config.sweep.omega_min:g}, {config.sweep.omega_max:g}], "
            f"N={config.sweep.snapshots}, N0={config.sweep.outputs}, spacing={config.sweep.spacing}"
        )
        return {"config": config}
    except Exception as e:
        logger.error(f"Config Agent error: {str(e)}")
        raise
