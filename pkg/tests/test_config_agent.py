import copy
import json

import pytest
import yaml

from agents.config_agent import (
    RunConfig,
    apply_overrides,
    execute,
    load_config,
    parse_config,
    validate_for_command,
)
from tools.errors import ConfigError
from tools.mesh_tools import EXTERIOR_TAG

ENV_VARS = ("MPT_OUT_DIR", "MPT_THREADS", "MPT_SOLVER_TOL")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


def write_yaml(path, document):
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return path


# ============================================================================
# PARSING
# ============================================================================

def test_parse_sphere_document(sphere_config_document):
    config = parse_config(sphere_config_document)
    assert isinstance(config, RunConfig)
    assert config.alpha == 0.01
    assert [m.region_tag for m in config.materials] == ["sphere", EXTERIOR_TAG]
    assert config.materials[0].is_object and not config.materials[1].is_object
    assert config.mesh.shapes[0].kind == "sphere"
    assert config.mesh.refinement_levels == 0
    assert config.sweep.snapshots == 5 and config.sweep.outputs == 5
    assert config.pod.tol == 0.0
    assert config.solver.method == "direct"
    assert config.omega_prime == 1e2
    assert config.output.directory == "results"


def test_echo_is_plain_data(sphere_config_document):
    echo = parse_config(sphere_config_document, source="inline").echo()
    assert echo["source"] == "inline"
    assert echo["mesh"]["shapes"][0]["kind"] == "sphere"
    assert echo["sweep"]["omega_max"] == 1e6
    json.dumps(echo)


def test_relative_mesh_file_is_resolved(tmp_path, sphere_config_document):
    document = copy.deepcopy(sphere_config_document)
    document["mesh"] = {"file": "meshes/object.txt"}
    config = parse_config(document, base=tmp_path)
    assert config.mesh.file == str(tmp_path / "meshes/object.txt")


@pytest.mark.parametrize("section, key, value", [
    ("sweep", "spacing", "cubic"),
    ("sweep", "snapshots", 2.5),
    ("sweep", "omega_min", -1.0),
    ("sweep", "omega_max", 10.0),
    ("pod", "tol", -1e-3),
    ("pod", "svd_method", "lanczos"),
    ("solver", "method", "cg"),
    ("certificate", "inner_product", "sobolev"),
    ("mesh", "divisions", "many"),
])
def test_invalid_values_raise(sphere_config_document, section, key, value):
    document = copy.deepcopy(sphere_config_document)
    document.setdefault(section, {})[key] = value
    with pytest.raises(ConfigError):
        parse_config(document)


def test_structural_errors(sphere_config_document):
    with pytest.raises(ConfigError, match="Unknown"):
        parse_config({**sphere_config_document, "plots": {}})
    with pytest.raises(ConfigError, match="alpha"):
        parse_config({**sphere_config_document, "object": {}})
    with pytest.raises(ConfigError):
        parse_config({**sphere_config_document, "materials": {}})
    with pytest.raises(ConfigError):
        parse_config({**sphere_config_document, "materials": {EXTERIOR_TAG: {}}})
    with pytest.raises(ConfigError, match="air"):
        parse_config({**sphere_config_document, "materials": {"sphere": {}, EXTERIOR_TAG: {"mu_r": 2.0}}})
    with pytest.raises(ConfigError):
        parse_config({**sphere_config_document, "mesh": {"half_width": 2.0}})
    with pytest.raises(ConfigError):
        parse_config(["not", "a", "mapping"])


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "absent.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("mesh: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_load_config_records_source(tmp_path, sphere_config_document):
    path = write_yaml(tmp_path / "run.yaml", sphere_config_document)
    assert load_config(str(path)).source == str(path)


# ============================================================================
# PRECEDENCE
# ============================================================================

def test_flag_beats_environment_beats_yaml(monkeypatch, sphere_config_document):
    document = copy.deepcopy(sphere_config_document)
    document["solver"] = {"threads": 2, "tol": 1e-9}
    document["output"] = {"dir": "from_yaml"}
    config = parse_config(document)

    unchanged = apply_overrides(config, {})
    assert unchanged.solver.threads == 2
    assert unchanged.output.directory == "from_yaml"

    monkeypatch.setenv("MPT_THREADS", "3")
    monkeypatch.setenv("MPT_OUT_DIR", "from_env")
    monkeypatch.setenv("MPT_SOLVER_TOL", "1e-11")
    from_env = apply_overrides(config, {"threads": None, "out": None})
    assert from_env.solver.threads == 3
    assert from_env.output.directory == "from_env"
    assert from_env.solver.tol == 1e-11

    from_flags = apply_overrides(config, {"threads": 4, "out": "from_flag", "tol": 1e-6,
                                          "snapshots": 7, "spacing": "lin", "outputs": 9})
    assert from_flags.solver.threads == 4
    assert from_flags.output.directory == "from_flag"
    assert from_flags.pod.tol == 1e-6
    assert (from_flags.sweep.snapshots, from_flags.sweep.spacing, from_flags.sweep.outputs) == (7, "lin", 9)


def test_invalid_environment_value(monkeypatch, sphere_config_document):
    monkeypatch.setenv("MPT_THREADS", "several")
    with pytest.raises(ConfigError, match="MPT_THREADS"):
        apply_overrides(parse_config(sphere_config_document))


def test_invalid_flag_value(sphere_config_document):
    with pytest.raises(ConfigError):
        apply_overrides(parse_config(sphere_config_document), {"snapshots": 0})


# ============================================================================
# COMMAND CHECKS AND AGENT
# ============================================================================

def test_outputs_must_cover_snapshots_for_reduced_commands(sphere_config_document):
    config = apply_overrides(parse_config(sphere_config_document), {"outputs": 3})
    validate_for_command(config, "sweep-full")
    for command in ("sweep-pod", "compare-oracle"):
        with pytest.raises(ConfigError, match="outputs"):
            validate_for_command(config, command)


def test_oracle_needs_a_single_sphere(sphere_config_document):
    validate_for_command(parse_config(sphere_config_document), "compare-oracle")
    document = copy.deepcopy(sphere_config_document)
    document["mesh"]["shapes"].append({"box": {"min": [1.5, 1.5, 1.5], "max": [1.9, 1.9, 1.9]}, "tag": "sphere"})
    with pytest.raises(ConfigError, match="sphere"):
        validate_for_command(parse_config(document), "compare-oracle")


def test_execute_resolves_configuration(tmp_path, sphere_config_document):
    path = write_yaml(tmp_path / "run.yaml", sphere_config_document)
    result = execute({"command": "sweep-pod", "config_path": str(path), "overrides": {"threads": 2}})
    assert result["config"].solver.threads == 2
    with pytest.raises(ConfigError):
        execute({"command": "sweep-full", "config_path": None})
