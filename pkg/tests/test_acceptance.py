"""Desk-scale runs on configs/sphere.yaml; enable with --runslow."""

from dataclasses import replace
from pathlib import Path
import time

import numpy as np
import pytest

from agents.config_agent import load_config
from agents.fullorder_agent import full_order_sweep, run_full_order
from agents.model_agent import build_model
from agents.reduced_agent import run_reduced
from tools.oracle_tools import sphere_limits, SphereAnalytic
from tools.pod_tools import frequency_samples
from tools.transmission_tools import solve_theta1_full

pytestmark = pytest.mark.slow

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "sphere.yaml"


@pytest.fixture(scope="module")
def config():
    return load_config(str(CONFIG))


@pytest.fixture(scope="module")
def model(config):
    return build_model(config)


def with_sweep(config, **changes):
    return replace(config, sweep=replace(config.sweep, **changes))


def with_pod(config, **changes):
    return replace(config, pod=replace(config.pod, **changes))


def test_galerkin_reproduction_at_every_snapshot(config, model):
    cfg = with_pod(with_sweep(config, outputs=config.sweep.snapshots), tol=0.0)
    reduced, _ = run_reduced(cfg, model)
    full = run_full_order(cfg, model)
    for a, b in zip(full.samples, reduced.samples):
        assert a.omega == b.omega
        assert np.abs(a.tensor - b.tensor).max() <= 1e-8 * np.abs(a.tensor).max()
        assert b.delta.max() <= 1e-6 * np.abs(b.r).max()


def test_reduced_outputs_between_snapshots(config, model):
    cfg = with_pod(config, verify=True)
    reduced, tables = run_reduced(cfg, model)
    table = tables["verification"]
    assert len(table) == 20
    assert table["relative_error"].max() <= 1e-3
    assert table["valid_real"].all()
    assert table["valid_imag"].all()
    assert reduced.metadata["certificate_violations"] == []


def test_certificate_tightens_with_more_snapshots(config, model):
    widest = []
    for count in (13, 21):
        sweep, _ = run_reduced(with_pod(with_sweep(config, snapshots=count), tol=1e-6), model)
        widest.append(max(s.delta[0, 0] for s in sweep.samples))
    assert widest[1] <= widest[0]


def test_log_snapshots_decay_faster_than_lin(config, model):
    cfg = with_pod(config, compare_spacings=True)
    log_sweep, _ = run_reduced(cfg, model, "log")
    lin_sweep, _ = run_reduced(cfg, model, "lin")
    log_ratio = log_sweep.metadata["singular_values"][0][-1] / log_sweep.metadata["singular_values"][0][0]
    lin_ratio = lin_sweep.metadata["singular_values"][0][-1] / lin_sweep.metadata["singular_values"][0][0]
    assert log_ratio < lin_ratio
    assert log_ratio < 1e-3


def test_real_eigenvalues_decrease_with_frequency(config, model):
    omegas = frequency_samples(config.sweep.omega_min, config.sweep.omega_max, 20)
    samples = full_order_sweep(model["affine"], model["n0"], omegas)
    lam = np.array([s.eigs_real[0] for s in samples])
    assert np.all(np.diff(lam) < 0)
    assert all(np.all(np.diag(s.i) >= 0) for s in samples)


def test_limits_of_the_sphere(config, model):
    material = next(m for m in config.materials if m.is_object)
    static, pec = sphere_limits(SphereAnalytic(config.alpha, material.mu_r, material.sigma_star))
    n0_eigs = np.linalg.eigvalsh(model["n0"])
    assert abs(n0_eigs[0] - static) <= 0.1 * abs(static)
    high = full_order_sweep(model["affine"], model["n0"], [config.sweep.omega_max])[0]
    assert abs(high.eigs_real[0] - pec) <= 0.15 * abs(pec)


def test_online_stage_is_cheaper_than_a_full_solve(config, model):
    sweep, _ = run_reduced(config, model)
    online = sum(sweep.metadata["timings"]["online"].values()) / config.sweep.outputs
    start = time.perf_counter()
    solve_theta1_full(model["affine"], 1e5)
    full_solve = time.perf_counter() - start
    assert online * 10 <= full_solve
