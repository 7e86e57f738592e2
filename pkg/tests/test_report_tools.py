import json

import numpy as np
import pandas as pd
import pytest

from conftest import ALPHA, make_materials
from tools.errors import ConfigError
from tools.mpt_tools import make_sample
from tools.report_tools import (
    COLUMNS,
    frame_to_samples,
    oracle_frame,
    read_sweep,
    read_sweep_csv,
    samples_to_frame,
    singular_value_frame,
    write_sweep,
    write_table,
)
from tools.scaling_tools import Sweep


def awkward_sample(omega, certified=True):
    rng = np.random.default_rng(int(omega))
    def sym(scale):
        a = scale * rng.standard_normal((3, 3))
        return 0.5 * (a + a.T)
    sample = make_sample(omega, np.diag([1.0 / 3.0, 2.0 / 7.0, 0.1]) * ALPHA ** 3, sym(1e-7), sym(1e-7),
                         asymmetry_norm=1.234567890123e-19, kappa=np.array([1.5, 2.5, 3.5]))
    return sample.with_delta(np.abs(sym(1e-9))) if certified else sample


def sweep_of(certified=True):
    samples = [awkward_sample(w, certified) for w in (1e2, 3.3e4, 1e8)]
    return Sweep(ALPHA, make_materials(1.5, 5.96e6), samples, "pod", metadata={"ranks": [2, 3, 3]})


def test_schema_has_thirty_two_columns():
    assert len(COLUMNS) == 32
    assert len(set(COLUMNS)) == 32
    assert COLUMNS[0] == "omega"
    assert COLUMNS[-1] == "asymmetry_norm"
    assert "R12_re" in COLUMNS and "I23_im" in COLUMNS and "delta_13" in COLUMNS


def test_frame_round_trip_keeps_tensors():
    samples = sweep_of().samples
    back = frame_to_samples(samples_to_frame(samples))
    for a, b in zip(samples, back):
        assert np.array_equal(a.tensor, b.tensor)
        assert np.array_equal(a.delta, b.delta)


def test_csv_is_bit_exact(tmp_path):
    sweep = sweep_of()
    paths = write_sweep(sweep, tmp_path, "exact")
    written = read_sweep_csv(paths["csv"])
    pd.testing.assert_frame_equal(written, samples_to_frame(sweep.samples), check_exact=True)


def test_json_report_uses_null_for_missing_certificates(tmp_path):
    paths = write_sweep(sweep_of(certified=False), tmp_path, "plain", extra={"command": "sweep-full"})
    report = json.loads(paths["json"].read_text(encoding="utf-8"))
    assert report["kind"] == "pod"
    assert report["command"] == "sweep-full"
    assert report["ranks"] == [2, 3, 3]
    assert report["columns"] == list(COLUMNS)
    assert report["rows"][0]["delta_11"] is None
    assert report["kappa"][0] == [1.5, 2.5, 3.5]


def test_read_sweep_restores_configuration(tmp_path):
    sweep = sweep_of()
    paths = write_sweep(sweep, tmp_path, "full")
    for path in (paths["csv"], paths["json"]):
        back = read_sweep(path)
        assert back.alpha == ALPHA
        assert back.kind == "pod"
        assert back.material("obj").sigma_star == 5.96e6
        assert back.metadata["ranks"] == [2, 3, 3]
        assert np.array_equal(back.frequencies, sweep.frequencies)
        assert np.array_equal(back.samples[1].tensor, sweep.samples[1].tensor)
        assert np.array_equal(back.samples[1].kappa, sweep.samples[1].kappa)


def test_read_sweep_without_certificates(tmp_path):
    paths = write_sweep(sweep_of(certified=False), tmp_path, "plain")
    assert all(s.delta is None for s in read_sweep(paths["json"]).samples)


def test_read_sweep_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_sweep(tmp_path / "missing.csv")
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"alpha": 0.01, "rows": []}), encoding="utf-8")
    with pytest.raises(ConfigError):
        read_sweep(broken)


def test_missing_columns_are_reported():
    frame = samples_to_frame(sweep_of().samples).drop(columns=["I12_im"])
    with pytest.raises(ConfigError, match="I12_im"):
        frame_to_samples(frame)


def test_singular_value_frame():
    frame = singular_value_frame([[4.0, 2.0, 1.0], [1.0, 0.1, 0.01], [2.0, 2.0, 2.0]])
    assert list(frame.columns) == ["k", "sigma_1", "ratio_1", "sigma_2", "ratio_2", "sigma_3", "ratio_3"]
    assert frame["k"].tolist() == [1, 2, 3]
    assert np.allclose(frame["ratio_1"], [1.0, 0.5, 0.25])
    assert np.allclose(frame["ratio_3"], 1.0)


def test_oracle_frame_errors():
    exact = [1.0 + 1.0j, -2.0 + 0.0j]
    frame = oracle_frame([1e2, 1e3], exact, {"pod_log": [1.0 + 1.0j, -2.2 + 0.0j]})
    assert list(frame.columns) == ["omega", "exact_re", "exact_im", "pod_log_re", "pod_log_im", "pod_log_error"]
    assert frame["pod_log_error"].iloc[0] == 0.0
    assert np.isclose(frame["pod_log_error"].iloc[1], 0.1)


def test_write_table_creates_parent(tmp_path):
    path = write_table(pd.DataFrame({"a": [1.0 / 3.0]}), tmp_path / "nested" / "t.csv")
    assert path.exists()
    assert pd.read_csv(path, float_precision="round_trip")["a"].iloc[0] == 1.0 / 3.0
