import json
import math

import numpy as np
import pytest

from giantroute import presets
from giantroute.config import ScenarioConfig, load_config, parse_config
from giantroute.dynamics import RoutingResult, simulate_packet, PacketSpec
from giantroute.errors import ConfigurationError, ConfigWarning
from giantroute.model import EffectiveParams, FullModelParams, LatticeGrid
from giantroute.output import (
    Table, format_value, read_csv, routing_table, write_outputs, write_table,
)
from giantroute.runner import run_preset, run_scenario

MINIMAL = '{"model": "effective", "N": 3, "theta": -1.5707963, "g": 0.7}'


# -- parsing ------------------------------------------------------------------

def test_minimal_config_expands_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.dt == 0.01 and cfg.n_sites == 400
    assert cfg.packet.sigma == 20 and cfg.packet.k == pytest.approx(math.pi / 2)
    assert cfg.t_end is not None
    params = cfg.model_params()
    assert isinstance(params, EffectiveParams)
    assert (params.g0_prime, params.gN, params.n_sep) == (0.7, 0.7, 3)


def test_three_level_defaults():
    cfg = parse_config('{"model": "full", "N": 1}')
    params = cfg.model_params()
    assert isinstance(params, FullModelParams)
    assert (params.g0, params.gN, params.eta, params.delta_f) == (4.0, 0.7, 17.5, 100.0)


def test_effective_from_three_level():
    cfg = parse_config('{"model": "effective", "N": 1, "include_delta0": true}')
    params = cfg.model_params()
    assert params.g0_prime == pytest.approx(0.7)
    assert params.delta0_prime == pytest.approx(0.16)
    assert params.include_delta0


def test_packet_outside_grid_names_field():
    with pytest.raises(ConfigurationError) as info:
        parse_config('{"N": 3, "g": 0.7, "packet": {"m0": -300}}')
    assert info.value.field == "packet.m0"


@pytest.mark.parametrize("doc, field", [
    ('{"N": 0}', "N"),
    ('{"dt": -1}', "dt"),
    ('{"dt": 0.9, "g": 0.7}', "dt"),
    ('{"model": "other"}', "model"),
    ('{"N": "three"}', "N"),
    ('{"g": 0.7, "t_end": 500}', "t_end"),
    ('{"output": {"format": "xml"}}', "output.format"),
])
def test_invalid_values_name_field(doc, field):
    with pytest.raises(ConfigurationError) as info:
        parse_config(doc)
    assert info.value.field == field


def test_unknown_key_strict_and_lenient():
    with pytest.raises(ConfigurationError) as info:
        parse_config('{"g": 0.7, "colour": 1}')
    assert info.value.field == "colour"
    with pytest.warns(ConfigWarning):
        cfg = parse_config('{"g": 0.7, "packet": {"spin": 1}}', strict=False)
    assert cfg.metadata["config_warnings"] == ["unknown key 'packet.spin'"]


def test_malformed_json():
    with pytest.raises(ConfigurationError):
        parse_config("{not json")
    with pytest.raises(ConfigurationError):
        parse_config("[1, 2]")


def test_round_trip_is_identical():
    cfg = parse_config(MINIMAL)
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_load_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(MINIMAL)
    assert load_config(path) == parse_config(MINIMAL)


# -- serialization ------------------------------------------------------------

def test_format_value_precision():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(3) == "3"
    assert format_value(True) == "1"
    assert format_value(float("nan")) == "nan"


def test_empty_table_is_header_only(tmp_path):
    path = write_table(Table(["value", "T_b"], []), tmp_path / "empty", "csv")
    assert path.read_bytes() == b"value,T_b\n"


def test_routing_result_has_eight_fields():
    r = RoutingResult(0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1, 91.0)
    table = routing_table(r)
    assert table.columns == ["T_a", "T_b", "R_a", "R_b", "mid_a", "mid_b", "atom_residual",
                             "t_final"]


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.normal(size=(20, 3))
    table = Table(["x", "y", "z"], [tuple(r) for r in values])
    path = write_table(table, tmp_path / "t", "csv")
    back = read_csv(path)
    assert back.columns == ["x", "y", "z"]
    assert np.allclose(np.array(back.rows), values, rtol=1e-11, atol=0)
    assert b"\r" not in path.read_bytes()


def test_json_layout(tmp_path):
    table = Table(["theta", "T_b"], [(0.0, 0.5), (1.0, float("nan"))], {"N": 3})
    doc = json.loads(write_table(table, tmp_path / "t", "json").read_text())
    assert doc["metadata"] == {"N": 3}
    assert doc["columns"] == {"theta": [0.0, 1.0], "T_b": [0.5, None]}


def test_suffix_is_appended_not_replaced(tmp_path):
    path = write_table(Table(["a"], []), tmp_path / "run.v2", "csv")
    assert path.name == "run.v2.csv"


def test_trajectory_outputs(tmp_path):
    params = EffectiveParams.equal_coupling(0.7, 3)
    grid = LatticeGrid(200)
    packet = PacketSpec(m0=-40, sigma=8)
    _, traj = simulate_packet(params, packet, grid, snapshot_stride=1000)
    heat, series = write_outputs(traj, tmp_path / "run", "csv", n_sep=3, site_window=(-5, 10))
    assert heat.name == "run_heatmap.csv" and series.name == "run_series.csv"
    rows = read_csv(heat)
    assert rows.columns == ["t", "m", "lattice", "probability"]
    assert len(rows) == len(traj.times) * 2 * 16
    s = read_csv(series)
    assert s.columns == ["t", "theta", "P_e", "P_f", "norm", "P_C_a", "P_C_b", "P_C_total"]


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        write_table(Table(["a"], []), blocker / "sub" / "t", "csv")


# -- runner -------------------------------------------------------------------

def test_run_is_deterministic_and_reproducible_from_manifest(tmp_path):
    cfg = parse_config(MINIMAL)
    m1 = run_scenario(cfg, tmp_path / "one")
    m2 = run_scenario(cfg, tmp_path / "two")
    for a, b in zip(m1.outputs, m2.outputs):
        assert open(a, "rb").read() == open(b, "rb").read()
    manifest = json.loads((tmp_path / "one" / "manifest.json").read_text())
    assert manifest["tool_version"] and manifest["wall_clock_s"] > 0
    assert abs(manifest["norm_drift"]) < 1e-6
    replay = parse_config(json.dumps(manifest["config"]))
    m3 = run_scenario(replay, tmp_path / "three")
    for a, b in zip(m1.outputs, m3.outputs):
        assert open(a, "rb").read() == open(b, "rb").read()


def test_manifest_records_adiabaticity_warning(tmp_path):
    cfg = parse_config('{"model": "effective", "task": "evolve", "N": 1, "g0": 4, "gN": 0.7, '
                       '"eta": 40, "delta_f": 100}')
    manifest = run_scenario(cfg, tmp_path)
    assert any("AdiabaticityWarning" in w for w in manifest.warnings)


def test_scatter_output(tmp_path):
    cfg = parse_config('{"task": "scatter", "N": 3, "g": 0.7, "theta": -1.5707963267948966}')
    (path,) = run_scenario(cfg, tmp_path).outputs
    table = read_csv(path)
    t_b = table.rows[table.column("amplitude").tolist().index("t_b")]
    assert t_b[3] == pytest.approx(1.0, abs=1e-12)
    assert max(table.column("oracle_diff")) < 1e-10


def test_wavepacket_sweep_matches_direct_runs(tmp_path):
    cfg = parse_config('{"task": "sweep", "N": 3, "g": 0.7, '
                       '"sweep": {"kind": "theta", "values": [0.0, 1.0], "method": "wavepacket"}}')
    (path,) = run_scenario(cfg, tmp_path, threads=1).outputs
    table = read_csv(path)
    direct = presets.packet_transmissions([EffectiveParams.equal_coupling(0.7, 3, th)
                                           for th in (0.0, 1.0)])
    assert table.column("T_b") == pytest.approx([r.T_b for r in direct], abs=1e-11)


def test_preset_fig4b(tmp_path):
    manifest = run_preset("fig4b", tmp_path)
    table = read_csv(manifest.outputs[0])
    assert table.columns == ["theta", "T_a_analytic", "T_b_analytic"]
    assert len(table) == 41
    i = int(np.argmin(np.abs(table.column("theta") + math.pi / 2)))
    assert table.rows[i][2] == pytest.approx(1.0, abs=1e-10)


def test_preset_fig2a_layout():
    table = presets.fig2a(thetas=(0.0,), separations=(1, 2))
    assert table.columns == ["theta", "N", "T_b_with_delta0", "T_b_without_delta0"]
    assert [row[1] for row in table.rows] == [1, 2]


def test_unknown_preset(tmp_path):
    with pytest.raises(ValueError):
        run_preset("fig9", tmp_path)


def test_scenario_defaults_instance():
    assert ScenarioConfig().model == "effective"
