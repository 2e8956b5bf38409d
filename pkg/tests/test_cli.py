"""Config loading, CSV/manifest artifacts, command exit codes."""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from stationary_gate import cli
from stationary_gate.cli import (
    ConfigError,
    SPECTRUM_COLUMNS,
    _fmt_cell,
    execute,
    load_config,
    validate_config,
    write_csv,
)

SPECTRUM_TOML = """
job = "spectrum"
output = "tiny"

[ensemble]
n_atoms = 2500

[grid]
delta_min = 0.0
delta_max = 0.6
points = 41
"""


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


# --- config validation -------------------------------------------------------


def test_validate_config_defaults():
    config = validate_config({})
    assert config["job"] == "spectrum"
    assert config["output"] == "run"
    assert config["ensemble"]["n_atoms"] == 10000
    assert config["ensemble"]["scheme"] == "lambda"
    assert config["ensemble"]["delta_c"] == -10.0
    assert config["geometry"]["d_extra"] == "balanced"
    assert config["photon_b"]["shape"] == "dirac"
    assert config["grid"]["points"] == 351


def test_validate_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown top-level"):
        validate_config({"jobb": "spectrum"})
    with pytest.raises(ConfigError, match="ensemble: unknown keys"):
        validate_config({"ensemble": {"atoms": 10}})
    with pytest.raises(ConfigError, match="job"):
        validate_config({"job": "render"})


def test_validate_config_type_errors():
    with pytest.raises(ConfigError, match="n_atoms"):
        validate_config({"ensemble": {"n_atoms": 10.5}})
    with pytest.raises(ConfigError, match="gamma_1d"):
        validate_config({"ensemble": {"gamma_1d": "high"}})
    with pytest.raises(ConfigError, match="delta_c"):
        validate_config({"ensemble": {"delta_c": "auto"}})
    with pytest.raises(ConfigError, match="two_sided"):
        validate_config({"fidelity": {"two_sided": 1}})
    with pytest.raises(ConfigError, match="free_params"):
        validate_config({"optimize": {"free_params": ["omega0"]}})
    with pytest.raises(ConfigError, match="scheme"):
        validate_config({"ensemble": {"scheme": "ladder"}})


def test_validate_config_markers():
    config = validate_config({
        "ensemble": {"delta_c": "optimal", "stored_site": 7},
        "photon_b": {"center": 0.2},
        "fidelity": {"sigma_tilde": 0.12, "t_b": "match_r0"},
    })
    assert config["ensemble"]["delta_c"] == "optimal"
    assert config["ensemble"]["stored_site"] == 7
    assert config["photon_b"]["center"] == 0.2
    assert config["fidelity"]["sigma_tilde"] == 0.12
    assert config["fidelity"]["t_b"] == "match_r0"


def test_load_config_toml_and_json(tmp_path):
    toml_path = tmp_path / "a.toml"
    toml_path.write_text('job = "gate_time"\n')
    assert load_config(toml_path)["job"] == "gate_time"
    # the file stem is the default output name
    assert load_config(toml_path)["output"] == "a"

    json_path = tmp_path / "b.json"
    json_path.write_text('{"job": "gate_time", "output": "named"}')
    assert load_config(json_path)["output"] == "named"


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
    bad_ext = tmp_path / "conf.yaml"
    bad_ext.write_text("job: spectrum")
    with pytest.raises(ConfigError, match="extension"):
        load_config(bad_ext)
    bad_toml = tmp_path / "broken.toml"
    bad_toml.write_text("job = ")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(bad_toml)
    bad_json = tmp_path / "broken.json"
    bad_json.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad_json)


# --- table formatting ----------------------------------------------------------


def test_fmt_cell():
    assert _fmt_cell(None) == ""
    assert _fmt_cell("text") == "text"
    assert _fmt_cell(True) == "true"
    assert _fmt_cell(False) == "false"
    assert _fmt_cell(7) == "7"
    assert _fmt_cell(np.int64(7)) == "7"
    # floats round-trip exactly through the 17-digit format
    for x in (0.1, 1.0 / 3.0, 2.5e-17, math.pi):
        assert float(_fmt_cell(x)) == x


def test_write_csv_layout(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b", "c"], [{"a": 1, "b": None}, {"a": 2, "c": "x"}])
    assert path.read_text() == "a,b,c\n1,,\n2,,x\n"


# --- job execution through the public entry point --------------------------------


def test_execute_spectrum_artifacts(tmp_path):
    config = validate_config({
        "job": "spectrum",
        "output": "tiny",
        "ensemble": {"n_atoms": 2500},
        "grid": {"delta_min": 0.0, "delta_max": 0.6, "points": 41},
    })
    csv_path, manifest_path, errors = execute(config, 1, tmp_path)
    assert errors == []
    header, rows = read_csv(csv_path)
    assert header == SPECTRUM_COLUMNS
    assert len(rows) == 41
    # modulus columns are consistent with the real/imaginary parts
    for row in (rows[3], rows[25]):
        r0 = complex(float(row["re_r0"]), float(row["im_r0"]))
        assert float(row["abs2_r0"]) == pytest.approx(abs(r0) ** 2, rel=1e-12)
        t1 = complex(float(row["re_t1"]), float(row["im_t1"]))
        assert float(row["abs2_t1"]) == pytest.approx(abs(t1) ** 2, rel=1e-12)

    manifest = json.loads(manifest_path.read_text())
    assert set(manifest) == {"version", "config", "derived", "point_errors"}
    assert manifest["config"]["ensemble"]["n_atoms"] == 2500
    assert manifest["point_errors"] == []
    derived = manifest["derived"]
    for key in ("delta_res", "width_analytic", "width_numeric",
                "optimal_delta_c", "optimal_sigma_tilde", "stored_site"):
        assert key in derived
    assert derived["stored_site"] == 625  # center unit cell of 1250


def test_execute_is_deterministic(tmp_path):
    # delta_c = 0 has no transmission peak, so this also covers the
    # best-effort resonance summary in the manifest
    config = validate_config({
        "job": "spectrum",
        "ensemble": {"n_atoms": 500, "scheme": "dual_v", "placement": "random",
                     "delta_c": 0.0},
        "rng_seed": 11,
        "grid": {"points": 21},
    })
    a_csv, a_man, _ = execute(config, 1, tmp_path / "a")
    b_csv, b_man, _ = execute(config, 1, tmp_path / "b")
    assert a_csv.read_bytes() == b_csv.read_bytes()
    assert a_man.read_bytes() == b_man.read_bytes()
    derived = json.loads(a_man.read_text())["derived"]
    assert derived["delta_res"] is None
    assert "ResonanceNotFound" in derived["resonance_error"]


def test_execute_gate_time_values(tmp_path):
    config = validate_config({
        "job": "gate_time",
        "gate_time": {"hfs_splitting": 1000.0},
    })
    csv_path, _, errors = execute(config, 1, tmp_path)
    assert errors == []
    _, rows = read_csv(csv_path)
    row = rows[0]
    assert float(row["t_eit_pass"]) == pytest.approx(2.5)
    assert float(row["t_pi"]) == pytest.approx(0.10026513098523999)
    assert float(row["t_scatter"]) == pytest.approx(51.500139270059123)
    assert float(row["loss_hfs"]) == pytest.approx(0.0048925132306556155)


def test_execute_fidelity_sweep_row_consistency(tmp_path):
    config = validate_config({
        "job": "fidelity_sweep",
        "ensemble": {"n_atoms": 1000, "delta_c": "optimal"},
    })
    csv_path, manifest_path, errors = execute(config, 1, tmp_path)
    assert errors == []
    _, rows = read_csv(csv_path)
    row = rows[0]
    assert row["scheme"] == "lambda"
    f, p, fc = (float(row[k]) for k in ("f_cj", "p_suc", "f_cj_cond"))
    assert fc == pytest.approx(f / p, rel=1e-12)
    assert 0.0 < float(row["eta_eit"]) < 1.0


def test_execute_fidelity_sweep_curve_families(tmp_path):
    config = validate_config({
        "job": "fidelity_sweep",
        "ensemble": {"delta_c": "optimal"},
        "fidelity": {"n_atoms": [200, 400], "schemes": ["lambda"],
                     "t_b_modes": ["one", "match_r0"]},
    })
    csv_path, _, errors = execute(config, 1, tmp_path)
    assert errors == []
    _, rows = read_csv(csv_path)
    assert [(r["scheme"], r["t_b_mode"], r["n_atoms"]) for r in rows] == [
        ("lambda", "one", "200"), ("lambda", "one", "400"),
        ("lambda", "match_r0", "200"), ("lambda", "match_r0", "400"),
    ]
    # same ensemble point, different blocked-arm convention: the success
    # probability must differ between the two families
    p_one = float(rows[0]["p_suc"])
    p_match = float(rows[2]["p_suc"])
    assert p_one != pytest.approx(p_match, rel=1e-6)


def test_validate_config_family_lists():
    config = validate_config({
        "fidelity": {"schemes": ["dual_v", "lambda"], "t_b_modes": ["one", 0.5]},
    })
    assert config["fidelity"]["schemes"] == ["dual_v", "lambda"]
    assert config["fidelity"]["t_b_modes"] == ["one", 0.5]
    with pytest.raises(ConfigError, match="schemes"):
        validate_config({"fidelity": {"schemes": ["ladder"]}})
    with pytest.raises(ConfigError, match="t_b_modes"):
        validate_config({"fidelity": {"t_b_modes": []}})


def test_execute_placement_study(tmp_path):
    config = validate_config({
        "job": "placement_study",
        "ensemble": {"n_atoms": 400, "scheme": "dual_v", "omega0": 1.0,
                     "delta_c": "optimal"},
        "placement_study": {"spacings": [0.266], "n_realizations": 2},
    })
    csv_path, _, errors = execute(config, 1, tmp_path)
    assert errors == []
    _, rows = read_csv(csv_path)
    row = rows[0]
    assert float(row["spacing_pi"]) == 0.266
    regular = float(row["f_cj_cond_regular"])
    random_mean = float(row["f_cj_cond_random_mean"])
    assert 0.0 < regular < 1.0
    assert random_mean == pytest.approx(regular, rel=0.05)


def test_execute_placement_study_requires_dual_v(tmp_path):
    config = validate_config({"job": "placement_study"})
    with pytest.raises(ConfigError, match="dual_v"):
        execute(config, 1, tmp_path)


def test_execute_optimize_never_below_seed(tmp_path):
    config = validate_config({
        "job": "optimize",
        "ensemble": {"n_atoms": 400, "delta_c": "optimal"},
        "optimize": {"free_params": ["sigma_tilde"], "budget": 20},
    })
    csv_path, manifest_path, errors = execute(config, 1, tmp_path)
    assert errors == []
    manifest = json.loads(manifest_path.read_text())
    derived = manifest["derived"]
    _, rows = read_csv(csv_path)
    seed_value = float(rows[0]["value"])
    assert derived["best_value"] >= seed_value
    assert "sigma_tilde" in derived["best_point"]


# --- command-line entry points ------------------------------------------------------


def test_run_command_success_and_exit_codes(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "tiny.toml"
    config_path.write_text(SPECTRUM_TOML)
    result = runner.invoke(cli.main, ["run", str(config_path), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "tiny.csv").exists()
    assert (tmp_path / "tiny_manifest.json").exists()


def test_run_command_config_error(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "bad.toml"
    config_path.write_text('job = "spectrum"\nunknown_key = 1\n')
    result = runner.invoke(cli.main, ["run", str(config_path)])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_run_command_missing_file():
    runner = CliRunner()
    result = runner.invoke(cli.main, ["run", "nowhere.toml"])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_run_command_reports_failed_grid_points(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "fail.toml"
    config_path.write_text(
        'job = "fidelity_sweep"\n'
        "[ensemble]\nn_atoms = 200\ndelta_c = 0.0\n"
    )
    result = runner.invoke(cli.main, ["run", str(config_path), "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "failed" in result.output
    manifest = json.loads((tmp_path / "fail_manifest.json").read_text())
    assert len(manifest["point_errors"]) == 1
    assert "ResonanceNotFound" in manifest["point_errors"][0]


def test_verify_command_quick():
    runner = CliRunner()
    result = runner.invoke(cli.main, ["verify", "--level", "quick"])
    assert result.exit_code == 0, result.output
    assert "3/3 checks passed" in result.output
    assert result.output.count("PASS") == 3


def test_verify_command_tolerance_overrides(tmp_path):
    runner = CliRunner()
    good = tmp_path / "tol.json"
    good.write_text('{"tolerance_scale": 5.0}')
    result = runner.invoke(cli.main, ["verify", str(good), "--level", "quick"])
    assert result.exit_code == 0

    bad = tmp_path / "bad.json"
    bad.write_text('{"tolerance_scale": -2}')
    result = runner.invoke(cli.main, ["verify", str(bad)])
    assert result.exit_code == 1
    assert "config error" in result.output

    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"scale": 1}')
    result = runner.invoke(cli.main, ["verify", str(unknown)])
    assert result.exit_code == 1
