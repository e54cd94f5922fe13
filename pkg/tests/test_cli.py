import json
import math

import numpy as np
import pytest

from lambda_vortex import bloch_core as bc
from lambda_vortex import cli
from lambda_vortex.config import OUTPUT_DIR_ENV, ConfigError, load_config, parse_z
from lambda_vortex.field_grid import read_map

SMALL = ["--grid.n", "64"]


@pytest.fixture
def out(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(d))
    return d


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_coeffs_defaults(out, capsys):
    code, stdout, _ = run(capsys, "coeffs", "--z_list", '["0xLabs", "1xLabs"]')
    assert code == 0
    rep = json.loads(stdout)
    assert rep["z_c_over_labs"] == pytest.approx(1.0, rel=1e-14)
    assert rep["L_abs"] == pytest.approx(1 / 20)
    first = rep["coefficients"][0]
    assert first["q2"] == [0.0, 0.0] and first["q4"] == [0.0, 0.0]
    assert "config" not in rep
    saved = json.loads((out / "coeffs.json").read_text())
    assert saved["config"]["medium"]["R"]["alpha"] == 20.0


def test_coeffs_detuned(out, capsys):
    code, stdout, _ = run(capsys, "coeffs", "--medium.delta", "2")
    assert code == 0
    assert json.loads(stdout)["z_c_over_labs"] == pytest.approx(5.0, rel=1e-13)


def test_config_file_and_override_precedence(tmp_path, out, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"medium": {"alpha": 10, "delta": 1.0}, "z_list": [0.0]}))
    code, stdout, _ = run(capsys, "coeffs", "--config", str(cfg), "--medium.L.alpha=30")
    assert code == 0
    eff = json.loads((out / "coeffs.json").read_text())["config"]
    assert eff["medium"]["R"]["alpha"] == 10 and eff["medium"]["L"]["alpha"] == 30
    assert eff["medium"]["R"]["delta"] == 1.0


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--medium.alpha", "-1"],
        ["coeffs", "--beam.theta", "3"],
        ["coeffs", "--state.c1", "2"],
        ["coeffs", "--no.such.key", "1"],
        ["coeffs", "--grid.n", "8"],
        ["coeffs", "--z_list", '["-1"]'],
        ["coeffs", "--z_list", '["3xFoo"]'],
        ["coeffs", "--outputs.formats", '["gif"]'],
        ["coeffs", "--medium.alpha"],
        ["coeffs", "stray"],
        ["verify", "--trials", "0"],
        ["zc-scan", "--steps", "0"],
        ["paraxial-check", "--waist", "0"],
        ["frobnicate"],
    ],
)
def test_config_and_usage_errors_exit_2(out, capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_error_messages_name_the_field(out, capsys):
    _, _, err = run(capsys, "coeffs", "--medium.R.gamma", "0")
    assert "medium.R" in err
    _, _, err = run(capsys, "coeffs", "--beam.wasit", "1")
    assert "beam.wasit" in err


def test_bad_config_file(tmp_path, out, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "coeffs", "--config", str(p))[0] == 2
    assert run(capsys, "coeffs", "--config", str(tmp_path / "missing.json"))[0] == 4


def test_unwritable_output_is_io_error(tmp_path, monkeypatch, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(blocker / "sub"))
    assert run(capsys, "coeffs")[0] == 4


def test_output_dir_from_env(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    target = tmp_path / "elsewhere"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(target))
    assert run(capsys, "coeffs", "--outputs.directory", "ignored")[0] == 0
    assert (target / "coeffs.json").exists()
    assert not (tmp_path / "ignored").exists()
    monkeypatch.delenv(OUTPUT_DIR_ENV)
    assert run(capsys, "coeffs", "--outputs.directory", "here")[0] == 0
    assert (tmp_path / "here" / "coeffs.json").exists()


def test_propagate_outputs(out, capsys):
    code, stdout, _ = run(
        capsys, "propagate", *SMALL, "--z_list", '["0xLabs", "20xLabs"]', "--beam.l", "2",
        "--outputs.formats", '["vvfm", "csv", "ppm"]',
    )
    assert code == 0
    rep = json.loads(stdout)
    assert rep["maps"][0]["petals_R"]["uniform"]
    assert rep["maps"][1]["petals_R"]["count"] == 4
    names = sorted(p.name for p in out.iterdir())
    assert "field_00_z0xLabs.vvfm" in names and "field_01_z20xLabs.csv" in names
    assert "intensity_R_01_z20xLabs.ppm" in names
    fm = read_map(out / "field_01_z20xLabs.vvfm")
    assert fm.metadata["config"]["beam"]["l"] == 2
    assert fm.metadata["z_label"] == "20xLabs"


def test_secondary_beam_generation(out, capsys):
    code, stdout, _ = run(capsys, "propagate", *SMALL, "--beam.theta", "0", "--z_list", "[0, 0.05]", "--outputs.formats", '["vvfm"]')
    assert code == 0
    powers = [m["power_R"] for m in json.loads(stdout)["maps"]]
    assert powers[0] == 0.0 and powers[1] > 0.0
    # no coherence, no generated beam
    run(capsys, "propagate", *SMALL, "--beam.theta", "0", "--state.c1", "1", "--z_list", "[0.05]", "--outputs.formats", "[]")
    assert json.loads((out / "propagate.json").read_text())["maps"][0]["power_R"] == 0.0


def test_transparent_medium_cli(out, capsys):
    run(capsys, "propagate", *SMALL, "--medium.alpha", "0", "--z_list", "[0, 2.5]", "--outputs.formats", '["vvfm"]')
    a = read_map(out / "field_00_z0.vvfm")
    b = read_map(out / "field_01_z2.5.vvfm")
    assert a.omega_R.tobytes() == b.omega_R.tobytes()
    code, stdout, _ = run(capsys, "absorption", *SMALL, "--medium.alpha", "0", "--z_list", "[1.0]", "--outputs.formats", '["vvfm"]')
    assert code == 0
    am = read_map(out / "absorption_00_z1.0.vvfm")
    assert np.nanmax(np.abs(am.chi_R)) == 0.0


def test_absorption_window_counts(out, capsys):
    for l in (1, 2, 3, 4):
        code, stdout, _ = run(capsys, "absorption", "--grid.n", "256", "--beam.l", str(l), "--z_list", '["0xLabs"]', "--outputs.formats", "[]")
        assert code == 0
        assert json.loads(stdout)["maps"][0]["windows_R"]["count"] == 2 * l


def test_stokes_textures(out, capsys):
    for psi, label in ((0.0, "radial"), (math.pi / 2, "spiral"), (math.pi, "azimuthal")):
        code, stdout, _ = run(capsys, "stokes", *SMALL, "--beam.psi", repr(psi), "--z_list", '["1xLabs"]')
        assert code == 0
        rep = json.loads(stdout)
        assert rep["texture"] == label
        assert rep["maps"][0]["class_fractions"]["linear"] == 1.0
    assert (out / "glyphs_00_z1xLabs.svg").exists()
    assert (out / "stokes_00_z1xLabs.vvfm").exists()


def test_zc_scan(out, capsys):
    code, stdout, _ = run(capsys, "zc-scan")
    assert code == 0
    pts = np.array(json.loads(stdout)["points"])
    assert pts.shape == (61, 2)
    np.testing.assert_allclose(pts[:, 1], 1 + pts[:, 0] ** 2, rtol=1e-12)
    assert pts[0, 1] == pytest.approx(10.0) and pts[30, 1] == pytest.approx(1.0)
    assert (out / "zc_scan.csv").read_text().count("\n") == 62
    assert (out / "zc_scan.svg").exists()
    code, stdout, _ = run(capsys, "zc-scan", "--steps", "1", "--delta-min", "2")
    assert json.loads(stdout)["points"] == [[2.0, pytest.approx(5.0)]]
    code, stdout, _ = run(capsys, "zc-scan", "--steps", "2", "--delta-min", "-2", "--delta-max", "2")
    assert [p[1] for p in json.loads(stdout)["points"]] == [pytest.approx(5.0)] * 2


def test_verify_passes(out, capsys):
    code, stdout, _ = run(capsys, "verify", "--trials", "10", "--seed", "7")
    assert code == 0
    rep = json.loads(stdout)
    assert rep["passed"] and rep["seed"] == 7
    assert {c["name"] for c in rep["checks"]} >= {"oracle_equivalence", "identity", "asymptotic", "dark_state", "contractivity", "stokes_identity"}


def test_verify_detects_q2_sign_error(out, capsys, monkeypatch):
    original = bc.propagator

    def mutated(*args, **kwargs):
        P = original(*args, **kwargs).copy()
        P[0, 1] = -P[0, 1]
        return P

    monkeypatch.setattr(bc, "propagator", mutated)
    code, stdout, _ = run(capsys, "verify", "--trials", "10")
    assert code == 3
    checks = {c["name"]: c for c in json.loads(stdout)["checks"]}
    assert not checks["oracle_equivalence"]["passed"]


def test_paraxial(out, capsys):
    code, stdout, _ = run(capsys, "paraxial-check")
    rep = json.loads(stdout)
    assert code == 0 and rep["pass"] and rep["ratio"] == pytest.approx(7.95e-3)
    code, stdout, _ = run(capsys, "paraxial-check", "--wavelength", "1e-3", "--waist", "1e-3", "--length", "10")
    assert not json.loads(stdout)["pass"]


def test_config_echo_reproduces_outputs(tmp_path, monkeypatch, capsys):
    first = tmp_path / "a"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(first))
    run(capsys, "stokes", "--grid.n", "32", "--beam.theta", "0.4", "--state.phi_c", "0.3", "--z_list", '["2xLabs"]', "--outputs.formats", '["vvfm"]')
    echo = read_map(first / "stokes_00_z2xLabs.vvfm").metadata["config"]
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(echo))
    second = tmp_path / "b"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(second))
    assert run(capsys, "stokes", "--config", str(cfg))[0] == 0
    name = "stokes_00_z2xLabs.vvfm"
    assert (first / name).read_bytes() != b""
    a = read_map(first / name)
    b = read_map(second / name)
    assert a.s3.tobytes() == b.s3.tobytes()
    # the echoed directory differs, everything else is identical
    a.metadata["config"]["outputs"]["directory"] = b.metadata["config"]["outputs"]["directory"]
    assert a.metadata == b.metadata


def test_deterministic_reruns(tmp_path, monkeypatch, capsys):
    blobs = []
    for i, workers in enumerate((1, 3)):
        d = tmp_path / str(i)
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(d))
        run(capsys, "absorption", "--grid.n", "48", "--workers", str(workers), "--z_list", '["0.5xLabs"]', "--outputs.formats", '["vvfm"]')
        m = read_map(d / "absorption_00_z0.5xLabs.vvfm")
        blobs.append(m.chi_R.tobytes() + m.chi_L.tobytes())
    assert blobs[0] == blobs[1]


def test_parse_z():
    assert parse_z("2xLabs", 0.05, "z") == pytest.approx(0.1)
    assert parse_z(0.3, 0.05, "z") == 0.3
    assert parse_z("0.3", 0.05, "z") == 0.3
    with pytest.raises(ConfigError):
        parse_z(True, 0.05, "z")
    with pytest.raises(ConfigError):
        parse_z("1xLabs", math.inf, "z")


def test_load_config_defaults():
    cfg = load_config()
    assert cfg.grid.n == 512 and cfg.grid.extent == 3.0
    assert cfg.medium.transition_R.alpha == 20.0 and cfg.medium.length_L == 1.0
    assert cfg.z_values == pytest.approx([0.0, 0.05, 0.5, 1.5])
    assert cfg.verify == {"trials": 100, "seed": 42}
    assert cfg.glyph_lattice == 16
