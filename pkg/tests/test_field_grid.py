import csv
import json
import math

import numpy as np
import pytest

from lambda_vortex.beam_synthesis import PolarCoordinate, VortexBeamSpec, input_fields
from lambda_vortex.bloch_core import MediumConfig, PreparedState
from lambda_vortex.field_grid import (
    GridSpec,
    VVFMChecksumError,
    VVFMFormatError,
    VVFMTruncatedError,
    VVFMVersionError,
    evaluate_absorption_map,
    evaluate_field_map,
    evaluate_stokes_map,
    read_map,
    read_ppm,
    render_curve_svg,
    render_glyphs_svg,
    render_heatmap,
    write_csv,
    write_map,
)
from lambda_vortex.field_grid.vvfm import decode_map, encode_map
from lambda_vortex.polarimetry import find_windows, ring_profile

EQUAL = PreparedState(1 / math.sqrt(2), 1 / math.sqrt(2))
SYM = MediumConfig.symmetric(alpha=20.0)
LABS = SYM.absorption_length


def _field(n=32, z=LABS, beam=VortexBeamSpec(l=2, psi=0.4), **kw):
    return evaluate_field_map(EQUAL, SYM, beam, GridSpec(n), z, **kw)


def test_grid_spec():
    g = GridSpec(8 * 2, 3.0)
    assert g.spacing == pytest.approx(6.0 / 16)
    ax = g.axis()
    assert ax[g.n // 2] == 0.0
    assert ax[0] == pytest.approx(-3.0)
    np.testing.assert_allclose(np.diff(ax), g.spacing)
    with pytest.raises(ValueError):
        GridSpec(15)
    with pytest.raises(ValueError):
        GridSpec(64, 0.0)


def test_zero_distance_map_equals_input_sampling():
    beam = VortexBeamSpec(l=3, theta=0.6, psi=1.2, waist_w=1.5)
    grid = GridSpec(48)
    fm = evaluate_field_map(EQUAL, SYM, beam, grid, 0.0)
    X, Y = grid.mesh(beam.waist_w)
    f0 = input_fields(beam, PolarCoordinate.from_cartesian(X, Y))
    np.testing.assert_array_equal(fm.omega_R, f0.omega_R)
    np.testing.assert_array_equal(fm.omega_L, f0.omega_L)
    # the axis pixel is a vortex null
    c = grid.n // 2
    assert fm.omega_R[c, c] == 0 and fm.omega_L[c, c] == 0


def test_map_metadata():
    fm = _field()
    assert fm.metadata["kind"] == "field"
    assert fm.metadata["z_over_labs"] == pytest.approx(1.0)
    assert fm.metadata["beam"]["l"] == 2
    json.dumps(fm.metadata)


def test_negative_z_rejected():
    with pytest.raises(ValueError):
        _field(z=-1.0)


def test_transparent_medium_leaves_beam_unchanged():
    m = MediumConfig.symmetric(alpha=0.0)
    a = evaluate_field_map(EQUAL, m, VortexBeamSpec(), GridSpec(16), 0.0)
    b = evaluate_field_map(EQUAL, m, VortexBeamSpec(), GridSpec(16), 5.0)
    np.testing.assert_array_equal(a.omega_R, b.omega_R)
    np.testing.assert_array_equal(a.omega_L, b.omega_L)


def test_rerun_is_bit_identical():
    a, b = _field(n=16), _field(n=16)
    assert encode_map(a) == encode_map(b)


@pytest.mark.parametrize("workers", [2, 4, 7])
def test_parallel_evaluation_is_bit_identical(workers):
    ref = _field(n=64, workers=1)
    par = _field(n=64, workers=workers)
    assert ref.omega_R.tobytes() == par.omega_R.tobytes()
    assert ref.omega_L.tobytes() == par.omega_L.tobytes()


@pytest.mark.parametrize("kind", ["field", "absorption", "stokes"])
def test_vvfm_round_trip(tmp_path, kind):
    fm = _field()
    m = {"field": fm, "absorption": evaluate_absorption_map(EQUAL, SYM, VortexBeamSpec(l=2), GridSpec(32), LABS), "stokes": evaluate_stokes_map(fm)}[kind]
    path = write_map(tmp_path / "m.vvfm", m)
    back = read_map(path)
    assert type(back) is type(m)
    assert back.grid == m.grid and back.z == m.z
    for name, arr in m.components().items():
        got = back.components()[name]
        assert got.dtype == arr.dtype
        assert got.tobytes() == arr.tobytes()
    assert back.metadata == m.metadata
    assert encode_map(back) == path.read_bytes()


def test_vvfm_header_layout(tmp_path):
    fm = _field(n=16)
    data = encode_map(fm)
    assert data[:4] == b"VVFM"
    assert int.from_bytes(data[4:6], "little") == 1
    assert int.from_bytes(data[6:10], "little") == 16
    assert int.from_bytes(data[26:28], "little") == 2
    meta_len = int.from_bytes(data[28:32], "little")
    assert json.loads(data[32 : 32 + meta_len])["components"] == ["omega_R", "omega_L"]
    assert len(data) == 32 + meta_len + 2 * 16 * 16 * 16 + 4


def test_vvfm_corruption_detected(tmp_path):
    data = bytearray(encode_map(_field(n=16)))
    bad = bytearray(data)
    bad[-1] ^= 0xFF
    with pytest.raises(VVFMChecksumError):
        decode_map(bytes(bad))
    bad = bytearray(data)
    bad[len(data) // 2] ^= 0x01
    with pytest.raises(VVFMChecksumError):
        decode_map(bytes(bad))
    with pytest.raises(VVFMFormatError):
        decode_map(b"XXXX" + bytes(data[4:]))
    bad = bytearray(data)
    bad[4] = 9
    with pytest.raises(VVFMVersionError):
        decode_map(bytes(bad))
    with pytest.raises(VVFMTruncatedError):
        decode_map(bytes(data[:-10]))
    with pytest.raises(VVFMTruncatedError):
        decode_map(bytes(data[:12]))
    p = tmp_path / "bad.vvfm"
    p.write_bytes(bytes(data) + b"\0")
    with pytest.raises(VVFMFormatError):
        read_map(p)


def test_csv_export(tmp_path):
    fm = _field(n=16)
    path = write_csv(tmp_path / "f.csv", fm)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "omega_R_re", "omega_R_im", "omega_L_re", "omega_L_im"]
    assert len(rows) == 1 + 16 * 16
    k = 5 * 16 + 9
    assert float(rows[1 + k][2]) == fm.omega_R[5, 9].real
    assert float(rows[1 + k][5]) == fm.omega_L[5, 9].imag
    sm = evaluate_stokes_map(fm)
    with write_csv(tmp_path / "s.csv", sm).open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0][-1] == "class" and rows[0][2] == "s0"
    assert len(rows) == 1 + 16 * 16


def test_stokes_map_linear_texture():
    sm = evaluate_stokes_map(_field(n=64, beam=VortexBeamSpec(l=1), z=10 * LABS))
    d = sm.defined
    assert d.mean() > 0.9
    assert np.all(np.abs(sm.zeta[d]) < 0.02)
    assert np.all(sm.cls[d] == 0)
    c = 32
    assert not d[c, c]


def test_stokes_identity_on_map():
    sm = evaluate_stokes_map(_field(n=64, beam=VortexBeamSpec(l=3, theta=0.3, psi=2.0), z=3 * LABS))
    resid = np.abs(sm.s0 ** 2 - (sm.s1 ** 2 + sm.s2 ** 2 + sm.s3 ** 2))
    assert np.all(resid <= 1e-12 * sm.s0 ** 2)


def test_absorption_map_limits():
    grid = GridSpec(128)
    am = evaluate_absorption_map(EQUAL, SYM, VortexBeamSpec(l=1), grid, 40 * LABS)
    X, Y = grid.mesh()
    phi = np.arctan2(Y, X)
    off_line = np.abs(np.sin(phi)) > 0.1
    assert np.nanmax(am.im_R[off_line]) < 1e-12
    on_line = (np.abs(Y) < 1e-12) & (np.abs(X) > 0.05)
    np.testing.assert_allclose(am.im_R[on_line], 1.0, atol=1e-12)
    assert np.isnan(am.im_R[64, 64])


def test_transparent_medium_gives_zero_absorption():
    am = evaluate_absorption_map(EQUAL, MediumConfig.symmetric(alpha=0.0), VortexBeamSpec(l=2), GridSpec(32), 1.0)
    d = ~np.isnan(am.im_R)
    assert d.sum() > 0
    assert np.all(am.im_R[d] == 0) and np.all(am.im_L[~np.isnan(am.im_L)] == 0)


def test_petals_at_depth():
    grid = GridSpec(256)
    fm = evaluate_field_map(EQUAL, SYM, VortexBeamSpec(l=2), grid, 20 * LABS)
    _, prof = ring_profile(np.abs(fm.omega_R) ** 2, grid.axis(), 1.0)
    assert find_windows(prof, mode="above").count == 4


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_grid_refinement_consistency(l):
    counts = []
    for n in (256, 512):
        grid = GridSpec(n)
        am = evaluate_absorption_map(EQUAL, SYM, VortexBeamSpec(l=l), grid, LABS)
        fm = evaluate_field_map(EQUAL, SYM, VortexBeamSpec(l=l), grid, 10 * LABS)
        _, a = ring_profile(am.im_R, grid.axis(), 1.0)
        _, p = ring_profile(np.abs(fm.omega_R) ** 2, grid.axis(), 1.0)
        counts.append((find_windows(a).count, find_windows(p, mode="above").count))
    assert counts[0] == counts[1]
    assert counts[0] == (2 * l, 2 * l)


def test_heatmap_rendering(tmp_path):
    img = read_ppm(render_heatmap(np.full((20, 30), 2.5), tmp_path / "c.ppm"))
    assert img.shape == (20, 30, 3)
    assert np.all(img == img[0, 0])
    data = np.arange(12.0).reshape(3, 4)
    data[0, 0] = np.nan
    img = read_ppm(render_heatmap(data, tmp_path / "g.ppm", "gray"))
    # row 0 of the image is the top, i.e. the last data row
    assert tuple(img[-1, 0]) == (255, 255, 255)
    assert tuple(img[0, -1]) == (255, 255, 255)
    assert img[-1, 1, 0] < img[0, 2, 0]
    with pytest.raises(ValueError):
        render_heatmap(np.zeros((0, 0)), tmp_path / "e.ppm")
    with pytest.raises(ValueError):
        render_heatmap(data, tmp_path / "p.ppm", "sepia")


def test_absorption_heatmap_shows_fourfold_pattern(tmp_path):
    grid = GridSpec(256)
    am = evaluate_absorption_map(EQUAL, SYM, VortexBeamSpec(l=2), grid, 0.0)
    img = read_ppm(render_heatmap(am.im_R, tmp_path / "a.ppm", "hot")).astype(float).sum(axis=2)
    _, prof = ring_profile(img[::-1], grid.axis(), 1.0)
    assert find_windows(prof).count == 4


def test_glyph_svg(tmp_path):
    sm = evaluate_stokes_map(_field(n=64, beam=VortexBeamSpec(l=1, theta=math.pi / 8), z=LABS))
    text = render_glyphs_svg(sm, tmp_path / "g.svg", lattice=8, title="a < b").read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert "<ellipse" in text and "&lt;" in text
    lin = evaluate_stokes_map(_field(n=64, beam=VortexBeamSpec(l=1), z=LABS))
    text = render_glyphs_svg(lin, tmp_path / "l.svg", lattice=8).read_text()
    assert "<line" in text and "<ellipse" not in text
    with pytest.raises(ValueError):
        render_glyphs_svg(lin, tmp_path / "x.svg", lattice=0)


def test_curve_svg(tmp_path):
    xs = np.linspace(-3, 3, 61)
    text = render_curve_svg(xs, 1 + xs ** 2, tmp_path / "c.svg", "d", "zc").read_text()
    assert "<polyline" in text
