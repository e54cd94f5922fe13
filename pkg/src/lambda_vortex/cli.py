"""``lambda-vortex`` command-line front end.

Every subcommand takes ``--config scenario.json`` plus any number of dotted
overrides such as ``--medium.alpha 20`` or ``--beam.psi=3.14159``.
Exit codes: 0 success, 2 configuration/usage error, 3 verification
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bloch_core as bc
from . import verification
from .beam_synthesis import texture_label
from .config import ConfigError, ScenarioConfig, load_config, parse_override_value
from .field_grid import (
    absorption_from_fields,
    evaluate_field_map,
    evaluate_stokes_map,
    render_curve_svg,
    render_glyphs_svg,
    render_heatmap,
    write_csv,
    write_map,
)
from .polarimetry import CLASS_CODES, find_windows, ring_profile

log = logging.getLogger("lambda_vortex")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _cplx(v: complex) -> list[float]:
    return [float(v.real), float(v.imag)]


def _write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _outdir(cfg: ScenarioConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def _tag(i: int, label: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in ".-" else "_" for ch in label)
    return f"{i:02d}_z{safe}"


def _meta(cfg: ScenarioConfig, **extra) -> dict:
    meta = {"config": cfg.effective}
    meta.update(extra)
    return meta


def _ring_windows(image, cfg: ScenarioConfig, mode: str):
    axis = cfg.grid.axis(cfg.beam.waist_w)
    _, prof = ring_profile(image, axis, cfg.beam.waist_w)
    w = find_windows(prof, mode=mode)
    return {"count": w.count, "uniform": w.uniform, "centers": list(w.centers)}


def _z_norm(cfg: ScenarioConfig, z: float):
    labs = cfg.medium.absorption_length
    return z / labs if math.isfinite(labs) else None


def cmd_coeffs(cfg: ScenarioConfig) -> dict:
    medium, state = cfg.medium, cfg.state
    try:
        zc = bc.characteristic_distance(state, medium)
    except bc.NonAbsorbingError:
        zc = None
    labs = medium.absorption_length
    rows = []
    for label, z in zip(cfg.z_labels, cfg.z_values):
        c = bc.coefficients(state, medium, z)
        rows.append(
            {
                "z_label": label,
                "z": z,
                "z_over_labs": _z_norm(cfg, z),
                **{k: _cplx(getattr(c, k)) for k in ("beta1", "beta2", "X", "q1", "q2", "q3", "q4")},
            }
        )
    report = {
        "L_abs": labs if math.isfinite(labs) else None,
        "z_c": zc,
        "z_c_over_labs": zc / labs if zc is not None and math.isfinite(labs) else None,
        "coefficients": rows,
        "config": cfg.effective,
    }
    _write_json(_outdir(cfg) / "coeffs.json", report)
    return report


def _field_maps(cfg: ScenarioConfig):
    for i, (label, z) in enumerate(zip(cfg.z_labels, cfg.z_values)):
        fm = evaluate_field_map(cfg.state, cfg.medium, cfg.beam, cfg.grid, z, cfg.workers, _meta(cfg, z_label=label))
        yield _tag(i, label), label, z, fm


def cmd_propagate(cfg: ScenarioConfig) -> dict:
    out = _outdir(cfg)
    summary = []
    for tag, label, z, fm in _field_maps(cfg):
        if "vvfm" in cfg.formats:
            write_map(out / f"field_{tag}.vvfm", fm)
        if "csv" in cfg.formats:
            write_csv(out / f"field_{tag}.csv", fm)
        iR, iL = np.abs(fm.omega_R) ** 2, np.abs(fm.omega_L) ** 2
        if "ppm" in cfg.formats:
            render_heatmap(iR, out / f"intensity_R_{tag}.ppm")
            render_heatmap(iL, out / f"intensity_L_{tag}.ppm")
            render_heatmap(iR + iL, out / f"intensity_total_{tag}.ppm")
        summary.append(
            {
                "z_label": label,
                "z": z,
                "z_over_labs": _z_norm(cfg, z),
                "power_R": float(iR.sum()),
                "power_L": float(iL.sum()),
                "petals_R": _ring_windows(iR, cfg, "above"),
                "petals_total": _ring_windows(iR + iL, cfg, "above"),
            }
        )
    report = {"maps": summary, "config": cfg.effective}
    _write_json(out / "propagate.json", report)
    return report


def cmd_absorption(cfg: ScenarioConfig) -> dict:
    out = _outdir(cfg)
    summary = []
    for tag, label, z, fm in _field_maps(cfg):
        am = absorption_from_fields(cfg.state, cfg.medium, fm)
        if "vvfm" in cfg.formats:
            write_map(out / f"absorption_{tag}.vvfm", am)
        if "csv" in cfg.formats:
            write_csv(out / f"absorption_{tag}.csv", am)
        if "ppm" in cfg.formats:
            render_heatmap(am.im_R, out / f"absorption_R_{tag}.ppm", "hot")
            render_heatmap(am.im_L, out / f"absorption_L_{tag}.ppm", "hot")
        summary.append(
            {
                "z_label": label,
                "z": z,
                "z_over_labs": _z_norm(cfg, z),
                "windows_R": _ring_windows(am.im_R, cfg, "below"),
                "windows_L": _ring_windows(am.im_L, cfg, "below"),
                "undefined_pixels_R": int(np.isnan(am.chi_R.real).sum()),
                "undefined_pixels_L": int(np.isnan(am.chi_L.real).sum()),
            }
        )
    report = {"maps": summary, "config": cfg.effective}
    _write_json(out / "absorption.json", report)
    return report


def cmd_stokes(cfg: ScenarioConfig) -> dict:
    out = _outdir(cfg)
    summary = []
    texture = texture_label(cfg.beam.psi).value
    for tag, label, z, fm in _field_maps(cfg):
        sm = evaluate_stokes_map(fm)
        if "vvfm" in cfg.formats:
            write_map(out / f"stokes_{tag}.vvfm", sm)
        if "csv" in cfg.formats:
            write_csv(out / f"stokes_{tag}.csv", sm)
        if "svg" in cfg.formats:
            render_glyphs_svg(sm, out / f"glyphs_{tag}.svg", cfg.glyph_lattice, title=f"{texture}, z = {label}")
        if "ppm" in cfg.formats:
            render_heatmap(sm.s0, out / f"s0_{tag}.ppm")
        d = sm.defined
        counts = np.bincount(sm.cls[d].astype(np.intp), minlength=len(CLASS_CODES)) if d.any() else np.zeros(len(CLASS_CODES))
        summary.append(
            {
                "z_label": label,
                "z": z,
                "z_over_labs": _z_norm(cfg, z),
                "defined_fraction": float(d.mean()),
                "mean_zeta": sm.mean(sm.zeta) if d.any() else None,
                "mean_2zeta": 2 * sm.mean(sm.zeta) if d.any() else None,
                "mean_s3_over_s0": sm.mean(sm.s3 / np.where(d, sm.s0, 1.0)) if d.any() else None,
                "mean_s3": sm.mean(sm.s3) if d.any() else None,
                "class_fractions": {c.value: float(k) / max(1, int(d.sum())) for c, k in zip(CLASS_CODES, counts)},
            }
        )
    report = {"texture": texture, "maps": summary, "config": cfg.effective}
    _write_json(out / "stokes.json", report)
    return report


def cmd_zc_scan(cfg: ScenarioConfig, delta_min=None, delta_max=None, steps=None) -> dict:
    p = dict(cfg.zc_scan)
    for key, val in (("delta_min", delta_min), ("delta_max", delta_max), ("steps", steps)):
        if val is not None:
            p[key] = val
    if p["steps"] < 1:
        raise UsageError("steps must be >= 1")
    gamma = cfg.medium.transition_R.gamma
    if p["steps"] == 1:
        grid = np.array([p["delta_min"]])
    else:
        grid = np.linspace(p["delta_min"], p["delta_max"], int(p["steps"]))
    curve = bc.zc_scan(cfg.state, cfg.medium, grid * gamma)
    out = _outdir(cfg)
    with (out / "zc_scan.csv").open("w", encoding="utf-8") as fh:
        fh.write("delta_over_gamma,zc_over_labs\n")
        for d, z in zip(curve.delta_over_gamma, curve.zc_over_labs):
            fh.write(f"{d:.17g},{z:.17g}\n")
    if "svg" in cfg.formats:
        render_curve_svg(curve.delta_over_gamma, curve.zc_over_labs, out / "zc_scan.svg", "detuning / gamma", "z_c / L_abs")
    points = [[float(d), None if math.isnan(z) else float(z)] for d, z in zip(curve.delta_over_gamma, curve.zc_over_labs)]
    report = {"points": points, "parameters": p, "config": cfg.effective}
    _write_json(out / "zc_scan.json", report)
    return report


def cmd_verify(cfg: ScenarioConfig, trials=None, seed=None) -> dict:
    trials = cfg.verify["trials"] if trials is None else trials
    seed = cfg.verify["seed"] if seed is None else seed
    if trials < 1:
        raise UsageError("trials must be >= 1")
    log.info("verify: seed=%d trials=%d", seed, trials)
    results = verification.run_all(trials, seed)
    report = {
        "seed": seed,
        "trials": trials,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
    _write_json(_outdir(cfg) / "verify.json", report)
    return report


def cmd_paraxial_check(cfg: ScenarioConfig, wavelength=None, waist=None, length=None) -> dict:
    p = dict(cfg.paraxial)
    for key, val in (("wavelength", wavelength), ("waist", waist), ("length", length)):
        if val is not None:
            p[key] = val
    try:
        rep = bc.paraxial_check(p["wavelength"], p["waist"], p["length"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return {"ratio": rep.ratio, "pass": rep.passed, "limit": math.pi, **p}


def _split_overrides(extra: list[str]):
    overrides, i = [], 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise UsageError(f"unrecognized argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise UsageError(f"override {tok} needs a value")
            raw = extra[i + 1]
            i += 2
        overrides.append((key, parse_override_value(raw)))
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambda-vortex", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--config", type=Path, help="scenario JSON file")
        return p

    add("coeffs", "print beta, X, q1..q4, z_c for each z")
    add("propagate", "field maps and intensity heatmaps per z")
    add("absorption", "Im chi maps and transparency-window counts per z")
    add("stokes", "Stokes maps and polarization glyph figures per z")
    p = add("zc-scan", "characteristic distance versus detuning")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--steps", type=int)
    p = add("verify", "run the seeded self-check suites")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p = add("paraxial-check", "check L lambda / w^2 < pi")
    p.add_argument("--wavelength", type=float)
    p.add_argument("--waist", type=float)
    p.add_argument("--length", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, _split_overrides(extra))
        cmd = args.command
        if cmd == "coeffs":
            report = cmd_coeffs(cfg)
        elif cmd == "propagate":
            report = cmd_propagate(cfg)
        elif cmd == "absorption":
            report = cmd_absorption(cfg)
        elif cmd == "stokes":
            report = cmd_stokes(cfg)
        elif cmd == "zc-scan":
            report = cmd_zc_scan(cfg, args.delta_min, args.delta_max, args.steps)
        elif cmd == "verify":
            report = cmd_verify(cfg, args.trials, args.seed)
        else:
            report = cmd_paraxial_check(cfg, args.wavelength, args.waist, args.length)
    except (ConfigError, UsageError) as exc:
        print(f"lambda-vortex: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lambda-vortex: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    printable = {k: v for k, v in report.items() if k != "config"}
    print(json.dumps(printable, indent=2, sort_keys=True))
    if args.command == "verify" and not report["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
