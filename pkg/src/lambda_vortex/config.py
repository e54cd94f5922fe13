"""Scenario configuration: JSON file + dotted-path overrides -> validated objects."""

from __future__ import annotations

import copy
import json
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .beam_synthesis import VortexBeamSpec
from .bloch_core import MediumConfig, PreparedState, TransitionParams
from .field_grid import GridSpec

OUTPUT_DIR_ENV = "LAMBDA_VORTEX_OUTPUT_DIR"
FORMATS = ("vvfm", "csv", "ppm", "svg")

DEFAULTS: dict[str, Any] = {
    "state": {"c1": 1 / math.sqrt(2), "phi_c": 0.0},
    "medium": {
        "R": {"alpha": 20.0, "gamma": 1.0, "delta": 0.0},
        "L": {"alpha": 20.0, "gamma": 1.0, "delta": 0.0},
        "length": 1.0,
    },
    "beam": {"l": 1, "waist": 1.0, "theta": math.pi / 4, "psi": 0.0, "epsilon": 0.01},
    "grid": {"n": 512, "extent": 3.0},
    "z_list": ["0xLabs", "1xLabs", "10xLabs", "30xLabs"],
    "outputs": {"directory": "out", "formats": ["vvfm", "ppm", "svg"]},
    "workers": 1,
    "glyph_lattice": 16,
    "verify": {"trials": 100, "seed": 42},
    "zc_scan": {"delta_min": -3.0, "delta_max": 3.0, "steps": 61},
    "paraxial": {"wavelength": 795e-9, "waist": 1e-3, "length": 1e-2},
}

# shorthand keys that set both legs at once
_LEG_SHORTHAND = ("alpha", "gamma", "delta")
_Z_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*(xLabs)?\s*$")


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    state: PreparedState
    medium: MediumConfig
    beam: VortexBeamSpec
    grid: GridSpec
    z_values: list[float]
    z_labels: list[str]
    output_dir: Path
    formats: list[str]
    workers: int
    glyph_lattice: int
    verify: dict
    zc_scan: dict
    paraxial: dict
    effective: dict


def _expand(cfg: dict) -> dict:
    medium = cfg.get("medium")
    if isinstance(medium, dict):
        for key in _LEG_SHORTHAND:
            if key in medium:
                value = medium.pop(key)
                for leg in ("R", "L"):
                    medium.setdefault(leg, {})[key] = value
    return cfg


def _merge(base: dict, extra: dict, path: str = "") -> None:
    for key, value in extra.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{where}: unknown configuration key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected an object")
            _merge(base[key], value, where + ".")
        else:
            base[key] = value


def parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_effective(file_cfg: dict | None = None, overrides: list[tuple[str, Any]] = ()) -> dict:
    eff = copy.deepcopy(DEFAULTS)
    if file_cfg:
        if not isinstance(file_cfg, dict):
            raise ConfigError("config root must be a JSON object")
        _merge(eff, _expand(copy.deepcopy(file_cfg)))
    for dotted, value in overrides:
        parts = dotted.split(".")
        patch: dict = {}
        node = patch
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
        _merge(eff, _expand(patch))
    return eff


def _num(eff: dict, path: str, integer: bool = False):
    node: Any = eff
    for p in path.split("."):
        node = node[p]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {node!r}")
    if integer:
        if int(node) != node:
            raise ConfigError(f"{path}: expected an integer, got {node!r}")
        return int(node)
    if not math.isfinite(node):
        raise ConfigError(f"{path}: must be finite")
    return float(node)


def _build(path: str, factory, *args):
    try:
        return factory(*args)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_z(entry, labs: float, where: str) -> float:
    if isinstance(entry, bool):
        raise ConfigError(f"{where}: invalid z value {entry!r}")
    if isinstance(entry, (int, float)):
        z = float(entry)
    elif isinstance(entry, str):
        m = _Z_RE.match(entry)
        if not m:
            raise ConfigError(f"{where}: cannot parse z value {entry!r} (use a number or '<k>xLabs')")
        z = float(m.group(1))
        if m.group(2):
            if not math.isfinite(labs):
                raise ConfigError(f"{where}: z/L_abs needs a non-zero optical depth")
            z *= labs
    else:
        raise ConfigError(f"{where}: invalid z value {entry!r}")
    if not (math.isfinite(z) and z >= 0):
        raise ConfigError(f"{where}: z must be finite and >= 0")
    return z


def resolve(eff: dict) -> ScenarioConfig:
    state = _build("state", PreparedState.from_polar, _num(eff, "state.c1"), _num(eff, "state.phi_c"))
    legs = []
    for leg in ("R", "L"):
        legs.append(
            _build(
                f"medium.{leg}",
                TransitionParams,
                _num(eff, f"medium.{leg}.alpha"),
                _num(eff, f"medium.{leg}.gamma"),
                _num(eff, f"medium.{leg}.delta"),
            )
        )
    medium = _build("medium", MediumConfig, legs[0], legs[1], _num(eff, "medium.length"))
    beam = _build(
        "beam",
        VortexBeamSpec,
        _num(eff, "beam.l", integer=True),
        _num(eff, "beam.waist"),
        _num(eff, "beam.theta"),
        _num(eff, "beam.psi"),
        _num(eff, "beam.epsilon"),
    )
    grid = _build("grid", GridSpec, _num(eff, "grid.n", integer=True), _num(eff, "grid.extent"))

    z_list = eff["z_list"]
    if not isinstance(z_list, list):
        z_list = [z_list]
    if not z_list:
        raise ConfigError("z_list: must not be empty")
    z_values = [parse_z(v, medium.absorption_length, f"z_list[{i}]") for i, v in enumerate(z_list)]

    formats = eff["outputs"]["formats"]
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError(f"outputs.formats: expected a list drawn from {list(FORMATS)}")
    out_dir = os.environ.get(OUTPUT_DIR_ENV) or eff["outputs"]["directory"]
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("outputs.directory: expected a path string")
    eff["outputs"]["directory"] = out_dir

    workers = _num(eff, "workers", integer=True)
    if workers < 1:
        raise ConfigError("workers: must be >= 1")
    lattice = _num(eff, "glyph_lattice", integer=True)
    if lattice < 1:
        raise ConfigError("glyph_lattice: must be >= 1")
    trials = _num(eff, "verify.trials", integer=True)
    seed = _num(eff, "verify.seed", integer=True)
    steps = _num(eff, "zc_scan.steps", integer=True)
    zc = {"delta_min": _num(eff, "zc_scan.delta_min"), "delta_max": _num(eff, "zc_scan.delta_max"), "steps": steps}
    par = {k: _num(eff, f"paraxial.{k}") for k in ("wavelength", "waist", "length")}

    return ScenarioConfig(
        state=state,
        medium=medium,
        beam=beam,
        grid=grid,
        z_values=z_values,
        z_labels=[str(v) for v in z_list],
        output_dir=Path(out_dir),
        formats=list(formats),
        workers=workers,
        glyph_lattice=lattice,
        verify={"trials": trials, "seed": seed},
        zc_scan=zc,
        paraxial=par,
        effective=eff,
    )


def load_config(path=None, overrides: list[tuple[str, Any]] = ()) -> ScenarioConfig:
    file_cfg = None
    if path is not None:
        try:
            file_cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return resolve(build_effective(file_cfg, overrides))
