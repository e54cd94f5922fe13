"""Transverse-plane sampling of propagated fields, susceptibilities and Stokes data."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import bloch_core as bc
from ..beam_synthesis import PolarCoordinate, VortexBeamSpec, input_fields
from ..bloch_core import FieldPair, MediumConfig, PreparedState
from ..polarimetry import CLASS_TOL, INTENSITY_FLOOR, classify_codes, ellipse_angles, stokes_components

CHI_FLOOR = 1e-12


class FieldMapError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Square grid of n x n pixel centers spanning +-extent waists.

    Centers sit at (i - n//2) * dx with dx = 2 extent / n, so the vortex axis
    is always a pixel center.
    """

    n: int = 512
    extent: float = 3.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16:
            raise ValueError(f"grid n must be an integer >= 16, got {self.n}")
        if not (math.isfinite(self.extent) and self.extent > 0):
            raise ValueError(f"grid extent must be > 0, got {self.extent}")

    @property
    def spacing(self) -> float:
        """Pixel pitch in waist units."""
        return 2.0 * self.extent / self.n

    def axis(self, waist_w: float = 1.0) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.spacing * waist_w

    def mesh(self, waist_w: float = 1.0):
        a = self.axis(waist_w)
        return np.meshgrid(a, a, indexing="xy")


def state_meta(state: PreparedState) -> dict:
    return {"c1": [state.c1.real, state.c1.imag], "c2": [state.c2.real, state.c2.imag]}


def medium_meta(medium: MediumConfig) -> dict:
    def leg(t):
        return {"alpha": t.alpha, "gamma": t.gamma, "delta": t.delta}

    return {"R": leg(medium.transition_R), "L": leg(medium.transition_L), "length": medium.length_L}


def beam_meta(beam: VortexBeamSpec) -> dict:
    return {"l": beam.l, "waist": beam.waist_w, "theta": beam.theta, "psi": beam.psi, "epsilon": beam.epsilon}


def _base_meta(kind, state, medium, beam, grid, z, extra):
    meta = {
        "kind": kind,
        "state": state_meta(state),
        "medium": medium_meta(medium),
        "beam": beam_meta(beam),
        "grid": {"n": grid.n, "extent": grid.extent},
        "z": z,
        "z_over_labs": z / medium.absorption_length if math.isfinite(medium.absorption_length) else None,
    }
    if extra:
        meta.update(extra)
    return meta


@dataclass
class FieldMap:
    grid: GridSpec
    z: float
    omega_R: np.ndarray
    omega_L: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.n, self.grid.n)
        if self.omega_R.shape != shape or self.omega_L.shape != shape:
            raise ValueError(f"field arrays must have shape {shape}")

    @property
    def waist(self) -> float:
        return float(self.metadata.get("beam", {}).get("waist", 1.0))

    def intensity(self) -> np.ndarray:
        return np.abs(self.omega_R) ** 2 + np.abs(self.omega_L) ** 2

    def components(self) -> dict[str, np.ndarray]:
        return {"omega_R": self.omega_R, "omega_L": self.omega_L}


@dataclass
class AbsorptionMap:
    grid: GridSpec
    z: float
    chi_R: np.ndarray  # complex NaN marks undefined pixels
    chi_L: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def im_R(self) -> np.ndarray:
        return self.chi_R.imag

    @property
    def im_L(self) -> np.ndarray:
        return self.chi_L.imag

    def components(self) -> dict[str, np.ndarray]:
        return {"chi_R": self.chi_R, "chi_L": self.chi_L}


STOKES_FIELDS = ("s0", "s1", "s2", "s3", "zeta", "xi", "cls")


@dataclass
class StokesMap:
    grid: GridSpec
    z: float
    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    zeta: np.ndarray  # NaN below the intensity floor
    xi: np.ndarray
    cls: np.ndarray  # int8 indices into polarimetry.CLASS_CODES
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.zeta)

    def components(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in STOKES_FIELDS}

    def mean(self, quantity: np.ndarray) -> float:
        """Area mean over pixels with defined polarization."""
        return float(np.mean(quantity[self.defined]))


def _row_chunks(n: int, workers: int):
    workers = max(1, min(int(workers), n))
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def evaluate_field_map(
    state: PreparedState,
    medium: MediumConfig,
    beam: VortexBeamSpec,
    grid: GridSpec,
    z: float,
    workers: int = 1,
    metadata: dict | None = None,
) -> FieldMap:
    """Sample the input beam on the grid and push every pixel through the propagator.

    Rows may be split across ``workers`` threads; each pixel's arithmetic is
    independent of the split, so the output is bit-identical for any count.
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    try:
        P = bc.propagator(state, medium, z)
    except bc.DegenerateCoefficientsError as exc:
        raise FieldMapError(f"{exc} (every pixel of the {grid.n}x{grid.n} grid at z={z})") from exc

    axis = grid.axis(beam.waist_w)
    n = grid.n
    omega_R = np.empty((n, n), dtype=complex)
    omega_L = np.empty((n, n), dtype=complex)

    def work(rows):
        a, b = rows
        X, Y = np.meshgrid(axis, axis[a:b], indexing="xy")
        f0 = input_fields(beam, PolarCoordinate.from_cartesian(X, Y))
        omega_R[a:b] = P[0, 0] * f0.omega_R + P[0, 1] * f0.omega_L
        omega_L[a:b] = P[1, 0] * f0.omega_R + P[1, 1] * f0.omega_L

    chunks = _row_chunks(n, workers)
    if len(chunks) == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            list(pool.map(work, chunks))

    bc.check_weak_field(FieldPair(omega_R, omega_L), medium)
    meta = _base_meta("field", state, medium, beam, grid, z, metadata)
    return FieldMap(grid, z, omega_R, omega_L, meta)


def absorption_from_fields(state: PreparedState, medium: MediumConfig, fmap: FieldMap) -> AbsorptionMap:
    fields = FieldPair(fmap.omega_R, fmap.omega_L)
    floor = CHI_FLOOR * fields.max_amplitude()
    chi_R, chi_L = bc.susceptibilities(state, medium, fields, floor=floor)
    meta = dict(fmap.metadata)
    meta["kind"] = "absorption"
    meta["chi_floor"] = floor
    return AbsorptionMap(fmap.grid, fmap.z, chi_R, chi_L, meta)


def evaluate_absorption_map(state, medium, beam, grid, z, workers: int = 1, metadata=None) -> AbsorptionMap:
    fmap = evaluate_field_map(state, medium, beam, grid, z, workers, metadata)
    return absorption_from_fields(state, medium, fmap)


def evaluate_stokes_map(field_map: FieldMap, tol: float = CLASS_TOL) -> StokesMap:
    s0, s1, s2, s3 = stokes_components(field_map.omega_R, field_map.omega_L)
    floor = INTENSITY_FLOOR * float(np.max(s0)) if s0.size else 0.0
    zeta, xi = ellipse_angles(s0, s1, s2, s3, floor)
    meta = dict(field_map.metadata)
    meta["kind"] = "stokes"
    meta["intensity_floor"] = floor
    meta["class_tol"] = tol
    return StokesMap(field_map.grid, field_map.z, s0, s1, s2, s3, zeta, xi, classify_codes(zeta, tol), meta)
