"""Stokes parameters in the circular basis, ellipse angles, and ring analyses.

Convention: S3 = |E_R|^2 - |E_L|^2, so zeta = +pi/4 is right-circular.
Orientation xi is pi-periodic and reported in [-pi/2, pi/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .bloch_core import FieldPair

CLASS_TOL = 0.05
INTENSITY_FLOOR = 1e-9


class PolarizationClass(str, Enum):
    LINEAR = "linear"
    LEFT_CIRCULAR = "left_circular"
    RIGHT_CIRCULAR = "right_circular"
    ELLIPTICAL_LEFT = "elliptical_left"
    ELLIPTICAL_RIGHT = "elliptical_right"
    UNDEFINED = "undefined"


# integer codes used in map arrays and files
CLASS_CODES = list(PolarizationClass)


@dataclass(frozen=True)
class StokesSample:
    s0: float
    s1: float
    s2: float
    s3: float
    zeta: float  # NaN when undefined
    xi: float  # NaN when undefined
    cls: PolarizationClass


def stokes_components(E_R, E_L):
    """Vectorized (S0, S1, S2, S3) for complex field arrays."""
    E_R = np.asarray(E_R, dtype=complex)
    E_L = np.asarray(E_L, dtype=complex)
    iR = E_R.real ** 2 + E_R.imag ** 2
    iL = E_L.real ** 2 + E_L.imag ** 2
    cross = np.conj(E_R) * E_L
    return iR + iL, 2.0 * cross.real, 2.0 * cross.imag, iR - iL


def ellipse_angles(s0, s1, s2, s3, floor: float = 0.0):
    """(zeta, xi) with NaN wherever s0 does not exceed ``floor``."""
    s0 = np.asarray(s0, dtype=float)
    ok = s0 > floor
    ratio = np.divide(s3, s0, out=np.zeros_like(s0), where=ok)
    zeta = np.where(ok, 0.5 * np.arcsin(np.clip(ratio, -1.0, 1.0)), np.nan)
    xi = 0.5 * np.arctan2(s2, s1)
    xi = np.where(xi >= math.pi / 2, xi - math.pi, xi)
    xi = np.where(ok, xi, np.nan)
    return zeta, xi


def classify(zeta: float, tol: float = CLASS_TOL) -> PolarizationClass:
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if zeta is None or math.isnan(zeta):
        return PolarizationClass.UNDEFINED
    if abs(zeta) <= tol:
        return PolarizationClass.LINEAR
    if abs(zeta - math.pi / 4) <= tol:
        return PolarizationClass.RIGHT_CIRCULAR
    if abs(zeta + math.pi / 4) <= tol:
        return PolarizationClass.LEFT_CIRCULAR
    return PolarizationClass.ELLIPTICAL_RIGHT if zeta > 0 else PolarizationClass.ELLIPTICAL_LEFT


def classify_codes(zeta, tol: float = CLASS_TOL) -> np.ndarray:
    """Array form of :func:`classify`, returning indices into ``CLASS_CODES``."""
    zeta = np.asarray(zeta, dtype=float)
    codes = np.full(zeta.shape, CLASS_CODES.index(PolarizationClass.UNDEFINED), dtype=np.int8)
    defined = ~np.isnan(zeta)
    z = np.where(defined, zeta, 0.0)
    q = math.pi / 4
    conditions = [
        (np.abs(z) <= tol, PolarizationClass.LINEAR),
        (np.abs(z - q) <= tol, PolarizationClass.RIGHT_CIRCULAR),
        (np.abs(z + q) <= tol, PolarizationClass.LEFT_CIRCULAR),
        (z > 0, PolarizationClass.ELLIPTICAL_RIGHT),
        (z <= 0, PolarizationClass.ELLIPTICAL_LEFT),
    ]
    assigned = ~defined
    for mask, cls in conditions:
        take = mask & ~assigned
        codes[take] = CLASS_CODES.index(cls)
        assigned |= take
    return codes


def stokes(fields: FieldPair, floor: float = 0.0, tol: float = CLASS_TOL) -> StokesSample:
    s0, s1, s2, s3 = (float(v) for v in stokes_components(fields.omega_R, fields.omega_L))
    zeta, xi = (float(v) for v in ellipse_angles(s0, s1, s2, s3, floor))
    return StokesSample(s0, s1, s2, s3, zeta, xi, classify(zeta, tol))


def rotation(xi_z, xi_0):
    """Orientation change xi(z) - xi(0), wrapped to [-pi/2, pi/2)."""
    d = (np.asarray(xi_z, dtype=float) - np.asarray(xi_0, dtype=float) + math.pi / 2) % math.pi - math.pi / 2
    d = np.where(d >= math.pi / 2, d - math.pi, d)
    return float(d) if d.ndim == 0 else d


# ---------------------------------------------------------------------------
# ring analyses


@dataclass(frozen=True)
class WindowAnalysis:
    count: int
    centers: tuple[float, ...]
    uniform: bool


def ring_profile(image: np.ndarray, axis: np.ndarray, radius: float, n_samples: int = 720):
    """Bilinearly sample a square map on the circle of given radius.

    ``axis`` holds the (shared) x and y pixel-center coordinates, ascending
    and uniformly spaced; ``image[i, j]`` sits at (x=axis[j], y=axis[i]).
    Samples touching a NaN pixel are NaN.
    """
    image = np.asarray(image, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1] or image.shape[0] != axis.size:
        raise ValueError("image must be square and match the axis length")
    phis = 2.0 * math.pi * np.arange(n_samples) / n_samples
    dx = axis[1] - axis[0]
    fx = (radius * np.cos(phis) - axis[0]) / dx
    fy = (radius * np.sin(phis) - axis[0]) / dx
    if fx.min() < 0 or fy.min() < 0 or fx.max() > axis.size - 1 or fy.max() > axis.size - 1:
        raise ValueError("ring extends beyond the map")
    j0 = np.clip(np.floor(fx).astype(int), 0, axis.size - 2)
    i0 = np.clip(np.floor(fy).astype(int), 0, axis.size - 2)
    tx, ty = fx - j0, fy - i0
    v = (
        image[i0, j0] * (1 - tx) * (1 - ty)
        + image[i0, j0 + 1] * tx * (1 - ty)
        + image[i0 + 1, j0] * (1 - tx) * ty
        + image[i0 + 1, j0 + 1] * tx * ty
    )
    return phis, v


def find_windows(
    profile: Sequence[float],
    threshold_fraction: float = 0.5,
    mode: str = "below",
    hysteresis: float = 0.05,
    phis: Sequence[float] | None = None,
) -> WindowAnalysis:
    """Connected azimuthal intervals below (``mode='below'``) or above the threshold.

    The threshold is ``threshold_fraction`` times the ring maximum. A sample
    enters an interval only past threshold -/+ hysteresis and leaves it only
    past threshold +/- hysteresis (all as fractions of the maximum). The
    profile is treated as periodic; NaN samples never change state.
    """
    v = np.asarray(profile, dtype=float)
    n = v.size
    if n < 360:
        raise ValueError(f"need at least 360 ring samples, got {n}")
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    if mode not in ("below", "above"):
        raise ValueError("mode must be 'below' or 'above'")
    if phis is None:
        phis = 2.0 * math.pi * np.arange(n) / n
    phis = np.asarray(phis, dtype=float)

    finite = ~np.isnan(v)
    peak = np.max(v[finite]) if finite.any() else 0.0
    if not peak > 0:
        return WindowAnalysis(0, (), True)
    lo = (threshold_fraction - hysteresis) * peak
    hi = (threshold_fraction + hysteresis) * peak
    if mode == "below":
        enter = finite & (v < lo)
        leave = finite & (v > hi)
    else:
        enter = finite & (v > hi)
        leave = finite & (v < lo)
    if not enter.any() or not leave.any():
        return WindowAnalysis(0, (), True)

    start = int(np.argmax(leave))  # first sample definitely outside
    inside = False
    segments: list[list[int]] = []
    for k in range(n):
        i = (start + k) % n
        if not inside and enter[i]:
            inside = True
            segments.append([])
        elif inside and leave[i]:
            inside = False
        if inside:
            segments[-1].append(i)

    nominal = threshold_fraction * peak
    beyond = finite & ((v < nominal) if mode == "below" else (v > nominal))
    centers = []
    for seg in segments:
        # the hysteresis entry point lags the nominal crossing; walk back to it
        first = seg[0]
        lead = []
        i = (first - 1) % n
        while beyond[i] and i != seg[-1] and len(lead) < n:
            lead.append(i)
            i = (i - 1) % n
        idx = np.asarray(lead[::-1] + seg)
        core = idx[beyond[idx]]
        if core.size == 0:
            core = idx
        c = np.angle(np.mean(np.exp(1j * phis[core]))) % (2.0 * math.pi)
        centers.append(float(c))
    return WindowAnalysis(len(segments), tuple(sorted(centers)), False)


def count_azimuthal_windows(profile, threshold_fraction: float = 0.5, mode: str = "below") -> int:
    return find_windows(profile, threshold_fraction, mode).count


def petal_rotation_angle(window_centers_at_psi: Sequence[float], window_centers_at_zero: Sequence[float]) -> float:
    """Mean circular offset between two equally sized sets of lobe centers.

    Centers are matched in sorted cyclic order; the cyclic shift with the
    tightest offset distribution wins, ties going to the smallest offset.
    Result lies in (-pi, pi].
    """
    a = np.sort(np.asarray(window_centers_at_psi, dtype=float) % (2 * math.pi))
    b = np.sort(np.asarray(window_centers_at_zero, dtype=float) % (2 * math.pi))
    if a.size != b.size:
        raise ValueError(f"center count mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("no centers to compare")
    best = None
    for shift in range(a.size):
        resultant = np.mean(np.exp(1j * (a - np.roll(b, shift))))
        key = (-round(abs(resultant), 12), abs(np.angle(resultant)))
        if best is None or key < best[0]:
            best = (key, float(np.angle(resultant)))
    return best[1]
