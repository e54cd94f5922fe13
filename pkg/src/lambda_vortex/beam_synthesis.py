"""Input vector vortex beams: paired p = 0 LG modes with charges +l (R) and -l (L)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bloch_core import FieldPair

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Map an angle to [0, 2 pi)."""
    w = a % TWO_PI
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True)
class VortexBeamSpec:
    """Vector vortex entering the medium.

    The R component carries exp(+i l phi) with amplitude eps sin(theta) e^{i psi},
    the L component exp(-i l phi) with amplitude eps cos(theta).
    ``psi`` is stored wrapped to [0, 2 pi).
    """

    l: int = 1
    waist_w: float = 1.0
    theta: float = math.pi / 4
    psi: float = 0.0
    epsilon: float = 0.01

    def __post_init__(self):
        if int(self.l) != self.l:
            raise ValueError(f"topological charge must be an integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))
        if not (math.isfinite(self.waist_w) and self.waist_w > 0):
            raise ValueError(f"waist must be > 0, got {self.waist_w}")
        if not (0.0 <= self.theta <= math.pi / 2):
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not math.isfinite(self.psi):
            raise ValueError("psi must be finite")
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @property
    def epsilon_R(self) -> complex:
        return self.epsilon * math.sin(self.theta) * complex(math.cos(self.psi), math.sin(self.psi))

    @property
    def epsilon_L(self) -> float:
        return self.epsilon * math.cos(self.theta)


@dataclass(frozen=True)
class PolarCoordinate:
    """Transverse position; ``r`` and ``phi`` may be equally shaped arrays."""

    r: float | np.ndarray
    phi: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.r) < 0):
            raise ValueError("r must be >= 0")
        phi = np.asarray(self.phi)
        if np.any(phi < 0) or np.any(phi >= TWO_PI):
            raise ValueError("phi must lie in [0, 2 pi)")

    @classmethod
    def from_cartesian(cls, x, y) -> "PolarCoordinate":
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        phi = np.where(phi < 0, phi + TWO_PI, phi)
        # arctan2 of (-0.0, negative) rounds to 2 pi after the shift
        phi = np.where(phi >= TWO_PI, 0.0, phi)
        if np.ndim(r) == 0:
            return cls(float(r), float(phi))
        return cls(r, phi)


class TextureLabel(str, Enum):
    RADIAL = "radial"
    SPIRAL = "spiral"
    AZIMUTHAL = "azimuthal"
    GENERIC = "generic"


def radial_profile(spec: VortexBeamSpec, r):
    """A(r) = (r/w)^|l| exp(-r^2/w^2), without LG normalization constants."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be >= 0")
    s = np.asarray(r, dtype=float) / spec.waist_w
    a = s ** abs(spec.l) * np.exp(-s * s)
    return float(a) if a.ndim == 0 else a


def input_fields(spec: VortexBeamSpec, p: PolarCoordinate) -> FieldPair:
    a = radial_profile(spec, p.r)
    lphi = spec.l * np.asarray(p.phi, dtype=float)
    wind = np.cos(lphi) + 1j * np.sin(lphi)
    omega_R = spec.epsilon_R * a * wind
    omega_L = spec.epsilon_L * a * np.conj(wind)
    if np.ndim(omega_R) == 0:
        return FieldPair(complex(omega_R), complex(omega_L))
    return FieldPair(omega_R, omega_L)


def texture_label(psi: float, tol: float = 1e-9) -> TextureLabel:
    """Polarization texture produced by equal-amplitude inputs with relative phase psi."""
    for target, label in ((0.0, TextureLabel.RADIAL), (math.pi / 2, TextureLabel.SPIRAL), (math.pi, TextureLabel.AZIMUTHAL)):
        d = math.remainder(psi - target, TWO_PI)
        if abs(d) <= tol:
            return label
    return TextureLabel.GENERIC
