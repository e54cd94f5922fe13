"""Coefficient algebra and analytic z-propagation for a weakly probed Lambda medium.

Units: frequencies in units of the transition decay rate (gamma = 1 by
default) and lengths in units of the medium length (L = 1 by default).
Nothing here assumes those values; they are just the defaults used
throughout the package.

The right-circular field Omega_R drives |g1> <-> |e>, the left-circular
field Omega_L drives |g2> <-> |e>. In the linear regime both fields obey

    dOmega/dz = -i M Omega,   M = diag(beta1, beta2) v v^dagger,   v = (c1, c2)

M is rank one with M^2 = X M, so exp(-i M z) = I + (exp(-i X z) - 1)/X * M.
That closed form is what :func:`propagator` evaluates.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

NORM_TOL = 1e-12
TAYLOR_SWITCH = 1e-8
WEAK_FIELD_RATIO = 0.1


class DegenerateCoefficientsError(ArithmeticError):
    """X vanishes exactly and the small-X expansion was disabled."""


class NonAbsorbingError(ValueError):
    """Im[X] >= 0, so no characteristic attenuation distance exists."""


class WeakFieldAdvisory(UserWarning):
    pass


@dataclass(frozen=True)
class PreparedState:
    """Ground-state superposition c1|g1> + c2|g2> of the prepared medium.

    The global phase is fixed so that c1 is real and non-negative; any
    relative phase ends up in c2.
    """

    c1: complex
    c2: complex

    def __post_init__(self):
        c1, c2 = complex(self.c1), complex(self.c2)
        if not (cmath.isfinite(c1) and cmath.isfinite(c2)):
            raise ValueError("state amplitudes must be finite")
        norm = abs(c1) ** 2 + abs(c2) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"|c1|^2 + |c2|^2 = {norm!r}, expected 1 within {NORM_TOL}")
        if c1 != 0 and (c1.imag != 0 or c1.real < 0):
            gauge = abs(c1) / c1
            c1, c2 = complex(abs(c1)), c2 * gauge
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)

    @classmethod
    def normalized(cls, c1: complex, c2: complex) -> "PreparedState":
        norm = math.sqrt(abs(c1) ** 2 + abs(c2) ** 2)
        if norm == 0:
            raise ValueError("cannot normalize a zero state")
        return cls(c1 / norm, c2 / norm)

    @classmethod
    def from_polar(cls, c1_magnitude: float, phi_c: float = 0.0) -> "PreparedState":
        """c1 = |c1|, c2 = sqrt(1 - |c1|^2) exp(i phi_c)."""
        if not 0.0 <= c1_magnitude <= 1.0:
            raise ValueError(f"c1 magnitude must lie in [0, 1], got {c1_magnitude}")
        c2_mag = math.sqrt(max(0.0, 1.0 - c1_magnitude ** 2))
        return cls(complex(c1_magnitude), cmath.rect(c2_mag, phi_c))

    @property
    def p1(self) -> float:
        return abs(self.c1) ** 2

    @property
    def p2(self) -> float:
        return abs(self.c2) ** 2

    @property
    def coherence(self) -> complex:
        """Ground-state coherence c1 c2*."""
        return self.c1 * self.c2.conjugate()

    @property
    def phi_c(self) -> float:
        return cmath.phase(self.c2)


@dataclass(frozen=True)
class TransitionParams:
    alpha: float
    gamma: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        # alpha == 0 is the transparent-medium limit and is allowed.
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"optical depth must be >= 0, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"decay rate must be > 0, got {self.gamma}")
        if not math.isfinite(self.delta):
            raise ValueError(f"detuning must be finite, got {self.delta}")


@dataclass(frozen=True)
class MediumConfig:
    transition_R: TransitionParams
    transition_L: TransitionParams
    length_L: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.length_L) and self.length_L > 0):
            raise ValueError(f"medium length must be > 0, got {self.length_L}")

    @classmethod
    def symmetric(cls, alpha=20.0, gamma=1.0, delta=0.0, length_L=1.0) -> "MediumConfig":
        t = TransitionParams(alpha, gamma, delta)
        return cls(t, t, length_L)

    def with_detuning(self, delta: float) -> "MediumConfig":
        r, l = self.transition_R, self.transition_L
        return MediumConfig(
            TransitionParams(r.alpha, r.gamma, delta),
            TransitionParams(l.alpha, l.gamma, delta),
            self.length_L,
        )

    @property
    def absorption_length_R(self) -> float:
        a = self.transition_R.alpha
        return self.length_L / a if a > 0 else math.inf

    @property
    def absorption_length_L(self) -> float:
        a = self.transition_L.alpha
        return self.length_L / a if a > 0 else math.inf

    @property
    def absorption_length(self) -> float:
        """Reference L_abs used to normalize z: the shorter of the two legs."""
        return min(self.absorption_length_R, self.absorption_length_L)


@dataclass(frozen=True)
class PropagationCoefficients:
    beta1: complex
    beta2: complex
    q1: complex
    q2: complex
    q3: complex
    q4: complex
    X: complex


@dataclass(frozen=True)
class FieldPair:
    """Right/left Rabi amplitudes; scalars or equally shaped complex arrays."""

    omega_R: complex | np.ndarray
    omega_L: complex | np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.omega_R)) and np.all(np.isfinite(self.omega_L))):
            raise ValueError("field components must be finite")

    def max_amplitude(self) -> float:
        return float(max(np.max(np.abs(self.omega_R)), np.max(np.abs(self.omega_L))))


def beta(t: TransitionParams, length_L: float) -> complex:
    return t.alpha * t.gamma / (2.0 * length_L * complex(t.delta, t.gamma))


def rate_X(state: PreparedState, medium: MediumConfig) -> complex:
    b1 = beta(medium.transition_R, medium.length_L)
    b2 = beta(medium.transition_L, medium.length_L)
    return b1 * state.p1 + b2 * state.p2


def coefficients(state: PreparedState, medium: MediumConfig, z: float) -> PropagationCoefficients:
    """Evaluate beta1, beta2, X and q1..q4 at distance z, term by term."""
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    b1 = beta(medium.transition_R, medium.length_L)
    b2 = beta(medium.transition_L, medium.length_L)
    p1, p2, coh = state.p1, state.p2, state.coherence
    X = b1 * p1 + b2 * p2
    e = cmath.exp(-1j * X * z)
    return PropagationCoefficients(
        beta1=b1,
        beta2=b2,
        q1=b2 * p2 + b1 * p1 * e,
        q2=b1 * coh * (e - 1),
        q3=b1 * p1 + b2 * p2 * e,
        q4=b2 * coh.conjugate() * (e - 1),
        X=X,
    )


def _coupling_matrix(state: PreparedState, medium: MediumConfig) -> np.ndarray:
    b1 = beta(medium.transition_R, medium.length_L)
    b2 = beta(medium.transition_L, medium.length_L)
    coh = state.coherence
    return np.array(
        [[b1 * state.p1, b1 * coh], [b2 * coh.conjugate(), b2 * state.p2]],
        dtype=complex,
    )


def _phi1(X: complex, z: float, taylor: bool) -> complex:
    """(exp(-i X z) - 1) / X, finite as X -> 0."""
    if taylor and abs(X) * z < TAYLOR_SWITCH:
        return -1j * z - 0.5 * X * z * z
    if X == 0:
        raise DegenerateCoefficientsError("X = 0 exactly and the small-X branch is disabled")
    return complex(np.expm1(-1j * X * z)) / X


def propagator(state: PreparedState, medium: MediumConfig, z: float, taylor: bool = True) -> np.ndarray:
    """2x2 transfer matrix [[q1/X, q2/X], [q4/X, q3/X]] at distance z."""
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    if not taylor and rate_X(state, medium) == 0:
        raise DegenerateCoefficientsError("X = 0 exactly and the small-X branch is disabled")
    M = _coupling_matrix(state, medium)
    f = _phi1(complex(M[0, 0] + M[1, 1]), z, taylor)
    P = f * M
    P[0, 0] += 1.0
    P[1, 1] += 1.0
    return P


def propagate(
    state: PreparedState, medium: MediumConfig, input: FieldPair, z: float, taylor: bool = True
) -> FieldPair:
    P = propagator(state, medium, z, taylor)
    R0, L0 = input.omega_R, input.omega_L
    return FieldPair(P[0, 0] * R0 + P[0, 1] * L0, P[1, 0] * R0 + P[1, 1] * L0)


def asymptotic_fields(
    state: PreparedState, input: FieldPair, medium: MediumConfig | None = None
) -> FieldPair:
    """Stationary fields reached once the exp(-iXz) transient has died out.

    Without ``medium`` the symmetric result (beta1 == beta2) is returned. With
    a medium the general limit q_j/X -> (beta-weighted populations)/X is used,
    which requires Im[X] < 0.
    """
    R0, L0 = input.omega_R, input.omega_L
    coh = state.coherence
    if medium is None:
        return FieldPair(state.p2 * R0 - coh * L0, -coh.conjugate() * R0 + state.p1 * L0)
    b1 = beta(medium.transition_R, medium.length_L)
    b2 = beta(medium.transition_L, medium.length_L)
    X = b1 * state.p1 + b2 * state.p2
    if X.imag >= 0:
        raise NonAbsorbingError(f"Im[X] = {X.imag} >= 0; the transient never decays")
    return FieldPair(
        (b2 * state.p2 * R0 - b1 * coh * L0) / X,
        (-b2 * coh.conjugate() * R0 + b1 * state.p1 * L0) / X,
    )


def characteristic_distance(state: PreparedState, medium: MediumConfig) -> float:
    X = rate_X(state, medium)
    if X.imag >= 0:
        raise NonAbsorbingError(f"Im[X] = {X.imag} >= 0; medium is not absorbing")
    return -0.5 / X.imag


class ZcCurve(NamedTuple):
    delta_over_gamma: np.ndarray
    zc_over_labs: np.ndarray  # NaN where the medium is non-absorbing


def zc_scan(state: PreparedState, medium_template: MediumConfig, delta_range: Sequence[float]) -> ZcCurve:
    """z_c versus a common detuning of both legs, on normalized axes (delta/gamma, z_c/L_abs).

    Detunings are normalized by the R-leg decay rate, distances by the
    reference absorption length of the template.
    """
    deltas = np.asarray(list(delta_range), dtype=float)
    if deltas.size == 0:
        raise ValueError("delta_range must not be empty")
    gamma = medium_template.transition_R.gamma
    labs = medium_template.absorption_length
    zc = np.empty_like(deltas)
    for i, d in enumerate(deltas):
        try:
            zc[i] = characteristic_distance(state, medium_template.with_detuning(float(d))) / labs
        except NonAbsorbingError:
            zc[i] = np.nan
    return ZcCurve(deltas / gamma, zc)


def steady_coherences(state: PreparedState, medium: MediumConfig, fields: FieldPair):
    """First-order optical coherences (rho_g1e, rho_g2e) driven by ``fields``."""
    tR, tL = medium.transition_R, medium.transition_L
    coh = state.coherence
    R, L = fields.omega_R, fields.omega_L
    rho1 = -(state.p1 * R + coh * L) / complex(tR.delta, tR.gamma)
    rho2 = -(coh.conjugate() * R + state.p2 * L) / complex(tL.delta, tL.gamma)
    return rho1, rho2


def _ratio(num, den, floor: float):
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    mag = np.abs(den)
    ok = (mag > 0) & (mag >= floor)
    out = np.full(np.broadcast(num, den).shape, np.nan + 1j * np.nan, dtype=complex)
    np.divide(num, den, out=out, where=ok)
    return complex(out) if out.ndim == 0 else out


def susceptibilities(state: PreparedState, medium: MediumConfig, fields: FieldPair, floor: float = 0.0):
    """(chi_R, chi_L) = (rho_g1e / Omega_R, rho_g2e / Omega_L), prefactor 1.

    Samples whose driving field magnitude is zero or below ``floor`` are
    undefined and come back as complex NaN. A leg with zero optical depth
    holds no absorbers, so its susceptibility is zero wherever defined.
    """
    rho1, rho2 = steady_coherences(state, medium, fields)
    chi_R = _ratio(rho1, fields.omega_R, floor)
    chi_L = _ratio(rho2, fields.omega_L, floor)
    if medium.transition_R.alpha == 0:
        chi_R = chi_R * 0
    if medium.transition_L.alpha == 0:
        chi_L = chi_L * 0
    return chi_R, chi_L


class ParaxialReport(NamedTuple):
    ratio: float
    passed: bool


def paraxial_check(wavelength: float, waist_w: float, length_L: float) -> ParaxialReport:
    """Diffraction may be neglected when L * lambda / w^2 < pi."""
    for name, v in (("wavelength", wavelength), ("waist", waist_w), ("length", length_L)):
        if not v > 0:
            raise ValueError(f"{name} must be > 0, got {v}")
    ratio = length_L * wavelength / waist_w ** 2
    return ParaxialReport(ratio, ratio < math.pi)


def check_weak_field(fields: FieldPair, medium: MediumConfig) -> float:
    """Return max|Omega|/gamma and warn when it exceeds the linear-regime guide value."""
    gamma = min(medium.transition_R.gamma, medium.transition_L.gamma)
    ratio = fields.max_amplitude() / gamma
    if ratio > WEAK_FIELD_RATIO:
        warnings.warn(
            f"max|Omega|/gamma = {ratio:.3g} exceeds {WEAK_FIELD_RATIO}; linear-response results may not apply",
            WeakFieldAdvisory,
            stacklevel=2,
        )
    return ratio
