"""Fixed-step RK4 integration of the coupled weak-field propagation equations.

    dOmega_R/dz = -i beta1 (|c1|^2 Omega_R + c1 c2* Omega_L)
    dOmega_L/dz = -i beta2 (c1* c2 Omega_R + |c2|^2 Omega_L)

This is the independent check on :mod:`lambda_vortex.bloch_core`. It builds
its own right-hand side from the coupled equations and never touches the
q/X closed form, so keep it that way.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bloch_core import FieldPair, MediumConfig, PreparedState


class StepBudgetError(RuntimeError):
    """The requested z would need more RK4 steps than the configured guard allows."""


@dataclass(frozen=True)
class IntegratorConfig:
    step_count: int = 1000  # steps per absorption length
    method: str = "rk4"
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.step_count < 100:
            raise ValueError(f"step_count must be >= 100 per absorption length, got {self.step_count}")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")


def _rhs_coefficients(state: PreparedState, medium: MediumConfig):
    """Entries a_jk of dOmega/dz = A Omega, written out from the coupled equations."""
    out = []
    for t in (medium.transition_R, medium.transition_L):
        out.append(t.alpha * t.gamma / (2.0 * medium.length_L * (t.delta + 1j * t.gamma)))
    b1, b2 = out
    c1, c2 = state.c1, state.c2
    return (
        -1j * b1 * (c1 * c1.conjugate()),
        -1j * b1 * (c1 * c2.conjugate()),
        -1j * b2 * (c1.conjugate() * c2),
        -1j * b2 * (c2 * c2.conjugate()),
    )


def _rk4(a11, a12, a21, a22, R, L, h, n_steps: int):
    """Classical RK4 on a linear 2-vector system; works on scalars or broadcast arrays."""
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(n_steps):
        k1R = a11 * R + a12 * L
        k1L = a21 * R + a22 * L
        R2, L2 = R + half * k1R, L + half * k1L
        k2R = a11 * R2 + a12 * L2
        k2L = a21 * R2 + a22 * L2
        R3, L3 = R + half * k2R, L + half * k2L
        k3R = a11 * R3 + a12 * L3
        k3L = a21 * R3 + a22 * L3
        R4, L4 = R + h * k3R, L + h * k3L
        k4R = a11 * R4 + a12 * L4
        k4L = a21 * R4 + a22 * L4
        R = R + sixth * (k1R + 2.0 * k2R + 2.0 * k3R + k4R)
        L = L + sixth * (k1L + 2.0 * k2L + 2.0 * k3L + k4L)
    return R, L


def required_steps(medium: MediumConfig, z: float, cfg: IntegratorConfig) -> int:
    if z == 0:
        return 0
    labs = medium.absorption_length
    n = 1 if math.isinf(labs) else max(1, math.ceil(cfg.step_count * z / labs))
    if n > cfg.max_steps:
        raise StepBudgetError(f"z = {z} needs {n} steps, above the guard of {cfg.max_steps}")
    return n


def integrate(
    state: PreparedState,
    medium: MediumConfig,
    input: FieldPair,
    z: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> FieldPair:
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    n = required_steps(medium, z, cfg)
    if n == 0:
        return FieldPair(input.omega_R, input.omega_L)
    R, L = _rk4(*_rhs_coefficients(state, medium), input.omega_R, input.omega_L, z / n, n)
    return FieldPair(R, L)


def integrate_many(
    states: Sequence[PreparedState],
    media: Sequence[MediumConfig],
    inputs: Sequence[FieldPair],
    zs: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
):
    """Integrate independent scalar problems side by side.

    All problems advance with a common step count (the largest any one of
    them needs), each with its own step size, so every problem gets at least
    the configured density. Returns (Omega_R, Omega_L) arrays.
    """
    if not (len(states) == len(media) == len(inputs) == len(zs)):
        raise ValueError("batch arguments must have equal length")
    zs = np.asarray(zs, dtype=float)
    if np.any(zs < 0):
        raise ValueError("z must be >= 0")
    n = max((required_steps(m, float(z), cfg) for m, z in zip(media, zs)), default=0)
    R = np.array([complex(f.omega_R) for f in inputs])
    L = np.array([complex(f.omega_L) for f in inputs])
    if n == 0:
        return R, L
    coeffs = np.array([_rhs_coefficients(s, m) for s, m in zip(states, media)], dtype=complex)
    a11, a12, a21, a22 = coeffs.T
    return _rk4(a11, a12, a21, a22, R, L, zs / n, n)


@dataclass(frozen=True)
class ConvergenceEstimate:
    order: float | None
    differences: tuple[float, float]
    flag: str | None = None  # "zero_error", "roundoff_limited", "low_order"


def convergence_order(
    state: PreparedState,
    medium: MediumConfig,
    input: FieldPair,
    z: float,
    base_steps: int | None = None,
) -> ConvergenceEstimate:
    """Observed order from runs with N, 2N and 4N total steps.

    order = log2(|y_N - y_2N| / |y_2N - y_4N|). ``base_steps`` defaults to
    four steps per absorption length, coarse enough that truncation error
    stays well above roundoff.
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    if z == 0:
        return ConvergenceEstimate(None, (0.0, 0.0), "zero_error")
    if base_steps is None:
        labs = medium.absorption_length
        base_steps = 4 if math.isinf(labs) else max(4, math.ceil(4 * z / labs))
    coeffs = _rhs_coefficients(state, medium)
    runs = []
    for n in (base_steps, 2 * base_steps, 4 * base_steps):
        runs.append(np.array(_rk4(*coeffs, input.omega_R, input.omega_L, z / n, n)))
    d1 = float(np.max(np.abs(runs[0] - runs[1])))
    d2 = float(np.max(np.abs(runs[1] - runs[2])))
    scale = max(input.max_amplitude(), 1e-300)
    if d2 <= 1e-13 * scale or d1 <= 1e-13 * scale:
        warnings.warn(
            f"step differences ({d1:.2e}, {d2:.2e}) are at roundoff level; order estimate unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
        order = math.log2(d1 / d2) if d1 > 0 and d2 > 0 else None
        return ConvergenceEstimate(order, (d1, d2), "roundoff_limited" if d1 > 0 or d2 > 0 else "zero_error")
    order = math.log2(d1 / d2)
    flag = None
    if order < 3.5:
        warnings.warn(f"observed RK4 order {order:.2f} is below 3.5", RuntimeWarning, stacklevel=2)
        flag = "low_order"
    return ConvergenceEstimate(order, (d1, d2), flag)
