"""Seeded self-check suites run by ``lambda-vortex verify`` and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import bloch_core as bc
from . import ode_oracle
from .beam_synthesis import VortexBeamSpec
from .bloch_core import FieldPair, MediumConfig, PreparedState, TransitionParams
from .field_grid import GridSpec, evaluate_field_map
from .polarimetry import stokes_components

DEFAULT_SEED = 42


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    trials: int
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        # keep the JSON report strict
        if not math.isfinite(d["max_error"]):
            d["max_error"] = repr(d["max_error"])
        return d


def random_state(rng: np.random.Generator) -> PreparedState:
    """c1 uniform on the complex unit disc, c2 completing the norm with a random phase."""
    r = math.sqrt(rng.uniform())
    c1 = r * complex(np.exp(1j * rng.uniform(0, 2 * math.pi)))
    c2 = math.sqrt(max(0.0, 1.0 - r * r)) * complex(np.exp(1j * rng.uniform(0, 2 * math.pi)))
    return PreparedState(c1, c2)


def random_medium(rng: np.random.Generator, symmetric: bool = False, resonant: bool = False) -> MediumConfig:
    legs = []
    for _ in range(2):
        alpha = rng.uniform(1.0, 50.0)
        delta = 0.0 if resonant else rng.uniform(-3.0, 3.0)
        legs.append(TransitionParams(alpha, 1.0, delta))
    if symmetric:
        legs[1] = legs[0]
    return MediumConfig(legs[0], legs[1], 1.0)


def random_input(rng: np.random.Generator) -> FieldPair:
    amp = rng.uniform(0.0, 1.0, 2) * np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
    return FieldPair(complex(amp[0]), complex(amp[1]))


def _amp(f: FieldPair) -> float:
    return max(abs(f.omega_R), abs(f.omega_L))


def _dev(a: FieldPair, b: FieldPair) -> float:
    return max(abs(a.omega_R - b.omega_R), abs(a.omega_L - b.omega_L))


def check_oracle_equivalence(trials=100, seed=DEFAULT_SEED, cfg=ode_oracle.IntegratorConfig(), tol=1e-8) -> CheckResult:
    rng = np.random.default_rng(seed)
    states, media, inputs, zs = [], [], [], []
    for _ in range(trials):
        s, m, f = random_state(rng), random_medium(rng), random_input(rng)
        states.append(s)
        media.append(m)
        inputs.append(f)
        zs.append(rng.uniform(0.0, 30.0) * m.absorption_length)
    R, L = ode_oracle.integrate_many(states, media, inputs, zs, cfg)
    worst = 0.0
    for k in range(trials):
        ref = bc.propagate(states[k], media[k], inputs[k], zs[k])
        scale = _amp(inputs[k]) or 1.0
        err = max(abs(ref.omega_R - R[k]), abs(ref.omega_L - L[k])) / scale
        worst = max(worst, err)
    return CheckResult("oracle_equivalence", bool(worst <= tol), worst, tol, trials, "analytic vs RK4, relative to max input amplitude")


def check_identity(trials=100, seed=DEFAULT_SEED) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(trials):
        s, m, f = random_state(rng), random_medium(rng), random_input(rng)
        worst = max(worst, _dev(bc.propagate(s, m, f, 0.0), f))
    return CheckResult("identity", worst == 0.0, worst, 0.0, trials, "propagate(z=0) must return its input exactly")


def check_asymptotic(trials=100, seed=DEFAULT_SEED, tol=1e-10) -> CheckResult:
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for _ in range(trials):
        s, m, f = random_state(rng), random_medium(rng, symmetric=True, resonant=True), random_input(rng)
        far = bc.propagate(s, m, f, 50.0 * m.absorption_length)
        worst = max(worst, _dev(far, bc.asymptotic_fields(s, f)) / (_amp(f) or 1.0))
    return CheckResult("asymptotic", bool(worst <= tol), worst, tol, trials, "resonant symmetric, z = 50 L_abs")


def check_dark_state(trials=100, seed=DEFAULT_SEED, tol=1e-12) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(trials):
        s, m = random_state(rng), random_medium(rng)
        scale = complex(rng.uniform(0.1, 1.0) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
        f = FieldPair(scale * s.c2.conjugate(), -scale * s.c1.conjugate())
        z = rng.uniform(0.0, 30.0) * m.absorption_length
        rho1, rho2 = bc.steady_coherences(s, m, f)
        err = max(_dev(bc.propagate(s, m, f, z), f), abs(rho1), abs(rho2)) / _amp(f)
        worst = max(worst, err)
    return CheckResult("dark_state", bool(worst <= tol), worst, tol, trials, "inputs proportional to (c2*, -c1*)")


def check_contractivity(trials=20, seed=DEFAULT_SEED, samples=1000, rtol=1e-12) -> CheckResult:
    """Total weak-field intensity never grows with z (equal optical depths, resonance)."""
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for _ in range(trials):
        s, m, f = random_state(rng), random_medium(rng, symmetric=True, resonant=True), random_input(rng)
        zs = np.linspace(0.0, 30.0 * m.absorption_length, samples)
        energy = []
        for z in zs:
            out = bc.propagate(s, m, f, float(z))
            energy.append(abs(out.omega_R) ** 2 + abs(out.omega_L) ** 2)
        energy = np.asarray(energy)
        growth = float(np.max(np.diff(energy))) / energy[0] if energy[0] > 0 else 0.0
        worst = max(worst, growth)
    return CheckResult("contractivity", bool(worst <= rtol), worst, rtol, trials, f"max relative step increase over {samples} z-samples")


def check_stokes_identity(trials=6, seed=DEFAULT_SEED, n=64, tol=1e-12) -> CheckResult:
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for _ in range(trials):
        s, m = random_state(rng), random_medium(rng)
        beam = VortexBeamSpec(
            l=int(rng.integers(-4, 5)),
            theta=float(rng.uniform(0, math.pi / 2)),
            psi=float(rng.uniform(0, 2 * math.pi)),
            epsilon=0.01,
        )
        fm = evaluate_field_map(s, m, beam, GridSpec(n), float(rng.uniform(0, 30)) * m.absorption_length)
        s0, s1, s2, s3 = stokes_components(fm.omega_R, fm.omega_L)
        resid = np.abs(s0 ** 2 - (s1 ** 2 + s2 ** 2 + s3 ** 2))
        rel = np.divide(resid, s0 ** 2, out=np.zeros_like(resid), where=s0 > 0)
        worst = max(worst, float(rel.max()))
    return CheckResult("stokes_identity", bool(worst <= tol), worst, tol, trials, f"pointwise on {n}x{n} maps")


def check_ode_linearity(trials=20, seed=DEFAULT_SEED, tol=1e-10) -> CheckResult:
    rng = np.random.default_rng(seed + 6)
    cfg = ode_oracle.IntegratorConfig(step_count=100)
    worst = 0.0
    for _ in range(trials):
        s, m = random_state(rng), random_medium(rng)
        f1, f2 = random_input(rng), random_input(rng)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        z = rng.uniform(0, 5) * m.absorption_length
        combo = FieldPair(a * f1.omega_R + b * f2.omega_R, a * f1.omega_L + b * f2.omega_L)
        lhs = ode_oracle.integrate(s, m, combo, z, cfg)
        o1, o2 = ode_oracle.integrate(s, m, f1, z, cfg), ode_oracle.integrate(s, m, f2, z, cfg)
        rhs = FieldPair(a * o1.omega_R + b * o2.omega_R, a * o1.omega_L + b * o2.omega_L)
        worst = max(worst, _dev(lhs, rhs) / max(_amp(combo), 1e-300))
    return CheckResult("ode_linearity", bool(worst <= tol), worst, tol, trials)


def check_ode_semigroup(trials=20, seed=DEFAULT_SEED, tol=1e-9) -> CheckResult:
    rng = np.random.default_rng(seed + 7)
    cfg = ode_oracle.IntegratorConfig(step_count=200)
    worst = 0.0
    for _ in range(trials):
        s, m, f = random_state(rng), random_medium(rng), random_input(rng)
        z2 = rng.uniform(0.5, 5) * m.absorption_length
        z1 = rng.uniform(0.1, 0.9) * z2
        direct = ode_oracle.integrate(s, m, f, z2, cfg)
        split = ode_oracle.integrate(s, m, ode_oracle.integrate(s, m, f, z1, cfg), z2 - z1, cfg)
        worst = max(worst, _dev(direct, split) / (_amp(f) or 1.0))
    return CheckResult("ode_semigroup", bool(worst <= tol), worst, tol, trials)


def check_coefficient_identities(trials=100, seed=DEFAULT_SEED, tol=1e-12) -> CheckResult:
    rng = np.random.default_rng(seed + 8)
    worst = 0.0
    for _ in range(trials):
        s = random_state(rng)
        m = random_medium(rng)
        c0 = bc.coefficients(s, m, 0.0)
        exact = max(abs(c0.q1 - c0.X), abs(c0.q3 - c0.X), abs(c0.q2), abs(c0.q4))
        if exact != 0:
            worst = math.inf
        ms = random_medium(rng, symmetric=True)
        z = rng.uniform(0, 30) * ms.absorption_length
        c = bc.coefficients(s, ms, z)
        lhs, rhs = c.q1 + c.q3, c.X * (1 + np.exp(-1j * c.X * z))
        worst = max(worst, abs(lhs - rhs) / abs(c.X))
        # transfer matrix against the literal q/X quotients
        P = bc.propagator(s, m, z)
        cz = bc.coefficients(s, m, z)
        lit = np.array([[cz.q1, cz.q2], [cz.q4, cz.q3]]) / cz.X
        worst = max(worst, float(np.max(np.abs(P - lit))))
    return CheckResult("coefficient_identities", bool(worst <= tol), worst, tol, trials)


SUITES: dict[str, Callable[..., CheckResult]] = {
    "oracle_equivalence": check_oracle_equivalence,
    "identity": check_identity,
    "asymptotic": check_asymptotic,
    "dark_state": check_dark_state,
    "contractivity": check_contractivity,
    "stokes_identity": check_stokes_identity,
    "ode_linearity": check_ode_linearity,
    "ode_semigroup": check_ode_semigroup,
    "coefficient_identities": check_coefficient_identities,
}


def run_all(trials: int = 100, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    small = max(1, trials // 5)
    return [
        check_oracle_equivalence(trials, seed),
        check_identity(trials, seed),
        check_asymptotic(trials, seed),
        check_dark_state(trials, seed),
        check_contractivity(small, seed),
        check_stokes_identity(max(1, min(trials, 6)), seed),
        check_ode_linearity(small, seed),
        check_ode_semigroup(small, seed),
        check_coefficient_identities(trials, seed),
    ]
