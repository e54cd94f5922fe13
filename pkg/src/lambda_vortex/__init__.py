"""Vector vortex beams in a coherently prepared three-level Lambda medium."""

from .beam_synthesis import PolarCoordinate, TextureLabel, VortexBeamSpec, input_fields, radial_profile, texture_label
from .bloch_core import (
    DegenerateCoefficientsError,
    FieldPair,
    MediumConfig,
    NonAbsorbingError,
    PreparedState,
    PropagationCoefficients,
    TransitionParams,
    asymptotic_fields,
    beta,
    characteristic_distance,
    coefficients,
    paraxial_check,
    propagate,
    propagator,
    steady_coherences,
    susceptibilities,
    zc_scan,
)

__version__ = "0.1.0"
