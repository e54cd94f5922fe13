from .maps import (
    CHI_FLOOR,
    AbsorptionMap,
    FieldMap,
    FieldMapError,
    GridSpec,
    StokesMap,
    absorption_from_fields,
    evaluate_absorption_map,
    evaluate_field_map,
    evaluate_stokes_map,
)
from .render import Palette, read_ppm, render_curve_svg, render_glyphs_svg, render_heatmap
from .vvfm import (
    VVFMChecksumError,
    VVFMError,
    VVFMFormatError,
    VVFMTruncatedError,
    VVFMVersionError,
    read_map,
    write_csv,
    write_map,
)

__all__ = [
    "CHI_FLOOR",
    "AbsorptionMap",
    "FieldMap",
    "FieldMapError",
    "GridSpec",
    "StokesMap",
    "absorption_from_fields",
    "evaluate_absorption_map",
    "evaluate_field_map",
    "evaluate_stokes_map",
    "Palette",
    "read_ppm",
    "render_curve_svg",
    "render_glyphs_svg",
    "render_heatmap",
    "VVFMChecksumError",
    "VVFMError",
    "VVFMFormatError",
    "VVFMTruncatedError",
    "VVFMVersionError",
    "read_map",
    "write_csv",
    "write_map",
]
