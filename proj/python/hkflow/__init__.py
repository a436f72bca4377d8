"""Hyperkahler phase maps and mean curvature flow of surfaces in R^4.

Thin bindings over the C++ library. Arrays are NumPy; curves are sequences of
complex samples at equally spaced parameters on [0, 2 pi); meshes are
(vertices n x 4, triangles m x 3). Library failures raise ``hkflow.Error``,
whose ``kind`` attribute names the failure (for example ``"OriginCollision"``).
"""

from ._hkflow import (
    Error,
    Family,
    builtin_family_names,
    curve_diagnostics,
    curve_flow,
    degree,
    icosphere,
    mesh_flow,
    phase,
    run_cli,
    shrinker_residual,
    standard_structure,
    translator_residual,
    type1_fit,
    winding_number,
)

__all__ = [
    "Error",
    "Family",
    "builtin_family_names",
    "curve_diagnostics",
    "curve_flow",
    "degree",
    "icosphere",
    "mesh_flow",
    "phase",
    "run_cli",
    "shrinker_residual",
    "standard_structure",
    "translator_residual",
    "type1_fit",
    "winding_number",
]
