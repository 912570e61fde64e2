"""Laplace normal fields of relatively normalized skew ruled surfaces.

The surface is rebuilt from its invariants (kappa, delta, lambda) by
integrating the moving frame; a support function q fixes the relative
normalization, and the Laplace normal L is evaluated in closed form and
cross-checked against a finite-difference Laplacian.
"""

from .config import SceneConfig, builtin, builtin_names, load_config
from .image import check_prop4, check_prop5, check_prop6, image_surface, segment_invariants
from .laplace import (
    VERDICTS,
    ClassificationReport,
    classify_image,
    family_case1_delta,
    family_case2_delta,
    gamma_curvature,
    laplace_field,
)
from .oracle import OracleConfig, fit_line, fit_plane, laplacian_oracle, numerical_rank
from .relnorm import SupportField, equiaffine_normal, relative_normal
from .surface import FramePoint, InvariantTriple, RuledSurface, integrate_frame, patch_point, recover_invariants

__all__ = [
    "VERDICTS",
    "ClassificationReport",
    "FramePoint",
    "InvariantTriple",
    "OracleConfig",
    "RuledSurface",
    "SceneConfig",
    "SupportField",
    "builtin",
    "builtin_names",
    "check_prop4",
    "check_prop5",
    "check_prop6",
    "classify_image",
    "equiaffine_normal",
    "family_case1_delta",
    "family_case2_delta",
    "fit_line",
    "fit_plane",
    "gamma_curvature",
    "image_surface",
    "integrate_frame",
    "laplace_field",
    "laplacian_oracle",
    "load_config",
    "numerical_rank",
    "patch_point",
    "recover_invariants",
    "relative_normal",
    "segment_invariants",
]
