"""g-functionals, norm angles and angular equivalence of norms on R^n."""

from .equiv import (EquivReport, check_sum_identity, divergence_probe, scan_constant, tan_ratio,
                    topological_constants, wielandt_bound)
from .errors import (DimensionError, DomainError, NormError, NormSemanticError, NormSyntaxError,
                     NotDualizableError)
from .geometry import (ConvexityReport, ExtremeRays, angle_modulus, compare_extreme_rays,
                       convexity_modulus, convexity_report, flatness, strict_convexity_witness,
                       vertex_angles)
from .gfunc import GPair, diff_quotient, g_functional, g_one_sided, norm_angle
from .norms import dualize, evaluate, format_norm, parse_norm
from .plane import PolarProfile, g_planar, phi_one_sided, radial, sigma

__version__ = "0.1.0"

__all__ = [
    "ConvexityReport", "DimensionError", "DomainError", "EquivReport", "ExtremeRays", "GPair",
    "NormError", "NormSemanticError", "NormSyntaxError", "NotDualizableError", "PolarProfile",
    "angle_modulus", "check_sum_identity", "compare_extreme_rays", "convexity_modulus",
    "convexity_report", "diff_quotient", "divergence_probe", "dualize", "evaluate", "flatness",
    "format_norm", "g_functional", "g_one_sided", "g_planar", "norm_angle", "parse_norm",
    "phi_one_sided", "radial", "scan_constant", "sigma", "strict_convexity_witness", "tan_ratio",
    "topological_constants", "vertex_angles", "wielandt_bound",
]
