"""Frames, curvature and Gauss-Bonnet checks for surfaces in the Heisenberg group H^1."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .heisenberg import FrameCovector, FrameVector, Point
from .jets import CurveJet2, Jet2, fd_partials
from .surface import FramePacket, SurfacePatch, SurfaceTangent, evaluate_frame
from .curves import BoundaryCurve, corner_area, curve_curvature, line_integral_k, unit_tangent
from .integration import (
    Region,
    curvature_limit_estimate,
    gauss_bonnet_residual,
    gauss_map_area,
    surface_integral,
    total_curvature_closed,
)
from .catalog import closed_surface, make_region, make_surface

__all__ = [
    "BoundaryCurve",
    "CurveJet2",
    "FrameCovector",
    "FramePacket",
    "FrameVector",
    "Jet2",
    "Point",
    "Region",
    "SurfacePatch",
    "SurfaceTangent",
    "closed_surface",
    "corner_area",
    "curvature_limit_estimate",
    "curve_curvature",
    "evaluate_frame",
    "fd_partials",
    "gauss_bonnet_residual",
    "gauss_map_area",
    "line_integral_k",
    "make_region",
    "make_surface",
    "surface_integral",
    "total_curvature_closed",
    "unit_tangent",
]
