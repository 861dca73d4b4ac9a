"""Compacton solutions of PT-symmetric generalized KdV equations.

Exact profiles, conserved quantities, scaling laws, stability criteria and
variational approximations.
"""
__version__ = "0.1.0"

from .params import ModelParams, RegimeReport, ScalingExponents, alpha_real, classify, scaling_exponents
from .profile import CompactonProfile, ProfileFamily, build_profile, hyperelliptic_params, z_of_y
from .conserved import ConservedSet, IntegralSet, conserved_analytic, conserved_quadrature, integral_set
from .stability import StabilityReport, stability_report
from .variational import TrialFunction, optimize_cos_power, optimize_post_gaussian

__all__ = [
    "CompactonProfile", "ConservedSet", "IntegralSet", "ModelParams", "ProfileFamily",
    "RegimeReport", "ScalingExponents", "StabilityReport", "TrialFunction", "alpha_real",
    "build_profile", "classify", "conserved_analytic", "conserved_quadrature",
    "hyperelliptic_params", "integral_set", "optimize_cos_power", "optimize_post_gaussian",
    "scaling_exponents", "stability_report", "z_of_y",
]
