"""Partial theta function: evaluation, zero tracking, simplicity certificates and real spectrum."""

from .certify import (
    Certificate,
    CertVerdict,
    band_sandwich,
    bound_b,
    bound_b_oracle,
    certify_disk,
    check_conditions,
    inverse_entry,
    inverse_oracle_check,
    max_certified_radius,
    separation_margin,
)
from .errors import (
    BracketInvalid,
    DivergenceDomain,
    EmptyZeroSet,
    Inconclusive,
    NewtonStall,
    PartialThetaError,
    ResourceCap,
    ToleranceUnreachable,
    TooFewZeros,
)
from .fps_delta import DeltaTable, TruncSeries, elementary_symmetric, leading_gap, sign_pattern_probe, solve_delta
from .spectrum import SpectralPoint, asymptotic_report, count_real_zeros, find_spectral
from .theta_eval import EvalResult, eval_dtheta_dx, eval_product, eval_theta
from .zeros import ZeroSet, find, scan_disk, separation_report

__version__ = "0.1.0"

__all__ = [
    "BracketInvalid", "CertVerdict", "Certificate", "DeltaTable", "DivergenceDomain", "EmptyZeroSet",
    "EvalResult", "Inconclusive", "NewtonStall", "PartialThetaError", "ResourceCap", "SpectralPoint",
    "ToleranceUnreachable", "TooFewZeros", "TruncSeries", "ZeroSet", "asymptotic_report", "band_sandwich",
    "bound_b", "bound_b_oracle", "certify_disk", "check_conditions", "count_real_zeros", "elementary_symmetric",
    "eval_dtheta_dx", "eval_product", "eval_theta", "find", "find_spectral", "inverse_entry",
    "inverse_oracle_check", "leading_gap", "max_certified_radius", "scan_disk", "separation_margin",
    "separation_report", "sign_pattern_probe", "solve_delta",
]
