from nsdde.truncation.bounds import BoundFunction, invert_bound
from nsdde.truncation.projection import truncate_point
from nsdde.truncation.rule import Gauge, TruncationRule, build_rule, power_gauge, truncated_coefficients

__all__ = [
    "BoundFunction",
    "Gauge",
    "TruncationRule",
    "build_rule",
    "invert_bound",
    "power_gauge",
    "truncate_point",
    "truncated_coefficients",
]
