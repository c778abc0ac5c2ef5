from nsdde.model.coefficients import AssumptionParams, CoefficientSet, InitialSegment
from nsdde.model.examples import make_example_A, make_example_B, make_example_jump
from nsdde.model.audit import ASSUMPTIONS, AuditReport, Box, audit_assumption, declared_assumptions, estimate_contraction

__all__ = [
    "ASSUMPTIONS",
    "AssumptionParams",
    "AuditReport",
    "Box",
    "CoefficientSet",
    "InitialSegment",
    "audit_assumption",
    "declared_assumptions",
    "estimate_contraction",
    "make_example_A",
    "make_example_B",
    "make_example_jump",
]
