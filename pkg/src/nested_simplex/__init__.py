"""Steering ellipsoids, two-qubit separability and nested simplices."""

from .errors import InvalidInputError, InvalidStateError, NestedSimplexError, NotContainedError
from .geo_oracle import OracleResult, search_nested, verify_predicate_against_oracle
from .nesting import (
    NestingQuery,
    NestingReport,
    aligned_ellipsoid_condition,
    circle_condition,
    egan_bound,
    euler_min_R,
    max_radius,
    nesting_predicate,
    sphere_condition,
)
from .steering import Ellipsoid, Measurement, ellipsoid_from_params, sample_steered, steer
from .two_qubit import CanonicalParams, TwoQubitState, assemble_canonical, partial_transpose, separability

__all__ = [
    "CanonicalParams",
    "Ellipsoid",
    "InvalidInputError",
    "InvalidStateError",
    "Measurement",
    "NestedSimplexError",
    "NestingQuery",
    "NestingReport",
    "NotContainedError",
    "OracleResult",
    "TwoQubitState",
    "aligned_ellipsoid_condition",
    "assemble_canonical",
    "circle_condition",
    "egan_bound",
    "ellipsoid_from_params",
    "euler_min_R",
    "max_radius",
    "nesting_predicate",
    "partial_transpose",
    "sample_steered",
    "search_nested",
    "separability",
    "sphere_condition",
    "steer",
    "verify_predicate_against_oracle",
]
