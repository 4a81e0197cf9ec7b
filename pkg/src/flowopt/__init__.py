"""Measurement-pattern optimization for open graphs with flow or gflow."""

from flowopt.flow import (
    Determinism,
    FlowError,
    FlowMap,
    GeometryClass,
    GflowMap,
    UnsupportedGeometry,
    classify_geometry,
    find_flow,
    find_gflow,
    invert_fg,
    verify_flow,
    verify_gflow,
)
from flowopt.graph import (
    E,
    M,
    S,
    X,
    Z,
    Angle,
    GeometryError,
    OpenGraph,
    Pattern,
    Signal,
    odd_neighborhood,
    parse_geometry,
    serialize_geometry,
    signal_add,
)
from flowopt.optimizer import OptimizedPattern, QList, QubitRecord, gflow_levels, optimize_geometry
from flowopt.rewrite import optimize_by_rules, optimize_pattern, standard_pattern
from flowopt.simulator import (
    check_determinism,
    enumerate_branches,
    extract_linear_map,
    patterns_equivalent,
    run_pattern,
)

__all__ = [
    "Angle",
    "Determinism",
    "E",
    "FlowError",
    "FlowMap",
    "GeometryClass",
    "GeometryError",
    "GflowMap",
    "M",
    "OpenGraph",
    "OptimizedPattern",
    "Pattern",
    "QList",
    "QubitRecord",
    "S",
    "Signal",
    "UnsupportedGeometry",
    "X",
    "Z",
    "check_determinism",
    "classify_geometry",
    "enumerate_branches",
    "extract_linear_map",
    "find_flow",
    "find_gflow",
    "gflow_levels",
    "invert_fg",
    "odd_neighborhood",
    "optimize_by_rules",
    "optimize_geometry",
    "optimize_pattern",
    "parse_geometry",
    "patterns_equivalent",
    "run_pattern",
    "serialize_geometry",
    "signal_add",
    "standard_pattern",
    "verify_flow",
    "verify_gflow",
]
