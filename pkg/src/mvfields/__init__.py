"""Geometric calculus of multivector and extensor fields over a chart's canonical space."""

from .algebra import (
    Multivector,
    basis_vector,
    format_multivector,
    geometric_product,
    grade_involution,
    grade_project,
    left_contraction,
    product,
    reciprocal_basis,
    reverse,
    right_contraction,
    scalar_product,
    wedge,
)
from .calculus import (
    check_lagrangian,
    curl,
    divergence,
    dod,
    frame_hestenes,
    gradient,
    hestenes,
    lie_bracket,
    linear_gradient,
)
from .charts import CanonicalChart, Chart, check_chain_rule, check_chain_rule_corollary, dod_chart
from .checks import Fixture, run_suite
from .errors import (
    DimensionError,
    DomainError,
    EvaluationError,
    FrameError,
    GradeError,
    MvfError,
    SignatureError,
    SingularJacobianError,
)
from .expr import differentiate, evaluate, fd_partial
from .extensor import Extensor, ExtensorField, adjoint, apply, dod_extensor, induced_operator
from .fields import MultivectorField
from .parser import FieldFile, ParseError, parse, parse_expression, parse_file
from .report import CheckReport

__all__ = [
    "CanonicalChart", "Chart", "CheckReport", "DimensionError", "DomainError", "EvaluationError",
    "Extensor", "ExtensorField", "FieldFile", "Fixture", "FrameError", "GradeError", "Multivector",
    "MultivectorField", "MvfError", "ParseError", "SignatureError", "SingularJacobianError",
    "adjoint", "apply", "basis_vector", "check_chain_rule", "check_chain_rule_corollary", "check_lagrangian",
    "curl", "differentiate", "divergence", "dod", "dod_chart", "dod_extensor", "evaluate",
    "fd_partial", "format_multivector", "frame_hestenes", "geometric_product", "grade_involution",
    "grade_project", "gradient", "hestenes", "induced_operator", "left_contraction", "lie_bracket",
    "linear_gradient", "parse", "parse_expression", "parse_file", "product", "reciprocal_basis",
    "reverse", "right_contraction", "run_suite", "scalar_product", "wedge",
]
