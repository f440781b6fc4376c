"""Exact calculus of differential forms on cylinders ``M x G`` and homotopy operators."""

from .cylinder import (
    bidegree_split,
    canonical_lift,
    horizontal_d,
    horizontalize,
    is_horizontal,
    nabla,
    projector,
    slice_field,
    slice_form,
    vertical_representative,
)
from .exterior import DiffForm, VectorField, d, interior, lie, pullback, wedge
from .homotopy import Homotopy, flow_check, homotopy_operator, linear_contraction, verify_homotopy_formula
from .integration import LiftedFunctional, lift_apply_form, lift_apply_scalar
from .scalar import ScalarExpr, Verdict, ZeroTestConfig, const, cos, exp, is_zero, sin, symbol, symbols, zero_test
from .spaces import CylinderSpace, SmoothMap, Space, compose, identity, projection_G, projection_M, slicing

__version__ = "0.1.0"

__all__ = [
    "CylinderSpace",
    "DiffForm",
    "Homotopy",
    "LiftedFunctional",
    "ScalarExpr",
    "SmoothMap",
    "Space",
    "VectorField",
    "Verdict",
    "ZeroTestConfig",
    "bidegree_split",
    "canonical_lift",
    "compose",
    "const",
    "cos",
    "d",
    "exp",
    "flow_check",
    "homotopy_operator",
    "horizontal_d",
    "horizontalize",
    "identity",
    "interior",
    "is_horizontal",
    "is_zero",
    "lie",
    "lift_apply_form",
    "lift_apply_scalar",
    "linear_contraction",
    "nabla",
    "projection_G",
    "projection_M",
    "projector",
    "pullback",
    "sin",
    "slice_field",
    "slice_form",
    "slicing",
    "symbol",
    "symbols",
    "verify_homotopy_formula",
    "vertical_representative",
    "wedge",
    "zero_test",
]
