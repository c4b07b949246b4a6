"""Exact solvers for the quasi-Einstein equation on homogeneous affine
surfaces, with the induced neutral-signature geometry on the cotangent
bundle."""

from .funcalg import (
    AnsatzFunction, Context, DomainError, FunctionAlgebraError, Point, Term,
    constant, derive, evaluate, exp_linear, monomial, product, rank_basis,
    x1_power,
)
from .scalars import Scalar, roots_of_monic
from .surface import (
    AffineConnection2, NormalizationRecord, RicciData, TypeFlags,
    connection_from_json, connection_to_json, is_strongly_projectively_flat,
    load_connection, normalize_type_b, ricci, save_connection, transform,
    type_flags,
)
from .qesolver import (
    CoordinateChange, EigenspaceDescription, QEInstance,
    eigenspace, jet_dimension_oracle, killing_stability_check,
    nonlinear_transform, qe_residual, realize_real_basis,
)
from .extension import (
    CurvaturePack4, DeformationTensor, ExtensionMetric, build_extension,
    conformal_einstein_residual, curvature4, default_probe_points,
    verify_theorem_1_1,
)
from .report import CheckResult, VerificationReport
from .warp import WarpSpec, warped_einstein_report

__version__ = "0.1.0"

__all__ = [
    "AffineConnection2", "AnsatzFunction", "CheckResult", "Context",
    "CoordinateChange", "CurvaturePack4", "DeformationTensor", "DomainError",
    "EigenspaceDescription", "ExtensionMetric", "FunctionAlgebraError",
    "NormalizationRecord", "Point", "QEInstance", "RicciData", "Scalar",
    "Term", "TypeFlags", "VerificationReport", "WarpSpec",
    "build_extension", "conformal_einstein_residual", "connection_from_json",
    "connection_to_json", "constant", "curvature4", "default_probe_points",
    "derive", "eigenspace", "evaluate", "exp_linear",
    "is_strongly_projectively_flat",
    "jet_dimension_oracle", "killing_stability_check", "load_connection",
    "monomial", "nonlinear_transform", "normalize_type_b", "product",
    "qe_residual", "rank_basis", "realize_real_basis", "ricci",
    "roots_of_monic", "save_connection", "transform", "type_flags",
    "verify_theorem_1_1", "warped_einstein_report", "x1_power",
]
