"""Exact decomposition toolkit for Wright convex functions.

Checks Wright and Jensen convexity with exact certificates over function
instances defined on finitely generated radical extensions of Q, builds
the convex part as a certified extension of the restriction to the
rationals, and recovers the unique additive part vanishing on Q.
"""

from .exactreal import (
    Enclosure,
    ExactReal,
    Ordering,
    RESOLUTION_LIMIT,
    check_radical_index,
    compare,
    enclose,
    parse_rational,
)
from .domain import Interval, SampleGrid, make_grid, rational_anchors, shifted_intersection
from .funcspec import (
    AbsAdditive,
    AdditiveMap,
    ConvexSpec,
    Decomposable,
    FunctionDef,
    Spiked,
    dump_instance,
    dumps_instance,
    generate,
    instance_from_jsonable,
    instance_to_jsonable,
    load_instance,
    loads_instance,
)
from .analysis import (
    CheckReport,
    SlopeFraction,
    ViolationCertificate,
    build_steps,
    chord_slope,
    chord_slope_monotone_check,
    delta,
    double_delta,
    jensen_check,
    lipschitz_bound,
    wright_check,
)
from .extension import (
    BracketPolicy,
    ExtensionHandle,
    TransferReport,
    convexity_certificate,
    difference_transfer_check,
    extend_eval,
)
from .decomposition import (
    DecompositionResult,
    JensenEquationReport,
    ResidualOracle,
    UniquenessReport,
    VerificationReport,
    decompose,
    uniqueness_check,
    verify_against_truth,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AbsAdditive",
    "AdditiveMap",
    "BracketPolicy",
    "CheckReport",
    "ConvexSpec",
    "Decomposable",
    "DecompositionResult",
    "Enclosure",
    "ExactReal",
    "ExtensionHandle",
    "FunctionDef",
    "Interval",
    "JensenEquationReport",
    "Ordering",
    "RESOLUTION_LIMIT",
    "ResidualOracle",
    "SampleGrid",
    "SlopeFraction",
    "Spiked",
    "TransferReport",
    "UniquenessReport",
    "VerificationReport",
    "ViolationCertificate",
    "build_steps",
    "check_radical_index",
    "chord_slope",
    "chord_slope_monotone_check",
    "compare",
    "convexity_certificate",
    "decompose",
    "delta",
    "difference_transfer_check",
    "double_delta",
    "dump_instance",
    "dumps_instance",
    "enclose",
    "errors",
    "extend_eval",
    "generate",
    "instance_from_jsonable",
    "instance_to_jsonable",
    "jensen_check",
    "lipschitz_bound",
    "load_instance",
    "loads_instance",
    "make_grid",
    "parse_rational",
    "rational_anchors",
    "shifted_intersection",
    "uniqueness_check",
    "verify_against_truth",
    "wright_check",
]
