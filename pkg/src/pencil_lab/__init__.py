"""Numerical laboratory for the quadratic operator pencil I - 2*lam*B + lam^2*A.

Hermite-Galerkin discretization of Schrodinger-type operators L = -Delta + P^2
with homogeneous polynomial P, trace criteria for the existence of nonzero
pencil eigenvalues, scaling and Cauchy-Schwarz trace identities, and a
companion-block eigensolver with residual and cross-truncation certification.
"""

from .errors import DomainError, InputError, NumericError
from .polynomial import HomogeneousPolynomial
from .basis import (
    HermiteBasis1D,
    TensorBasis,
    default_alpha,
    gauss_hermite_rule,
    laplacian_matrix,
    multiplication_matrix,
    position_matrix,
    synthesize,
)
from .operators import (
    SpdFactorization,
    SpectralOperator,
    assemble_B,
    assemble_L,
    assemble_weighted,
    factorize,
    power,
)
from .problems import Problem, preset, preset_names, realize, scale_gamma
from .traces import (
    TraceReport,
    TraceWord,
    cauchy_schwarz_check,
    criterion_report,
    derivative_identity_check,
    extrapolate,
    identity_5_6_check,
    rank2_criterion,
    rank3_criterion,
    rank4_criterion,
    scaling_identity_check,
    trace_word,
    two_term_extrapolate,
)
from .pencil import (
    Linearization,
    PencilEigenpair,
    build_linearization,
    eigensolve,
    recover_physical_eigenfunction,
    stability_study,
    validate_pairs,
)
from .symbolcalc import (
    SymbolClassSpec,
    compose_order,
    hs_estimate_shifted_inverse,
    inverse_symbol,
    min_schatten_index,
    schatten_member,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "HermiteBasis1D",
    "HomogeneousPolynomial",
    "InputError",
    "Linearization",
    "NumericError",
    "PencilEigenpair",
    "Problem",
    "SpdFactorization",
    "SpectralOperator",
    "SymbolClassSpec",
    "TensorBasis",
    "TraceReport",
    "TraceWord",
    "assemble_B",
    "assemble_L",
    "assemble_weighted",
    "build_linearization",
    "cauchy_schwarz_check",
    "compose_order",
    "criterion_report",
    "default_alpha",
    "derivative_identity_check",
    "eigensolve",
    "extrapolate",
    "factorize",
    "gauss_hermite_rule",
    "hs_estimate_shifted_inverse",
    "identity_5_6_check",
    "inverse_symbol",
    "laplacian_matrix",
    "min_schatten_index",
    "multiplication_matrix",
    "position_matrix",
    "power",
    "preset",
    "preset_names",
    "rank2_criterion",
    "rank3_criterion",
    "rank4_criterion",
    "realize",
    "recover_physical_eigenfunction",
    "scale_gamma",
    "scaling_identity_check",
    "schatten_member",
    "stability_study",
    "synthesize",
    "trace_word",
    "two_term_extrapolate",
    "validate_pairs",
]
