"""Assembly of the Schrodinger-type operator L = -Delta + P^2, its inverse
powers, the sandwiched multiplication operator B, the weighted 1D pair, and
the coupling-scaled family, all as dense symmetric matrices over a tensor
Hermite basis with one shared eigendecomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .basis import (
    HermiteBasis1D,
    TensorBasis,
    laplacian_tensor,
    multiplication_matrix,
    tpow_matrix,
)
from .errors import DomainError, InputError, NumericError
from .polynomial import HomogeneousPolynomial


@dataclass(frozen=True)
class SpectralOperator:
    """Dense real operator matrix over a tensor Hermite basis."""

    basis: TensorBasis
    matrix: np.ndarray
    symmetric: bool = True

    def __post_init__(self):
        d = self.basis.total_dim
        if self.matrix.shape != (d, d):
            raise InputError(
                f"matrix shape {self.matrix.shape} != basis dim {d}"
            )

    @classmethod
    def from_symmetric(cls, basis: TensorBasis, matrix: np.ndarray) -> "SpectralOperator":
        """Wrap with explicit symmetrization, enforcing the symmetric flag."""
        sym = 0.5 * (matrix + matrix.T)
        return cls(basis=basis, matrix=sym, symmetric=True)

    @property
    def dim(self) -> int:
        return self.basis.total_dim


@dataclass(frozen=True)
class SpdFactorization:
    """Full symmetric eigendecomposition M = Q diag(w) Q^T, w ascending."""

    basis: TensorBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def factorize(op: SpectralOperator, require_positive: bool = False) -> SpdFactorization:
    """Symmetric eigendecomposition of a SpectralOperator.

    Raises DomainError when positivity is required but the smallest
    eigenvalue is not strictly positive.
    """
    if not op.symmetric:
        raise InputError("factorize requires the symmetric flag")
    try:
        w, q = eigh(op.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericError(f"eigendecomposition failed at dim {op.dim}") from exc
    if require_positive and w[0] <= 0:
        raise DomainError(
            f"operator not positive definite (min eigenvalue {w[0]:.3e}); "
            "increase the basis size or adjust alpha"
        )
    return SpdFactorization(basis=op.basis, eigenvalues=w, eigenvectors=q)


def power(fact: SpdFactorization, s: float) -> SpectralOperator:
    """Q diag(w^s) Q^T, symmetrized.  Needs positive eigenvalues for s<0
    or fractional s."""
    w = fact.eigenvalues
    if (s != int(s) or s < 0) and w[0] <= 0:
        raise DomainError(
            f"fractional/negative power {s} of a non-positive operator"
        )
    if s == 0:
        return SpectralOperator(basis=fact.basis, matrix=np.eye(fact.dim))
    mat = (fact.eigenvectors * w**s) @ fact.eigenvectors.T
    return SpectralOperator.from_symmetric(fact.basis, mat)


def assemble_L(
    poly: HomogeneousPolynomial, basis: TensorBasis
) -> SpectralOperator:
    """L = -Delta + P^2 on the tensor basis; verified positive definite."""
    mat = laplacian_tensor(basis) + multiplication_matrix(poly.square(), basis)
    op = SpectralOperator.from_symmetric(basis, mat)
    try:
        np.linalg.cholesky(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise DomainError(
            "discretized L is not positive definite; "
            "increase the basis size or adjust alpha"
        ) from exc
    return op


def assemble_B(L_fact: SpdFactorization, P_mat: SpectralOperator) -> SpectralOperator:
    """B = L^{-1/2} P L^{-1/2} from the factorization of L."""
    if P_mat.basis.total_dim != L_fact.dim:
        raise InputError("dimension mismatch between factorization and P")
    a_half = power(L_fact, -0.5).matrix
    return SpectralOperator.from_symmetric(
        P_mat.basis, a_half @ P_mat.matrix @ a_half
    )


def assemble_weighted(
    m: int, ell: int, basis: HermiteBasis1D
) -> tuple[SpectralOperator, SpectralOperator]:
    """Weighted 1D pair for the pencil with a t^ell coupling term.

    A_w = L^{-1/2} t^{2 ell} L^{-1/2} and B_w = L^{-1/2} t^{m+ell} L^{-1/2}
    with L = -d^2/dt^2 + t^{2m}.  Requires 0 <= ell < m.
    """
    if not 0 <= ell < m:
        raise InputError(f"weight exponent ell={ell} outside 0 <= ell < m={m}")
    tb = TensorBasis((basis,))
    L = assemble_L(HomogeneousPolynomial.monomial(m), tb)
    fact = factorize(L, require_positive=True)
    inv_half = power(fact, -0.5).matrix
    t2l = tpow_matrix(basis.size, basis.alpha, 2 * ell)
    tml = tpow_matrix(basis.size, basis.alpha, m + ell)
    A_w = SpectralOperator.from_symmetric(tb, inv_half @ t2l @ inv_half)
    B_w = SpectralOperator.from_symmetric(tb, inv_half @ tml @ inv_half)
    return A_w, B_w


def scale_isospectral(A: SpectralOperator, gamma: float, m: int) -> SpectralOperator:
    """The operator with A's eigenvectors and eigenvalues scaled by
    gamma^{-1/(m+1)}; exact realization of the dilation covariance of the
    inverse under P^2 -> gamma P^2."""
    if not gamma > 0:
        raise InputError("gamma must be positive")
    factor = gamma ** (-1.0 / (m + 1))
    return SpectralOperator(
        basis=A.basis, matrix=factor * A.matrix, symmetric=A.symmetric
    )


def scale_fixed_basis(
    kinetic: np.ndarray, potential: np.ndarray, gamma: float, basis: TensorBasis
) -> SpectralOperator:
    """(-Delta + gamma P^2)^{-1} assembled on the unchanged basis."""
    if not gamma > 0:
        raise InputError("gamma must be positive")
    op = SpectralOperator.from_symmetric(basis, kinetic + gamma * potential)
    fact = factorize(op, require_positive=True)
    return power(fact, -1.0)
