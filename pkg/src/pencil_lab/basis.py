"""Scaled Hermite-function bases, their operator matrices, and quadrature.

The 1D basis functions are phi_j(t) = sqrt(alpha) * h_j(alpha*t) with h_j the
orthonormal Hermite functions; tensor products cover up to three axes.  All
matrices are dense and exact Galerkin blocks: polynomial multiplication is
built at enlarged size and cropped, which reproduces the infinite-matrix
block without truncation bias.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InputError
from .polynomial import HomogeneousPolynomial

# Dense-matrix feasibility cap on the flattened tensor dimension.
TOTAL_DIM_CAP = 20000


def default_alpha(size: int, m: int) -> float:
    """Basis scale matching the turning point of t^{2m} at the top level.

    alpha = N^{(m-1)/(2(m+1))}; equals 1 for the harmonic case m=1.
    """
    if size < 1 or m < 1:
        raise InputError("size and degree must be positive")
    return float(size) ** ((m - 1) / (2.0 * (m + 1)))


@dataclass(frozen=True)
class HermiteBasis1D:
    """N scaled Hermite functions at scale alpha > 0."""

    size: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.size < 4:
            raise InputError(f"basis size {self.size} < 4")
        if not self.alpha > 0:
            raise InputError(f"alpha {self.alpha} must be positive")

    def position_matrix(self) -> np.ndarray:
        return position_matrix(self.size, self.alpha)

    def laplacian_matrix(self) -> np.ndarray:
        return laplacian_matrix(self.size, self.alpha)

    def tpow_matrix(self, power: int) -> np.ndarray:
        return tpow_matrix(self.size, self.alpha, power)


@dataclass(frozen=True)
class TensorBasis:
    """Tensor product of 1 to 3 HermiteBasis1D axes, C-order flattening."""

    axes: tuple[HermiteBasis1D, ...]

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 3:
            raise InputError("tensor basis needs 1 to 3 axes")
        if self.total_dim > TOTAL_DIM_CAP:
            raise InputError(
                f"total dimension {self.total_dim} exceeds cap {TOTAL_DIM_CAP}"
            )

    @classmethod
    def regular(cls, n: int, size: int, alpha: float) -> "TensorBasis":
        """n identical axes of the given size and scale."""
        return cls(tuple(HermiteBasis1D(size, alpha) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.axes)

    @property
    def total_dim(self) -> int:
        return int(np.prod([b.size for b in self.axes]))

    def flat_index(self, multi: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(multi, self.shape))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    @cached_property
    def level_sums(self) -> np.ndarray:
        """Total Hermite level j_1 + ... + j_n per flat index."""
        grids = np.meshgrid(
            *[np.arange(b.size) for b in self.axes], indexing="ij"
        )
        return sum(grids).ravel()


def position_matrix(size: int, alpha: float = 1.0) -> np.ndarray:
    """Tridiagonal matrix of multiplication by t on the scaled basis.

    Entries (j, j+1) = (j+1, j) = sqrt((j+1)/2)/alpha, zero diagonal.
    """
    _check_size_alpha(size, alpha)
    j = np.arange(size - 1)
    off = np.sqrt((j + 1) / 2.0) / alpha
    mat = np.zeros((size, size))
    mat[j, j + 1] = off
    mat[j + 1, j] = off
    return mat


def laplacian_matrix(size: int, alpha: float = 1.0) -> np.ndarray:
    """Pentadiagonal matrix of -d^2/dt^2 on the scaled basis."""
    _check_size_alpha(size, alpha)
    mat = np.zeros((size, size))
    j = np.arange(size)
    mat[j, j] = alpha**2 * (2 * j + 1) / 2.0
    if size > 2:
        j2 = np.arange(size - 2)
        off = -(alpha**2) * np.sqrt((j2 + 1) * (j2 + 2)) / 2.0
        mat[j2, j2 + 2] = off
        mat[j2 + 2, j2] = off
    return mat


def tpow_matrix(size: int, alpha: float, power: int) -> np.ndarray:
    """Exact size x size Galerkin block of multiplication by t^power.

    Built from the position matrix at enlarged size ``size + power`` and
    cropped; the enlargement margin equals the monomial degree, which is
    exactly what keeps every retained entry equal to its infinite-matrix
    value (a length-``power`` ladder walk cannot leave the enlarged index
    range and return).
    """
    _check_size_alpha(size, alpha)
    if power < 0:
        raise InputError("monomial power must be >= 0")
    if power == 0:
        return np.eye(size)
    enlarged = position_matrix(size + power, alpha)
    block = np.linalg.matrix_power(enlarged, power)[:size, :size]
    return 0.5 * (block + block.T)


def multiplication_matrix(
    poly: HomogeneousPolynomial, basis: TensorBasis
) -> np.ndarray:
    """Galerkin matrix of multiplication by P on the tensor basis.

    Per-axis monomial blocks are built with the enlarged-then-crop rule and
    tensorized per term, so the result is the exact block of the infinite
    operator, then symmetrized against roundoff.
    """
    if poly.n != basis.n:
        raise InputError(
            f"polynomial dimension {poly.n} != basis dimension {basis.n}"
        )
    # cache per-axis monomial blocks keyed by (axis, exponent)
    axis_blocks: dict[tuple[int, int], np.ndarray] = {}

    def block(axis: int, e: int) -> np.ndarray:
        key = (axis, e)
        if key not in axis_blocks:
            b = basis.axes[axis]
            axis_blocks[key] = tpow_matrix(b.size, b.alpha, e)
        return axis_blocks[key]

    total = np.zeros((basis.total_dim, basis.total_dim))
    for expo, coeff in poly.terms:
        term = coeff * block(0, expo[0])
        for axis in range(1, basis.n):
            term = np.kron(term, block(axis, expo[axis]))
        total += term
    return 0.5 * (total + total.T)


def laplacian_tensor(basis: TensorBasis) -> np.ndarray:
    """Matrix of -Delta: sum of per-axis laplacians, identity elsewhere."""
    total = np.zeros((basis.total_dim, basis.total_dim))
    eyes = [np.eye(b.size) for b in basis.axes]
    for axis, b in enumerate(basis.axes):
        factors = list(eyes)
        factors[axis] = laplacian_matrix(b.size, b.alpha)
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        total += term
    return total


def gauss_hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for weight exp(-t^2), Golub-Welsch.

    Exact for polynomials of degree <= 2*order - 1.
    """
    if order < 1:
        raise InputError("quadrature order must be >= 1")
    if order == 1:
        return np.zeros(1), np.array([np.sqrt(np.pi)])
    j = np.arange(order - 1)
    offdiag = np.sqrt((j + 1) / 2.0)
    nodes, vecs = eigh_tridiagonal(np.zeros(order), offdiag)
    weights = np.sqrt(np.pi) * vecs[0, :] ** 2
    return nodes, weights


def hermite_function_values(count: int, t: np.ndarray) -> np.ndarray:
    """h_j(t) for j < count on the points t, shape (count, len(t)).

    Uses the normalized three-term recurrence; values are bounded, so no
    overflow for any real t.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((count, t.size))
    out[0] = np.pi**-0.25 * np.exp(-0.5 * t * t)
    if count > 1:
        out[1] = np.sqrt(2.0) * t * out[0]
    for j in range(1, count - 1):
        out[j + 1] = (
            np.sqrt(2.0 / (j + 1)) * t * out[j]
            - np.sqrt(j / (j + 1.0)) * out[j - 1]
        )
    return out


def synthesize(coeffs, basis: TensorBasis, grid) -> np.ndarray:
    """Pointwise values sum_J c_J Phi_J(x) on a list of grid points.

    ``grid`` is (npts, n) for tensor bases; a flat array is accepted when
    n == 1.  Complex coefficient vectors are handled componentwise.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (basis.total_dim,):
        raise InputError(
            f"coefficient length {coeffs.shape} != total_dim {basis.total_dim}"
        )
    pts = np.asarray(grid, dtype=float)
    if basis.n == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != basis.n:
        raise InputError(f"grid shape {pts.shape} incompatible with n={basis.n}")
    if np.iscomplexobj(coeffs):
        return synthesize(coeffs.real, basis, pts) + 1j * synthesize(
            coeffs.imag, basis, pts
        )

    tensor = coeffs.reshape(basis.shape)
    per_axis = []
    for axis, b in enumerate(basis.axes):
        vals = hermite_function_values(b.size, b.alpha * pts[:, axis])
        per_axis.append(np.sqrt(b.alpha) * vals)  # (size, npts)
    # contract one basis axis at a time, keeping the point axis aligned
    acc = np.einsum("jp,j...->p...", per_axis[0], tensor)
    for axis in range(1, basis.n):
        acc = np.einsum("jp,pj...->p...", per_axis[axis], acc)
    return np.asarray(acc, dtype=float).ravel()


def _check_size_alpha(size: int, alpha: float) -> None:
    if size < 1:
        raise InputError(f"matrix size {size} must be >= 1")
    if not alpha > 0:
        raise InputError(f"alpha {alpha} must be positive")
