"""Problem presets and their realization as operator matrices at a given
truncation size.

A Problem is the immutable description (polynomial, optional weighted
coupling exponent, optional basis-scale override); realize() turns it into
the dense matrices A, A^{1/2}, B, P, L at a per-axis size, with a small
process-wide cache since the eigendecomposition dominates the cost."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .basis import (
    HermiteBasis1D,
    TensorBasis,
    default_alpha,
    laplacian_tensor,
    multiplication_matrix,
    tpow_matrix,
)
from .errors import InputError
from .operators import (
    SpdFactorization,
    SpectralOperator,
    factorize,
    power,
    scale_fixed_basis,
    scale_isospectral,
)
from .polynomial import HomogeneousPolynomial, from_literal

# realizations above this flattened dimension are not worth caching
_CACHE_DIM_LIMIT = 5000


@dataclass(frozen=True)
class Problem:
    """A pencil problem: polynomial P, optional weight exponent, scale override."""

    poly: HomogeneousPolynomial
    weighted_ell: Optional[int] = None
    alpha_override: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.weighted_ell is not None:
            if self.poly.n != 1:
                raise InputError("weighted problems are one-dimensional")
            if not 0 <= self.weighted_ell < self.poly.m:
                raise InputError(
                    f"weight exponent {self.weighted_ell} outside 0 <= ell < m"
                )

    @property
    def n(self) -> int:
        return self.poly.n

    @property
    def m(self) -> int:
        return self.poly.m

    def basis_for(self, size: int) -> TensorBasis:
        alpha = self.alpha_override or default_alpha(size, self.m)
        return TensorBasis.regular(self.n, size, alpha)

    def default_sizes(self) -> tuple[int, ...]:
        return {1: (100, 200, 400), 2: (24, 32, 40), 3: (12, 16, 20)}[self.n]

    def describe(self) -> str:
        lbl = self.label or str(self.poly)
        if self.weighted_ell is not None:
            lbl += f" [weighted ell={self.weighted_ell}]"
        return lbl


class Realization:
    """All matrices of one problem at one truncation, computed lazily."""

    def __init__(self, problem: Problem, size: int):
        self.problem = problem
        self.size = int(size)
        self.basis = problem.basis_for(size)
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.basis.total_dim

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def kinetic(self) -> np.ndarray:
        return self._get("kinetic", lambda: laplacian_tensor(self.basis))

    @property
    def potential(self) -> np.ndarray:
        """Galerkin block of multiplication by P^2."""
        return self._get(
            "potential",
            lambda: multiplication_matrix(self.problem.poly.square(), self.basis),
        )

    @property
    def L(self) -> SpectralOperator:
        def build():
            return SpectralOperator.from_symmetric(
                self.basis, self.kinetic + self.potential
            )

        return self._get("L", build)

    @property
    def L_fact(self) -> SpdFactorization:
        return self._get("L_fact", lambda: factorize(self.L, require_positive=True))

    @property
    def A(self) -> SpectralOperator:
        return self._get("A", lambda: power(self.L_fact, -1.0))

    @property
    def A_half(self) -> SpectralOperator:
        return self._get("A_half", lambda: power(self.L_fact, -0.5))

    @property
    def P(self) -> SpectralOperator:
        return self._get(
            "P",
            lambda: SpectralOperator.from_symmetric(
                self.basis, multiplication_matrix(self.problem.poly, self.basis)
            ),
        )

    @property
    def B(self) -> SpectralOperator:
        def build():
            ah = self.A_half.matrix
            return SpectralOperator.from_symmetric(
                self.basis, ah @ self.P.matrix @ ah
            )

        return self._get("B", build)

    def _weighted(self) -> tuple[SpectralOperator, SpectralOperator]:
        ell = self.problem.weighted_ell
        if ell is None:
            raise InputError("problem has no weight exponent")

        def build():
            ax = self.basis.axes[0]
            inv_half = self.A_half.matrix
            t2l = tpow_matrix(ax.size, ax.alpha, 2 * ell)
            tml = tpow_matrix(ax.size, ax.alpha, self.problem.m + ell)
            A_w = SpectralOperator.from_symmetric(self.basis, inv_half @ t2l @ inv_half)
            B_w = SpectralOperator.from_symmetric(self.basis, inv_half @ tml @ inv_half)
            return A_w, B_w

        return self._get("weighted", build)

    @property
    def A_w(self) -> SpectralOperator:
        return self._weighted()[0]

    @property
    def B_w(self) -> SpectralOperator:
        return self._weighted()[1]

    def tpow(self, j: int) -> np.ndarray:
        """Multiplication block of t^j; one-dimensional problems only."""
        if self.basis.n != 1:
            raise InputError("t-power factors are defined for 1D problems")
        ax = self.basis.axes[0]
        return self._get(("tpow", j), lambda: tpow_matrix(ax.size, ax.alpha, j))

    def factor_matrix(self, tag) -> np.ndarray:
        """Resolve a trace-word factor tag to its matrix."""
        if isinstance(tag, np.ndarray):
            if tag.shape != (self.dim, self.dim):
                raise InputError("custom factor has mismatched shape")
            return tag
        if isinstance(tag, tuple) and len(tag) == 2 and tag[0] == "T":
            return self.tpow(int(tag[1]))
        lookup = {
            "A": lambda: self.A.matrix,
            "B": lambda: self.B.matrix,
            "P": lambda: self.P.matrix,
            "H": lambda: self.A_half.matrix,
            "A_half": lambda: self.A_half.matrix,
            "L": lambda: self.L.matrix,
            "a": lambda: self.A_w.matrix,
            "A_w": lambda: self.A_w.matrix,
            "b": lambda: self.B_w.matrix,
            "B_w": lambda: self.B_w.matrix,
        }
        if tag not in lookup:
            raise InputError(f"unknown trace-word factor {tag!r}")
        return lookup[tag]()


@lru_cache(maxsize=4)
def _cached_realization(problem: Problem, size: int) -> Realization:
    return Realization(problem, size)


# single keep-alive slot for realizations too large for the lru cache, so
# consecutive operations at one large truncation share the factorization
_large_slot: list = [None, None]


def realize(problem: Problem, size: int) -> Realization:
    """Realization of a problem at a per-axis truncation size, cached for
    moderate dimensions (one keep-alive slot above the limit)."""
    if size < 4:
        raise InputError(f"truncation size {size} < 4")
    probe = problem.basis_for(size)  # validates the dimension cap
    if probe.total_dim > _CACHE_DIM_LIMIT:
        key = (problem, size)
        if _large_slot[0] != key:
            _large_slot[0] = key
            _large_slot[1] = Realization(problem, size)
        return _large_slot[1]
    return _cached_realization(problem, size)


def clear_realization_cache() -> None:
    _cached_realization.cache_clear()
    _large_slot[0] = _large_slot[1] = None


def scale_gamma(
    problem: Problem, size: int, gamma: float, mode: str
) -> SpectralOperator:
    """Coupling-scaled inverse for -Delta + gamma P^2.

    mode "isospectral" returns the exactly rescaled operator (same
    eigenvectors, eigenvalues times gamma^{-1/(m+1)}); mode "fixed_basis"
    reassembles and inverts on the unchanged basis.
    """
    r = realize(problem, size)
    if mode == "isospectral":
        return scale_isospectral(r.A, gamma, problem.m)
    if mode == "fixed_basis":
        return scale_fixed_basis(r.kinetic, r.potential, gamma, r.basis)
    raise InputError(f"unknown scaling mode {mode!r}")


_PRESETS: dict[str, Problem] = {}


def _register_presets() -> None:
    for m in range(1, 7):
        _PRESETS[f"monomial:{m}"] = Problem(
            HomogeneousPolynomial.monomial(m), label=f"monomial:{m}"
        )
    for m, ell in ((5, 1), (7, 2)):
        p = Problem(
            HomogeneousPolynomial.monomial(m),
            weighted_ell=ell,
            label=f"weighted:{m}:{ell}",
        )
        _PRESETS[f"weighted:{m}:{ell}"] = p
        _PRESETS[f"hoshiro:{m}:{ell}"] = p  # legacy alias
    for k in (2, 3):
        _PRESETS[f"radial:2:{k}"] = Problem(
            HomogeneousPolynomial.radial(2, k), label=f"radial:2:{k}"
        )
    _PRESETS["radial:3:3"] = Problem(
        HomogeneousPolynomial.radial(3, 3), label="radial:3:3"
    )
    _PRESETS["remark63:2"] = Problem(
        HomogeneousPolynomial.crossed_radial(2), label="remark63:2"
    )


_register_presets()

# presets listed by `pencil-lab --help`; radial:3:3 is slow, remark63:2 is
# experimental (its polynomial vanishes on the axes, so the ellipticity
# hypotheses fail by construction)
SLOW_PRESETS = frozenset({"radial:3:3"})
EXPERIMENTAL_PRESETS = frozenset({"remark63:2"})


def preset(name: str) -> Problem:
    if name not in _PRESETS:
        raise InputError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return _PRESETS[name]


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def problem_from_config(section: dict) -> Problem:
    """Build a Problem from a TOML [problem] table."""
    if "preset" in section:
        base = preset(str(section["preset"]))
        poly = base.poly
        ell = section.get("ell", base.weighted_ell)
    elif "terms" in section:
        poly = from_literal(section["terms"])
        ell = section.get("ell")
    elif "polynomial" in section:
        poly = from_literal(section["polynomial"])
        ell = section.get("ell")
    else:
        raise InputError("[problem] needs 'preset', 'polynomial', or 'terms'")
    alpha = section.get("alpha")
    return Problem(
        poly=poly,
        weighted_ell=None if ell is None else int(ell),
        alpha_override=None if alpha is None else float(alpha),
        label=str(section.get("preset", "")) or str(poly),
    )
