"""Arithmetic of anisotropic symbol classes and Schatten-class membership.

A class spec records the quasi-homogeneity order M under (x, xi) ->
(rho^k x, rho^l xi); an operator with such a symbol lies in the Schatten
class C_p exactly when M*p + (k + l)*n < 0.  The module also estimates the
Hilbert-Schmidt norm of a shifted inverse from the squared integral of its
leading symbol."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import integrate

from .errors import InputError, NumericError
from .polynomial import HomogeneousPolynomial

Rational = Union[int, float, Fraction]

# exact ixi-integral of (|xi|^2 + c)^{-2} over R^n is KAPPA[n] * c^{n/2 - 2}
KAPPA = {1: math.pi / 2.0, 2: math.pi, 3: math.pi**2}


@dataclass(frozen=True)
class SymbolClassSpec:
    """Order M and weights (k, l) of an anisotropic symbol class in
    dimension n.

    Stored as exact rationals so that boundary cases of the membership
    predicate (which sit exactly on zero for the operator catalog) do not
    flip on roundoff.
    """

    M: Fraction
    k: Fraction
    l: Fraction
    n: int

    def __post_init__(self):
        for name in ("M", "k", "l"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.k > 0 and self.l > 0):
            raise InputError("symbol weights k, l must be positive")
        if self.n < 1:
            raise InputError("dimension must be >= 1")


def schatten_member(spec: SymbolClassSpec, p: Rational) -> bool:
    """Membership predicate M*p + (k + l)*n < 0 for the class C_p."""
    p = Fraction(p)
    if p < 1:
        raise InputError("Schatten index p must be >= 1")
    return spec.M * p + (spec.k + spec.l) * spec.n < 0


def compose_order(a: SymbolClassSpec, b: SymbolClassSpec) -> SymbolClassSpec:
    """Composition adds orders; the weights must agree."""
    if (a.k, a.l, a.n) != (b.k, b.l, b.n):
        raise InputError("cannot compose symbols with different weights")
    return SymbolClassSpec(M=a.M + b.M, k=a.k, l=a.l, n=a.n)


def min_schatten_index(spec: SymbolClassSpec) -> Optional[float]:
    """Infimum of admissible p, or None when no Schatten class is reached.

    Membership holds for every p strictly above (k + l) * n / (-M) when
    M < 0.
    """
    if spec.M >= 0:
        return None
    return float((spec.k + spec.l) * spec.n / (-spec.M))


def inverse_symbol(n: int, m: int) -> SymbolClassSpec:
    """Leading-symbol class of (-Delta + P^2)^{-1} for degree-m P."""
    if m < 1:
        raise InputError("degree must be >= 1")
    return SymbolClassSpec(M=Fraction(-2), k=Fraction(1, m), l=Fraction(1), n=n)


def polynomial_symbol(n: int, m: int, degree: int) -> SymbolClassSpec:
    """A polynomial of the given degree as a symbol, weights (1/m, 1)."""
    return SymbolClassSpec(
        M=Fraction(degree, m), k=Fraction(1, m), l=Fraction(1), n=n
    )


def operator_symbol(
    name: str, n: int, m: int, ell: Optional[int] = None
) -> SymbolClassSpec:
    """Symbol classes of the operators the trace module works with.

    Orders follow from composition: the inverse has order -2, its square
    root -1, multiplication by t^j order j/m.
    """
    base = inverse_symbol(n, m)
    orders = {
        "A": Fraction(-2),
        "A_half": Fraction(-1),
        "A3/2": Fraction(-3),
        "A2": Fraction(-4),
        "B": Fraction(-1),  # A_half * P * A_half: -1 + m/m - 1
        "B2": Fraction(-2),
        "B3": Fraction(-3),
        "B4": Fraction(-4),
    }
    if name in orders:
        return SymbolClassSpec(M=orders[name], k=base.k, l=base.l, n=n)
    if name in ("A_w", "B_w"):
        if ell is None:
            raise InputError(f"{name} needs the weight exponent ell")
        if name == "A_w":
            order = Fraction(-2) + Fraction(2 * ell, m)
        else:
            order = Fraction(-1) + Fraction(ell, m)
        return SymbolClassSpec(M=order, k=base.k, l=base.l, n=n)
    raise InputError(f"unknown operator symbol {name!r}")


def hs_estimate_shifted_inverse(
    poly: HomogeneousPolynomial,
    shift: float = 1.0,
    rel_tol: float = 1e-6,
) -> float:
    """Hilbert-Schmidt norm estimate of (shift - Delta + P^2)^{-1} from the
    squared phase-space integral of its leading symbol.

    The xi-integration is analytic, leaving the x-integral
    KAPPA_n * (shift + P(x)^2)^{n/2 - 2} for adaptive quadrature; the result
    carries the standard (2 pi)^{-n} phase-space normalization.  The shift
    must be positive (the unshifted leading symbol is not square integrable
    near the origin even when the operator itself is Hilbert-Schmidt).
    """
    if not shift > 0:
        raise InputError("shift must be positive")
    n = poly.n
    kappa = KAPPA[n]
    exponent = n / 2.0 - 2.0

    if n == 1:
        def f(x):
            return kappa * (shift + poly.evaluate([x]) ** 2) ** exponent

        val, err = integrate.quad(f, -np.inf, np.inf, epsrel=rel_tol, limit=200)
    elif n == 2:
        def f(y, x):
            return kappa * (shift + poly.evaluate([x, y]) ** 2) ** exponent

        val, err = integrate.dblquad(
            f, -np.inf, np.inf, -np.inf, np.inf, epsrel=rel_tol
        )
    else:
        def f(z, y, x):
            return kappa * (shift + poly.evaluate([x, y, z]) ** 2) ** exponent

        val, err = integrate.tplquad(
            f, -np.inf, np.inf, -np.inf, np.inf, -np.inf, np.inf, epsrel=rel_tol
        )
    if not np.isfinite(val) or val <= 0 or err > 10 * rel_tol * abs(val) + 1e-12:
        raise NumericError(
            f"phase-space quadrature did not converge (value {val}, error {err})"
        )
    return float(math.sqrt((2.0 * math.pi) ** -n * val))
