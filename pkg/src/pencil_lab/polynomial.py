"""Exact homogeneous polynomials on R^n (n <= 3) and their sphere analysis.

A polynomial is stored as a finite map multi-index -> coefficient with all
multi-indices summing to the common degree m.  Evaluation and squaring are
exact for exactly representable inputs; the ellipticity margin is a minimum
of |P| over a deterministic quasi-uniform sample of the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError

# Margin below which a sampled sphere minimum counts as "not elliptic".
# Floating-point evaluation noise floor.
ELLIPTIC_THRESHOLD = 1e-8

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Homogeneous polynomial of degree m in n variables.

    ``terms`` is a sorted tuple of (exponents, coefficient) pairs; every
    exponent tuple has length n and entry sum exactly m, coefficients are
    nonzero.  Instances are immutable and hashable.
    """

    n: int
    m: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise InputError(f"dimension n={self.n} outside 1..3")
        if self.m < 1:
            raise InputError(f"degree m={self.m} must be a positive integer")
        if not self.terms:
            raise InputError("polynomial has no terms")
        for expo, coeff in self.terms:
            if len(expo) != self.n:
                raise InputError(f"multi-index {expo} has length != n={self.n}")
            if any(e < 0 for e in expo):
                raise InputError(f"negative exponent in {expo}")
            if sum(expo) != self.m:
                raise InputError(
                    f"multi-index {expo} sums to {sum(expo)}, not m={self.m}"
                )
            if coeff == 0:
                raise InputError("zero coefficient stored")
        if len({e for e, _ in self.terms}) != len(self.terms):
            raise InputError("duplicate multi-index")

    @classmethod
    def from_terms(
        cls, n: int, terms: Mapping[tuple[int, ...], float] | Iterable
    ) -> "HomogeneousPolynomial":
        """Build from a mapping or iterable of (exponents, coeff) pairs."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        collected: dict[tuple[int, ...], float] = {}
        for expo, coeff in items:
            key = tuple(int(e) for e in expo)
            collected[key] = collected.get(key, 0.0) + float(coeff)
        cleaned = {e: c for e, c in collected.items() if c != 0.0}
        if not cleaned:
            raise InputError("polynomial has no nonzero terms")
        m = sum(next(iter(cleaned)))
        return cls(n=n, m=m, terms=tuple(sorted(cleaned.items())))

    @classmethod
    def monomial(cls, m: int) -> "HomogeneousPolynomial":
        """t^m on the line."""
        return cls.from_terms(1, {(m,): 1.0})

    @classmethod
    def radial(cls, n: int, k: int) -> "HomogeneousPolynomial":
        """(x_1^2 + ... + x_n^2)^k, degree 2k."""
        if k < 1:
            raise InputError("radial power k must be >= 1")
        terms: dict[tuple[int, ...], float] = {}
        for combo in _compositions(k, n):
            coeff = math.factorial(k)
            for c in combo:
                coeff //= math.factorial(c)
            terms[tuple(2 * c for c in combo)] = float(coeff)
        return cls.from_terms(n, terms)

    @classmethod
    def crossed_radial(cls, k: int) -> "HomogeneousPolynomial":
        """x1 * x2 * (x1^2 + x2^2)^k on the plane; vanishes on the axes."""
        if k < 1:
            raise InputError("crossed radial power k must be >= 1")
        base = cls.radial(2, k)
        terms = {(e[0] + 1, e[1] + 1): c for e, c in base.terms}
        return cls.from_terms(2, terms)

    @property
    def terms_dict(self) -> dict[tuple[int, ...], float]:
        return dict(self.terms)

    def evaluate(self, point) -> float:
        """P(point); exact for exactly representable inputs."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.shape != (self.n,):
            raise InputError(f"point has shape {pt.shape}, expected ({self.n},)")
        total = 0.0
        for expo, coeff in self.terms:
            mono = coeff
            for x, e in zip(pt, expo):
                mono *= x**e
            total += mono
        return float(total)

    def square(self) -> "HomogeneousPolynomial":
        """P^2 of degree 2m, by exact rational convolution of the terms."""
        acc: dict[tuple[int, ...], Fraction] = {}
        frac_terms = [(e, Fraction(c)) for e, c in self.terms]
        for e1, c1 in frac_terms:
            for e2, c2 in frac_terms:
                key = tuple(a + b for a, b in zip(e1, e2))
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return HomogeneousPolynomial.from_terms(
            self.n, {e: float(c) for e, c in acc.items() if c != 0}
        )

    def ellipticity_margin(self, samples: int) -> float:
        """min |P| over a deterministic quasi-uniform sample of S^{n-1}.

        For n=1 the sample is {-1, +1}; for n=2 it is 2^k equally spaced
        angles with 2^k >= samples (nested across refinement); for n=3 a
        Fibonacci lattice with exactly ``samples`` points.
        """
        pts = sphere_sample(self.n, samples)
        return float(np.min(np.abs(self._on_points(pts))))

    def sign_range_on_sphere(self, samples: int = 256) -> tuple[float, float]:
        """(min, max) of the signed values of P on the sphere sample."""
        vals = self._on_points(sphere_sample(self.n, samples))
        return float(np.min(vals)), float(np.max(vals))

    def is_elliptic(self, samples: int = 256) -> bool:
        return self.ellipticity_margin(samples) > ELLIPTIC_THRESHOLD

    def is_nonnegative_on_sphere(self, samples: int = 256) -> bool:
        lo, _ = self.sign_range_on_sphere(samples)
        return lo > -ELLIPTIC_THRESHOLD

    def _on_points(self, pts: np.ndarray) -> np.ndarray:
        vals = np.zeros(pts.shape[0])
        for expo, coeff in self.terms:
            mono = np.full(pts.shape[0], coeff)
            for axis, e in enumerate(expo):
                if e:
                    mono *= pts[:, axis] ** e
            vals += mono
        return vals

    def __str__(self) -> str:
        names = ["t"] if self.n == 1 else [f"x{i + 1}" for i in range(self.n)]
        parts = []
        for expo, coeff in self.terms:
            mono = "*".join(
                f"{nm}^{e}" if e > 1 else nm for nm, e in zip(names, expo) if e
            )
            parts.append(f"{coeff:g}*{mono}" if mono else f"{coeff:g}")
        return " + ".join(parts)


def sphere_sample(n: int, samples: int) -> np.ndarray:
    """Deterministic quasi-uniform points on S^{n-1}, shape (count, n)."""
    if samples < 8:
        raise InputError("samples must be >= 8")
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        count = 1 << max(3, math.ceil(math.log2(samples)))
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if n == 3:
        i = np.arange(samples)
        z = 1.0 - 2.0 * (i + 0.5) / samples
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        theta = 2.0 * np.pi * i / _GOLDEN
        return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    raise InputError(f"dimension n={n} outside 1..3")


def from_literal(spec) -> HomogeneousPolynomial:
    """Parse the config-file polynomial syntax.

    Accepts a preset string ("monomial:m", "radial:n:k", "remark63:k",
    "crossed:k") or a list of {"exponents": [...], "coeff": c} records.
    """
    if isinstance(spec, str):
        return _parse_preset_string(spec)
    if isinstance(spec, (list, tuple)):
        pairs = []
        for rec in spec:
            try:
                pairs.append((tuple(rec["exponents"]), float(rec["coeff"])))
            except (TypeError, KeyError) as exc:
                raise InputError(f"bad polynomial term record: {rec!r}") from exc
        if not pairs:
            raise InputError("empty polynomial literal")
        n = len(pairs[0][0])
        return HomogeneousPolynomial.from_terms(n, pairs)
    raise InputError(f"cannot parse polynomial literal {spec!r}")


def _parse_preset_string(text: str) -> HomogeneousPolynomial:
    fields = text.strip().split(":")
    kind = fields[0].lower()
    try:
        if kind == "monomial" and len(fields) == 2:
            return HomogeneousPolynomial.monomial(int(fields[1]))
        if kind == "radial" and len(fields) == 3:
            return HomogeneousPolynomial.radial(int(fields[1]), int(fields[2]))
        if kind in ("remark63", "crossed") and len(fields) == 2:
            return HomogeneousPolynomial.crossed_radial(int(fields[1]))
    except ValueError as exc:
        raise InputError(f"bad polynomial preset {text!r}") from exc
    raise InputError(f"unknown polynomial preset {text!r}")


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest
