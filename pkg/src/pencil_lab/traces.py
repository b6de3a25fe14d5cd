"""Traces of operator words, the rank-2/3/4 nonvanishing criteria, scaling
and differentiation identities, Cauchy-Schwarz checks, and truncation-sweep
extrapolation with heuristic error estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._threads import map_sizes
from .errors import InputError
from .polynomial import HomogeneousPolynomial
from .problems import Problem, Realization, realize, scale_gamma
from .symbolcalc import operator_symbol, schatten_member

MAX_WORD_LENGTH = 12

# a reported nonzero criterion must dominate its own error bar by this factor
VERDICT_FACTOR = 5.0

# q below this is treated as "no convergent power law" (log-divergent sweeps
# land here); the fit itself is constrained to q >= 1/2
Q_DETECT_FLOOR = 0.25
Q_FIT_FLOOR = 0.5
Q_CAP = 40.0


@dataclass(frozen=True)
class TraceWord:
    """A product word over the factor alphabet.

    Single-letter tags: A (inverse), B (sandwiched multiplication), P
    (multiplication by the polynomial), H (inverse square root), L (the
    operator itself), a/b (weighted pair).  ("T", j) is multiplication by
    t^j (1D), and a raw square ndarray is a custom factor.
    """

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InputError("trace word is empty")
        if len(self.factors) > MAX_WORD_LENGTH:
            raise InputError(
                f"trace word length {len(self.factors)} > {MAX_WORD_LENGTH}"
            )

    @classmethod
    def parse(cls, text: str) -> "TraceWord":
        """Parse compact word syntax, e.g. "BA", "PAA", "T4AA"."""
        factors: list = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "T":
                j = i + 1
                while j < len(text) and text[j].isdigit():
                    j += 1
                if j == i + 1:
                    raise InputError(f"T must be followed by digits in {text!r}")
                factors.append(("T", int(text[i + 1 : j])))
                i = j
            elif ch in "ABPHLab":
                factors.append(ch)
                i += 1
            else:
                raise InputError(f"unknown factor {ch!r} in word {text!r}")
        return cls(tuple(factors))

    def rotated(self, k: int) -> "TraceWord":
        n = len(self.factors)
        k %= n
        return TraceWord(self.factors[k:] + self.factors[:k])

    def reversed(self) -> "TraceWord":
        return TraceWord(tuple(reversed(self.factors)))

    def __str__(self) -> str:
        out = []
        for f in self.factors:
            if isinstance(f, tuple):
                out.append(f"T{f[1]}")
            elif isinstance(f, np.ndarray):
                out.append("<custom>")
            else:
                out.append(str(f))
        return "".join(out)


def trace_word(word: TraceWord | str, problem: Problem, size: int) -> float:
    """Trace of the realized word at the given truncation size.

    Evaluation is a plain left-to-right product; finite-dimensional traces
    are grouping-independent up to roundoff.
    """
    if isinstance(word, str):
        word = TraceWord.parse(word)
    r = realize(problem, size)
    return _trace_on_realization(word, r)


def _trace_on_realization(word: TraceWord, r: Realization) -> float:
    mats = [r.factor_matrix(tag) for tag in word.factors]
    if len(mats) == 1:
        return float(np.trace(mats[0]))
    prod = mats[0]
    for mat in mats[1:-1]:
        prod = prod @ mat
    # Tr(prod @ last) without forming the final product
    return float(np.sum(prod * mats[-1].T))


# ---------------------------------------------------------------------------
# truncation-sweep extrapolation
# ---------------------------------------------------------------------------


@dataclass
class TraceReport:
    """A trace (or criterion) over a truncation sweep with its limit fit.

    ``error_estimate`` is the Richardson-style residual |v_inf - v_last|;
    it is a heuristic, not a bound.  ``fit_ok`` False means the tail was
    non-monotone or too slow for a power law (the "no-fit" flag); the
    extrapolated value then falls back to the last sweep value.
    """

    sizes: tuple[int, ...]
    values: tuple[float, ...]
    extrapolated: float
    error_estimate: float
    fit_ok: bool
    exponent: Optional[float] = None
    word: str = ""
    verdict: str = ""

    def to_json_dict(self) -> dict:
        return {
            "word": self.word,
            "sizes": list(self.sizes),
            "values": list(self.values),
            "extrapolated": self.extrapolated,
            "error": self.error_estimate,
            "fit_ok": self.fit_ok,
            "exponent": self.exponent,
            "verdict": self.verdict,
        }


def extrapolate(
    sizes: Sequence[int], values: Sequence[float], word: str = ""
) -> TraceReport:
    """Fit v(N) = v_inf + c N^{-q} over the last three sweep points.

    The fitted exponent is constrained to q >= 1/2.  A non-monotone tail,
    or a contraction ratio so weak that even q = 1/4 cannot explain it
    (log-divergent sweeps), sets the no-fit flag and returns the last value
    with the largest successive difference as the error estimate.
    """
    sizes = tuple(int(s) for s in sizes)
    values = tuple(float(v) for v in values)
    if len(sizes) != len(values):
        raise InputError("sizes and values differ in length")
    if len(sizes) < 3:
        raise InputError("extrapolation needs at least 3 sweep points")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sizes must be strictly increasing")

    n1, n2, n3 = (float(s) for s in sizes[-3:])
    v1, v2, v3 = values[-3:]
    d1, d2 = v2 - v1, v3 - v2

    def report(extrap, err, ok, q=None):
        return TraceReport(
            sizes=sizes,
            values=values,
            extrapolated=float(extrap),
            error_estimate=float(err),
            fit_ok=ok,
            exponent=q,
            word=word,
        )

    if d1 == 0.0 and d2 == 0.0:
        return report(v3, 0.0, True, q=None)
    if d1 == 0.0 or d2 == 0.0 or math.copysign(1, d1) != math.copysign(1, d2):
        return report(v3, max(abs(d1), abs(d2)), False)

    ratio = d2 / d1

    def model_ratio(q: float) -> float:
        return (n2**-q - n3**-q) / (n1**-q - n2**-q)

    if ratio >= model_ratio(Q_DETECT_FLOOR):
        # slower than any admissible power law: divergent or log-like tail
        return report(v3, max(abs(d1), abs(d2)), False)

    if ratio <= model_ratio(Q_CAP):
        q = Q_CAP
    else:
        q = brentq(lambda t: model_ratio(t) - ratio, Q_DETECT_FLOOR, Q_CAP, xtol=1e-13)
    q = max(q, Q_FIT_FLOOR)

    design = np.array([[1.0, n**-q] for n in (n1, n2, n3)])
    coef, *_ = np.linalg.lstsq(design, np.array([v1, v2, v3]), rcond=None)
    v_inf = float(coef[0])
    return report(v_inf, abs(v_inf - v3), True, q=q)


def two_term_extrapolate(sizes: Sequence[int], values: Sequence[float]) -> float:
    """Limit of a slowly converging sweep via v_inf + c1 N^-q + c2 N^-2q.

    Uses at least four points and minimizes the least-squares residual over
    the exponent; sharper than the three-point rule when the tail exponent
    sits below 1/2 (slow trace tails at low polynomial degree).
    """
    sizes_arr = np.asarray(sizes, dtype=float)
    vals = np.asarray(values, dtype=float)
    if sizes_arr.size < 4:
        raise InputError("two-term extrapolation needs at least 4 points")

    def fit(q: float):
        design = np.column_stack(
            [np.ones_like(sizes_arr), sizes_arr**-q, sizes_arr ** (-2 * q)]
        )
        coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
        resid = float(np.sum((design @ coef - vals) ** 2))
        return resid, float(coef[0])

    best = minimize_scalar(
        lambda q: fit(q)[0], bounds=(0.15, 2.0), method="bounded",
        options={"xatol": 1e-6},
    )
    return fit(float(best.x))[1]


# ---------------------------------------------------------------------------
# rank-k criteria
# ---------------------------------------------------------------------------


def rank2_criterion(problem: Problem, size: int) -> float:
    """Tr(2 B^2 - A); uses the weighted pair when the problem carries one."""
    r = realize(problem, size)
    if problem.weighted_ell is not None:
        a, b = r.A_w.matrix, r.B_w.matrix
    else:
        a, b = r.A.matrix, r.B.matrix
    return float(2.0 * np.sum(b * b.T) - np.trace(a))


def rank3_criterion(problem: Problem, size: int) -> float:
    """Tr(4 B^3 - 3 B A)."""
    r = realize(problem, size)
    a, b = r.A.matrix, r.B.matrix
    b2 = b @ b
    return float(4.0 * np.sum(b2 * b.T) - 3.0 * np.sum(b * a.T))


def rank4_criterion(problem: Problem, size: int) -> float:
    """Tr(8 B^4 - 8 B^2 A + A^2)."""
    r = realize(problem, size)
    a, b = r.A.matrix, r.B.matrix
    b2 = b @ b
    return float(
        8.0 * np.sum(b2 * b2.T) - 8.0 * np.sum(b2 * a.T) + np.sum(a * a.T)
    )


@dataclass
class CriterionHypotheses:
    ok: bool
    notes: tuple[str, ...] = field(default_factory=tuple)


def rank2_hypotheses(problem: Problem) -> CriterionHypotheses:
    """Trace-class side conditions for the rank-2 criterion."""
    notes = []
    if problem.weighted_ell is not None:
        ell, m = problem.weighted_ell, problem.m
        spec = operator_symbol("A_w", 1, m, ell=ell)
        if not schatten_member(spec, 1.0):
            notes.append(
                f"weighted inverse not trace class (needs 2*ell+1 < m; "
                f"ell={ell}, m={m})"
            )
    else:
        spec = operator_symbol("A", problem.n, problem.m)
        if not schatten_member(spec, 1.0):
            notes.append(
                f"inverse not trace class for n={problem.n}, m={problem.m}"
            )
        if not schatten_member(operator_symbol("B", problem.n, problem.m), 2.0):
            notes.append("B not Hilbert-Schmidt")
    return CriterionHypotheses(ok=not notes, notes=tuple(notes))


def rank3_hypotheses(problem: Problem, samples: int = 256) -> CriterionHypotheses:
    notes = []
    if problem.n != 2:
        notes.append(f"rank-3 sign guarantee needs n=2 (got n={problem.n})")
    if problem.m < 4:
        notes.append(f"rank-3 sign guarantee needs m>=4 (got m={problem.m})")
    if not problem.poly.is_elliptic(samples):
        notes.append("polynomial not elliptic on the sphere sample")
    elif not problem.poly.is_nonnegative_on_sphere(samples):
        notes.append("polynomial changes sign on the sphere sample")
    if not schatten_member(operator_symbol("A3/2", problem.n, problem.m), 1.0):
        notes.append("A^{3/2} not trace class")
    return CriterionHypotheses(ok=not notes, notes=tuple(notes))


def rank4_hypotheses(problem: Problem, samples: int = 256) -> CriterionHypotheses:
    notes = []
    if problem.n not in (2, 3):
        notes.append(
            f"rank-4 sign guarantee covers n in {{2, 3}} (got n={problem.n})"
        )
    if problem.m < 6:
        notes.append(f"rank-4 sign guarantee needs m>=6 (got m={problem.m})")
    if not problem.poly.is_elliptic(samples):
        notes.append("polynomial not elliptic on the sphere sample")
    elif problem.n >= 2 and not problem.poly.is_nonnegative_on_sphere(samples):
        notes.append("polynomial changes sign on the sphere sample")
    if not schatten_member(operator_symbol("A", problem.n, problem.m), 2.0):
        notes.append("inverse not Hilbert-Schmidt")
    return CriterionHypotheses(ok=not notes, notes=tuple(notes))


_CRITERIA = {
    "rank2": (rank2_criterion, rank2_hypotheses),
    "rank3": (rank3_criterion, rank3_hypotheses),
    "rank4": (rank4_criterion, rank4_hypotheses),
}


@dataclass
class CriterionReport:
    """Sweep, extrapolation, hypotheses, and verdict for one criterion."""

    criterion: str
    problem: str
    report: TraceReport
    hypothesis_ok: bool
    hypothesis_notes: tuple[str, ...]
    verdict: str
    sign: str

    def to_json_dict(self) -> dict:
        d = self.report.to_json_dict()
        d.update(
            {
                "criterion": self.criterion,
                "problem": self.problem,
                "hypothesis_ok": self.hypothesis_ok,
                "hypothesis_notes": list(self.hypothesis_notes),
                "verdict": self.verdict,
                "sign": self.sign,
            }
        )
        d.pop("word", None)
        return d


def criterion_report(
    problem: Problem,
    kind: str,
    sizes: Sequence[int],
    threads: Optional[int] = None,
) -> CriterionReport:
    """Evaluate a rank-k criterion over a sweep and attach a verdict.

    Verdict semantics: "satisfied" when the hypotheses hold, the sweep fits,
    and |extrapolated| > VERDICT_FACTOR * error_estimate; "hypothesis_violated"
    when the side conditions fail (the value is still reported);
    "inconclusive" otherwise.
    """
    if kind not in _CRITERIA:
        raise InputError(f"unknown criterion {kind!r}")
    func, hypo_func = _CRITERIA[kind]
    values = map_sizes(lambda s: func(problem, s), sizes, threads)
    rep = extrapolate(sizes, values, word=kind)
    hypo = hypo_func(problem)
    if not hypo.ok:
        verdict = "hypothesis_violated"
    elif rep.fit_ok and abs(rep.extrapolated) > VERDICT_FACTOR * rep.error_estimate:
        verdict = "satisfied"
    else:
        verdict = "inconclusive"
    sign = "negative" if rep.extrapolated < 0 else "positive"
    rep.verdict = verdict
    return CriterionReport(
        criterion=kind,
        problem=problem.describe(),
        report=rep,
        hypothesis_ok=hypo.ok,
        hypothesis_notes=hypo.notes,
        verdict=verdict,
        sign=sign,
    )


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------


def scaling_identity_check(
    problem: Problem, ell_exp: int, gamma: float, mode: str, size: int
) -> tuple[float, float, float]:
    """Compare Tr A_gamma^ell against gamma^{-ell/(m+1)} Tr A^ell.

    Returns (lhs, rhs, relative error).  Exact (to roundoff) in isospectral
    mode; in fixed-basis mode the discrepancy measures how far the truncated
    basis is from dilation covariance.
    """
    if not gamma > 0:
        raise InputError("gamma must be positive")
    if ell_exp < 1:
        raise InputError("trace power must be >= 1")
    r = realize(problem, size)
    a_gamma = scale_gamma(problem, size, gamma, mode).matrix
    lhs = float(np.trace(np.linalg.matrix_power(a_gamma, ell_exp)))
    tr_a_ell = float(np.trace(np.linalg.matrix_power(r.A.matrix, ell_exp)))
    rhs = gamma ** (-ell_exp / (problem.m + 1.0)) * tr_a_ell
    rel = abs(lhs - rhs) / abs(rhs)
    return lhs, rhs, rel


def derivative_identity_check(m: int, size: int) -> tuple[float, float, float]:
    """Tr(A t^{2m} A) against Tr(A)/(m+1) for the 1D monomial problem."""
    if m < 2:
        raise InputError(
            "derivative identity needs a trace-class inverse (m >= 2)"
        )
    problem = Problem(
        poly=HomogeneousPolynomial.monomial(m), label=f"monomial:{m}"
    )
    r = realize(problem, size)
    a = r.A.matrix
    lhs = float(np.sum((a @ r.potential) * a.T))
    rhs = float(np.trace(a)) / (m + 1.0)
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def identity_5_6_check(problem: Problem, size: int) -> tuple[float, float, float]:
    """Tr((PA)^3 P^2 A) against (1/2)((m+2)/(m+1)) Tr((PA)^3)."""
    r = realize(problem, size)
    p, a = r.P.matrix, r.A.matrix
    pa = p @ a
    pa3 = pa @ pa @ pa
    lhs = float(np.sum((pa3 @ p @ p) * a.T))
    rhs = 0.5 * (problem.m + 2.0) / (problem.m + 1.0) * float(np.trace(pa3))
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def mixed_word_scaling_derivative(
    problem: Problem, size: int, delta: float = 1e-3
) -> tuple[float, float]:
    """Central finite difference in gamma of Tr(P A_gamma)^3 at gamma = 1,
    against the dilation prediction -(3/2)((m+2)/(m+1)) Tr(PA)^3.

    Fixed-basis mode; returns (finite difference, prediction).
    """

    def tr_pa3(gamma: float) -> float:
        a_g = scale_gamma(problem, size, gamma, "fixed_basis").matrix
        pa = realize(problem, size).P.matrix @ a_g
        return float(np.trace(pa @ pa @ pa))

    fd = (tr_pa3(1.0 + delta) - tr_pa3(1.0 - delta)) / (2.0 * delta)
    base = tr_pa3(1.0)
    predicted = -1.5 * (problem.m + 2.0) / (problem.m + 1.0) * base
    return fd, predicted


def cauchy_schwarz_check(
    C: np.ndarray, D: np.ndarray
) -> tuple[float, float, bool]:
    """Tr(C D^T) <= ||C||_HS ||D||_HS with a roundoff allowance.

    Returns (lhs, rhs, holds).
    """
    C = np.asarray(C, dtype=float)
    D = np.asarray(D, dtype=float)
    if C.shape != D.shape or C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError("Cauchy-Schwarz check needs two same-shape square matrices")
    lhs = float(np.sum(C * D))
    rhs = float(np.linalg.norm(C, "fro") * np.linalg.norm(D, "fro"))
    holds = lhs <= rhs + 1e-12 * max(1.0, rhs)
    return lhs, rhs, holds
