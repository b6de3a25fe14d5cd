"""The acceptance suite: every gate criterion as a callable check with its
tolerances pinned, plus the driver that prints one pass/fail line per
criterion.

Checks come in a standard tier and a looser "quick" tier (halved sizes,
tolerances relaxed tenfold where the halved sweep cannot reach the standard
ones).  The three-dimensional variant is not part of the gate; it runs only
on request and never affects the exit code."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import pencil as pencil_mod
from . import traces as traces_mod
from .errors import NumericError
from .polynomial import HomogeneousPolynomial
from .problems import preset, realize
from .symbolcalc import (
    hs_estimate_shifted_inverse,
    inverse_symbol,
    operator_symbol,
    schatten_member,
)


@dataclass
class CheckResult:
    index: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    gating: bool = True

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        gate = "" if self.gating else " [non-gating]"
        return f"[{self.index:2d}] {tag}{gate} {self.name}: {self.detail} ({self.elapsed:.1f}s)"


@dataclass
class Tier:
    """Sweep sizes and tolerance scaling for one acceptance tier."""

    quick: bool = False

    def sizes_1d(self) -> tuple[int, ...]:
        return (50, 100, 200) if self.quick else (100, 200, 400)

    def sizes_1d_dense(self) -> tuple[int, ...]:
        return (100, 150, 200, 250) if self.quick else (200, 300, 400, 500)

    def sizes_2d(self) -> tuple[int, ...]:
        # the quick sweep starts at 16: below that the rank-4 sweep has not
        # entered its monotone-contraction regime and cannot be extrapolated
        return (16, 20, 24) if self.quick else (24, 32, 40)

    def sizes_3d(self) -> tuple[int, ...]:
        return (8, 10, 12) if self.quick else (12, 16, 20)

    def tol(self, standard: float) -> float:
        return standard * 10.0 if self.quick else standard


def _fmt(x: float) -> str:
    return f"{x:.6g}"


# ---------------------------------------------------------------------------
# criterion 1: rank-2 ratio + derivative identity, 1D monomials
# ---------------------------------------------------------------------------


def check_rank2_monomials(tier: Tier) -> tuple[bool, str]:
    sizes = tier.sizes_1d()
    dense = tier.sizes_1d_dense()
    ratio_slack = tier.tol(1e-3)
    ident_tol = tier.tol(1e-4)
    worst = []
    for m in (2, 3, 4, 5, 6):
        prob = preset(f"monomial:{m}")
        ratios = [
            traces_mod.rank2_criterion(prob, s)
            / traces_mod.trace_word("A", prob, s)
            for s in sizes
        ]
        ratio_x = traces_mod.extrapolate(sizes, ratios).extrapolated
        bound = 2.0 / (m + 1) - 1.0
        if not ratio_x <= bound + ratio_slack:
            return False, (
                f"m={m}: rank-2 ratio {_fmt(ratio_x)} above bound {_fmt(bound)}"
            )
        ident_ratios = []
        for s in dense:
            lhs, _, _ = traces_mod.derivative_identity_check(m, s)
            ident_ratios.append(lhs / traces_mod.trace_word("A", prob, s))
        ident_x = traces_mod.two_term_extrapolate(dense, ident_ratios)
        err = abs(ident_x - 1.0 / (m + 1))
        if not err <= ident_tol:
            return False, f"m={m}: derivative identity off by {err:.2e}"
        worst.append(err)
    return True, (
        f"m=2..6 ratio bounds met; worst identity error {max(worst):.1e}"
        f" (tol {ident_tol:g})"
    )


# ---------------------------------------------------------------------------
# criterion 2: weighted pair bound
# ---------------------------------------------------------------------------


def check_weighted_bound(tier: Tier) -> tuple[bool, str]:
    sizes = tier.sizes_1d()
    slack = tier.tol(1e-3)
    details = []
    for m, ell in ((5, 1), (7, 2)):
        prob = preset(f"weighted:{m}:{ell}")
        ratios = [
            traces_mod.rank2_criterion(prob, s)
            / traces_mod.trace_word("a", prob, s)
            for s in sizes
        ]
        ratio_x = traces_mod.extrapolate(sizes, ratios).extrapolated
        bound = 2.0 * (ell + 1) / (m + 1) - 1.0
        if not ratio_x <= bound + slack:
            return False, (
                f"(m,ell)=({m},{ell}): ratio {_fmt(ratio_x)} above {_fmt(bound)}"
            )
        details.append(f"({m},{ell}): {_fmt(ratio_x)} <= {_fmt(bound)}")
    return True, "; ".join(details)


# ---------------------------------------------------------------------------
# criteria 3 and 4: rank-3 and rank-4 on radial polynomials
# ---------------------------------------------------------------------------


def check_rank3_radial(tier: Tier) -> tuple[bool, str]:
    sizes = tier.sizes_2d()
    slack = tier.tol(1e-3)
    prob = preset("radial:2:2")
    m = prob.m
    rep = traces_mod.criterion_report(prob, "rank3", sizes)
    value, err = rep.report.extrapolated, rep.report.error_estimate
    if not (value < 0 and abs(value) > traces_mod.VERDICT_FACTOR * err):
        return False, (
            f"rank-3 value {_fmt(value)} does not dominate error {err:.1e}"
        )
    lhs_seq, rhs_seq, rel56 = [], [], []
    for s in sizes:
        pa3 = traces_mod.trace_word("PAPAPA", prob, s)
        pa2 = traces_mod.trace_word("PAA", prob, s)
        lhs_seq.append(pa3)
        rhs_seq.append(0.5 * (m + 2.0) / (m + 1.0) * pa2)
        _, _, rel = traces_mod.identity_5_6_check(prob, s)
        rel56.append(rel)
    lhs_x = traces_mod.extrapolate(sizes, lhs_seq).extrapolated
    rhs_x = traces_mod.extrapolate(sizes, rhs_seq).extrapolated
    if not lhs_x <= rhs_x + slack * abs(rhs_x):
        return False, f"cubic trace bound violated: {_fmt(lhs_x)} > {_fmt(rhs_x)}"
    decreasing = all(a > b for a, b in zip(rel56, rel56[1:]))
    if not decreasing:
        return False, f"differentiation-identity error not decreasing: {rel56}"
    return True, (
        f"value {_fmt(value)} < 0 (err {err:.1e}); cubic bound holds; "
        f"identity error {rel56[0]:.1e} -> {rel56[-1]:.1e}"
    )


def _rank4_traces_lowmem(prob, size: int) -> dict[str, float]:
    """Tr(8B^4 - 8B^2A + A^2), Tr(A^2), Tr(B^2 A) at one truncation with a
    flat memory profile: intermediates are released as soon as possible so
    the three-dimensional sweep stays within desk-scale memory."""
    from scipy.linalg import eigh

    from .basis import laplacian_tensor, multiplication_matrix

    basis = prob.basis_for(size)
    L = laplacian_tensor(basis)
    L += multiplication_matrix(prob.poly.square(), basis)
    L = 0.5 * (L + L.T)
    w, q = eigh(L, overwrite_a=True)
    if w[0] <= 0:
        raise NumericError(f"rank-4 sweep: L not positive at size {size}")
    del L
    a = (q / w) @ q.T
    a_half = (q * w**-0.5) @ q.T
    del q
    b = a_half @ multiplication_matrix(prob.poly, basis) @ a_half
    b = 0.5 * (b + b.T)
    del a_half
    b2 = b @ b
    del b
    tr_a2 = float(np.sum(a * a.T))
    tr_b2a = float(np.sum(b2 * a.T))
    tr_b4 = float(np.sum(b2 * b2.T))
    return {
        "rank4": 8.0 * tr_b4 - 8.0 * tr_b2a + tr_a2,
        "AA": tr_a2,
        "BBA": tr_b2a,
    }


def check_rank4_radial(tier: Tier, preset_name: str = "radial:2:3") -> tuple[bool, str]:
    slow_variant = preset_name == "radial:3:3"
    sizes = tier.sizes_3d() if slow_variant else tier.sizes_2d()
    slack = tier.tol(1e-3)
    prob = preset(preset_name)
    m = prob.m

    if slow_variant:
        rows = [_rank4_traces_lowmem(prob, s) for s in sizes]
        rep = traces_mod.extrapolate(
            sizes, [r["rank4"] for r in rows], word="rank4"
        )
        value, err = rep.extrapolated, rep.error_estimate
        fit_ok = rep.fit_ok
        verdict = None  # inequalities only; see below
        aa_seq = [r["AA"] for r in rows]
        bba_seq = [r["BBA"] for r in rows]
    else:
        crit = traces_mod.criterion_report(prob, "rank4", sizes)
        value, err = crit.report.extrapolated, crit.report.error_estimate
        fit_ok = crit.report.fit_ok
        verdict = crit.verdict
        aa_seq = [traces_mod.trace_word("AA", prob, s) for s in sizes]
        bba_seq = [traces_mod.trace_word("BBA", prob, s) for s in sizes]

    tra2 = traces_mod.extrapolate(sizes, aa_seq).extrapolated
    floor = (7.0 * m - 41.0) / (8.0 * (m + 1.0)) * tra2
    if not fit_ok:
        return False, "rank-4 sweep could not be extrapolated"
    if not (value > 0 and value >= floor - traces_mod.VERDICT_FACTOR * err):
        return False, f"rank-4 value {_fmt(value)} below floor {_fmt(floor)}"
    # the verdict clause (value dominating 5x its error bar) is part of the
    # two-dimensional gate; the slow variant checks the same inequalities
    # but its sweep sits too early in the asymptotic regime for that factor
    if verdict is not None and verdict != "satisfied":
        return False, f"rank-4 verdict {verdict!r}, expected 'satisfied'"
    casc_lhs = traces_mod.extrapolate(sizes, bba_seq).extrapolated
    casc_rhs = tra2 / (m + 1.0)
    if not casc_lhs <= casc_rhs * (1.0 + slack):
        return False, (
            f"quadratic-in-B bound violated: {_fmt(casc_lhs)} > {_fmt(casc_rhs)}"
        )
    tag = "inequalities hold" if slow_variant else "verdict satisfied"
    return True, (
        f"value {_fmt(value)} >= floor {_fmt(floor)} (err {err:.1e}), {tag}"
    )


# ---------------------------------------------------------------------------
# criterion 5: pencil existence + eigenfunction quality
# ---------------------------------------------------------------------------


def check_pencil_existence(tier: Tier) -> tuple[bool, str]:
    details = []
    cases = [
        ("monomial:2", tier.sizes_1d(), 1e-6),
        ("monomial:3", tier.sizes_1d(), 1e-6),
        ("radial:2:2", tier.sizes_2d(), 1e-4),
    ]
    for name, sizes, tol in cases:
        prob = preset(name)
        study = pencil_mod.stability_study(prob, sizes, residual_tol=tol)
        if not study.certified:
            return False, f"{name}: no certified eigenvalue"
        flagship = study.certified[0]
        top = max(
            (p for p in study.validated[sizes[-1]]
             if abs(p.lam - flagship.lam) < 1e-9 * (1 + abs(flagship.lam))),
            key=lambda p: -abs(p.mu),
            default=None,
        )
        if top is None:
            return False, f"{name}: flagship pair not found at top size"
        r = realize(prob, sizes[-1])
        rec = pencil_mod.recover_physical_eigenfunction(top, r.L_fact, r.P)
        if not rec.direct_residual < tier.tol(1e-4):
            return False, (
                f"{name}: direct residual {rec.direct_residual:.1e} too large"
            )
        if not rec.tail_mass < tier.tol(1e-6):
            return False, f"{name}: coefficient tail {rec.tail_mass:.1e} too large"
        details.append(
            f"{name}: {len(study.certified)} certified, "
            f"lam~{flagship.lam:.4f}"
        )
    return True, "; ".join(details)


# ---------------------------------------------------------------------------
# criterion 6: negative control at m=1
# ---------------------------------------------------------------------------


def check_negative_control(tier: Tier) -> tuple[bool, str]:
    # the control is pinned to this sweep in every tier: the certified-free
    # outcome is a statement about these truncations (the drift of the
    # truncation artifacts is not monotone in N, so other sweeps can
    # transiently fall inside the drift tolerance)
    sizes = (100, 200, 400)
    prob = preset("monomial:1")
    study = pencil_mod.stability_study(prob, sizes, residual_tol=1e-6)
    if study.certified:
        lam = study.certified[0].lam
        return False, f"harmonic problem certified a spurious eigenvalue {lam:.6f}"
    tr_a = traces_mod.extrapolate(
        sizes, [traces_mod.trace_word("A", prob, s) for s in sizes]
    )
    if tr_a.fit_ok:
        return False, "divergent trace sweep unexpectedly admitted a power-law fit"
    rep = traces_mod.extrapolate(
        sizes, [traces_mod.trace_word("AA", prob, s) for s in sizes]
    )
    target = math.pi**2 / 8.0
    err = abs(rep.extrapolated - target)
    if not err < tier.tol(1e-6):
        return False, f"squared-trace limit off by {err:.1e}"
    return True, (
        f"no certified eigenvalue; trace sweep flagged divergent; "
        f"squared trace within {err:.1e} of pi^2/8"
    )


# ---------------------------------------------------------------------------
# criterion 7: exact finite-dimensional identities on all presets
# ---------------------------------------------------------------------------


def _exact_identity_presets(slow: bool) -> list[str]:
    names = [f"monomial:{m}" for m in range(1, 7)]
    names += ["weighted:5:1", "weighted:7:2", "radial:2:2", "radial:2:3",
              "remark63:2"]
    if slow:
        names.append("radial:3:3")
    return names


def check_exact_identities(tier: Tier, slow: bool = False) -> tuple[bool, str]:
    rel_tol = 1e-8
    words = ["BA", "PAA", "BBA"]
    checked = 0
    for name in _exact_identity_presets(slow):
        prob = preset(name)
        size = prob.default_sizes()[0]
        if tier.quick:
            size = max(8, size // 2)
        r = realize(prob, size)
        for text in words:
            word = traces_mod.TraceWord.parse(text)
            base = traces_mod.trace_word(word, prob, size)
            scale = max(abs(base), 1e-30)
            for k in range(1, len(word.factors)):
                rot = traces_mod.trace_word(word.rotated(k), prob, size)
                if abs(rot - base) > rel_tol * scale:
                    return False, f"{name}: cyclicity broken on {text} (rot {k})"
            rev = traces_mod.trace_word(word.reversed(), prob, size)
            if abs(rev - base) > rel_tol * scale:
                return False, f"{name}: reversal broken on {text}"
        lin = pencil_mod.build_linearization(r.A_half, r.B)
        mus = np.array([mu for mu, _ in pencil_mod.eigensolve(lin)])
        # conjugate closure
        paired = np.sort_complex(mus.conj())
        if not np.allclose(
            np.sort_complex(mus), paired, atol=1e-9 * max(1.0, np.abs(mus).max())
        ):
            return False, f"{name}: spectrum not closed under conjugation"
        tr_b = float(np.trace(r.B.matrix))
        tr_combo = 4.0 * np.sum(r.B.matrix * r.B.matrix.T) - 2.0 * np.trace(
            r.A.matrix
        )
        s1, s2 = np.sum(mus), np.sum(mus**2)
        if abs(s1 - 2.0 * tr_b) > 1e-8 * max(1.0, abs(2.0 * tr_b)):
            return False, f"{name}: eigenvalue sum vs 2 Tr B mismatch"
        if abs(s2 - tr_combo) > 1e-8 * max(1.0, abs(tr_combo)):
            return False, f"{name}: squared eigenvalue sum mismatch"
        checked += 1
    return True, f"cyclicity/reversal/conjugation/trace identities on {checked} presets"


# ---------------------------------------------------------------------------
# criterion 8: scaling laws
# ---------------------------------------------------------------------------


def check_scaling_laws(tier: Tier) -> tuple[bool, str]:
    prob = preset("monomial:2")
    n_iso = 100 if tier.quick else 200
    worst_iso = 0.0
    for gamma in (0.5, 2.0, 10.0):
        for ell in (1, 2):
            _, _, rel = traces_mod.scaling_identity_check(
                prob, ell, gamma, "isospectral", n_iso
            )
            worst_iso = max(worst_iso, rel)
            if not rel < 1e-12:
                return False, (
                    f"isospectral scaling off by {rel:.1e} "
                    f"(gamma={gamma}, ell={ell})"
                )
    n_fix = 200 if tier.quick else 400
    worst_fix = 0.0
    for ell in (1, 2):
        _, _, rel = traces_mod.scaling_identity_check(
            prob, ell, 1.5, "fixed_basis", n_fix
        )
        worst_fix = max(worst_fix, rel)
        if not rel < tier.tol(1e-3):
            return False, f"fixed-basis scaling off by {rel:.1e} (ell={ell})"
    return True, (
        f"isospectral worst {worst_iso:.1e} (< 1e-12); "
        f"fixed-basis worst {worst_fix:.1e} (< {tier.tol(1e-3):g})"
    )


# ---------------------------------------------------------------------------
# criterion 9: Schatten predictor table
# ---------------------------------------------------------------------------

# (n, m, operator, p, expected membership); hand-computed from the predicate
# M*p + (k+l)*n < 0 with k = 1/m, l = 1
PREDICTOR_TABLE = [
    (1, 2, "A", 1.0, True),
    (1, 1, "A", 1.0, False),
    (1, 6, "A", 1.0, True),
    (2, 4, "A", 1.0, False),
    (2, 4, "A", 2.0, True),
    (3, 4, "A", 2.0, True),
    (3, 2, "A", 2.0, False),
    (2, 2, "A", 2.0, True),
    (1, 2, "B", 2.0, True),
    (2, 4, "A3/2", 1.0, True),
    (2, 4, "B3", 1.0, True),
    (3, 6, "A", 2.0, True),
]


def check_schatten_predictor(tier: Tier) -> tuple[bool, str]:
    for n, m, op_name, p, expected in PREDICTOR_TABLE:
        spec = operator_symbol(op_name, n, m)
        got = schatten_member(spec, p)
        if got != expected:
            return False, (
                f"predictor wrong for {op_name} n={n} m={m} p={p}: "
                f"got {got}, expected {expected}"
            )
    # anchor 1: trace class iff m > 1 in one dimension
    for m in (1, 2, 3, 5):
        if schatten_member(inverse_symbol(1, m), 1.0) != (m > 1):
            return False, f"trace-class anchor broken at m={m}"
    # anchor 2: Hilbert-Schmidt iff -4 + n (1 + 1/m) < 0
    for n in (1, 2, 3):
        for m in (1, 2, 4, 6):
            expected = -4.0 + n * (1.0 + 1.0 / m) < 0
            if schatten_member(inverse_symbol(n, m), 2.0) != expected:
                return False, f"HS anchor broken at n={n}, m={m}"
    # anchor 3: weighted inverse trace class iff 2 ell + 1 < m
    for m, ell in ((5, 1), (7, 2), (3, 1), (5, 2)):
        spec = operator_symbol("A_w", 1, m, ell=ell)
        if schatten_member(spec, 1.0) != (2 * ell + 1 < m):
            return False, f"weighted anchor broken at (m,ell)=({m},{ell})"
    return True, f"{len(PREDICTOR_TABLE)} table rows and 3 anchor families agree"


# ---------------------------------------------------------------------------
# criterion 10: Hilbert-Schmidt symbol estimate
# ---------------------------------------------------------------------------


def check_hs_estimate(tier: Tier) -> tuple[bool, str]:
    # shifted harmonic inverse: exact spectrum 2j+2, HS norm sqrt(pi^2/24)
    est = hs_estimate_shifted_inverse(HomogeneousPolynomial.monomial(1), shift=1.0)
    exact = math.sqrt(math.pi**2 / 24.0)
    ratio = est / exact
    if not 0.5 <= ratio <= 2.0:
        return False, f"symbol/spectral ratio {ratio:.3f} outside [0.5, 2]"
    return True, f"estimate {est:.4f} vs exact {exact:.4f} (ratio {ratio:.3f})"


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

CHECKS: list[tuple[str, Callable[[Tier], tuple[bool, str]]]] = [
    ("rank-2 ratio + derivative identity (1D monomials)", check_rank2_monomials),
    ("weighted rank-2 bound", check_weighted_bound),
    ("rank-3 radial (n=2, m=4)", check_rank3_radial),
    ("rank-4 radial (n=2, m=6)", check_rank4_radial),
    ("pencil existence + eigenfunction quality", check_pencil_existence),
    ("negative control (harmonic, m=1)", check_negative_control),
    ("exact finite-dimensional identities", check_exact_identities),
    ("scaling laws", check_scaling_laws),
    ("Schatten predictor table", check_schatten_predictor),
    ("Hilbert-Schmidt symbol estimate", check_hs_estimate),
]


def run_acceptance(
    quick: bool = False,
    slow: bool = False,
    printer: Optional[Callable[[str], None]] = print,
) -> list[CheckResult]:
    tier = Tier(quick=quick)
    results: list[CheckResult] = []
    for idx, (name, func) in enumerate(CHECKS, start=1):
        t0 = time.time()
        try:
            passed, detail = func(tier)
        except NumericError as exc:
            passed, detail = False, f"numeric failure: {exc}"
        res = CheckResult(
            index=idx,
            name=name,
            passed=passed,
            detail=detail,
            elapsed=time.time() - t0,
        )
        results.append(res)
        if printer:
            printer(res.line())
    if slow:
        t0 = time.time()
        try:
            passed, detail = check_rank4_radial(tier, preset_name="radial:3:3")
        except NumericError as exc:
            passed, detail = False, f"numeric failure: {exc}"
        res = CheckResult(
            index=len(CHECKS) + 1,
            name="rank-4 radial (n=3, m=6)",
            passed=passed,
            detail=detail,
            elapsed=time.time() - t0,
            gating=False,
        )
        results.append(res)
        if printer:
            printer(res.line())
    return results


def all_gating_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if r.gating)
