"""Companion-block linearization of the quadratic pencil
I - 2*lam*B + lam^2*A, its dense eigensolve, residual validation of pencil
eigenpairs, reconstruction of the physical eigenfunction, and the
cross-truncation stability study that certifies eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eig

from ._threads import map_sizes
from .basis import TensorBasis, synthesize
from .errors import InputError, NumericError
from .operators import SpdFactorization, SpectralOperator, power
from .problems import Problem, realize

# eigenvalues of the block operator below this fraction of the largest are
# truncation noise near the essential accumulation at zero
MU_FLOOR_REL = 1e-6

DEFAULT_RESIDUAL_TOL = 1e-6
DEFAULT_DRIFT_TOL = 1e-4


@dataclass(frozen=True)
class Linearization:
    """2d x 2d companion block [[2B, A^{1/2}], [-A^{1/2}, 0]]."""

    block: np.ndarray
    basis: TensorBasis

    @property
    def half_dim(self) -> int:
        return self.block.shape[0] // 2


@dataclass
class PencilEigenpair:
    """A validated pencil eigenpair at one truncation size."""

    mu: complex
    lam: complex
    u: np.ndarray
    residual: float
    size: int

    def to_json_dict(self) -> dict:
        return {
            "lambda_re": float(self.lam.real),
            "lambda_im": float(self.lam.imag),
            "mu_abs": float(abs(self.mu)),
            "residual": float(self.residual),
            "size": int(self.size),
        }


def build_linearization(
    A_half: SpectralOperator, B: SpectralOperator
) -> Linearization:
    """Assemble the companion block from A^{1/2} and B on one basis."""
    if A_half.basis != B.basis:
        raise InputError("A^{1/2} and B live on different bases")
    d = A_half.dim
    block = np.zeros((2 * d, 2 * d))
    block[:d, :d] = 2.0 * B.matrix
    block[:d, d:] = A_half.matrix
    block[d:, :d] = -A_half.matrix
    return Linearization(block=block, basis=A_half.basis)


def eigensolve(lin: Linearization) -> list[tuple[complex, np.ndarray]]:
    """All 2d eigenpairs of the companion block, |mu| descending.

    Ties break by descending real part, then descending imaginary part.
    """
    try:
        mu, vecs = eig(lin.block)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericError(
            f"nonsymmetric eigensolve failed at dimension {lin.block.shape[0]}"
        ) from exc
    order = sorted(
        range(len(mu)),
        key=lambda i: (-abs(mu[i]), -mu[i].real, -mu[i].imag),
    )
    return [(complex(mu[i]), vecs[:, i]) for i in order]


def validate_pairs(
    pairs: Sequence[tuple[complex, np.ndarray]],
    A: SpectralOperator,
    B: SpectralOperator,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    mu_floor_rel: float = MU_FLOOR_REL,
) -> list[PencilEigenpair]:
    """Filter raw eigenpairs into validated pencil eigenpairs.

    Keeps pairs with |mu| above the relative floor whose first block u
    satisfies ||(I - 2*lam*B + lam^2*A) u|| / ||u|| < residual_tol with
    lam = 1/mu.  An empty result is a valid outcome.
    """
    if residual_tol <= 0:
        raise InputError("residual tolerance must be positive")
    if not pairs:
        return []
    d = A.dim
    mu_max = max(abs(mu) for mu, _ in pairs)
    size = A.basis.axes[0].size
    keep = [
        (mu, vec) for mu, vec in pairs if abs(mu) >= mu_floor_rel * mu_max
    ]
    if not keep:
        return []
    mus = np.array([mu for mu, _ in keep])
    U = np.column_stack([vec[:d] for _, vec in keep])
    norms = np.linalg.norm(U, axis=0)
    lams = 1.0 / mus
    # one pass of dense products instead of per-pair matvecs
    BU = B.matrix @ U
    AU = A.matrix @ U
    resid = U - 2.0 * lams[None, :] * BU + (lams**2)[None, :] * AU
    residuals = np.linalg.norm(resid, axis=0)
    out: list[PencilEigenpair] = []
    for i, (mu, _) in enumerate(keep):
        if norms[i] == 0.0:
            continue
        residual = float(residuals[i] / norms[i])
        if residual < residual_tol:
            out.append(
                PencilEigenpair(
                    mu=mu, lam=complex(lams[i]), u=U[:, i],
                    residual=residual, size=size,
                )
            )
    return out


def solve_problem_pencil(
    problem: Problem, size: int, residual_tol: float = DEFAULT_RESIDUAL_TOL
) -> list[PencilEigenpair]:
    """Linearize, solve, and validate the pencil of a problem at one size."""
    r = realize(problem, size)
    lin = build_linearization(r.A_half, r.B)
    raw = eigensolve(lin)
    return validate_pairs(raw, r.A, r.B, residual_tol=residual_tol)


@dataclass
class EigenfunctionRecovery:
    """Physical eigenfunction f = A^{1/2} u with its quality measures."""

    lam: complex
    coefficients: np.ndarray
    direct_residual: float
    tail_mass: float
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None


def recover_physical_eigenfunction(
    pair: PencilEigenpair,
    L_fact: SpdFactorization,
    P: SpectralOperator,
    grid=None,
) -> EigenfunctionRecovery:
    """Map a validated pair to the eigenfunction of the original problem.

    f = A^{1/2} u solves (L - 2*lam*P + lam^2) f = 0 up to the reported
    direct residual.  tail_mass is the coefficient norm fraction carried by
    the top decile of total Hermite levels (a Schwartz-decay proxy); grid
    values are synthesized when a grid is supplied.
    """
    a_half = power(L_fact, -0.5).matrix
    f = a_half @ pair.u
    f = f / np.linalg.norm(f)
    basis = L_fact.basis
    L_mat = (
        L_fact.eigenvectors * L_fact.eigenvalues
    ) @ L_fact.eigenvectors.T
    lam = pair.lam
    resid = L_mat @ f - 2.0 * lam * (P.matrix @ f) + lam**2 * f
    direct = float(np.linalg.norm(resid))

    levels = basis.level_sums
    cutoff = 0.9 * float(levels.max())
    tail = float(np.linalg.norm(f[levels > cutoff]))

    grid_arr = values = None
    if grid is not None:
        grid_arr = np.asarray(grid, dtype=float)
        values = synthesize(f, basis, grid_arr)
    return EigenfunctionRecovery(
        lam=lam,
        coefficients=f,
        direct_residual=direct,
        tail_mass=tail,
        grid=grid_arr,
        values=values,
    )


@dataclass
class CertifiedEigenvalue:
    lam: complex
    residual: float
    drift: float
    size: int

    def to_json_dict(self) -> dict:
        return {
            "lambda_re": float(self.lam.real),
            "lambda_im": float(self.lam.imag),
            "residual": float(self.residual),
            "drift": float(self.drift),
            "size": int(self.size),
            "certified": True,
        }


@dataclass
class StabilityStudy:
    """Validated eigenvalues per size, drift table, and certified values."""

    problem: str
    sizes: tuple[int, ...]
    validated: dict[int, list[PencilEigenpair]]
    matches: list[dict]
    certified: list[CertifiedEigenvalue] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "problem": self.problem,
            "sizes": list(self.sizes),
            "validated_counts": {
                str(s): len(v) for s, v in self.validated.items()
            },
            "matches": self.matches,
            "certified": [c.to_json_dict() for c in self.certified],
        }


def _greedy_match(
    current: list[PencilEigenpair], previous: list[PencilEigenpair]
) -> list[tuple[PencilEigenpair, Optional[PencilEigenpair], float]]:
    """Match each pair at the larger size to the nearest unused pair at the
    smaller size, walking candidates in ascending |lambda|.

    The ascending walk matters: the physical eigenvalues sit at small
    |lambda| while truncation artifacts accumulate at large |lambda| and
    outnumber the smaller list, so matching large ones first would consume
    every available partner before the converged region is reached.
    """
    if not previous:
        return [(pair, None, np.inf) for pair in current]
    order = sorted(range(len(current)), key=lambda i: abs(current[i].lam))
    prev_lams = np.array([p.lam for p in previous])
    available = np.ones(len(previous), dtype=bool)
    matches = []
    for i in order:
        pair = current[i]
        if not available.any():
            matches.append((pair, None, np.inf))
            continue
        dists = np.abs(prev_lams - pair.lam)
        dists[~available] = np.inf
        j = int(np.argmin(dists))
        available[j] = False
        matches.append((pair, previous[j], float(dists[j])))
    return matches


def stability_study(
    problem: Problem,
    sizes: Sequence[int],
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    drift_tol: float = DEFAULT_DRIFT_TOL,
    threads: Optional[int] = None,
) -> StabilityStudy:
    """Validated eigenvalues across a size sweep with greedy matching.

    An eigenvalue at the largest size is certified when its match across
    the two largest sizes drifts by less than drift_tol * (1 + |lambda|).
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2:
        raise InputError("stability study needs at least 2 sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sizes must be strictly increasing")

    per_size = map_sizes(
        lambda s: solve_problem_pencil(problem, s, residual_tol), sizes, threads
    )
    validated = dict(zip(sizes, per_size))

    match_rows: list[dict] = []
    certified: list[CertifiedEigenvalue] = []
    for prev_size, cur_size in zip(sizes, sizes[1:]):
        matches = _greedy_match(validated[cur_size], validated[prev_size])
        top_pair = cur_size == sizes[-1]
        for pair, prev, drift in matches:
            ok = np.isfinite(drift) and drift < drift_tol * (1.0 + abs(pair.lam))
            match_rows.append(
                {
                    "from_size": prev_size,
                    "to_size": cur_size,
                    "lambda_re": float(pair.lam.real),
                    "lambda_im": float(pair.lam.imag),
                    "drift": float(drift) if np.isfinite(drift) else None,
                    "within_tol": bool(ok),
                }
            )
            if top_pair and ok:
                certified.append(
                    CertifiedEigenvalue(
                        lam=pair.lam,
                        residual=pair.residual,
                        drift=float(drift),
                        size=cur_size,
                    )
                )
    certified.sort(key=lambda c: abs(c.lam))
    return StabilityStudy(
        problem=problem.describe(),
        sizes=sizes,
        validated=validated,
        matches=match_rows,
        certified=certified,
    )
