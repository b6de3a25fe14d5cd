"""Command-line front end.

Subcommands: criteria, pencil, traces, scaling, schatten, accept.  Problems
come from presets or a TOML config; results are emitted as JSON (stdout or
--json PATH) with optional CSV grid dumps.  Exit codes: 0 success, 2
inconclusive / no eigenvalue found, 3 invalid input, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

from . import __version__, acceptance
from . import pencil as pencil_mod
from . import traces as traces_mod
from .errors import InputError, NumericError
from .problems import (
    Problem,
    preset,
    preset_names,
    problem_from_config,
    realize,
)
from .symbolcalc import min_schatten_index, operator_symbol, schatten_member

EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_INVALID = 3
EXIT_NUMERIC = 4

SCHATTEN_VARIANTS = ("A", "A_half", "A3/2", "A2", "B", "B2", "B3", "B4",
                     "A_w", "B_w")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on parse errors; our contract reserves 2 for
        # "inconclusive", so bad command lines map to the invalid-input code
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    if args.serial:
        os.environ["PENCIL_LAB_THREADS"] = "1"
    try:
        code, payload = args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if payload is not None:
        emit_json(payload, args.json)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pencil-lab",
        description=(
            "Trace criteria, trace identities, and certified eigenvalues "
            "for the quadratic pencil I - 2*lam*B + lam^2*A of a "
            "Schrodinger-type operator -Delta + (P - lam)^2."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_problem=True):
        p.add_argument("--json", metavar="PATH", help="write the JSON report here")
        p.add_argument("--csv-dir", metavar="DIR", help="directory for CSV dumps")
        p.add_argument("--serial", action="store_true",
                       help="force single-threaded sweeps")
        if needs_problem:
            p.add_argument("--preset", choices=preset_names(), help="problem preset")
            p.add_argument("--config", metavar="TOML", help="TOML run configuration")
            p.add_argument("--sizes", metavar="A,B,C",
                           help="comma-separated sweep sizes")
            p.add_argument("--alpha", type=float, help="basis scale override")
            p.add_argument("--residual-tol", type=float, default=None,
                           help="pencil residual tolerance")

    p_crit = sub.add_parser("criteria", help="rank-2/3/4 trace criteria")
    add_common(p_crit)
    p_crit.set_defaults(handler=cmd_criteria)

    p_pen = sub.add_parser("pencil", help="stability study + eigenfunction dump")
    add_common(p_pen)
    p_pen.add_argument("--drift-tol", type=float, default=None)
    p_pen.set_defaults(handler=cmd_pencil)

    p_tr = sub.add_parser("traces", help="trace sweeps of operator words")
    add_common(p_tr)
    p_tr.add_argument("--words", required=True,
                      help="comma-separated words, e.g. BA,PAA,AA")
    p_tr.set_defaults(handler=cmd_traces)

    p_sc = sub.add_parser("scaling", help="coupling-scaling identity check")
    add_common(p_sc)
    p_sc.add_argument("--gamma", type=float, required=True)
    p_sc.add_argument("--ell-exp", type=int, default=1)
    p_sc.add_argument("--mode", choices=("isospectral", "fixed_basis"),
                      default="isospectral")
    p_sc.set_defaults(handler=cmd_scaling)

    p_sch = sub.add_parser("schatten", help="Schatten-class membership table")
    add_common(p_sch, needs_problem=False)
    p_sch.add_argument("--n", type=int, required=True)
    p_sch.add_argument("--m", type=int, required=True)
    p_sch.add_argument("--variant", default="A", choices=SCHATTEN_VARIANTS)
    p_sch.add_argument("--ell", type=int, default=None,
                       help="weight exponent for A_w / B_w")
    p_sch.set_defaults(handler=cmd_schatten)

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    add_common(p_acc, needs_problem=False)
    p_acc.add_argument("--config", metavar="TOML",
                       help="TOML configuration (validated, not used)")
    p_acc.add_argument("--quick", action="store_true",
                       help="halved sizes, looser tolerance tier")
    p_acc.add_argument("--slow", action="store_true",
                       help="also run the non-gating n=3 variant")
    p_acc.set_defaults(handler=cmd_accept)

    return parser


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"malformed TOML in {path}: {exc}") from exc


def resolve_problem(args, config: dict) -> Problem:
    if getattr(args, "preset", None):
        prob = preset(args.preset)
    elif "problem" in config:
        if not isinstance(config["problem"], dict):
            raise InputError("[problem] must be a table")
        prob = problem_from_config(config["problem"])
    else:
        raise InputError("no problem given: use --preset or a [problem] table")
    alpha = getattr(args, "alpha", None)
    if alpha is None:
        alpha = config.get("run", {}).get("alpha")
    if alpha is not None:
        if not float(alpha) > 0:
            raise InputError("alpha override must be positive")
        prob = Problem(
            poly=prob.poly,
            weighted_ell=prob.weighted_ell,
            alpha_override=float(alpha),
            label=prob.label,
        )
    return prob


def resolve_sizes(args, config: dict, prob: Problem) -> tuple[int, ...]:
    text = getattr(args, "sizes", None)
    if text:
        try:
            sizes = tuple(int(tok) for tok in text.split(","))
        except ValueError as exc:
            raise InputError(f"bad --sizes value {text!r}") from exc
    elif "sizes" in config.get("run", {}):
        raw = config["run"]["sizes"]
        if not isinstance(raw, list) or not raw:
            raise InputError("[run].sizes must be a nonempty list")
        sizes = tuple(int(s) for s in raw)
    else:
        sizes = prob.default_sizes()
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or len(sizes) < 2:
        raise InputError("sizes must be at least two strictly increasing values")
    return sizes


def resolve_residual_tol(args, config: dict, prob: Problem) -> float:
    tol = getattr(args, "residual_tol", None)
    if tol is None:
        tol = config.get("run", {}).get("residual_tol")
    if tol is None:
        tol = 1e-6 if prob.n == 1 else 1e-4
    tol = float(tol)
    if not tol > 0:
        raise InputError("residual tolerance must be positive")
    return tol


def emit_json(payload: dict, path: Optional[str]) -> None:
    payload = dict(payload)
    payload["generated_at"] = datetime.datetime.now(
        datetime.timezone.utc
    ).isoformat(timespec="seconds")
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _sanitize(value):
    """JSON cannot carry inf/nan; replace them by None."""
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_criteria(args) -> tuple[int, dict]:
    config = load_config(args.config)
    prob = resolve_problem(args, config)
    sizes = resolve_sizes(args, config, prob)
    kinds = []
    if prob.n == 1:
        kinds.append("rank2")
    if prob.n == 2:
        kinds.append("rank3")
    kinds.append("rank4")
    reports = [traces_mod.criterion_report(prob, k, sizes) for k in kinds]
    payload = {
        "command": "criteria",
        "problem": prob.describe(),
        "sizes": list(sizes),
        "criteria": [_sanitize(r.to_json_dict()) for r in reports],
    }
    any_satisfied = any(r.verdict == "satisfied" for r in reports)
    return (EXIT_OK if any_satisfied else EXIT_INCONCLUSIVE), payload


def cmd_pencil(args) -> tuple[int, dict]:
    config = load_config(args.config)
    prob = resolve_problem(args, config)
    sizes = resolve_sizes(args, config, prob)
    residual_tol = resolve_residual_tol(args, config, prob)
    drift_tol = args.drift_tol or config.get("run", {}).get("drift_tol") or 1e-4
    study = pencil_mod.stability_study(
        prob, sizes, residual_tol=residual_tol, drift_tol=float(drift_tol)
    )
    payload = {
        "command": "pencil",
        "residual_tol": residual_tol,
        "drift_tol": float(drift_tol),
        "study": _sanitize(study.to_json_dict()),
    }
    if study.certified:
        payload["eigenfunction"] = _sanitize(
            _flagship_dump(prob, study, sizes[-1], args.csv_dir)
        )
    if args.csv_dir:
        _write_eigenvalue_csv(study, Path(args.csv_dir))
    return (EXIT_OK if study.certified else EXIT_INCONCLUSIVE), payload


def _flagship_dump(prob, study, top_size, csv_dir) -> dict:
    flagship = study.certified[0]
    top = max(
        (
            p
            for p in study.validated[top_size]
            if abs(p.lam - flagship.lam) < 1e-9 * (1 + abs(flagship.lam))
        ),
        key=lambda p: -abs(p.mu),
        default=None,
    )
    if top is None:
        return {}
    r = realize(prob, top_size)
    grid = None
    if prob.n == 1:
        ax = r.basis.axes[0]
        extent = 1.5 * np.sqrt(2.0 * ax.size) / ax.alpha
        grid = np.linspace(-extent, extent, 801)[:, None]
    rec = pencil_mod.recover_physical_eigenfunction(top, r.L_fact, r.P, grid=grid)
    out = {
        "lambda_re": float(rec.lam.real),
        "lambda_im": float(rec.lam.imag),
        "direct_residual": rec.direct_residual,
        "tail_mass": rec.tail_mass,
        "size": top_size,
    }
    if csv_dir and rec.grid is not None:
        path = Path(csv_dir)
        path.mkdir(parents=True, exist_ok=True)
        fname = path / "eigenfunction.csv"
        with open(fname, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "re_f", "im_f"])
            for t, v in zip(rec.grid.ravel(), rec.values):
                writer.writerow([f"{t:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
        out["grid_csv"] = str(fname)
    return out


def _write_eigenvalue_csv(study, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    fname = directory / "eigenvalues.csv"
    with open(fname, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda_re", "lambda_im", "residual", "size", "certified"])
        certified_keys = {
            (round(c.lam.real, 12), round(c.lam.imag, 12)) for c in study.certified
        }
        for size in study.sizes:
            for pair in study.validated[size]:
                is_cert = (
                    size == study.sizes[-1]
                    and (round(pair.lam.real, 12), round(pair.lam.imag, 12))
                    in certified_keys
                )
                writer.writerow(
                    [
                        f"{pair.lam.real:.12g}",
                        f"{pair.lam.imag:.12g}",
                        f"{pair.residual:.3e}",
                        size,
                        int(is_cert),
                    ]
                )


def cmd_traces(args) -> tuple[int, dict]:
    config = load_config(args.config)
    prob = resolve_problem(args, config)
    sizes = resolve_sizes(args, config, prob)
    words = [w.strip() for w in args.words.split(",") if w.strip()]
    if not words:
        raise InputError("no trace words given")
    reports = []
    for text in words:
        word = traces_mod.TraceWord.parse(text)
        values = [traces_mod.trace_word(word, prob, s) for s in sizes]
        rep = traces_mod.extrapolate(sizes, values, word=text)
        rep.verdict = "converged" if rep.fit_ok else "no-fit"
        reports.append(rep.to_json_dict())
    payload = {
        "command": "traces",
        "problem": prob.describe(),
        "sizes": list(sizes),
        "reports": _sanitize(reports),
    }
    return EXIT_OK, payload


def cmd_scaling(args) -> tuple[int, dict]:
    config = load_config(args.config)
    prob = resolve_problem(args, config)
    sizes = resolve_sizes(args, config, prob)
    if args.ell_exp < 1:
        raise InputError("--ell-exp must be >= 1")
    lhs, rhs, rel = traces_mod.scaling_identity_check(
        prob, args.ell_exp, args.gamma, args.mode, sizes[-1]
    )
    payload = {
        "command": "scaling",
        "problem": prob.describe(),
        "mode": args.mode,
        "gamma": args.gamma,
        "ell_exp": args.ell_exp,
        "size": sizes[-1],
        "lhs": lhs,
        "rhs": rhs,
        "rel_error": rel,
    }
    return EXIT_OK, payload


def cmd_schatten(args) -> tuple[int, dict]:
    if args.variant in ("A_w", "B_w") and args.ell is None:
        raise InputError(f"variant {args.variant} needs --ell")
    spec = operator_symbol(args.variant, args.n, args.m, ell=args.ell)
    rows = []
    for p in (1, 2, 3, 4):
        rows.append(
            {
                "M": float(spec.M),
                "k": float(spec.k),
                "l": float(spec.l),
                "n": spec.n,
                "p": p,
                "member": schatten_member(spec, p),
            }
        )
    p_min = min_schatten_index(spec)
    payload = {
        "command": "schatten",
        "variant": args.variant,
        "n": args.n,
        "m": args.m,
        "ell": args.ell,
        "p_min": p_min if p_min is not None else "none",
        "table": rows,
    }
    return EXIT_OK, payload


def cmd_accept(args) -> tuple[int, dict]:
    load_config(args.config)  # validate when given
    results = acceptance.run_acceptance(quick=args.quick, slow=args.slow)
    payload = {
        "command": "accept",
        "quick": args.quick,
        "slow": args.slow,
        "results": [
            {
                "index": r.index,
                "name": r.name,
                "passed": r.passed,
                "gating": r.gating,
                "detail": r.detail,
                "elapsed_s": round(r.elapsed, 2),
            }
            for r in results
        ],
    }
    ok = acceptance.all_gating_passed(results)
    return (EXIT_OK if ok else EXIT_INCONCLUSIVE), payload


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
