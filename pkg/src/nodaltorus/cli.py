"""Command-line entry point: ``nodaltorus <command> ...``.

Exit codes: 0 success, 1 internal invariant violation or failed check,
2 invalid input, 3 (``compare`` only) tori not distinguished below the cutoff.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import display_linear_form, format_linear_form, format_rational, lf_eval, parse_rational
from .oracle import nodal_count_without_plus_one, validate_formula
from .spectral import IsospectralityError, NodalSequence, build_spectrum, compare_sequences, nodal_count
from .theorem import TheoremCheckError, build_E, check_isometric_degenerate, compare_E, verify_theorem
from .torus import ParamTuple

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_NOT_DISTINGUISHED = 0, 1, 2, 3

MUTATIONS = {"drop-plus-one": nodal_count_without_plus_one}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    sign: Optional[str] = None
    params: Optional[ParamTuple] = None
    cutoff: Optional[Fraction] = None
    max_m: Optional[int] = None
    min_lines: Optional[int] = None
    m: Optional[int] = None
    fmt: str = "json"
    output: Optional[str] = None
    seed: int = 0
    approx: bool = False
    inject_bug: Optional[str] = None


def _params(text: str) -> ParamTuple:
    try:
        return ParamTuple.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid --params {text!r}: {exc}") from None


def _cutoff(text: str) -> Fraction:
    try:
        value = parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid --cutoff {text!r}: {exc}") from None
    if value <= 0:
        raise UsageError("--cutoff must be positive")
    return value


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {"command": ns.command, "fmt": getattr(ns, "format", "json"), "output": getattr(ns, "output", None)}
    if getattr(ns, "params", None) is not None:
        kw["params"] = _params(ns.params)
    if getattr(ns, "cutoff", None) is not None:
        kw["cutoff"] = _cutoff(ns.cutoff)
    for name in ("sign", "max_m", "min_lines", "m", "seed", "approx", "inject_bug"):
        if getattr(ns, name, None) is not None:
            kw[name] = getattr(ns, name)
    if kw.get("max_m") is not None and kw["max_m"] < 1:
        raise UsageError("--max-m must be positive")
    if kw.get("m") is not None and kw["m"] < 1:
        raise UsageError("--m must be positive")
    return RunConfig(**kw)


# -- rendering ---------------------------------------------------------------


def _pair_summary(pairs) -> str:
    from collections import Counter

    return ", ".join(f"{im}/{re} x{k}" for (im, re), k in sorted(Counter(pairs).items()))


def render_spectrum(seq: NodalSequence, fmt: str, approx: bool) -> str:
    if fmt == "json":
        data = seq.to_dict()
        if approx:
            for line, raw in zip(data["lines"], seq.lines):
                line["eigenvalue_approx"] = f"{float(raw.eigenvalue):.12g}"
        return json.dumps(data, indent=2) + "\n"
    if fmt == "csv":
        return seq.to_csv(approx)
    out = [f"T{seq.sign}({seq.params})  eigenvalues / 4pi^2 up to {format_rational(seq.cutoff)}"]
    out.append(f"{'#':>4}  {'eigenvalue':>12}  {'deg':>4}  nodal counts (im/re x multiplicity)")
    for i, line in enumerate(seq.lines, start=1):
        value = format_rational(line.eigenvalue)
        if approx:
            value += f" ~{float(line.eigenvalue):.6g}"
        out.append(f"{i:>4}  {value:>12}  {line.degeneracy:>4}  {_pair_summary(line.nodal_pairs)}")
    return "\n".join(out) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> int:
    seq = build_spectrum(cfg.sign, cfg.params, cfg.cutoff)
    for line in seq.lines:
        line.check()
    _emit(cfg, render_spectrum(seq, cfg.fmt, cfg.approx))
    return EXIT_OK


def m4_forms_at(p: ParamTuple, value: Fraction) -> list[str]:
    """Forms of the m = 4 symmetric difference that evaluate to ``value`` at ``p``."""
    cmp4 = compare_E(4)
    return [format_linear_form(f) for f in cmp4.only_plus + cmp4.only_minus if lf_eval(f, tuple(p)) == value]


def cmd_compare(cfg: RunConfig) -> int:
    plus = build_spectrum("+", cfg.params, cfg.cutoff)
    minus = build_spectrum("-", cfg.params, cfg.cutoff)
    diff = compare_sequences(plus, minus)
    report = {
        "params": cfg.params.to_strings(),
        "cutoff": format_rational(cfg.cutoff),
        "lines_compared": len(plus.lines),
        "distinguished": diff is not None,
        "difference": diff.to_dict() if diff else None,
    }
    if diff:
        report["difference"]["m4_forms_at_eigenvalue"] = m4_forms_at(cfg.params, diff.eigenvalue)
    if cfg.fmt == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        if diff:
            counts = diff.pair_counts()
            text = (
                f"distinguished at line {diff.index}, eigenvalue 4pi^2 * {format_rational(diff.eigenvalue)}\n"
                f"  T+ nodal counts: {counts['plus']}\n  T- nodal counts: {counts['minus']}\n"
            )
        else:
            text = f"none below cutoff {format_rational(cfg.cutoff)} ({len(plus.lines)} eigenvalues compared)\n"
    _emit(cfg, text)
    return EXIT_OK if diff else EXIT_NOT_DISTINGUISHED


def cmd_verify_theorem(cfg: RunConfig) -> int:
    if cfg.max_m is None or cfg.max_m < 4:
        raise UsageError("--max-m must be at least 4")
    report = verify_theorem(cfg.max_m, seed=cfg.seed)
    if cfg.fmt == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        lines = [f"verify-theorem max_m={cfg.max_m}: {report.verdict}"]
        for c in report.comparisons:
            tag = "" if c.m <= 4 else "  (exploratory)"
            lines.append(f"  m={c.m}: {'equal' if c.equal else f'{len(c.only_plus)}+{len(c.only_minus)} private forms'}{tag}")
        lines.append(f"  unique max {display_linear_form(report.certificate.top)}: scope {report.certificate.scope}")
        lines.extend(f"  note: {n}" for n in report.notes)
        lines.extend(f"  FAILURE: {f}" for f in report.failures)
        text = "\n".join(lines) + "\n"
    _emit(cfg, text)
    return EXIT_OK if report.passed else EXIT_INTERNAL


def cmd_validate_nodal(cfg: RunConfig) -> int:
    formula = nodal_count
    if cfg.inject_bug:
        formula = MUTATIONS[cfg.inject_bug]
    result = validate_formula(cfg.max_m, formula=formula)
    if cfg.fmt == "csv":
        text = result.to_csv()
    elif cfg.fmt == "json":
        text = json.dumps(result.to_dict(), indent=2) + "\n"
    else:
        text = f"validate-nodal max_m={cfg.max_m}: {len(result.rows)} checks, {len(result.mismatches)} mismatches\n"
        text += "".join(
            f"  MISMATCH q={r.q} {r.part}: formula={r.formula} slab={r.slab} floodfill={r.floodfill}\n"
            for r in result.mismatches
        )
    _emit(cfg, text)
    return EXIT_OK if result.passed else EXIT_INTERNAL


def cmd_e_sets(cfg: RunConfig) -> int:
    m = cfg.m
    signs = [cfg.sign] if cfg.sign else ["+", "-"]
    sets = {s: build_E(s, m) for s in signs}
    if cfg.fmt == "json":
        data = {"m": m, "sets": {s: [format_linear_form(f) for f in e.forms] for s, e in sets.items()}}
        if len(signs) == 2:
            data["comparison"] = compare_E(m).to_dict()
        text = json.dumps(data, indent=2) + "\n"
    elif cfg.fmt == "csv":
        from .spectral import write_csv

        rows = [
            {"m": m, "sign": s, "form": format_linear_form(f), "display": display_linear_form(f, prefactor=True)}
            for s, e in sets.items()
            for f in e.forms
        ]
        text = write_csv(rows, ["m", "sign", "form", "display"])
    else:
        parts = []
        for s, e in sets.items():
            parts.append(f"E_{m}^{s}: {len(e)} forms")
            parts.extend(f"  {display_linear_form(f, prefactor=True)}" for f in e.forms)
        text = "\n".join(parts) + "\n"
    _emit(cfg, text)
    return EXIT_OK


def cmd_isometric_check(cfg: RunConfig) -> int:
    if cfg.params.all_distinct():
        raise UsageError(f"parameters {cfg.params} are pairwise distinct; isometric-check needs two equal entries")
    report = check_isometric_degenerate(cfg.params, cfg.cutoff, cfg.min_lines or 20)
    if cfg.fmt == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        verdict = "VIOLATION" if report.violation else "no nodal difference"
        text = f"isometric-check {cfg.params}: {verdict} in {report.lines} eigenvalues up to {format_rational(report.cutoff)}\n"
    _emit(cfg, text)
    return EXIT_INTERNAL if report.violation else EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "verify-theorem": cmd_verify_theorem,
    "validate-nodal": cmd_validate_nodal,
    "e-sets": cmd_e_sets,
    "isometric-check": cmd_isometric_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nodaltorus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv", "pretty")):
        p.add_argument("--format", choices=formats, default="json")
        p.add_argument("--output", help="write to this file instead of stdout")

    p = sub.add_parser("spectrum", help="nodal sequence of one torus")
    p.add_argument("--sign", choices=["+", "-"], required=True)
    p.add_argument("--params", required=True, help="a,b,c,d as rationals, e.g. 1,2,3,4 or 1/2,1,3/2,2")
    p.add_argument("--cutoff", required=True, help="largest eigenvalue / 4pi^2, e.g. 40/3")
    p.add_argument("--approx", action="store_true", help="add a display-only decimal column")
    common(p)

    p = sub.add_parser("compare", help="first eigenvalue where T+ and T- nodal data differ")
    p.add_argument("--params", required=True)
    p.add_argument("--cutoff", required=True)
    common(p, ("json", "pretty"))

    p = sub.add_parser("verify-theorem", help="symbolic E_m comparison, parity and unique-max certificate")
    p.add_argument("--max-m", type=int, default=4)
    p.add_argument("--seed", type=int, default=0, help="seed for random evaluation points")
    common(p, ("json", "pretty"))

    p = sub.add_parser("validate-nodal", help="check the nodal-count formula against two counters")
    p.add_argument("--max-m", type=int, default=3)
    p.add_argument("--inject-bug", choices=sorted(MUTATIONS), help="use a deliberately wrong formula")
    common(p)

    p = sub.add_parser("e-sets", help="dump E_m^+ and E_m^-")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sign", choices=["+", "-"])
    common(p)

    p = sub.add_parser("isometric-check", help="confirm no nodal difference when two parameters coincide")
    p.add_argument("--params", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--cutoff")
    group.add_argument("--min-lines", type=int, default=None, help="cover at least this many eigenvalues (default 20)")
    common(p, ("json", "pretty"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"nodaltorus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IsospectralityError, TheoremCheckError, AssertionError) as exc:
        print(f"nodaltorus: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
