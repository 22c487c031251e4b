"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 degenerate (zero) state,
4 unrealizable measurement branch, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .fixtures import TABLES, check_table, format_pattern
from .indicators import (
    EPS_ZERO,
    AnalysisReport,
    full_profile,
    minor_count,
    total_distinct_minors,
)
from .ketparse import KetSyntaxError, format_state, iter_expressions, parse_scalar, parse_state
from .separability import SeparabilityReport, classify, factorize
from .state import (
    DegenerateStateError,
    PureState,
    StateError,
    collapse,
    loads_state,
    normalize,
    project_site,
    random_state,
    save_state,
    state_to_dict,
)

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_UNREALIZABLE, EXIT_IO = 0, 2, 3, 4, 5

PROBABILITY_FLOOR = 1e-12

_SQ = 1 / math.sqrt(2)
DIRECTIONS = {
    "x-plus": [_SQ, _SQ],
    "x-minus": [_SQ, -_SQ],
    "y-plus": [_SQ, 1j * _SQ],
    "y-minus": [_SQ, -1j * _SQ],
    "z-plus": [1.0, 0.0],
    "z-minus": [0.0, 1.0],
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- formatting ----------------------------------------------------------------


def fmt_real(x: float) -> str:
    return format(float(x), ".12g")


def fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}{z.imag:+.12g}i"


def fmt_fraction(f: Fraction) -> str:
    return str(f)


def _bool(b: bool) -> str:
    return "true" if b else "false"


# -- state input ---------------------------------------------------------------


def _read_source(args) -> tuple[PureState, str]:
    if args.expr is not None:
        return parse_state(args.expr), args.expr
    if args.file is None:
        raise CliError("no state given: pass a ket expression or --file", EXIT_USAGE)
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {args.file}: {exc.strerror or exc}", EXIT_IO) from None
    if text.lstrip().startswith("{"):
        return loads_state(text), args.file
    exprs = list(iter_expressions(text))
    if not exprs:
        raise CliError(f"{args.file} contains no expression", EXIT_USAGE)
    if len(exprs) > 1:
        raise CliError(f"{args.file} holds {len(exprs)} expressions; one state per invocation", EXIT_USAGE)
    lineno, expr = exprs[0]
    try:
        return parse_state(expr), expr
    except KetSyntaxError as exc:
        raise CliError(f"{args.file}:{lineno}: parse error at offset {exc.position}: {exc.message}",
                       EXIT_USAGE) from None


def load_input(args) -> tuple[PureState, str]:
    state, label = _read_source(args)
    return normalize(state), label


def _tol(args) -> float:
    return EPS_ZERO if args.tolerance is None else args.tolerance


# -- report rendering ----------------------------------------------------------


def render_profile(report: AnalysisReport, mode: str) -> list[str]:
    lines = []
    for lv in report.levels:
        lines.append(f"level {lv.level}: {lv.count} minors over {len(lv.branches)} branch(es)")
        if mode == "binary":
            lines.append(f"  pattern {format_pattern(lv.binary_pattern)}")
            lines.append(f"  C_{lv.level} = {fmt_fraction(lv.coarse_fraction)}")
        else:
            lines.append("  |det| [" + ", ".join(fmt_real(x) for x in lv.magnitudes) + "]")
            lines.append(f"  C_{lv.level} = {fmt_real(lv.coarse_raw)}")
        if lv.level < len(report.dims):
            probs = ", ".join(fmt_real(p) for p in lv.branch_probabilities)
            lines.append(f"  branch probabilities [{probs}]")
    names = "; ".join(f"C_{lv.level}" for lv in report.levels)
    if mode == "binary":
        vals = "; ".join(fmt_fraction(lv.coarse_fraction) for lv in report.levels)
    else:
        vals = "; ".join(fmt_real(v) for v in report.coarse_raw)
    lines.append(f"coarse [{names}] = [{vals}]")
    if report.concurrence is not None:
        lines.append(f"concurrence = {fmt_real(report.concurrence)}")
    if report.cayley is not None:
        lines.append(f"cayley hyperdeterminant = {fmt_complex(report.cayley)}")
        lines.append(f"tangle = {fmt_real(report.tangle)}")
    return lines


def render_separability(sep: SeparabilityReport) -> list[str]:
    fac = sep.factorization
    verdict = "completely separable" if sep.completely_separable else "not completely separable"
    lines = [
        f"separability: {verdict}",
        "  per site [" + ", ".join(_bool(b) for b in sep.per_site_separable) + "]",
    ]
    for site, z in zip(fac.factor_sites, fac.factors):
        lines.append(f"  factor site {site}: [" + ", ".join(fmt_complex(c) for c in z) + "]")
    if fac.core is not None:
        lines.append(f"  core on sites 1..{fac.core_sites}: {format_state(fac.core)}")
    if sep.marginal:
        lines.append("  warning: a rank decision lies within a factor 10 of the tolerance")
    return lines


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print("\n".join(lines))


# -- subcommands -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    state, label = load_input(args)
    if state.n_sites < 2:
        raise CliError("analysis needs at least two sites", EXIT_USAGE)
    tol = _tol(args)
    report = full_profile(state, tol)
    sep = classify(state, tol)
    doc = {"input": label, "mode": args.mode, "analysis": report.to_dict(), "separability": sep.to_dict()}
    lines = [f"state {label}", f"dims {list(state.dims)}"]
    lines += render_profile(report, args.mode)
    lines += render_separability(sep)
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_factor(args) -> int:
    state, label = load_input(args)
    fac = factorize(state, _tol(args))
    doc = {"input": label, "factorization": fac.to_dict(), "residual": fac.residual(state)}
    lines = [f"state {label}", f"dims {list(state.dims)}"]
    lines.append("completely separable" if fac.complete else f"entangled core on sites 1..{fac.core_sites}")
    for site, z in zip(fac.factor_sites, fac.factors):
        lines.append(f"factor site {site}: [" + ", ".join(fmt_complex(c) for c in z) + "]")
    if fac.core is not None:
        lines.append(f"core: {format_state(fac.core)}")
    lines.append(f"round-trip residual {fmt_real(doc['residual'])}")
    _emit(args, doc, lines)
    return EXIT_OK


def parse_direction(text: str, dim: int) -> np.ndarray:
    key = text.strip().lower()
    if key in DIRECTIONS:
        vec = np.array(DIRECTIONS[key], dtype=np.complex128)
    else:
        try:
            vec = np.array([parse_scalar(part) for part in text.split(",")], dtype=np.complex128)
        except KetSyntaxError as exc:
            raise CliError(f"bad direction {text!r}: {exc}", EXIT_USAGE) from None
    if vec.size != dim:
        raise CliError(f"direction has {vec.size} components, site dimension is {dim}", EXIT_USAGE)
    return vec


def _parse_chain(text: str) -> list[tuple[int, int]]:
    steps = []
    for item in text.split(","):
        try:
            site, outcome = item.split(":")
            steps.append((int(site), int(outcome)))
        except ValueError:
            raise CliError(f"bad chain step {item!r}; use SITE:OUTCOME", EXIT_USAGE) from None
    return steps


def cmd_measure(args) -> int:
    state, label = load_input(args)
    tol = _tol(args)
    labels = list(range(1, state.n_sites + 1))  # original site numbers still present

    if args.chain:
        if args.site is not None or args.outcome is not None or args.direction is not None:
            raise CliError("--chain excludes --site/--outcome/--direction", EXIT_USAGE)
        steps = [(s, o, None) for s, o in _parse_chain(args.chain)]
    else:
        if args.site is None or (args.outcome is None) == (args.direction is None):
            raise CliError("give --site with exactly one of --outcome or --direction", EXIT_USAGE)
        steps = [(args.site, args.outcome, args.direction)]

    raw = state
    step_docs = []
    for site, outcome, direction in steps:
        if site not in labels:
            raise CliError(f"site {site} is not present (remaining sites {labels})", EXIT_USAGE)
        if raw.n_sites < 2:
            raise CliError("cannot measure the last remaining site", EXIT_USAGE)
        pos = labels.index(site) + 1
        try:
            if direction is not None:
                vec = parse_direction(direction, raw.dims[pos - 1])
                raw = project_site(raw, pos, vec)
                step_docs.append({"site": site, "direction": [[v.real, v.imag] for v in vec]})
            else:
                raw = collapse(raw, pos, outcome)
                step_docs.append({"site": site, "outcome": outcome})
        except StateError as exc:
            raise CliError(str(exc), EXIT_USAGE) from None
        labels.remove(site)

    prob = float(np.vdot(raw.amps, raw.amps).real)
    if prob < PROBABILITY_FLOOR:
        raise CliError(f"branch is unrealizable (probability {prob:.3g})", EXIT_UNREALIZABLE)
    remainder = normalize(raw)

    doc = {
        "input": label,
        "steps": step_docs,
        "remaining_sites": labels,
        "probability": prob,
        "collapsed": state_to_dict(raw),
        "normalized": state_to_dict(remainder),
    }
    lines = [
        f"state {label}",
        "steps " + ", ".join(
            f"site {d['site']} " + (f"outcome {d['outcome']}" if "outcome" in d else "direction")
            for d in step_docs
        ),
        f"probability {fmt_real(prob)}",
        f"remaining sites {labels}",
        f"collapsed (raw): {format_state(raw)}",
        f"normalized: {format_state(remainder)}",
    ]
    if remainder.n_sites >= 2:
        report = full_profile(remainder, tol)
        sep = classify(remainder, tol)
        doc["analysis"] = report.to_dict()
        doc["separability"] = sep.to_dict()
        lines += render_profile(report, args.mode)
        lines += render_separability(sep)
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_tables(args) -> int:
    table = TABLES[args.which]
    checks = check_table(table, _tol(args))
    rows_doc, lines = [], [f"{table.name}: {table.caption}"]
    for chk in checks:
        row = chk.row
        levels = row.levels
        cells = []
        for m in levels:
            mark = "ok" if chk.pattern_ok[m] else "MISMATCH"
            cells.append(f"L{m} {format_pattern(row.patterns[m])} {mark}")
        got = "; ".join(fmt_fraction(c) for c in chk.coarse)
        want = "; ".join(fmt_fraction(c) for c in row.derived_coarse)
        coarse_mark = "ok" if all(chk.coarse_ok) else "MISMATCH"
        lines.append(f"{row.label}: " + " | ".join(cells) + f" | coarse [{got}] vs [{want}] {coarse_mark}")
        if row.discrepancy:
            printed = "; ".join(fmt_fraction(c) for c in row.printed_coarse)
            lines.append(f"  flagged: printed coarse [{printed}], formula gives [{got}]")
        rows_doc.append({
            "label": row.label,
            "expression": row.expression,
            "patterns": {str(m): chk.patterns[m] for m in levels},
            "pattern_ok": {str(m): chk.pattern_ok[m] for m in levels},
            "coarse": [str(c) for c in chk.coarse],
            "expected_coarse": [str(c) for c in row.derived_coarse],
            "printed_coarse": [str(c) for c in row.expected_coarse],
            "coarse_ok": list(chk.coarse_ok),
            "discrepancy": row.discrepancy,
            "note": row.note,
        })
    n_ok = sum(c.ok for c in checks)
    lines.append(f"{n_ok}/{len(checks)} rows match")
    _emit(args, {"table": table.name, "rows": rows_doc, "matched": n_ok, "total": len(checks)}, lines)
    return EXIT_OK if n_ok == len(checks) else 1


def _parse_dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("every dimension must be >= 2")
    return dims


def cmd_count(args) -> int:
    if (args.qubits is None) == (args.dims is None):
        raise CliError("give exactly one of --qubits or --dims", EXIT_USAGE)
    if args.qubits is not None:
        if args.qubits < 2:
            raise CliError("--qubits must be at least 2", EXIT_USAGE)
        dims = [2] * args.qubits
    else:
        dims = args.dims
    n = len(dims)
    if n < 2:
        raise CliError("need at least two sites", EXIT_USAGE)
    levels = [args.m] if args.m is not None else list(range(n, 1, -1))
    if any(not 2 <= m <= n for m in levels):
        raise CliError(f"--m must lie in 2..{n}", EXIT_USAGE)
    counts = {m: minor_count(dims, m) for m in levels}
    # one branch per level: the minors that must vanish for complete separability
    distinct = sum(
        math.comb(dims[m - 1], 2) * math.comb(math.prod(dims[: m - 1]), 2) for m in range(2, n + 1)
    )
    doc = {"dims": dims, "l": {str(m): c for m, c in counts.items()}, "total_distinct": distinct}
    lines = [f"l_{m} = {c}" for m, c in counts.items()]
    lines.append(f"total distinct = {distinct}")
    if args.qubits is not None:
        gauss = total_distinct_minors(n)
        doc["gaussian_binomial"] = gauss
        lines.append(f"gaussian binomial [{n},2]_2 = {gauss}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_random(args) -> int:
    if args.count < 1:
        raise CliError("--count must be at least 1", EXIT_USAGE)
    seeds = [args.seed] if args.count == 1 else [args.seed + k for k in range(args.count)]
    states = [(s, random_state(args.dims, s)) for s in seeds]
    if args.out is None:
        for _, st in states:
            print(json.dumps(state_to_dict(st)))
        return EXIT_OK
    out = Path(args.out)
    written = []
    try:
        if args.count == 1 and out.suffix == ".json":
            out.parent.mkdir(parents=True, exist_ok=True)
            save_state(states[0][1], out)
            written.append(str(out))
        else:
            out.mkdir(parents=True, exist_ok=True)
            for s, st in states:
                path = out / f"state_seed{s}.json"
                save_state(st, path)
                written.append(str(path))
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror or exc}", EXIT_IO) from None
    if args.format == "json":
        print(json.dumps({"written": written, "seeds": seeds}, indent=2))
    else:
        print("\n".join(written))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError("tolerance must be a positive finite number")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--mode", choices=("binary", "raw"), default="binary")
    common.add_argument("--tolerance", type=_positive_float, default=None,
                        help=f"zero threshold for minors (default {EPS_ZERO:g})")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("expr", nargs="?", help='ket expression, e.g. "(1/sqrt(2))(|00>+|11>)"')
    source.add_argument("--file", help="state file (JSON) or expression file")

    p = _Parser(prog="entdet", description="Determinantal entanglement indicators for pure states.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common, source], help="full minor profile and separability")
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("factor", parents=[common, source], help="peel off single-site factors")
    f.set_defaults(func=cmd_factor)

    m = sub.add_parser("measure", parents=[common, source], help="collapse or project sites")
    m.add_argument("--site", type=int)
    m.add_argument("--outcome", type=int)
    m.add_argument("--direction", help='"x-plus", "x-minus", ... or components "1/sqrt(2),1/sqrt(2)"')
    m.add_argument("--chain", help='sequence of SITE:OUTCOME steps, e.g. "1:0,3:1" (original site numbers)')
    m.set_defaults(func=cmd_measure)

    t = sub.add_parser("tables", parents=[common], help="recompute the published classification tables")
    t.add_argument("which", type=int, choices=sorted(TABLES))
    t.set_defaults(func=cmd_tables)

    c = sub.add_parser("count", parents=[common], help="minor counts per level")
    c.add_argument("--qubits", type=int)
    c.add_argument("--dims", type=_parse_dims)
    c.add_argument("--m", type=int)
    c.set_defaults(func=cmd_count)

    r = sub.add_parser("random", parents=[common], help="write seeded Haar-random states")
    r.add_argument("--dims", type=_parse_dims, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--count", type=int, default=1)
    r.add_argument("--out", help="output .json file (count 1) or directory")
    r.set_defaults(func=cmd_random)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"entdet: {exc}", file=sys.stderr)
        return exc.code
    except KetSyntaxError as exc:
        print(f"entdet: parse error at offset {exc.position}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateStateError as exc:
        print(f"entdet: degenerate state: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except StateError as exc:
        print(f"entdet: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"entdet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
