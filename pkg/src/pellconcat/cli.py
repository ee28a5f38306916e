"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 precision exhaustion, 4 certificate failure,
5 table mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .bounds import absolute_bound
from .contfrac import expand
from .hpreal import PrecisionExhausted, PrecisionPolicy
from .reduction import (
    ContradictionFailed,
    NoPositiveEpsilon,
    derive_gap_bound,
    legendre_phase1_eq1,
    phase1_M,
    phase1_eq2,
    phase2,
)
from .search import CSV_COLUMNS, CertificateFailure, run_pipeline, verify_paper_tables
from .sequences import EquationId

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_CERTIFICATE, EXIT_MISMATCH = 0, 2, 3, 4, 5
BASE_LIMIT = 1 << 16


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    equations: tuple[EquationId, ...]
    bases: tuple[int, ...]
    policy: PrecisionPolicy
    out: str | None
    fmt: str
    jobs: int
    m_max: int
    until_q: int | None
    terms: int | None


def _big_int(text: str) -> int:
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value() or d < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(d)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pellconcat",
                                     description="Pell numbers as concatenations of Pell and Pell-Lucas numbers.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--precision-initial", type=_positive, metavar="BITS")
    common.add_argument("--precision-max", type=_positive, metavar="BITS")
    common.add_argument("--jobs", type=_positive, default=1)

    bases = argparse.ArgumentParser(add_help=False)
    bases.add_argument("--base", type=int)
    bases.add_argument("--base-min", type=int)
    bases.add_argument("--base-max", type=int)

    def equation(p, required=False):
        p.add_argument("--equation", type=int, choices=(1, 2), required=required)

    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("solve", parents=[common, bases], help="full pipeline and solution list")
    equation(p)
    p.add_argument("--m-max", type=_positive, default=100)
    p = sub.add_parser("cf", parents=[common], help="certified continued fraction of log b / log alpha")
    p.add_argument("--base", type=int, required=True)
    stop = p.add_mutually_exclusive_group(required=True)
    stop.add_argument("--until-q", type=_big_int)
    stop.add_argument("--terms", type=_positive)
    p = sub.add_parser("bounds", parents=[common, bases], help="absolute bound on n")
    equation(p)
    p = sub.add_parser("reduce", parents=[common, bases], help="both reduction phases")
    equation(p)
    p.add_argument("--m-max", type=_positive, default=100)
    sub.add_parser("verify", parents=[common], help="recompute the published tables")
    return parser


def _resolve_bases(args) -> tuple[int, ...]:
    base = getattr(args, "base", None)
    lo, hi = getattr(args, "base_min", None), getattr(args, "base_max", None)
    if base is not None and (lo is not None or hi is not None):
        raise UsageError("--base cannot be combined with --base-min/--base-max")
    if base is not None:
        lo = hi = base
    lo = 2 if lo is None else lo
    hi = 10 if hi is None else hi
    if not (2 <= lo <= hi <= BASE_LIMIT):
        raise UsageError(f"base range must satisfy 2 <= min <= max <= {BASE_LIMIT}")
    return tuple(range(lo, hi + 1))


def make_config(args) -> CliConfig:
    try:
        policy = PrecisionPolicy.from_env(initial_bits=args.precision_initial,
                                          max_bits=args.precision_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    eq = getattr(args, "equation", None)
    equations = tuple(EquationId) if eq is None else (EquationId.parse(eq),)
    return CliConfig(args.subcommand, equations, _resolve_bases(args), policy, args.out,
                     args.format, args.jobs, getattr(args, "m_max", 100),
                     getattr(args, "until_q", None), getattr(args, "terms", None))


# -- rendering ---------------------------------------------------------------------

def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _text(obj, indent: str = "") -> str:
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{k}:")
                lines.append(_text(v, indent + "  ").rstrip("\n"))
            else:
                lines.append(f"{indent}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict):
                lines.append(f"{indent}-")
                lines.append(_text(v, indent + "  ").rstrip("\n"))
            else:
                lines.append(f"{indent}- {v}")
    else:
        lines.append(f"{indent}{obj}")
    return "\n".join(x for x in lines if x) + "\n"


def _emit(cfg: CliConfig, payload: dict, csv_header, csv_rows, text: str | None = None) -> None:
    if cfg.fmt == "json":
        data = _json(payload)
    elif cfg.fmt == "csv":
        data = _csv(csv_header, csv_rows)
    else:
        data = text if text is not None else _text(payload)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


# -- commands ----------------------------------------------------------------------

def cmd_solve(cfg: CliConfig) -> int:
    reports = [run_pipeline(eq, b, cfg.policy, cfg.jobs, cfg.m_max)
               for eq in cfg.equations for b in cfg.bases]
    sols = [s for r in reports for s in r.solutions]
    degen = [s for r in reports for s in r.degenerate]
    payload = {"solutions": [s.to_json() for s in sols],
               "degenerate": [s.to_json() for s in degen],
               "reports": [r.to_json() for r in reports]}
    rows = [[s.to_json()[c] for c in CSV_COLUMNS] + [""] for s in sols]
    rows += [[s.to_json()[c] for c in CSV_COLUMNS] + ["degenerate"] for s in degen]
    text_lines = []
    for s in sols + degen:
        mid, tail = ("P", "Q") if s.equation == 1 else ("Q", "P")
        tag = "  [degenerate]" if s.degenerate else ""
        text_lines.append(f"eq{s.equation} b={s.b}: P_{s.n} = {s.lhs} = {s.b}^{s.d}*{mid}_{s.m} + "
                          f"{tail}_{s.k} = {s.term1} + {s.term2}{tag}")
    for r in reports:
        text_lines.append(f"eq{int(r.equation)} b={r.b}: n <= {r.phase2.conclusion}, m <= {cfg.m_max}, "
                          f"{len(r.solutions)} solution(s)" + ("" if r.complete else " [m range incomplete]"))
    _emit(cfg, payload, list(CSV_COLUMNS) + ["flag"], rows, "\n".join(text_lines) + "\n")
    return EXIT_OK


def cmd_cf(cfg: CliConfig) -> int:
    (b,) = cfg.bases
    cf = expand(b, terms=cfg.terms, until_q=cfg.until_q, policy=cfg.policy)
    payload = cf.to_json()
    payload["terms"] = len(cf.partial_quotients)
    payload["certified_precision_bits"] = cf.checked_precision
    rows = [[t, t + 1, a, p, q] for t, (a, (p, q)) in
            enumerate(zip(cf.partial_quotients, cf.convergents))]
    text = "".join(f"t={r[0]} a={r[2]} q={r[4]}\n" for r in rows)
    _emit(cfg, payload, ["t", "ref_index", "a", "p", "q"], [[str(x) for x in r] for r in rows], text)
    return EXIT_OK


def cmd_bounds(cfg: CliConfig) -> int:
    reports = [absolute_bound(eq, b) for eq in cfg.equations for b in cfg.bases]
    payload = {"reports": [r.to_json() for r in reports]}
    rows = []
    for r in reports:
        for s in r.to_json()["stages"]:
            rows.append([int(r.equation), r.b, s["label"], s["upper_bound"],
                         s.get("reference_constant", ""), s.get("within_reference", "")])
        rows.append([int(r.equation), r.b, "n_bound", r.to_json()["n_bound"]["upper_bound"], "", ""])
    _emit(cfg, payload, ["equation", "b", "stage", "upper_bound", "reference", "within_reference"], rows)
    return EXIT_OK


def cmd_reduce(cfg: CliConfig) -> int:
    out = []
    for eq in cfg.equations:
        for b in cfg.bases:
            M1 = phase1_M(eq, b)
            if eq is EquationId.EQ1:
                p1 = legendre_phase1_eq1(b, M1, policy=cfg.policy)
            else:
                p1 = phase1_eq2(b, M1, policy=cfg.policy)
            p1j = p1.to_json()
            p1j["M"] = str(M1)
            m_range = range(1 if eq is EquationId.EQ1 else 0, cfg.m_max + 1)
            rep = phase2(eq, b, m_range=m_range, policy=cfg.policy, jobs=cfg.jobs)
            out.append((eq, b, p1j, derive_gap_bound(eq, b, cfg.m_max), rep))
    payload = {"reports": [{"equation": int(eq), "b": b, "phase1": p1j, "gap_bound": g,
                            "phase2": rep.to_json()} for eq, b, p1j, g, rep in out]}
    # one column per (equation, base), one row per table entry
    cols = [rep.table_column() for *_, rep in out]
    header = ["row"] + [f"eq{int(eq)}_b{b}" for eq, b, *_ in out]
    rows = [[key] + [str(c[key]) for c in cols]
            for key in ("q_index", "m", "n_minus_k", "epsilon_lower_bound", "n_bound")]
    _emit(cfg, payload, header, rows)
    return EXIT_OK


def cmd_verify(cfg: CliConfig) -> int:
    rep = verify_paper_tables(cfg.policy, cfg.jobs)
    rows = [[c.table, c.row, "" if c.b is None else c.b, c.published, c.ours, c.status,
             c.binding, c.known_discrepancy] for c in rep.checks]

    def tag(c):
        return "" if c.binding else " (informational)"

    text = "".join(f"{c.status:9s} {c.table}.{c.row} b={c.b}: published {c.published}, "
                   f"ours {c.ours}{tag(c)}\n" for c in rep.checks)
    _emit(cfg, rep.to_json(),
          ["table", "row", "b", "published", "ours", "status", "binding", "known_discrepancy"],
          rows, text)
    return EXIT_OK if rep.ok else EXIT_MISMATCH


COMMANDS = {"solve": cmd_solve, "cf": cmd_cf, "bounds": cmd_bounds,
            "reduce": cmd_reduce, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if cfg.subcommand == "cf" and len(cfg.bases) != 1:
            raise UsageError("cf takes a single --base")
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (CertificateFailure, ContradictionFailed, NoPositiveEpsilon) as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
