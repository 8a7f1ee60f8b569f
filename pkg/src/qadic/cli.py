"""Command-line front end.

Surface syntax for the algebra: the atoms are `u`, `s`, `i`, integers and
fractions; juxtaposition or `*` multiplies, `+`/`-` add, `^n` raises to an
integer power and `^*` (or a `*` written tightly after `u`/`s`) takes the
adjoint.  `u^-1` is accepted because the shift is unitary; `s^-1` is
rejected.

Exit codes: 0 success/equal, 1 not-equal or tolerance failure, 2 usage or
parse errors, 3 module precondition failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

from . import algebra
from .algebra import Element, RationalComplex
from .bimodule import equivalence_residual
from .errors import ParseError, QadicError
from .grid import (
    BumpSymbol,
    GaussianSymbol,
    TabulatedFourierPair,
    import_csv,
    indicator,
    sample_symbol,
)
from .numbers import DEFAULT_PRECISION, PowerOfTwo, dyadic
from .wold import MonomialIsometry, build_extension_unitary, check_intertwining

# -- expression language -------------------------------------------------------


_ATOM_NAMES = ("u", "s", "i")


def _tokenize(src: str):
    tokens = []  # (kind, value, offset)
    pos = 0
    n = len(src)
    while pos < n:
        ch = src[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch.isdigit():
            start = pos
            while pos < n and src[pos].isdigit():
                pos += 1
            tokens.append(("int", int(src[start:pos]), start))
            continue
        if ch in _ATOM_NAMES:
            tokens.append(("name", ch, pos))
            pos += 1
            continue
        if ch == "^":
            if pos + 1 < n and src[pos + 1] == "*":
                tokens.append(("adj", None, pos))
                pos += 2
                continue
            start = pos
            pos += 1
            sign = 1
            if pos < n and src[pos] == "-":
                sign = -1
                pos += 1
            if pos >= n or not src[pos].isdigit():
                raise ParseError("malformed power", start, {"integer", "'*'"})
            num_start = pos
            while pos < n and src[pos].isdigit():
                pos += 1
            tokens.append(("pow", sign * int(src[num_start:pos]), start))
            continue
        if ch == "*":
            # a star written tightly after u or s is the adjoint
            if tokens and tokens[-1][0] == "name" and tokens[-1][1] in ("u", "s") \
                    and tokens[-1][2] == pos - 1:
                tokens.append(("adj", None, pos))
            else:
                tokens.append(("star", None, pos))
            pos += 1
            continue
        simple = {"+": "plus", "-": "minus", "(": "lparen", ")": "rparen", "/": "slash"}
        if ch in simple:
            tokens.append((simple[ch], None, pos))
            pos += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", pos, set())
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"unexpected {tok[0]}", tok[2], {kind})
        return self.advance()

    def parse(self) -> Element:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError("trailing input", tok[2], {"end of input"})
        return e

    def expr(self) -> Element:
        sign = 1
        if self.peek()[0] in ("plus", "minus"):
            sign = -1 if self.advance()[0] == "minus" else 1
        total = self.term().scale(sign)
        while self.peek()[0] in ("plus", "minus"):
            op = self.advance()[0]
            t = self.term()
            total = total + (t if op == "plus" else -t)
        return total

    _FACTOR_START = ("int", "name", "lparen")

    def term(self) -> Element:
        total = self.factor()
        while True:
            kind = self.peek()[0]
            if kind == "star":
                self.advance()
                total = total * self.factor()
            elif kind in self._FACTOR_START:
                total = total * self.factor()
            else:
                return total

    def factor(self) -> Element:
        tok = self.peek()
        if tok[0] == "int":
            base = self.scalar()
            base_kind = "scalar"
        elif tok[0] == "name":
            self.advance()
            if tok[1] == "u":
                base, base_kind = algebra.u(), "u"
            elif tok[1] == "s":
                base, base_kind = algebra.s(), "s"
            else:
                base, base_kind = Element.scalar(RationalComplex(Fraction(0), Fraction(1))), "scalar"
        elif tok[0] == "lparen":
            self.advance()
            base = self.expr()
            self.expect("rparen")
            base_kind = "group"
        else:
            raise ParseError(f"unexpected {tok[0]}", tok[2],
                             {"integer", "'u'", "'s'", "'i'", "'('"})
        return self.trailers(base, base_kind, tok[2])

    def scalar(self) -> Element:
        num = self.expect("int")[1]
        if self.peek()[0] == "slash":
            self.advance()
            den = self.expect("int")[1]
            if den == 0:
                raise ParseError("division by zero", self.tokens[self.pos - 1][2], set())
            return Element.scalar(RationalComplex(Fraction(num, den)))
        return Element.scalar(RationalComplex(Fraction(num)))

    def trailers(self, base: Element, base_kind: str, offset: int) -> Element:
        while True:
            tok = self.peek()
            if tok[0] == "adj":
                self.advance()
                base = base.adjoint()
            elif tok[0] == "pow":
                self.advance()
                n = tok[1]
                if n >= 0:
                    base = base.power(n)
                elif base_kind == "u" or _is_translation(base):
                    base = base.adjoint().power(-n)
                elif base_kind == "s":
                    raise ParseError("s has no inverse (proper isometry); use s^*",
                                     tok[2], set())
                else:
                    raise ParseError("negative powers need a unitary translation base",
                                     tok[2], set())
            else:
                return base


def _is_translation(e: Element) -> bool:
    if len(e.terms) != 1:
        return False
    (m, c), = e.terms.items()
    return m.dom_level == 0 and m.range_level == 0 and e.exact \
        and c == RationalComplex(Fraction(1))


def parse_expr(src: str) -> Element:
    """Parse surface syntax into a canonical algebra element."""
    return _Parser(src).parse()


# -- run configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    grid_exp: int = 6
    window: int = 16
    tol: float | None = None
    precision: int = field(
        default_factory=lambda: int(os.environ.get("QADIC_DEFAULT_PRECISION",
                                                   DEFAULT_PRECISION)))
    out: str | None = None
    fmt: str = "text"

    def __post_init__(self):
        if not 3 <= self.grid_exp <= 12:
            raise ValueError("grid exponent must lie in [3, 12]")
        if self.window <= 0 or self.window & (self.window - 1):
            raise ValueError("window must be a positive power of two")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.precision <= 0:
            raise ValueError("precision must be positive")
        if self.fmt not in ("text", "json", "csv"):
            raise ValueError(f"unknown format {self.fmt!r}")


def _config_from_args(args) -> RunConfig:
    return RunConfig(grid_exp=args.grid_exp, window=args.window, tol=args.tol,
                     precision=args.precision, out=args.out, fmt=args.format)


# -- case files --------------------------------------------------------------------


def parse_case_dyadic(text: str):
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        num = int(num)
        den = den.strip()
        if den.startswith("2^"):
            return dyadic(num, int(den[2:]))
        d = int(den)
        e = d.bit_length() - 1
        if (1 << e) != d:
            raise ValueError(f"denominator {d} is not a power of two")
        return dyadic(num, e)
    return dyadic(int(text))


def parse_case_pow2(text: str) -> PowerOfTwo:
    text = str(text).strip()
    if text.startswith("2^"):
        return PowerOfTwo(int(text[2:]))
    if text.startswith("1/2^"):
        return PowerOfTwo(-int(text[4:]))
    if "/" in text:
        num, den = text.split("/", 1)
        if int(num) != 1:
            raise ValueError(f"{text} is not a power of two")
        d = int(den)
        e = d.bit_length() - 1
        if (1 << e) != d:
            raise ValueError(f"{text} is not a power of two")
        return PowerOfTwo(-e)
    n = int(text)
    e = n.bit_length() - 1
    if n <= 0 or (1 << e) != n:
        raise ValueError(f"{text} is not a power of two")
    return PowerOfTwo(e)


def build_symbol(spec: dict):
    kind = spec.get("kind")
    if kind == "gaussian":
        return GaussianSymbol(spec.get("center", 0.0), spec.get("width", 1.0),
                              float(spec.get("modulation", 0.0)))
    if kind == "bump":
        return BumpSymbol(spec.get("center", 0.0), spec.get("radius", 1.0))
    if kind == "tabulated":
        return TabulatedFourierPair(import_csv(spec["f_csv"]),
                                    import_csv(spec["fcheck_csv"]))
    raise ValueError(f"unknown symbol kind {kind!r}")


def build_vector(spec: dict, config: RunConfig):
    kind = spec.get("kind")
    if kind == "indicator":
        return indicator(config.grid_exp, parse_case_dyadic(spec["lo"]),
                         parse_case_dyadic(spec["hi"]))
    if kind in ("gaussian", "bump"):
        return sample_symbol(build_symbol(spec), config.grid_exp,
                             -config.window, config.window)
    if kind == "csv":
        return import_csv(spec["path"], style=spec.get("style", "smooth"))
    raise ValueError(f"unknown vector kind {kind!r}")


def default_cases() -> list[dict]:
    """Five transport-verification cases spanning the translation/dilation range."""
    f = {"kind": "bump", "center": 0.0, "radius": 1.5}
    xi1 = {"kind": "gaussian", "center": -0.125, "width": 1.0}
    xi2 = {"kind": "gaussian", "center": 0.25, "width": 0.75}
    entries = [("0", "1", 1e-3), ("1", "1", 1e-3), ("1/2", "2", 5e-3),
               ("3/2", "1/2", 5e-3), ("0", "2", 5e-3)]
    return [{"f": f, "d": d, "c": c, "xi": xi2, "xi1": xi1, "tol": tol}
            for d, c, tol in entries]


def run_duality_cases(cases: list[dict], config: RunConfig) -> dict:
    results = []
    for case in cases:
        f = build_symbol(case["f"])
        d = parse_case_dyadic(case["d"])
        c = parse_case_pow2(case["c"])
        xi2 = build_vector(case["xi"], config)
        xi1 = build_vector(case.get("xi1", case["xi"]), config)
        tol = config.tol if config.tol is not None else float(case.get("tol", 1e-3))
        residual = equivalence_residual(f, d, c, xi1, xi2)
        results.append({
            "case": {"f": {"kind": case["f"]["kind"],
                           **{k: v for k, v in case["f"].items() if k != "kind"}},
                     "d": str(d), "c": str(c)},
            "residual": residual,
            "tolerances": {"residual": tol},
            "grid": {"g": config.grid_exp, "window": config.window},
            "pass": bool(residual <= tol),
        })
    return {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "grid": {"g": config.grid_exp, "window": config.window},
        "precision": config.precision,
        "cases": results,
        "pass": all(r["pass"] for r in results),
    }


# -- output helpers ------------------------------------------------------------------


def _emit(text: str, config: RunConfig) -> None:
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _vector_lines(vec: dict) -> list[str]:
    lines = []
    for n in sorted(vec):
        c = vec[n]
        lines.append(f"{n}: {c}")
    return lines or ["0"]


# -- commands ----------------------------------------------------------------------


def cmd_normalize(args, config: RunConfig) -> int:
    e = parse_expr(args.expr)
    if config.fmt == "json":
        _emit(json.dumps(e.to_json_dict(), sort_keys=True), config)
    else:
        _emit(str(e), config)
    return 0


def cmd_eq(args, config: RunConfig) -> int:
    e1, e2 = parse_expr(args.expr1), parse_expr(args.expr2)
    equal = e1.equals(e2)
    _emit("equal" if equal else "not equal", config)
    return 0 if equal else 1


def cmd_apply(args, config: RunConfig) -> int:
    e = parse_expr(args.expr)
    vec = e.apply({args.basis: 1})
    if config.fmt == "json":
        payload = [{"n": n, "re": float(complex(c).real), "im": float(complex(c).imag)}
                   for n, c in sorted(vec.items())]
        _emit(json.dumps(payload), config)
    elif config.fmt == "csv":
        lines = ["n,re,im"] + [
            f"{n},{complex(c).real!r},{complex(c).imag!r}" for n, c in sorted(vec.items())]
        _emit("\n".join(lines), config)
    else:
        _emit("\n".join(_vector_lines(vec)), config)
    return 0


def cmd_expect(args, config: RunConfig) -> int:
    e = algebra.diagonal_expectation(parse_expr(args.expr))
    if config.fmt == "json":
        _emit(json.dumps(e.to_json_dict(), sort_keys=True), config)
    else:
        _emit(str(e), config)
    return 0


def cmd_matrix(args, config: RunConfig) -> int:
    e = parse_expr(args.expr)
    entries, boundary_loss = e.matrix_window(config.window)
    if config.fmt == "json":
        payload = {"window": config.window, "boundary_loss": boundary_loss,
                   "entries": [{"row": r, "col": c, "re": v.real, "im": v.imag}
                               for (r, c), v in sorted(entries.items())]}
        _emit(json.dumps(payload, sort_keys=True), config)
    else:
        lines = ["row,col,re,im"]
        lines += [f"{r},{c},{v.real!r},{v.imag!r}"
                  for (r, c), v in sorted(entries.items())]
        _emit("\n".join(lines), config)
    if boundary_loss:
        print("note: entries outside the window were dropped", file=sys.stderr)
    return 0


def cmd_wold(args, config: RunConfig) -> int:
    s0 = MonomialIsometry.from_element(parse_expr(args.s0))
    s1 = MonomialIsometry.from_element(parse_expr(args.s1))
    table = build_extension_unitary(s0, s1, config.window)
    checks = check_intertwining(table, s0, s1)
    if config.fmt == "json":
        payload = {"window": config.window,
                   "table": [{"n": n, "image": m, "re": a.real, "im": a.imag}
                             for n, (m, a) in sorted(table.items())],
                   "checks": checks}
        _emit(json.dumps(payload, sort_keys=True), config)
    else:
        lines = [f"U e_{n} = " + (f"e_{m}" if a == 1 else f"({a}) e_{m}")
                 for n, (m, a) in sorted(table.items())]
        lines.append(f"U S0 = S1 on window: {'pass' if checks['US0=S1'] else 'FAIL'}")
        lines.append(f"S0 U = U^2 S0 on window: {'pass' if checks['S0U=U2S0'] else 'FAIL'}")
        _emit("\n".join(lines), config)
    return 0 if checks["US0=S1"] and checks["S0U=U2S0"] else 1


def cmd_duality(args, config: RunConfig) -> int:
    if args.cases and args.cases != "default":
        with open(args.cases) as fh:
            cases = json.load(fh)
    else:
        cases = default_cases()
    report = run_duality_cases(cases, config)
    if config.fmt == "text":
        lines = []
        for r in report["cases"]:
            status = "pass" if r["pass"] else "FAIL"
            lines.append(f"d={r['case']['d']} c={r['case']['c']}: "
                         f"residual {r['residual']:.3e} "
                         f"(tol {r['tolerances']['residual']:.1e}) {status}")
        lines.append("all cases pass" if report["pass"] else "some cases FAILED")
        _emit("\n".join(lines), config)
    else:
        _emit(json.dumps(report, indent=2, sort_keys=True), config)
    return 0 if report["pass"] else 1


# -- entry point --------------------------------------------------------------------


def _common_options(parser: argparse.ArgumentParser, top_level: bool) -> None:
    # registered on the main parser with real defaults and on every
    # subparser with SUPPRESS, so the flags work on either side of the
    # subcommand without the subparser clobbering earlier values
    def default(value):
        return value if top_level else argparse.SUPPRESS

    parser.add_argument("-N", "--window", type=int, default=default(16),
                        help="basis window half-width (power of two)")
    parser.add_argument("-g", "--grid-exp", type=int, default=default(6),
                        dest="grid_exp",
                        help="grid resolution exponent (spacing 2^-g)")
    parser.add_argument("--tol", type=float, default=default(None),
                        help="override verification tolerance")
    parser.add_argument("--precision", type=int,
                        default=default(int(os.environ.get("QADIC_DEFAULT_PRECISION",
                                                           DEFAULT_PRECISION))),
                        help="2-adic working precision in bits")
    parser.add_argument("--format", choices=("text", "json", "csv"),
                        default=default("text"))
    parser.add_argument("--out", default=default(None),
                        help="write output to this path")


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qadic",
        description="workbench for the dyadic shift/translation operator algebra")
    _common_options(parser, top_level=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="print the canonical form of an expression")
    p.add_argument("expr")
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("eq", help="decide equality of two expressions")
    p.add_argument("expr1")
    p.add_argument("expr2")
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("apply", help="apply an expression to a basis vector")
    p.add_argument("expr")
    p.add_argument("--basis", type=int, default=0)
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("expect", help="project onto the diagonal subalgebra")
    p.add_argument("expr")
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("matrix", help="export the windowed matrix of an expression")
    p.add_argument("expr")
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("wold", help="build and check the extension unitary")
    p.add_argument("--s0", required=True)
    p.add_argument("--s1", required=True)
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_wold)

    p = sub.add_parser("duality", help="run the transport-verification case list")
    p.add_argument("--cases", default="default",
                   help="JSON case file, or 'default' for the built-in list")
    _common_options(p, top_level=False)
    p.set_defaults(func=cmd_duality)

    return parser


def main(argv=None) -> int:
    parser = _build_arg_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, config)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except QadicError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
