"""Readers for the line-oriented input files and for S-expression terms.

Every file format ignores blank lines and ``#`` comments.  Errors are
:class:`ParseError` (or the domain error of the object being built) with a
``kind`` tag and, where it makes sense, a line and column.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterator, Optional, Sequence

from .algebra import FiniteAlgebra
from .consequence import LogicalMatrix, Rule, RuleSystem
from .equivalence import (HOLE, HOLE_LEFT, HOLE_RIGHT, TranslationEqToFml,
                          TranslationFmlToEq)
from .errors import AalError, ParseError
from .suplattice import FiniteSupLattice, make_lattice
from .terms import App, Equation, Signature, Term, Var, VarContext

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _relocate(exc: AalError, line: int, source) -> ParseError:
    return ParseError(str(exc), exc.kind, line=line, source=source)


# -- signatures ------------------------------------------------------------------

def parse_signature(text: str, source: Optional[str] = None) -> Signature:
    name = "SIG"
    ops: list[tuple[str, int]] = []
    seen_header = False
    for no, line in _lines(text):
        parts = line.split()
        if parts[0] == "signature":
            if seen_header or ops or len(parts) != 2 or not IDENT.match(parts[1]):
                raise ParseError("expected a single 'signature <name>' header", "syntax",
                                 line=no, source=source)
            name, seen_header = parts[1], True
        elif parts[0] == "op":
            if len(parts) != 3 or not IDENT.match(parts[1]):
                raise ParseError("expected 'op <symbol> <arity>'", "syntax", line=no,
                                 source=source)
            if not re.fullmatch(r"\d+", parts[2]):
                raise ParseError(f"arity of {parts[1]} must be a nonnegative integer, "
                                 f"got {parts[2]!r}", "bad-arity", line=no, source=source)
            if any(s == parts[1] for s, _ in ops):
                raise ParseError(f"duplicate op symbol {parts[1]!r}", "duplicate-symbol",
                                 line=no, source=source)
            ops.append((parts[1], int(parts[2])))
        else:
            raise ParseError(f"unexpected {parts[0]!r}", "syntax", line=no, source=source)
    return Signature(name, tuple(ops))


# -- terms -------------------------------------------------------------------------

def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        col = m.start(m.lastindex) + 1
        out.append((m.group(m.lastindex), col))
        pos = m.end()
    return out


def parse_term(text: str, sig: Signature, ctx: Optional[VarContext],
               line: Optional[int] = None, source: Optional[str] = None,
               offset: int = 0) -> Term:
    """Parse a prefix S-expression.

    With ``ctx=None`` every identifier that is not an op is accepted as a
    variable; that mode is used for schematic rules and templates.
    """
    toks = _tokens(text)

    def err(msg, kind, col=None):
        return ParseError(msg, kind, line=line, column=None if col is None else col + offset,
                          source=source)

    if not toks:
        raise err("empty term", "syntax")
    pos = 0

    def atom(tok, col):
        if tok in sig:
            ar = sig.arity(tok)
            if ar != 0:
                raise err(f"{tok} expects {ar} argument(s), got 0", "arity-mismatch", col)
            return App(tok, ())
        if not IDENT.match(tok):
            raise err(f"bad identifier {tok!r}", "syntax", col)
        if ctx is not None and tok not in ctx:
            raise err(f"unknown identifier {tok!r} (neither an op nor a variable in {ctx})",
                      "unknown-identifier", col)
        return Var(tok)

    def term():
        nonlocal pos
        if pos >= len(toks):
            raise err("unbalanced parentheses: term ends early", "unbalanced-parentheses")
        tok, col = toks[pos]
        pos += 1
        if tok == ")":
            raise err("unbalanced parentheses: unexpected ')'", "unbalanced-parentheses", col)
        if tok != "(":
            return atom(tok, col)
        if pos >= len(toks):
            raise err("unbalanced parentheses: missing ')'", "unbalanced-parentheses", col)
        head, hcol = toks[pos]
        pos += 1
        if head in ("(", ")"):
            raise err("expected an op symbol after '('", "syntax", hcol)
        if head not in sig:
            if IDENT.match(head) and (ctx is None or head in ctx):
                raise err(f"{head} is a variable and cannot be applied", "syntax", hcol)
            raise err(f"unknown identifier {head!r}", "unknown-identifier", hcol)
        args = []
        while True:
            if pos >= len(toks):
                raise err("unbalanced parentheses: missing ')'", "unbalanced-parentheses", col)
            if toks[pos][0] == ")":
                pos += 1
                break
            args.append(term())
        ar = sig.arity(head)
        if len(args) != ar:
            raise err(f"{head} expects {ar} argument(s), got {len(args)}", "arity-mismatch", hcol)
        return App(head, tuple(args))

    t = term()
    if pos != len(toks):
        tok, col = toks[pos]
        kind = "unbalanced-parentheses" if tok == ")" else "syntax"
        raise err(f"trailing input {tok!r}", kind, col)
    return t


def split_spans(text: str, sep: str) -> list[tuple[str, int]]:
    """Split on ``sep`` outside parentheses; each piece comes with its start offset."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append((text[start:i], start))
            start = i + 1
    out.append((text[start:], start))
    return [(s.strip(), k + len(s) - len(s.lstrip())) for s, k in out]


def split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses."""
    return [s for s, _ in split_spans(text, sep)]


def parse_terms(text: str, sig: Signature, ctx: Optional[VarContext]) -> list[Term]:
    """A comma-separated list of terms; the empty string is the empty list."""
    if not text.strip():
        return []
    return [parse_term(s, sig, ctx, offset=k) for s, k in split_spans(text, ",")]


def parse_equation(text: str, sig: Signature, ctx: Optional[VarContext],
                   line=None, source=None, offset: int = 0) -> Equation:
    parts = split_spans(text, "~")
    if len(parts) != 2:
        raise ParseError(f"expected '<term> ~ <term>', got {text!r}", "syntax", line=line,
                         source=source)
    (a, i), (b, j) = parts
    return Equation(parse_term(a, sig, ctx, line, source, offset + i),
                    parse_term(b, sig, ctx, line, source, offset + j))


def parse_equations(text: str, sig: Signature, ctx: Optional[VarContext]) -> list[Equation]:
    if not text.strip():
        return []
    return [parse_equation(s, sig, ctx, offset=k) for s, k in split_spans(text, ",")]


def parse_context(text: str) -> VarContext:
    names = [x for x in re.split(r"[\s,]+", text.strip()) if x]
    for x in names:
        if not IDENT.match(x):
            raise ParseError(f"bad variable name {x!r}", "syntax")
    return VarContext(tuple(names))


# -- algebras ------------------------------------------------------------------------

def _read_algebra(text: str, sig: Optional[Signature], source):
    name, over = None, None
    carrier: Optional[list[str]] = None
    rows: dict[str, dict[tuple[str, ...], str]] = {}
    arities: dict[str, int] = {}
    order: list[str] = []
    designated = None
    for no, line in _lines(text):
        parts = line.split()
        head = parts[0]
        if head == "algebra":
            if len(parts) != 4 or parts[2] != "over" or name is not None:
                raise ParseError("expected 'algebra <name> over <signature>'", "syntax",
                                 line=no, source=source)
            name, over = parts[1], parts[3]
        elif head == "carrier":
            if carrier is not None:
                raise ParseError("carrier given twice", "syntax", line=no, source=source)
            carrier = parts[1:]
            if not carrier:
                raise ParseError("empty carrier", "empty-carrier", line=no, source=source)
            if len(set(carrier)) != len(carrier):
                raise ParseError("carrier repeats an element", "duplicate-element", line=no,
                                 source=source)
        elif head == "designated":
            designated = parts[1:]
        elif head == "op":
            if carrier is None:
                raise ParseError("op row before carrier", "syntax", line=no, source=source)
            m = re.fullmatch(r"op\s+(\S+?)\s*:\s*(.*?)\s*->\s*(\S+)", line)
            if not m:
                raise ParseError("expected 'op <symbol>: <args> -> <value>'", "syntax",
                                 line=no, source=source)
            sym, args, val = m.group(1), tuple(m.group(2).split()), m.group(3)
            if sig is not None and sym not in sig:
                raise ParseError(f"unknown op {sym!r} for signature {sig.name}", "unknown-op",
                                 line=no, source=source)
            for a in args + (val,):
                if a not in carrier:
                    raise ParseError(f"{a!r} is outside the carrier", "outside-carrier",
                                     line=no, source=source)
            if sym not in arities:
                arities[sym] = len(args)
                order.append(sym)
                rows[sym] = {}
            if len(args) != arities[sym] or (sig is not None and len(args) != sig.arity(sym)):
                raise ParseError(f"row for {sym} has the wrong number of arguments",
                                 "arity-mismatch", line=no, source=source)
            if args in rows[sym]:
                raise ParseError(f"duplicate row for {sym} at {' '.join(args)}", "partial-table",
                                 line=no, source=source)
            rows[sym][args] = val
        else:
            raise ParseError(f"unexpected {head!r}", "syntax", line=no, source=source)
    if name is None:
        raise ParseError("missing 'algebra <name> over <signature>' header", "syntax",
                         source=source)
    if carrier is None:
        raise ParseError("missing carrier line", "empty-carrier", source=source)
    if sig is None:
        sig = Signature(over, tuple((s, arities[s]) for s in order))
    elif over != sig.name:
        raise ParseError(f"algebra is declared over {over}, not {sig.name}",
                         "signature-mismatch", source=source)
    n = len(carrier)
    pos = {c: i for i, c in enumerate(carrier)}
    tables = {}
    for sym, ar in sig.ops:
        if sym not in rows:
            raise ParseError(f"missing table for {sym}", "missing-table", source=source)
        got = rows[sym]
        if len(got) != n ** ar:
            raise ParseError(f"table for {sym} has {len(got)} rows, expected {n ** ar}",
                             "partial-table", source=source)
        tables[sym] = [pos[got[tuple(carrier[a] for a in args)]]
                       for args in itertools.product(range(n), repeat=ar)]
    return FiniteAlgebra(name, sig, carrier, tables), designated


def parse_algebra(text: str, sig: Optional[Signature] = None,
                  source: Optional[str] = None) -> FiniteAlgebra:
    """Parse an algebra file; without ``sig`` the signature is read off the rows."""
    return _read_algebra(text, sig, source)[0]


def parse_matrix(text: str, sig: Optional[Signature] = None,
                 designated: Optional[Sequence[str]] = None,
                 source: Optional[str] = None) -> LogicalMatrix:
    alg, des = _read_algebra(text, sig, source)
    des = list(designated) if designated is not None else des
    if not des:
        raise ParseError("matrix needs a 'designated' line or an explicit designated set",
                         "missing-designated", source=source)
    for d in des:
        if d not in alg.carrier:
            raise ParseError(f"designated value {d!r} is outside the carrier",
                             "outside-carrier", source=source)
    return LogicalMatrix.of(alg, des)


# -- rules ---------------------------------------------------------------------------------

def parse_rules(text: str, sig: Signature, source: Optional[str] = None) -> RuleSystem:
    rules, axioms = [], []
    names = set()
    for no, line in _lines(text):
        m = re.fullmatch(r"(rule|axiom)\s+([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.*)", line)
        if not m:
            raise ParseError("expected 'rule <name>: ... => ...' or 'axiom <name>: <term>'",
                             "syntax", line=no, source=source)
        kind, name, body = m.groups()
        if name in names:
            raise ParseError(f"duplicate rule name {name!r}", "duplicate-rule", line=no,
                             source=source)
        names.add(name)
        try:
            if kind == "axiom":
                axioms.append(Rule(name, (), parse_term(body, sig, None, no, source)))
            else:
                if "=>" not in body:
                    raise ParseError("rule needs '=>'", "syntax", line=no, source=source)
                lhs, rhs = body.split("=>", 1)
                prem = [parse_term(s, sig, None, no, source)
                        for s in split_top(lhs, ",")] if lhs.strip() else []
                rule = Rule(name, tuple(prem), parse_term(rhs, sig, None, no, source))
                (rules if prem else axioms).append(rule)
        except ParseError:
            raise
        except AalError as exc:
            raise _relocate(exc, no, source) from None
    return RuleSystem(sig, tuple(rules), tuple(axioms))


# -- translations ------------------------------------------------------------------------------

def parse_translation(text: str, sig: Signature, source: Optional[str] = None
                      ) -> tuple[Optional[TranslationFmlToEq], Optional[TranslationEqToFml]]:
    tau = delta = None
    tau_ctx = VarContext((HOLE,))
    delta_ctx = VarContext((HOLE_LEFT, HOLE_RIGHT))
    for no, line in _lines(text):
        m = re.fullmatch(r"(tau|delta)\s*:\s*(.*)", line)
        if not m:
            raise ParseError("expected 'tau: ...' or 'delta: ...'", "syntax", line=no,
                             source=source)
        which, body = m.groups()
        parts = [p for p in split_top(body, ";")]
        if not all(parts):
            raise ParseError(f"empty template in {which}", "syntax", line=no, source=source)
        try:
            if which == "tau":
                if tau is not None:
                    raise ParseError("tau given twice", "syntax", line=no, source=source)
                tau = TranslationFmlToEq(tuple(parse_equation(p, sig, tau_ctx, no, source)
                                               for p in parts))
            else:
                if delta is not None:
                    raise ParseError("delta given twice", "syntax", line=no, source=source)
                delta = TranslationEqToFml(tuple(parse_term(p, sig, delta_ctx, no, source)
                                                 for p in parts))
        except ParseError:
            raise
        except AalError as exc:
            raise _relocate(exc, no, source) from None
    return tau, delta


# -- suplattices ---------------------------------------------------------------------------------

def parse_suplattice(text: str, source: Optional[str] = None) -> FiniteSupLattice:
    name, elements, pairs = "L", None, []
    for no, line in _lines(text):
        parts = line.split()
        if parts[0] == "suplattice" and len(parts) == 2:
            name = parts[1]
        elif parts[0] == "elements":
            if elements is not None:
                raise ParseError("elements given twice", "syntax", line=no, source=source)
            elements = parts[1:]
        elif parts[0] == "leq" and len(parts) == 3:
            if elements is None:
                raise ParseError("leq before elements", "syntax", line=no, source=source)
            for p in parts[1:]:
                if p not in elements:
                    raise ParseError(f"unknown element {p!r}", "unknown-element", line=no,
                                     source=source)
            pairs.append((parts[1], parts[2]))
        else:
            raise ParseError(f"unexpected line {line!r}", "syntax", line=no, source=source)
    if elements is None:
        raise ParseError("missing elements line", "syntax", source=source)
    try:
        return make_lattice(elements, pairs, name)
    except AalError as exc:
        raise ParseError(str(exc), exc.kind if exc.kind != "invalid-lattice" else
                         "not-a-suplattice", source=source) from None
