"""Signatures, terms, renaming and simultaneous substitution.

Terms are immutable trees built from :class:`Var` leaves and :class:`App`
nodes.  They carry no context of their own; well-formedness is always checked
against a :class:`Signature` and a :class:`VarContext`.

Renaming (the functor action on variable maps) and Kleisli substitution are
the two primitive operations.  Everything else about the term monad, such as
the unit and flattening, is expressed through substitution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import SignatureError, TermError


# -- signatures and contexts -------------------------------------------------

@dataclass(frozen=True)
class Signature:
    name: str
    ops: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        ops = tuple((str(s), int(a)) for s, a in self.ops)
        object.__setattr__(self, "ops", ops)
        seen = set()
        for sym, ar in ops:
            if sym in seen:
                raise SignatureError(f"duplicate op symbol {sym!r}", "duplicate-symbol")
            if ar < 0:
                raise SignatureError(f"negative arity for {sym!r}", "bad-arity")
            seen.add(sym)

    @cached_property
    def _arity(self) -> dict[str, int]:
        return dict(self.ops)

    def __contains__(self, sym) -> bool:
        return sym in self._arity

    def arity(self, sym: str) -> int:
        try:
            return self._arity[sym]
        except KeyError:
            raise TermError(f"unknown op {sym!r}", "unknown-identifier") from None

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.ops)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(s for s, a in self.ops if a == 0)

    def issubsignature(self, other: Signature) -> bool:
        """True when every op of ``self`` occurs in ``other`` with the same arity."""
        return all(s in other and other.arity(s) == a for s, a in self.ops)


@dataclass(frozen=True)
class VarContext:
    vars: tuple[str, ...] = ()

    def __post_init__(self):
        vs = tuple(self.vars)
        object.__setattr__(self, "vars", vs)
        if len(set(vs)) != len(vs):
            raise TermError(f"repeated variable in context {vs}", "duplicate-variable")

    @classmethod
    def of(cls, *names: str) -> VarContext:
        return cls(tuple(names))

    def __len__(self):
        return len(self.vars)

    def __iter__(self):
        return iter(self.vars)

    def __contains__(self, name) -> bool:
        return name in self.vars

    def __str__(self):
        return "{" + ", ".join(self.vars) + "}"


def check_context(sig: Signature, ctx: VarContext) -> None:
    clash = [x for x in ctx if x in sig]
    if clash:
        raise TermError(f"variables {clash} clash with op symbols", "variable-op-clash")


# -- terms ---------------------------------------------------------------------

class Var(NamedTuple):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


class App(NamedTuple):
    op: str
    args: tuple = ()

    def __repr__(self):
        return f"App({self.op!r}, {list(self.args)!r})"


Term = Union[Var, App]


def depth(t: Term) -> int:
    """Nesting depth; variables and constants both have depth 0."""
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def variables(t: Term) -> tuple[str, ...]:
    """Variables of ``t`` in order of first (leftmost) occurrence."""
    out: dict[str, None] = {}
    stack = [t]
    while stack:
        s = stack.pop()
        if type(s) is Var:
            out.setdefault(s.name)
        else:
            stack.extend(reversed(s.args))
    return tuple(out)


def check_term(t: Term, sig: Signature, ctx: VarContext) -> None:
    if type(t) is Var:
        if t.name not in ctx:
            raise TermError(f"variable {t.name!r} not in context {ctx}", "unknown-variable")
        return
    ar = sig.arity(t.op)
    if ar != len(t.args):
        raise TermError(
            f"{t.op!r} expects {ar} argument(s), got {len(t.args)}", "arity-mismatch")
    for a in t.args:
        check_term(a, sig, ctx)


def print_term(t: Term) -> str:
    if type(t) is Var:
        return t.name
    if not t.args:
        return t.op
    return "(" + t.op + " " + " ".join(print_term(a) for a in t.args) + ")"


# -- renaming and substitution -------------------------------------------------

@dataclass(frozen=True)
class Renaming:
    """A total map ``source.vars -> target.vars``; ``images`` is aligned with source."""

    source: VarContext
    target: VarContext
    images: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != len(self.source):
            raise TermError("renaming is not total on its source", "not-total")
        for y in self.images:
            if y not in self.target:
                raise TermError(f"renaming image {y!r} outside target {self.target}",
                                "image-outside-target")

    @classmethod
    def from_mapping(cls, source, target, mapping: Mapping[str, str]) -> Renaming:
        missing = [x for x in source if x not in mapping]
        if missing:
            raise TermError(f"renaming undefined on {missing}", "not-total")
        return cls(source, target, tuple(mapping[x] for x in source))

    @classmethod
    def identity(cls, ctx: VarContext) -> Renaming:
        return cls(ctx, ctx, ctx.vars)

    @cached_property
    def mapping(self) -> dict[str, str]:
        return dict(zip(self.source.vars, self.images))

    def __call__(self, x: str) -> str:
        try:
            return self.mapping[x]
        except KeyError:
            raise TermError(f"variable {x!r} not in renaming source {self.source}",
                            "missing-variable") from None

    def then(self, g: Renaming) -> Renaming:
        """Diagrammatic composite: first ``self`` then ``g``."""
        return Renaming(self.source, g.target, tuple(g(y) for y in self.images))

    def as_substitution(self) -> TermSubstitution:
        return TermSubstitution(self.source, self.target, tuple(Var(y) for y in self.images))

    def __str__(self):
        return "{" + ", ".join(f"{x}->{y}" for x, y in zip(self.source, self.images)) + "}"


@dataclass(frozen=True)
class TermSubstitution:
    source: VarContext
    target: VarContext
    images: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != len(self.source):
            raise TermError("substitution is not total on its source", "not-total")
        for im in self.images:
            for y in variables(im):
                if y not in self.target:
                    raise TermError(f"substitution image uses {y!r} outside target "
                                    f"{self.target}", "image-outside-target")

    @classmethod
    def from_mapping(cls, source, target, mapping: Mapping[str, Term]) -> TermSubstitution:
        missing = [x for x in source if x not in mapping]
        if missing:
            raise TermError(f"substitution undefined on {missing}", "not-total")
        return cls(source, target, tuple(mapping[x] for x in source))

    @classmethod
    def unit(cls, ctx: VarContext) -> TermSubstitution:
        """The monad unit ``x -> Var(x)``."""
        return cls(ctx, ctx, tuple(Var(x) for x in ctx))

    @cached_property
    def mapping(self) -> dict[str, Term]:
        return dict(zip(self.source.vars, self.images))

    def __call__(self, x: str) -> Term:
        try:
            return self.mapping[x]
        except KeyError:
            raise TermError(f"variable {x!r} not in substitution source {self.source}",
                            "missing-variable") from None

    def then(self, rho: TermSubstitution) -> TermSubstitution:
        """Kleisli composite ``(self ; rho)(x) = substitute(self(x), rho)``."""
        return TermSubstitution(self.source, rho.target,
                                tuple(substitute_all(self.images, rho)))

    def check(self, sig: Signature) -> None:
        for im in self.images:
            check_term(im, sig, self.target)

    def __str__(self):
        return "{" + ", ".join(f"{x}->{print_term(t)}"
                               for x, t in zip(self.source, self.images)) + "}"


def rename(t: Term, f: Renaming) -> Term:
    if type(t) is Var:
        return Var(f(t.name))
    if not t.args:
        return t
    return App(t.op, tuple(rename(a, f) for a in t.args))


def substitute(t: Term, sigma: TermSubstitution) -> Term:
    if type(t) is Var:
        return sigma(t.name)
    if not t.args:
        return t
    return App(t.op, tuple(substitute(a, sigma) for a in t.args))


def _compile(terms: Sequence[Term]):
    # Shared-node program: every distinct subterm appears once, children first.
    index: dict[Term, int] = {}
    prog: list[tuple[str, tuple[int, ...] | None]] = []

    def visit(t):
        i = index.get(t)
        if i is None:
            if type(t) is Var:
                entry = (t.name, None)
            else:
                entry = (t.op, tuple(visit(a) for a in t.args))
            i = len(prog)
            prog.append(entry)
            index[t] = i
        return i

    roots = [visit(t) for t in terms]
    return prog, roots


class TermBatch:
    """A list of terms prepared for repeated substitution.

    Substituting the batch computes the image of each distinct subterm once,
    which matters when the same family of terms is pushed through thousands
    of substitutions.
    """

    def __init__(self, terms: Iterable[Term]):
        self.terms = list(terms)
        self._prog, self._roots = _compile(self.terms)

    def __len__(self):
        return len(self.terms)

    def substitute(self, sigma: TermSubstitution) -> list[Term]:
        try:
            return self.substitute_mapping(sigma.mapping)
        except KeyError as exc:
            raise TermError(f"variable {exc.args[0]!r} not in substitution source "
                            f"{sigma.source}", "missing-variable") from None

    def substitute_mapping(self, m: Mapping[str, Term]) -> list[Term]:
        """Substitute along a plain variable-to-term dict (no validation)."""
        out: list[Term] = []
        push = out.append
        new = tuple.__new__  # skips the slow generated NamedTuple constructor
        for op, args in self._prog:
            if args is None:
                push(m[op])
                continue
            k = len(args)
            if k == 1:
                push(new(App, (op, (out[args[0]],))))
            elif k == 2:
                push(new(App, (op, (out[args[0]], out[args[1]]))))
            elif k == 0:
                push(new(App, (op, ())))
            else:
                push(new(App, (op, tuple([out[i] for i in args]))))
        return [out[i] for i in self._roots]


def substitute_all(terms: Iterable[Term], sigma: TermSubstitution) -> list[Term]:
    """``[substitute(t, sigma) for t in terms]`` with shared subterm work."""
    return TermBatch(terms).substitute(sigma)


def rename_all(terms: Iterable[Term], f: Renaming) -> list[Term]:
    return TermBatch(terms).substitute(f.as_substitution())


def flatten(t: Term, handles: Mapping[str, Term], target: VarContext) -> Term:
    """Multiplication of the term monad.

    ``t`` is a term whose leaves are handles naming terms over ``target``; the
    result plugs each handle's term in place.  This is substitution along the
    identity-on-handles map.
    """
    src = VarContext(tuple(handles))
    return substitute(t, TermSubstitution.from_mapping(src, target, handles))


# -- equations and sequents ----------------------------------------------------

class Equation(NamedTuple):
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{print_term(self.lhs)} ~ {print_term(self.rhs)}"


@dataclass(frozen=True)
class Sequent:
    antecedents: tuple[Term, ...] = ()
    succedents: tuple[Term, ...] = ()

    @property
    def type(self) -> tuple[int, int]:
        return len(self.antecedents), len(self.succedents)

    def __str__(self):
        left = ", ".join(print_term(t) for t in self.antecedents)
        right = ", ".join(print_term(t) for t in self.succedents)
        return f"{left} => {right}"


def check_equation(eq: Equation, sig: Signature, ctx: VarContext) -> None:
    check_term(eq.lhs, sig, ctx)
    check_term(eq.rhs, sig, ctx)


def subst_equation(eq: Equation, f: Renaming) -> Equation:
    return Equation(rename(eq.lhs, f), rename(eq.rhs, f))


def substitute_equation(eq: Equation, sigma: TermSubstitution) -> Equation:
    return Equation(substitute(eq.lhs, sigma), substitute(eq.rhs, sigma))


def subst_sequent(seq: Sequent, f: Renaming) -> Sequent:
    return Sequent(tuple(rename(t, f) for t in seq.antecedents),
                   tuple(rename(t, f) for t in seq.succedents))


# -- enumeration ---------------------------------------------------------------

def enumerate_terms(sig: Signature, ctx: VarContext, depth: int) -> list[Term]:
    """All terms of depth <= ``depth``, stratified by exact depth.

    Within depth 0: variables in context order, then constants in signature
    order.  Within each deeper stratum: ops in signature order, argument
    tuples lexicographic by enumeration index.  The list for ``depth`` is a
    literal prefix of the list for ``depth + 1``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    terms: list[Term] = [Var(x) for x in ctx]
    terms += [App(s, ()) for s, a in sig.ops if a == 0]
    start = 0  # first index of the previous exact-depth stratum
    for _ in range(depth):
        n = len(terms)
        layer = []
        for sym, ar in sig.ops:
            if ar == 0:
                continue
            for idx in itertools.product(range(n), repeat=ar):
                if max(idx) >= start:
                    layer.append(App(sym, tuple(terms[i] for i in idx)))
        start = n
        terms.extend(layer)
    return terms


def enumerate_renamings(source: VarContext, target: VarContext) -> list[Renaming]:
    """All ``|target| ** |source|`` renamings, lexicographic in target order."""
    return [Renaming(source, target, imgs)
            for imgs in itertools.product(target.vars, repeat=len(source))]


def enumerate_substitutions(source: VarContext, target: VarContext, sig: Signature,
                            depth: int) -> list[TermSubstitution]:
    pool = enumerate_terms(sig, target, depth)
    return [TermSubstitution(source, target, imgs)
            for imgs in itertools.product(pool, repeat=len(source))]


def standard_contexts(bound: int, pool: Sequence[str] = ("p", "q", "r", "s")) -> list[VarContext]:
    """Contexts of size 0..bound drawn as prefixes of ``pool``."""
    if bound > len(pool):
        raise ValueError(f"context bound {bound} exceeds variable pool {tuple(pool)}")
    return [VarContext(tuple(pool[:k])) for k in range(bound + 1)]
