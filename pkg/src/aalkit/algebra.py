"""Finite algebras, evaluation, equational consequence and free algebras.

A :class:`FiniteAlgebra` stores one flat table per operation.  Row ``k`` of
an ``n``-ary table is the output at the argument tuple whose mixed-radix
encoding (first argument most significant) is ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import AlgebraError, GuardError, TermError
from .terms import (App, Equation, Renaming, Signature, Term, Var, VarContext,
                    print_term, rename)

DEFAULT_EVAL_GUARD = 4096
DEFAULT_FREE_GUARD = 20000


class FiniteAlgebra:
    def __init__(self, name: str, sig: Signature, carrier: Sequence[str],
                 tables: Mapping[str, Sequence[int]], allow_empty: bool = False):
        self.name = name
        self.sig = sig
        self.carrier = tuple(str(c) for c in carrier)
        n = len(self.carrier)
        if n == 0 and not allow_empty:
            raise AlgebraError(f"algebra {name} has an empty carrier", "empty-carrier")
        if len(set(self.carrier)) != n:
            raise AlgebraError(f"algebra {name} repeats a carrier element", "duplicate-element")
        extra = [s for s in tables if s not in sig]
        if extra:
            raise AlgebraError(f"tables for unknown op(s) {extra}", "unknown-op")
        tabs = {}
        for sym, ar in sig.ops:
            if sym not in tables:
                raise AlgebraError(f"missing table for {sym}", "missing-table")
            row = tuple(tables[sym])
            if len(row) != n ** ar:
                raise AlgebraError(f"table for {sym} has {len(row)} rows, expected {n ** ar}",
                                   "partial-table")
            if any(not 0 <= v < n for v in row):
                raise AlgebraError(f"table for {sym} leaves the carrier", "outside-carrier")
            tabs[sym] = row
        self.tables = tabs
        self._pos = {c: i for i, c in enumerate(self.carrier)}

    @property
    def n(self) -> int:
        return len(self.carrier)

    def index(self, label) -> int:
        try:
            return self._pos[str(label)]
        except KeyError:
            raise AlgebraError(f"{label!r} is not in the carrier of {self.name}",
                               "unknown-element") from None

    def label(self, i: int) -> str:
        return self.carrier[i]

    def apply(self, sym: str, args: Sequence[int]) -> int:
        k = 0
        n = self.n
        for a in args:
            k = k * n + a
        return self.tables[sym][k]

    def reduct(self, sig: Signature, name: Optional[str] = None) -> FiniteAlgebra:
        """Forget every operation not in ``sig``."""
        if not sig.issubsignature(self.sig):
            raise AlgebraError(f"{sig.name} is not a subsignature of {self.sig.name}",
                               "not-subsignature")
        return FiniteAlgebra(name or self.name, sig, self.carrier,
                             {s: self.tables[s] for s in sig.symbols})

    def _key(self):
        return (self.sig.ops, self.carrier, tuple(sorted(self.tables.items())))

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, |carrier|={self.n})"

    def rows(self, sym: str):
        ar = self.sig.arity(sym)
        for k, args in enumerate(itertools.product(range(self.n), repeat=ar)):
            yield args, self.tables[sym][k]

    def to_text(self) -> str:
        lines = [f"algebra {self.name} over {self.sig.name}",
                 "carrier " + " ".join(self.carrier)]
        for sym, _ in self.sig.ops:
            for args, v in self.rows(sym):
                lhs = " ".join(self.carrier[a] for a in args)
                lines.append(f"op {sym}: {lhs} -> {self.carrier[v]}".replace(":  ->", ": ->"))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Evaluation:
    ctx: VarContext
    alg: FiniteAlgebra
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != len(self.ctx):
            raise AlgebraError("evaluation is not total on its context", "not-total")
        if any(not 0 <= v < self.alg.n for v in self.values):
            raise AlgebraError("evaluation leaves the carrier", "outside-carrier")

    @classmethod
    def from_labels(cls, ctx, alg, mapping: Mapping[str, str]) -> Evaluation:
        return cls(ctx, alg, tuple(alg.index(mapping[x]) for x in ctx))

    def __call__(self, x: str) -> int:
        try:
            return self.values[self.ctx.vars.index(x)]
        except ValueError:
            raise TermError(f"variable {x!r} not in evaluation context {self.ctx}",
                            "missing-variable") from None

    def after(self, f: Renaming) -> Evaluation:
        """The composite ``f ; e``, an evaluation of ``f.source``."""
        return Evaluation(f.source, self.alg, tuple(self(f(x)) for x in f.source))

    def as_labels(self) -> dict[str, str]:
        return {x: self.alg.label(v) for x, v in zip(self.ctx, self.values)}


def all_evaluations(alg: FiniteAlgebra, ctx: VarContext,
                    guard: int = DEFAULT_EVAL_GUARD) -> Iterable[Evaluation]:
    count = alg.n ** len(ctx)
    if count > guard:
        raise GuardError(f"{count} evaluations of {ctx} into {alg.name} exceed guard {guard}")
    for vals in itertools.product(range(alg.n), repeat=len(ctx)):
        yield Evaluation(ctx, alg, vals)


def evaluate(t: Term, e: Evaluation) -> int:
    if type(t) is Var:
        return e(t.name)
    return e.alg.apply(t.op, [evaluate(a, e) for a in t.args])


def satisfies(alg: FiniteAlgebra, e: Evaluation, eq: Equation) -> bool:
    if e.alg is not alg and e.alg != alg:
        raise AlgebraError("evaluation belongs to a different algebra", "type-mismatch")
    return evaluate(eq.lhs, e) == evaluate(eq.rhs, e)


@dataclass(frozen=True)
class AlgebraClass:
    members: tuple[FiniteAlgebra, ...] = ()
    sig: Optional[Signature] = None

    def __post_init__(self):
        ms = tuple(self.members)
        object.__setattr__(self, "members", ms)
        if not ms:
            if self.sig is None:
                raise AlgebraError("an empty class needs an explicit signature", "no-signature")
            return
        sig = self.sig or ms[0].sig
        for m in ms:
            if m.sig.ops != sig.ops:
                raise AlgebraError(f"{m.name} is not over the shared signature {sig.name}",
                                   "signature-mismatch")
        object.__setattr__(self, "sig", sig)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def names(self) -> list[str]:
        return [m.name for m in self.members]


def semantic_consequence(K: AlgebraClass, ctx: VarContext, E: Iterable[Equation],
                         F: Iterable[Equation], guard: int = DEFAULT_EVAL_GUARD) -> bool:
    """E |=_K F by enumerating every evaluation into every member."""
    E, F = list(E), list(F)
    for S in K:
        for e in all_evaluations(S, ctx, guard):
            if all(satisfies(S, e, eq) for eq in E) and not all(satisfies(S, e, eq) for eq in F):
                return False
    return True


def find_countermodel(K: AlgebraClass, ctx: VarContext, E, F,
                      guard: int = DEFAULT_EVAL_GUARD) -> Optional[Evaluation]:
    E, F = list(E), list(F)
    for S in K:
        for e in all_evaluations(S, ctx, guard):
            if all(satisfies(S, e, eq) for eq in E) and not all(satisfies(S, e, eq) for eq in F):
                return e
    return None


class PointTable:
    """Value vectors of terms across every (member, evaluation) point.

    Points are ordered by member, then lexicographically by evaluation.  A
    term's vector is computed once and memoized, so deciding many
    consequences over one context reduces to bitmask tests.
    """

    def __init__(self, members: Sequence[FiniteAlgebra], ctx: VarContext,
                 guard: int = DEFAULT_EVAL_GUARD):
        self.members = tuple(members)
        self.ctx = ctx
        self.points: list[tuple[int, tuple[int, ...]]] = []
        for mi, S in enumerate(self.members):
            count = S.n ** len(ctx)
            if count > guard:
                raise GuardError(f"{count} evaluations of {ctx} into {S.name} exceed guard {guard}")
            for vals in itertools.product(range(S.n), repeat=len(ctx)):
                self.points.append((mi, vals))
        self.size = len(self.points)
        self.full = (1 << self.size) - 1
        self._member_of = [mi for mi, _ in self.points]
        self._memo: dict[Term, tuple[int, ...]] = {}
        self._var_col = {x: tuple(vals[k] for _, vals in self.points) for k, x in enumerate(ctx)}
        # For each member a slice of point indices
        self._slices = []
        start = 0
        for S in self.members:
            c = S.n ** len(ctx)
            self._slices.append((start, start + c))
            start += c

    def vector(self, t: Term) -> tuple[int, ...]:
        v = self._memo.get(t)
        if v is not None:
            return v
        if type(t) is Var:
            try:
                v = self._var_col[t.name]
            except KeyError:
                raise TermError(f"variable {t.name!r} not in context {self.ctx}",
                                "unknown-variable") from None
        else:
            argv = [self.vector(a) for a in t.args]
            out = []
            for mi, (lo, hi) in enumerate(self._slices):
                S = self.members[mi]
                tab = S.tables[t.op]
                n = S.n
                if not argv:
                    out.extend([tab[0]] * (hi - lo))
                elif len(argv) == 1:
                    a0 = argv[0]
                    out.extend(tab[a0[k]] for k in range(lo, hi))
                elif len(argv) == 2:
                    a0, a1 = argv
                    out.extend(tab[a0[k] * n + a1[k]] for k in range(lo, hi))
                else:
                    for k in range(lo, hi):
                        idx = 0
                        for a in argv:
                            idx = idx * n + a[k]
                        out.append(tab[idx])
            v = tuple(out)
        self._memo[t] = v
        return v

    def eq_mask(self, eq: Equation) -> int:
        a, b = self.vector(eq.lhs), self.vector(eq.rhs)
        m = 0
        for k in range(self.size):
            if a[k] == b[k]:
                m |= 1 << k
        return m

    def set_mask(self, eqs: Iterable[Equation]) -> int:
        m = self.full
        for eq in eqs:
            m &= self.eq_mask(eq)
        return m

    def designated_mask(self, t: Term, designated: Sequence[frozenset]) -> int:
        """Points where ``t`` takes a designated value; ``designated[mi]`` per member."""
        v = self.vector(t)
        m = 0
        for k in range(self.size):
            if v[k] in designated[self._member_of[k]]:
                m |= 1 << k
        return m

    def point_evaluation(self, k: int) -> Evaluation:
        mi, vals = self.points[k]
        return Evaluation(self.ctx, self.members[mi], vals)


def fast_consequence(table: PointTable, E, F) -> bool:
    em = table.set_mask(E)
    return em & ~table.set_mask(F) == 0


@dataclass
class FuncassReport:
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.failures


def funcass_check(alg: FiniteAlgebra, f: Renaming, e: Evaluation,
                  terms: Iterable[Term], report: Optional[FuncassReport] = None) -> FuncassReport:
    """Evaluating a renamed term agrees with evaluating along the composite."""
    rep = report or FuncassReport()
    fe = e.after(f)
    for t in terms:
        left = evaluate(rename(t, f), e)
        right = evaluate(t, fe)
        rep.checked += 1
        if left != right:
            rep.failures.append(f"{print_term(t)} under {f} and {e.as_labels()}")
    return rep


# -- free algebras ----------------------------------------------------------------

@dataclass
class FreeAlgebraResult:
    alg: FiniteAlgebra
    ctx: VarContext
    klass: AlgebraClass
    tuples: list[tuple[int, ...]]
    generators: dict[str, int]
    witnesses: list[Term]
    points: list[tuple[int, tuple[int, ...]]]

    def lam(self, t: Term) -> int:
        """Image of ``t`` computed inside the free algebra's own tables."""
        if type(t) is Var:
            try:
                return self.generators[t.name]
            except KeyError:
                raise TermError(f"variable {t.name!r} not in context {self.ctx}",
                                "unknown-variable") from None
        return self.alg.apply(t.op, [self.lam(a) for a in t.args])

    def lam_tuple(self, t: Term) -> tuple[int, ...]:
        """Componentwise evaluation of ``t`` at every (member, evaluation) point."""
        ms = self.klass.members
        return tuple(evaluate(t, Evaluation(self.ctx, ms[mi], vals)) for mi, vals in self.points)

    def label_of(self, t: Term) -> str:
        return self.alg.label(self.lam(t))

    def check_homomorphism(self) -> bool:
        """Every table entry is the componentwise application of the op."""
        ms = self.klass.members
        for sym, _ in self.alg.sig.ops:
            for args, v in self.alg.rows(sym):
                cols = [self.tuples[a] for a in args]
                expect = tuple(ms[mi].apply(sym, [c[k] for c in cols])
                               for k, (mi, _) in enumerate(self.points))
                if self.tuples[v] != expect:
                    return False
        return True


def free_algebra(K: AlgebraClass, ctx: VarContext, guard: int = DEFAULT_FREE_GUARD,
                 eval_guard: int = DEFAULT_EVAL_GUARD) -> FreeAlgebraResult:
    """Subalgebra of the product over all (member, evaluation) points generated by ctx.

    Elements are discovered breadth-first: generators in context order,
    then in each round every op (signature order) applied to argument
    tuples that involve an element found in the previous round.
    """
    sig = K.sig
    table = PointTable(K.members, ctx, eval_guard)
    points = table.points
    members = K.members
    elems: list[tuple[int, ...]] = []
    witnesses: list[Term] = []
    pos: dict[tuple[int, ...], int] = {}
    gens: dict[str, int] = {}

    def add(tup, term):
        i = pos.get(tup)
        if i is None:
            if len(elems) >= guard:
                raise GuardError(f"free algebra on {ctx} exceeds {guard} elements")
            i = len(elems)
            pos[tup] = i
            elems.append(tup)
            witnesses.append(term)
        return i

    for x in ctx:
        gens[x] = add(table.vector(Var(x)), Var(x))

    member_slices = table._slices
    results: dict[str, dict[tuple[int, ...], int]] = {s: {} for s in sig.symbols}

    def apply_op(sym, args):
        out = []
        cols = [elems[a] for a in args]
        for mi, (lo, hi) in enumerate(member_slices):
            S = members[mi]
            tab = S.tables[sym]
            n = S.n
            for k in range(lo, hi):
                idx = 0
                for c in cols:
                    idx = idx * n + c[k]
                out.append(tab[idx])
        return tuple(out)

    start, first_round = 0, True
    while True:
        n_before = len(elems)
        for sym, ar in sig.ops:
            if ar == 0:
                if first_round:
                    results[sym][()] = add(apply_op(sym, ()), App(sym, ()))
                continue
            for args in itertools.product(range(n_before), repeat=ar):
                if max(args) < start:
                    continue
                r = add(apply_op(sym, args), App(sym, tuple(witnesses[a] for a in args)))
                results[sym][args] = r
        first_round = False
        if len(elems) == n_before:
            break
        start = n_before

    # Tuples involving elements found in the last productive round are filled
    # by the final (unproductive) round, so every table is total here.
    n = len(elems)
    tabs = {}
    for sym, ar in sig.ops:
        res = results[sym]
        tabs[sym] = [res[args] for args in itertools.product(range(n), repeat=ar)]
    alg = FiniteAlgebra(f"F_{'_'.join(K.names) or 'empty'}({','.join(ctx)})", sig,
                        [f"t{i}" for i in range(n)], tabs, allow_empty=True)
    return FreeAlgebraResult(alg, ctx, K, elems, gens, witnesses, points)


def lt_equal(fr: FreeAlgebraResult, phi: Term, psi: Term) -> bool:
    return fr.lam(phi) == fr.lam(psi)


def algebra_iso(A: FiniteAlgebra, B: FiniteAlgebra, phi: Sequence[int]) -> bool:
    """Whether the index map ``phi`` is an isomorphism of algebras A -> B."""
    if A.sig.ops != B.sig.ops or A.n != B.n or sorted(phi) != list(range(B.n)):
        return False
    for sym, _ in A.sig.ops:
        for args, v in A.rows(sym):
            if B.apply(sym, [phi[a] for a in args]) != phi[v]:
                return False
    return True
