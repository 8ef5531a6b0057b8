"""Formula-side consequence: rule systems, logical matrices and engines.

Engines answer ``entails(ctx, gamma, delta)`` with a three-valued
:class:`Answer`.  Set-to-set queries are conjunctions of set-to-formula
queries.  Matrix and equational engines are exact; the rule engine searches
forward within a budget and answers ``UNKNOWN`` rather than ``NO``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional, Sequence

from .algebra import (DEFAULT_EVAL_GUARD, AlgebraClass, Evaluation, FiniteAlgebra,
                      PointTable, all_evaluations, evaluate)
from .errors import AlgebraError, BudgetError, GuardError, TermError
from .suplattice import ClosureOperator, FreeSupLattice, closure_violation, free_suplattice
from .terms import (App, Equation, Signature, Term, TermBatch, Var, VarContext, check_term,
                    enumerate_renamings, enumerate_terms, print_term, rename, variables)

DEFAULT_INSTANCE_GUARD = 2_000_000


class Answer(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


def conj(answers: Iterable[Answer]) -> Answer:
    out = Answer.YES
    for a in answers:
        if a is Answer.NO:
            return Answer.NO
        if a is Answer.UNKNOWN:
            out = Answer.UNKNOWN
    return out


# -- rules and matrices ---------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    name: str
    premises: tuple[Term, ...]
    conclusion: Term
    schematic: Optional[VarContext] = None

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        seen: dict[str, None] = {}
        for t in self.premises + (self.conclusion,):
            for x in variables(t):
                seen.setdefault(x)
        if self.schematic is None:
            object.__setattr__(self, "schematic", VarContext(tuple(seen)))
        else:
            missing = [x for x in seen if x not in self.schematic]
            if missing:
                raise TermError(f"rule {self.name} uses {missing} outside its schematic context",
                                "unknown-variable")

    def check(self, sig: Signature) -> None:
        for t in self.premises + (self.conclusion,):
            check_term(t, sig, self.schematic)

    def __str__(self):
        lhs = ", ".join(print_term(p) for p in self.premises)
        return f"{self.name}: {lhs} => {print_term(self.conclusion)}"


@dataclass(frozen=True)
class RuleSystem:
    sig: Signature
    rules: tuple[Rule, ...] = ()
    axioms: tuple[Rule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        for r in self.rules + self.axioms:
            r.check(self.sig)
        for a in self.axioms:
            if a.premises:
                raise TermError(f"axiom {a.name} has premises", "axiom-with-premises")

    def with_axiom(self, name: str, scheme: Term) -> RuleSystem:
        return RuleSystem(self.sig, self.rules, self.axioms + (Rule(name, (), scheme),))


@dataclass(frozen=True)
class LogicalMatrix:
    alg: FiniteAlgebra
    designated: frozenset

    def __post_init__(self):
        d = frozenset(self.designated)
        object.__setattr__(self, "designated", d)
        if not d:
            raise AlgebraError("a matrix needs a nonempty designated set", "empty-designated")
        if any(not 0 <= v < self.alg.n for v in d):
            raise AlgebraError("designated values outside the carrier", "outside-carrier")

    @classmethod
    def of(cls, alg: FiniteAlgebra, labels: Iterable[str]) -> LogicalMatrix:
        return cls(alg, frozenset(alg.index(x) for x in labels))

    @property
    def name(self) -> str:
        return f"<{self.alg.name},{{{','.join(self.alg.label(v) for v in sorted(self.designated))}}}>"

    def validates(self, scheme: Term, guard: int = DEFAULT_EVAL_GUARD) -> bool:
        ctx = VarContext(variables(scheme))
        return all(evaluate(scheme, e) in self.designated
                   for e in all_evaluations(self.alg, ctx, guard))


def matrix_entails(matrices: Sequence[LogicalMatrix], ctx: VarContext, gamma: Iterable[Term],
                   delta: Iterable[Term], guard: int = DEFAULT_EVAL_GUARD) -> bool:
    """Designated-value preservation by direct enumeration of evaluations."""
    gamma, delta = list(gamma), list(delta)
    for M in matrices:
        for e in all_evaluations(M.alg, ctx, guard):
            if all(evaluate(g, e) in M.designated for g in gamma) and \
                    not all(evaluate(d, e) in M.designated for d in delta):
                return False
    return True


# -- engines -----------------------------------------------------------------------

class ConsequenceEngine:
    sig: Signature
    exact = True

    def entails(self, ctx: VarContext, gamma: Iterable[Term], delta: Iterable[Term]) -> Answer:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


class MatrixEngine(ConsequenceEngine):
    """Consequence of a finite class of logical matrices."""

    def __init__(self, matrices: Sequence[LogicalMatrix], guard: int = DEFAULT_EVAL_GUARD,
                 sig: Optional[Signature] = None):
        self.matrices = tuple(matrices)
        if not self.matrices and sig is None:
            raise AlgebraError("an empty matrix class needs an explicit signature", "no-signature")
        self.sig = sig or self.matrices[0].alg.sig
        for M in self.matrices:
            if M.alg.sig.ops != self.sig.ops:
                raise AlgebraError(f"matrix {M.name} is not over {self.sig.name}",
                                   "signature-mismatch")
        self.guard = guard
        self._tables: dict[VarContext, PointTable] = {}
        self._masks: dict[tuple[VarContext, Term], int] = {}
        self._designated = [M.designated for M in self.matrices]

    def table(self, ctx: VarContext) -> PointTable:
        t = self._tables.get(ctx)
        if t is None:
            t = PointTable([M.alg for M in self.matrices], ctx, self.guard)
            self._tables[ctx] = t
        return t

    def mask(self, ctx: VarContext, t: Term) -> int:
        key = (ctx, t)
        m = self._masks.get(key)
        if m is None:
            m = self.table(ctx).designated_mask(t, self._designated)
            self._masks[key] = m
        return m

    def set_mask(self, ctx, terms) -> int:
        m = self.table(ctx).full
        for t in terms:
            m &= self.mask(ctx, t)
        return m

    def entails(self, ctx, gamma, delta) -> Answer:
        return Answer.YES if self.set_mask(ctx, gamma) & ~self.set_mask(ctx, delta) == 0 \
            else Answer.NO

    def countermodel(self, ctx, gamma, delta) -> Optional[tuple[LogicalMatrix, Evaluation]]:
        bad = self.set_mask(ctx, gamma) & ~self.set_mask(ctx, delta)
        if not bad:
            return None
        k = (bad & -bad).bit_length() - 1
        tab = self.table(ctx)
        mi, _ = tab.points[k]
        return self.matrices[mi], tab.point_evaluation(k)

    def describe(self):
        return "matrices " + ", ".join(M.name for M in self.matrices)


class EquationalEngine(ConsequenceEngine):
    """``E |=_K F`` for a finite class K; queries are sets of equations."""

    def __init__(self, K: AlgebraClass, guard: int = DEFAULT_EVAL_GUARD):
        self.K = K
        self.sig = K.sig
        self.guard = guard
        self._tables: dict[VarContext, PointTable] = {}

    def table(self, ctx: VarContext) -> PointTable:
        t = self._tables.get(ctx)
        if t is None:
            t = PointTable(self.K.members, ctx, self.guard)
            self._tables[ctx] = t
        return t

    def mask(self, ctx, eq) -> int:
        return self.table(ctx).eq_mask(eq)

    def set_mask(self, ctx, eqs) -> int:
        return self.table(ctx).set_mask(eqs)

    def entails(self, ctx, E, F) -> Answer:
        return Answer.YES if self.set_mask(ctx, E) & ~self.set_mask(ctx, F) == 0 else Answer.NO

    def countermodel(self, ctx, E, F) -> Optional[Evaluation]:
        bad = self.set_mask(ctx, E) & ~self.set_mask(ctx, F)
        if not bad:
            return None
        return self.table(ctx).point_evaluation((bad & -bad).bit_length() - 1)

    def describe(self):
        return "equations over " + (", ".join(self.K.names) or "the empty class")


@dataclass(frozen=True)
class Budget:
    depth: int = 4
    instance_depth: int = 1
    instance_guard: int = DEFAULT_INSTANCE_GUARD


@dataclass
class Derivation:
    answer: Answer
    rounds: int
    derived: int
    trace: list[str] = field(default_factory=list)


class _Pattern:
    """A rule premise compiled for matching against ground terms."""

    __slots__ = ("term", "size")

    def __init__(self, term: Term):
        self.term = term
        self.size = _size(term)


def _size(t: Term) -> int:
    return 1 if type(t) is Var else 1 + sum(_size(a) for a in t.args)


def _match(pat: Term, t: Term, binding: dict) -> bool:
    if type(pat) is Var:
        b = binding.get(pat.name)
        if b is None:
            binding[pat.name] = t
            return True
        return b == t
    if type(t) is Var or pat.op != t.op or len(pat.args) != len(t.args):
        return False
    for p, a in zip(pat.args, t.args):
        if not _match(p, a, binding):
            return False
    return True


def _instantiate(t: Term, binding: dict) -> Term:
    if type(t) is Var:
        return binding[t.name]
    if not t.args:
        return t
    return App(t.op, tuple(_instantiate(a, binding) for a in t.args))


class _Index:
    """Derived formulas indexed by head symbol and by (head, first argument)."""

    def __init__(self, terms: Iterable[Term] = ()):
        self.all: dict[Term, None] = {}
        self.by_op: dict[Optional[str], list[Term]] = {}
        self.by_op0: dict[tuple[str, Term], list[Term]] = {}
        self.add_all(terms)

    def add_all(self, terms):
        for t in terms:
            if t in self.all:
                continue
            self.all[t] = None
            if type(t) is Var:
                self.by_op.setdefault(None, []).append(t)
            else:
                self.by_op.setdefault(t.op, []).append(t)
                if t.args:
                    self.by_op0.setdefault((t.op, t.args[0]), []).append(t)

    def candidates(self, pat: Term, binding: dict):
        if all(x in binding for x in variables(pat)):
            g = _instantiate(pat, binding)
            return (g,) if g in self.all else ()
        if type(pat) is Var:
            return list(self.all)
        if pat.args and all(x in binding for x in variables(pat.args[0])):
            return self.by_op0.get((pat.op, _instantiate(pat.args[0], binding)), ())
        return self.by_op.get(pat.op, ())


class RuleEngine(ConsequenceEngine):
    """Bounded forward chaining over rule instances.

    Start from the hypotheses together with every axiom instance whose
    schematic variables are sent to terms of depth at most
    ``budget.instance_depth``.  Each round fires every rule whose premises
    match derived formulas; conclusion variables not bound by a premise
    range over the same instance terms.  A formula not derived within
    ``budget.depth`` rounds gets ``UNKNOWN``.
    """

    exact = False

    def __init__(self, system: RuleSystem, budget: Budget = Budget()):
        self.system = system
        self.sig = system.sig
        self.budget = budget
        self._axiom_cache: dict[VarContext, dict[Term, str]] = {}
        self._pool_cache: dict[VarContext, list[Term]] = {}

    def with_budget(self, budget: Budget) -> RuleEngine:
        return RuleEngine(self.system, budget)

    def _pool(self, ctx):
        p = self._pool_cache.get(ctx)
        if p is None:
            p = enumerate_terms(self.sig, ctx, self.budget.instance_depth)
            self._pool_cache[ctx] = p
        return p

    def _guard_instances(self, rule, ctx, free_count):
        count = len(self._pool(ctx)) ** free_count
        if count > self.budget.instance_guard:
            raise GuardError(f"rule {rule.name} has {count} instances over {ctx}, "
                             f"above the instance guard {self.budget.instance_guard}")

    def _instances(self, rule: Rule, ctx: VarContext, fixed: dict) -> Iterable[dict]:
        free = [x for x in rule.schematic if x not in fixed]
        pool = self._pool(ctx)
        self._guard_instances(rule, ctx, len(free))
        for imgs in itertools.product(pool, repeat=len(free)):
            b = dict(fixed)
            b.update(zip(free, imgs))
            yield b

    def axiom_instances(self, ctx: VarContext) -> dict[Term, str]:
        got = self._axiom_cache.get(ctx)
        if got is None:
            got = {}
            for ax in self.system.axioms:
                if not ax.schematic.vars:
                    got.setdefault(ax.conclusion, ax.name)
                    continue
                batch = TermBatch([ax.conclusion])
                names = ax.schematic.vars
                pool = self._pool(ctx)
                self._guard_instances(ax, ctx, len(names))
                for imgs in itertools.product(pool, repeat=len(names)):
                    got.setdefault(batch.substitute_mapping(dict(zip(names, imgs)))[0], ax.name)
            self._axiom_cache[ctx] = got
        return got

    def derive(self, ctx: VarContext, gamma: Iterable[Term], phi: Term,
               trace: bool = False) -> Derivation:
        gamma = list(gamma)
        for t in gamma + [phi]:
            check_term(t, self.sig, ctx)
        why: dict[Term, tuple] = {g: ("hypothesis",) for g in gamma}

        def done(rounds):
            return Derivation(Answer.YES, rounds, len(why), self._trace(phi, why) if trace else [])

        if phi in why:
            return done(0)
        for t, name in self.axiom_instances(ctx).items():
            why.setdefault(t, ("axiom", name))
        if phi in why:
            return done(0)
        rules = [(r, sorted(r.premises, key=_size, reverse=True)) for r in self.system.rules]
        everything = _Index(why)
        fresh = everything
        for rnd in range(1, self.budget.depth + 1):
            new: dict[Term, tuple] = {}
            for rule, prems in rules:
                # semi-naive: some premise must be a formula that is new since last round
                pivots = [0] if fresh is everything else range(len(prems))
                for i in pivots:
                    for b in self._matches(prems, i, fresh, everything):
                        for full in self._complete(rule, ctx, b):
                            c = _instantiate(rule.conclusion, full)
                            if c not in why and c not in new:
                                new[c] = ("rule", rule.name,
                                          tuple(_instantiate(p, full) for p in rule.premises))
            if not new:
                return Derivation(Answer.UNKNOWN, rnd, len(why))
            why.update(new)
            everything.add_all(new)
            fresh = _Index(new)
            if phi in why:
                return done(rnd)
        return Derivation(Answer.UNKNOWN, self.budget.depth, len(why))

    def _complete(self, rule, ctx, b):
        if all(x in b for x in rule.schematic):
            return [b]
        return self._instances(rule, ctx, b)

    @staticmethod
    def _matches(prems, pivot, fresh, everything):
        """Bindings making every premise derived, with premise ``pivot`` drawn from ``fresh``."""
        order = [pivot] + [k for k in range(len(prems)) if k != pivot]

        def go(pos, binding):
            if pos == len(order):
                yield dict(binding)
                return
            k = order[pos]
            pat = prems[k]
            src = fresh if pos == 0 else everything
            for t in src.candidates(pat, binding):
                b = dict(binding)
                if _match(pat, t, b):
                    yield from go(pos + 1, b)

        return go(0, {})

    @staticmethod
    def _trace(phi, why) -> list[str]:
        out, seen = [], set()

        def visit(t):
            if t in seen:
                return
            seen.add(t)
            j = why[t]
            if j[0] == "rule":
                for p in j[2]:
                    visit(p)
                out.append(f"{print_term(t)}  [{j[1]} from "
                           f"{', '.join(print_term(p) for p in j[2])}]")
            elif j[0] == "axiom":
                out.append(f"{print_term(t)}  [axiom {j[1]}]")
            else:
                out.append(f"{print_term(t)}  [hypothesis]")

        visit(phi)
        return out

    def entails(self, ctx, gamma, delta) -> Answer:
        gamma = list(gamma)
        return conj(self.derive(ctx, gamma, d).answer for d in delta)

    def describe(self):
        return (f"rules ({len(self.system.rules)} rules, {len(self.system.axioms)} axioms; "
                f"depth {self.budget.depth}, instance depth {self.budget.instance_depth})")


def derive(R: RuleSystem, ctx: VarContext, gamma: Iterable[Term], phi: Term,
           budget: Budget = Budget()) -> Answer:
    return RuleEngine(R, budget).derive(ctx, gamma, phi).answer


def find_derivation(R: RuleSystem, ctx, gamma, phi, budget: Budget = Budget()) -> Derivation:
    return RuleEngine(R, budget).derive(ctx, gamma, phi, trace=True)


def axiom_extension(engine: ConsequenceEngine, scheme: Term, name: str = "ext") -> ConsequenceEngine:
    """Add an axiom scheme: appended for rule engines, filtered for matrix engines."""
    if isinstance(engine, RuleEngine):
        return RuleEngine(engine.system.with_axiom(name, scheme), engine.budget)
    if isinstance(engine, MatrixEngine):
        check_term(scheme, engine.sig, VarContext(variables(scheme)))
        return MatrixEngine([M for M in engine.matrices if M.validates(scheme, engine.guard)],
                            engine.guard, engine.sig)
    raise TypeError(f"cannot extend {type(engine).__name__} by an axiom scheme")


# -- grouped exhaustive checking ---------------------------------------------------------

@dataclass
class SetClass:
    """All subsets (up to a size bound) sharing one combined key."""

    key: tuple[int, ...]
    count: int
    rep: tuple


def grouped_sets(items: Iterable[tuple], max_size: int,
                 full: tuple[int, ...]) -> list[SetClass]:
    """Classify every subset of ``items`` of size <= max_size by the AND of its keys.

    Items are ``(key, item)`` or ``(key, item, weight)``; a weighted item
    stands for ``weight`` distinct members sharing its key.  ``full`` is the
    key of the empty set.  Counts are exact: a class records how many
    distinct subsets fall into it, with one representative.
    """
    groups: dict[tuple[int, ...], list] = {}
    for entry in items:
        key, item = entry[0], entry[1]
        w = entry[2] if len(entry) > 2 else 1
        g = groups.get(key)
        if g is None:
            groups[key] = g = [0, []]
        g[0] += w
        while len(g[1]) < max_size and w > 0:
            g[1].append(item)
            w -= 1
    states: dict[tuple[int, tuple], list] = {(0, full): [1, ()]}
    for gkey, (w, reps) in groups.items():
        nxt = {k: [v[0], v[1]] for k, v in states.items()}
        for (size, key), (cnt, rep) in states.items():
            for j in range(1, min(w, max_size - size) + 1):
                nk = (size + j, tuple(a & b for a, b in zip(key, gkey)))
                add = cnt * comb(w, j)
                if nk in nxt:
                    nxt[nk][0] += add
                else:
                    nxt[nk] = [add, rep + tuple(reps[:j])]
        states = nxt
    merged: dict[tuple, SetClass] = {}
    for (size, key), (cnt, rep) in sorted(states.items(), key=lambda kv: kv[0][0]):
        c = merged.get(key)
        if c is None:
            merged[key] = SetClass(key, cnt, rep)
        else:
            c.count += cnt
    return list(merged.values())


def all_subsets(items: Sequence, max_size: int) -> Iterable[tuple]:
    for k in range(max_size + 1):
        yield from itertools.combinations(items, k)


# -- structurality --------------------------------------------------------------------

@dataclass
class StructuralityReport:
    checked: int = 0
    skipped_unknown: int = 0
    failures: list[str] = field(default_factory=list)
    method: str = "direct"

    @property
    def holds(self) -> bool:
        return not self.failures

    def to_dict(self):
        return {"method": self.method, "checked": self.checked,
                "skipped_unknown": self.skipped_unknown, "failures": self.failures[:10],
                "holds": self.holds}


def _fmt_set(ts) -> str:
    return "{" + ", ".join(print_term(t) for t in ts) + "}"


def structurality_test(engine: ConsequenceEngine, ctx_pairs: Sequence[tuple[VarContext, VarContext]],
                       depth: int, set_size: int, grouped: Optional[bool] = None,
                       max_failures: int = 10) -> StructuralityReport:
    """Check that Gamma |- Delta implies Gamma^f |- Delta^f on a bounded domain.

    Every renaming between each context pair and every pair of term sets of
    size <= ``set_size`` at depth <= ``depth`` is considered.  Mask-based
    engines (matrix engines) are checked class-by-class, which is exact
    because their answer depends only on the conjunction of per-formula
    masks; other engines are queried directly.
    """
    if grouped is None:
        grouped = isinstance(engine, MatrixEngine)
    rep = StructuralityReport(method="grouped" if grouped else "direct")
    for X, Y in ctx_pairs:
        terms = enumerate_terms(engine.sig, X, depth)
        for f in enumerate_renamings(X, Y):
            renamed = [rename(t, f) for t in terms]
            if grouped:
                _structural_grouped(engine, X, Y, f, terms, renamed, set_size, rep, max_failures)
            else:
                _structural_direct(engine, X, Y, f, terms, renamed, set_size, rep, max_failures)
    return rep


def _structural_grouped(engine, X, Y, f, terms, renamed, k, rep, max_failures):
    items = [((engine.mask(X, t), engine.mask(Y, r)), (t, r)) for t, r in zip(terms, renamed)]
    full = (engine.table(X).full, engine.table(Y).full)
    classes = grouped_sets(items, k, full)
    for A in classes:
        for B in classes:
            rep.checked += A.count * B.count
            if A.key[0] & ~B.key[0] == 0 and A.key[1] & ~B.key[1] != 0:
                if len(rep.failures) < max_failures:
                    g = [t for t, _ in A.rep]
                    d = [t for t, _ in B.rep]
                    rep.failures.append(f"{_fmt_set(g)} |- {_fmt_set(d)} over {X} but not "
                                        f"after renaming {f}")


def _structural_direct(engine, X, Y, f, terms, renamed, k, rep, max_failures):
    image = dict(zip(terms, renamed))
    sets = list(all_subsets(terms, k))
    for g in sets:
        for d in sets:
            a = engine.entails(X, g, d)
            if a is not Answer.YES:
                continue
            b = engine.entails(Y, [image[t] for t in g], [image[t] for t in d])
            rep.checked += 1
            if b is Answer.UNKNOWN:
                rep.skipped_unknown += 1
            elif b is Answer.NO and len(rep.failures) < max_failures:
                rep.failures.append(f"{_fmt_set(g)} |- {_fmt_set(d)} over {X} but not after "
                                    f"renaming {f}")


# -- theories ---------------------------------------------------------------------------

def theories_lattice(engine: ConsequenceEngine, ctx: VarContext, universe: Sequence[Term],
                     guard: int = 12) -> tuple[FreeSupLattice, ClosureOperator]:
    """The free suplattice on ``universe`` with the engine's closure on it."""
    universe = list(dict.fromkeys(universe))
    if len(universe) > guard:
        raise GuardError(f"universe of {len(universe)} formulas exceeds guard {guard}")
    P = free_suplattice([str(t) if isinstance(t, Equation) else print_term(t)
                         for t in universe])
    imgs = []
    for S in range(P.n):
        gamma = [universe[b] for b in range(len(universe)) if (S >> b) & 1]
        m = 0
        for b, phi in enumerate(universe):
            if engine.entails(ctx, gamma, [phi]) is Answer.YES:
                m |= 1 << b
        imgs.append(m)
    bad = closure_violation(P, imgs)
    if bad:
        raise BudgetError(f"entailment restricted to the universe is not a closure ({bad}); "
                          "a larger derivation budget may help")
    return P, ClosureOperator(P, imgs, check=False)
