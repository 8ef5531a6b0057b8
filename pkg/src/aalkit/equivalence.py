"""Translations between formulas and equations and equivalence checking.

A formula-to-equation translation is a list of equation templates in one
hole ``_``; an equation-to-formula translation is a list of formula
templates in holes ``_1`` and ``_2``.  Both act on sets by union, which is
what makes them join-preserving maps of free suplattices.

Verdicts are exact on a bounded domain: every context drawn from a fixed
variable pool up to a size bound, every term up to a depth bound and every
set up to a size bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .algebra import AlgebraClass
from .consequence import (Answer, ConsequenceEngine, EquationalEngine, MatrixEngine,
                          all_subsets, grouped_sets, theories_lattice)
from .errors import TermError
from .suplattice import (QuotientFin, SupMorphism, image_factorization,
                         inverse, iso_search, lift_through_surjection, quotient_iso)
from .terms import (App, Equation, Signature, Term, Var, VarContext, check_term,
                    enumerate_terms, print_term, standard_contexts, variables)

HOLE = "_"
HOLE_LEFT = "_1"
HOLE_RIGHT = "_2"


def _fill(t: Term, binding: dict) -> Term:
    if type(t) is Var:
        return binding[t.name]
    if not t.args:
        return t
    return App(t.op, tuple(_fill(a, binding) for a in t.args))


@dataclass(frozen=True)
class TranslationFmlToEq:
    templates: tuple[Equation, ...]

    def __post_init__(self):
        ts = tuple(Equation(*e) for e in self.templates)
        object.__setattr__(self, "templates", ts)
        if not ts:
            raise TermError("tau needs at least one template", "empty-translation")
        for eq in ts:
            for side in eq:
                bad = [x for x in variables(side) if x != HOLE]
                if bad:
                    raise TermError(f"tau template uses {bad}; only the hole {HOLE} is allowed",
                                    "unknown-identifier")

    def check(self, sig: Signature):
        for eq in self.templates:
            for side in eq:
                check_term(side, sig, VarContext((HOLE,)))

    def __call__(self, phi: Term) -> tuple[Equation, ...]:
        b = {HOLE: phi}
        return tuple(Equation(_fill(e.lhs, b), _fill(e.rhs, b)) for e in self.templates)

    def __str__(self):
        return "; ".join(str(e) for e in self.templates)


@dataclass(frozen=True)
class TranslationEqToFml:
    templates: tuple[Term, ...]

    def __post_init__(self):
        ts = tuple(self.templates)
        object.__setattr__(self, "templates", ts)
        if not ts:
            raise TermError("delta needs at least one template", "empty-translation")
        for t in ts:
            bad = [x for x in variables(t) if x not in (HOLE_LEFT, HOLE_RIGHT)]
            if bad:
                raise TermError(f"delta template uses {bad}; only holes {HOLE_LEFT}, "
                                f"{HOLE_RIGHT} are allowed", "unknown-identifier")

    def check(self, sig: Signature):
        for t in self.templates:
            check_term(t, sig, VarContext((HOLE_LEFT, HOLE_RIGHT)))

    def __call__(self, eq: Equation) -> tuple[Term, ...]:
        b = {HOLE_LEFT: eq.lhs, HOLE_RIGHT: eq.rhs}
        return tuple(_fill(t, b) for t in self.templates)

    def __str__(self):
        return "; ".join(print_term(t) for t in self.templates)


def apply_tau(tau: TranslationFmlToEq, gamma: Iterable[Term]) -> list[Equation]:
    out: dict[Equation, None] = {}
    for phi in gamma:
        for eq in tau(phi):
            out.setdefault(eq)
    return list(out)


def apply_delta(delta: TranslationEqToFml, E: Iterable[Equation]) -> list[Term]:
    out: dict[Term, None] = {}
    for eq in E:
        for t in delta(eq):
            out.setdefault(t)
    return list(out)


# -- domains and reports ------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    ctx_bound: int = 2
    depth: int = 2
    set_size: int = 2
    pool: tuple[str, ...] = ("p", "q", "r", "s")

    def contexts(self) -> list[VarContext]:
        return standard_contexts(self.ctx_bound, self.pool)

    def to_dict(self):
        return {"ctx_bound": self.ctx_bound, "depth": self.depth, "set_size": self.set_size,
                "contexts": [list(c.vars) for c in self.contexts()]}


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    skipped_unknown: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    method: str = "direct"

    @property
    def status(self) -> str:
        if self.counterexamples:
            return "fail"
        if self.skipped_unknown:
            return "inconclusive"
        return "pass"

    def to_dict(self):
        return {"name": self.name, "status": self.status, "method": self.method,
                "checked": self.checked, "skipped_unknown": self.skipped_unknown,
                "counterexamples": self.counterexamples, "warnings": self.warnings}


def _fmt_terms(ts) -> list[str]:
    return [print_term(t) for t in ts]


def _fmt_eqs(es) -> list[str]:
    return [str(e) for e in es]


def _all_equations(terms: Sequence[Term]) -> list[Equation]:
    return [Equation(a, b) for a in terms for b in terms]


def _finish(rep: CheckReport):
    if rep.checked == 0 and rep.skipped_unknown == 0:
        rep.warnings.append("empty domain: the check holds vacuously")
    return rep


# -- first condition list: formulas represented in equations --------------------------

def representation_check(engine: ConsequenceEngine, K: AlgebraClass, tau: TranslationFmlToEq,
                         domain: Domain, grouped: Optional[bool] = None,
                         max_counterexamples: int = 5) -> CheckReport:
    """Gamma |- Delta iff tau(Gamma) |=_K tau(Delta), on every domain point."""
    eqe = EquationalEngine(K)
    if grouped is None:
        grouped = isinstance(engine, MatrixEngine)
    rep = CheckReport("representation", method="grouped" if grouped else "direct")
    for ctx in domain.contexts():
        terms = enumerate_terms(engine.sig, ctx, domain.depth)
        found = 0
        if grouped:
            items = [((engine.mask(ctx, t), eqe.set_mask(ctx, tau(t))), t) for t in terms]
            classes = grouped_sets(items, domain.set_size,
                                   (engine.table(ctx).full, eqe.table(ctx).full))
            for A in classes:
                for B in classes:
                    rep.checked += A.count * B.count
                    left = A.key[0] & ~B.key[0] == 0
                    right = A.key[1] & ~B.key[1] == 0
                    if left != right and found < max_counterexamples:
                        found += 1
                        rep.counterexamples.append(_rep_cex(ctx, A.rep, B.rep, tau, left))
        else:
            sets = list(all_subsets(terms, domain.set_size))
            for g in sets:
                tg = apply_tau(tau, g)
                for d in sets:
                    a = engine.entails(ctx, g, d)
                    if a is Answer.UNKNOWN:
                        rep.skipped_unknown += 1
                        continue
                    rep.checked += 1
                    left = a is Answer.YES
                    right = eqe.entails(ctx, tg, apply_tau(tau, d)) is Answer.YES
                    if left != right and found < max_counterexamples:
                        found += 1
                        rep.counterexamples.append(_rep_cex(ctx, g, d, tau, left))
    return _finish(rep)


def _rep_cex(ctx, g, d, tau, left):
    return {"ctx": list(ctx.vars), "gamma": _fmt_terms(g), "delta": _fmt_terms(d),
            "tau_gamma": _fmt_eqs(apply_tau(tau, g)), "tau_delta": _fmt_eqs(apply_tau(tau, d)),
            "side": "formula side only" if left else "equation side only"}


def inversion_check(K: AlgebraClass, tau: TranslationFmlToEq, delta: TranslationEqToFml,
                    domain: Domain, max_counterexamples: int = 5) -> CheckReport:
    """z and tau(delta(z)) are K-interderivable for every equation set z."""
    eqe = EquationalEngine(K)
    rep = CheckReport("inversion", method="grouped")
    for ctx in domain.contexts():
        terms = enumerate_terms(K.sig, ctx, domain.depth)
        eqs = _all_equations(terms)
        items = [((eqe.mask(ctx, z), eqe.set_mask(ctx, apply_tau(tau, delta(z)))), z)
                 for z in eqs]
        full = eqe.table(ctx).full
        classes = grouped_sets(items, domain.set_size, (full, full))
        found = 0
        for C in classes:
            rep.checked += C.count
            a, b = C.key
            if a != b and found < max_counterexamples:
                found += 1
                back = apply_tau(tau, apply_delta(delta, C.rep))
                dirs = []
                if a & ~b:
                    dirs.append("z does not entail tau(delta(z))")
                if b & ~a:
                    dirs.append("tau(delta(z)) does not entail z")
                rep.counterexamples.append({"ctx": list(ctx.vars), "z": _fmt_eqs(C.rep),
                                            "tau_delta_z": _fmt_eqs(back), "fails": dirs})
    return _finish(rep)


# -- second condition list: equations represented in formulas ---------------------------

def representation_check_eq(engine: ConsequenceEngine, K: AlgebraClass,
                            delta: TranslationEqToFml, domain: Domain,
                            max_counterexamples: int = 5) -> CheckReport:
    """E |=_K F iff delta(E) |- delta(F); needs a mask-based formula engine."""
    if not isinstance(engine, MatrixEngine):
        raise TypeError("the equation-side representation check needs a matrix engine")
    eqe = EquationalEngine(K)
    rep = CheckReport("representation (equations)", method="grouped")
    for ctx in domain.contexts():
        terms = enumerate_terms(K.sig, ctx, domain.depth)
        items = [((eqe.mask(ctx, z), engine.set_mask(ctx, delta(z))), z)
                 for z in _all_equations(terms)]
        classes = grouped_sets(items, domain.set_size,
                               (eqe.table(ctx).full, engine.table(ctx).full))
        found = 0
        for A in classes:
            for B in classes:
                rep.checked += A.count * B.count
                left = A.key[0] & ~B.key[0] == 0
                right = A.key[1] & ~B.key[1] == 0
                if left != right and found < max_counterexamples:
                    found += 1
                    rep.counterexamples.append({
                        "ctx": list(ctx.vars), "E": _fmt_eqs(A.rep), "F": _fmt_eqs(B.rep),
                        "side": "equation side only" if left else "formula side only"})
    return _finish(rep)


def inversion_check_fml(engine: ConsequenceEngine, tau: TranslationFmlToEq,
                        delta: TranslationEqToFml, domain: Domain,
                        max_counterexamples: int = 5) -> CheckReport:
    """Gamma and delta(tau(Gamma)) are interderivable for every formula set."""
    if not isinstance(engine, MatrixEngine):
        raise TypeError("the formula-side inversion check needs a matrix engine")
    rep = CheckReport("inversion (formulas)", method="grouped")
    for ctx in domain.contexts():
        terms = enumerate_terms(engine.sig, ctx, domain.depth)
        items = [((engine.mask(ctx, t), engine.set_mask(ctx, apply_delta(delta, tau(t)))), t)
                 for t in terms]
        full = engine.table(ctx).full
        classes = grouped_sets(items, domain.set_size, (full, full))
        found = 0
        for C in classes:
            rep.checked += C.count
            if C.key[0] != C.key[1] and found < max_counterexamples:
                found += 1
                rep.counterexamples.append({"ctx": list(ctx.vars), "gamma": _fmt_terms(C.rep)})
    return _finish(rep)


@dataclass
class EquivalenceVerdict:
    representation_forward: CheckReport
    inversion: CheckReport
    domain: Domain
    symmetric: list[CheckReport] = field(default_factory=list)

    @property
    def status(self) -> str:
        parts = [self.representation_forward.status, self.inversion.status]
        if "fail" in parts:
            return "fail"
        if "inconclusive" in parts:
            return "inconclusive"
        return "pass"

    def to_dict(self):
        return {"status": self.status, "domain": self.domain.to_dict(),
                "representation_forward": self.representation_forward.to_dict(),
                "inversion": self.inversion.to_dict(),
                "symmetric": [r.to_dict() for r in self.symmetric]}


def algebraisation_check(engine: ConsequenceEngine, K: AlgebraClass, tau: TranslationFmlToEq,
                         delta: TranslationEqToFml, domain: Domain = Domain(),
                         symmetric: bool = False) -> EquivalenceVerdict:
    """Both conditions of the first list; optionally the second list as a report."""
    tau.check(engine.sig)
    delta.check(engine.sig)
    v = EquivalenceVerdict(representation_check(engine, K, tau, domain),
                           inversion_check(K, tau, delta, domain), domain)
    if symmetric and isinstance(engine, MatrixEngine):
        v.symmetric = [representation_check_eq(engine, K, delta, domain),
                       inversion_check_fml(engine, tau, delta, domain)]
    return v


# -- theories-lattice comparison ---------------------------------------------------------

def induced_theory_map(engine: ConsequenceEngine, K: AlgebraClass, tau: TranslationFmlToEq,
                       ctx: VarContext, universe: Sequence[Term]) -> tuple[dict, bool, bool]:
    """Map closed formula theories to closed equation theories along tau.

    Returns the map (closed theory -> closed theory, as index bitmasks),
    whether it is injective, and whether it commutes with the closures,
    i.e. tau of the closure of Gamma has the same equational closure as
    tau of Gamma.
    """
    universe = list(dict.fromkeys(universe))
    eq_universe: list[Equation] = apply_tau(tau, universe)
    P, j = theories_lattice(engine, ctx, universe)
    Q, k = theories_lattice(EquationalEngine(K), ctx, eq_universe)
    pos = {e: i for i, e in enumerate(eq_universe)}

    def tau_mask(S):
        m = 0
        for b in range(len(universe)):
            if (S >> b) & 1:
                for e in tau(universe[b]):
                    m |= 1 << pos[e]
        return m

    mapping = {T: k(tau_mask(T)) for T in j.fixed_points()}
    injective = len(set(mapping.values())) == len(mapping)
    commutes = all(k(tau_mask(j(S))) == k(tau_mask(S)) for S in range(P.n))
    return mapping, injective, commutes


# -- the quotient-isomorphism route -----------------------------------------------------------

@dataclass
class QuotientEquivalence:
    rho: SupMorphism
    tau: SupMorphism
    delta: SupMorphism
    checks: dict[str, bool]

    @property
    def holds(self) -> bool:
        return all(self.checks.values())


def equivalence_via_quotient_iso(q1: QuotientFin, q2: QuotientFin,
                                 bound: int = 12) -> Optional[QuotientEquivalence]:
    """Translations between free sources from an isomorphism of the quotient targets.

    Returns None when the targets are not isomorphic; that answer is
    definitive.  Otherwise tau lifts q1;rho through q2 and delta lifts
    q2;rho^-1 through q1, and every equality the equivalence needs is
    recorded in ``checks``.
    """
    phi = iso_search(q1.target, q2.target, bound)
    if phi is None:
        return None
    rho = SupMorphism(q1.target, q2.target, phi, check=False)
    rho_inv = inverse(rho)
    tau = lift_through_surjection(q1.q.then(rho), q2)
    delta = lift_through_surjection(q2.q.then(rho_inv), q1)
    tq2 = tau.then(q2.q)
    dq1 = delta.then(q1.q)
    e1, _ = image_factorization(tq2)
    e2, _ = image_factorization(dq1)
    checks = {
        "tau;q2 = q1;rho": tq2.images == q1.q.then(rho).images,
        "delta;q1 = q2;rho^-1": dq1.images == q2.q.then(rho_inv).images,
        "q1 is the image of tau;q2": quotient_iso(e1, q1) is not None,
        "delta;tau;q2 = q2": delta.then(tq2).images == q2.q.images,
        "q2 is the image of delta;q1": quotient_iso(e2, q2) is not None,
        "tau;delta;q1 = q1": tau.then(dq1).images == q1.q.images,
    }
    return QuotientEquivalence(rho, tau, delta, checks)
