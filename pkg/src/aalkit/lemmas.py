"""Property suites run by ``check-lemmas``.

Each suite returns a :class:`SuiteResult` with an instance count and a few
details.  Suites are deterministic given the :class:`RunConfig`; random
sampling only happens at the suplattice level and is seeded.
"""

from __future__ import annotations

import contextlib
import gc
import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from . import bundles
from .algebra import (AlgebraClass, FuncassReport, PointTable, all_evaluations, free_algebra,
                      funcass_check, semantic_consequence)
from .config import RunConfig
from .consequence import grouped_sets, structurality_test
from .equivalence import Domain, algebraisation_check, equivalence_via_quotient_iso
from .suplattice import (FiniteSupLattice, MorphismSampler, QuotientFin,
                         SupMorphism, adjunction_holds, all_closure_operators, all_lattices,
                         closure_to_consequence, closure_to_quotient, closure_violation,
                         consequence_to_closure, free_extension,
                         free_suplattice, image_factorization, image_lattice,
                         interior_violation, iso_search, left_adjoint, lift_through_surjection,
                         quotient_iso, quotient_to_closure, right_adjoint,
                         surjectivity_duality_check)
from .terms import (Equation, Renaming, TermBatch, TermSubstitution, Var,
                    enumerate_renamings, enumerate_substitutions, enumerate_terms, rename,
                    standard_contexts)


@dataclass
class SuiteResult:
    name: str
    instances: int = 0
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, msg: str, limit: int = 10):
        if len(self.failures) < limit:
            self.failures.append(msg)
        else:
            self.details["failures_truncated"] = True

    def to_dict(self):
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "instances": self.instances, "failures": self.failures,
                "details": self.details}


@contextlib.contextmanager
def _gc_paused():
    # The term suites allocate tens of millions of acyclic tuples; refcounting frees
    # them, and cyclic collection passes over a large host heap only cost time.
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


# -- terms -------------------------------------------------------------------------------

@_gc_paused()
def monad_laws(cfg: RunConfig) -> SuiteResult:
    """Unit laws, associativity of substitution and functoriality of renaming."""
    res = SuiteResult("monad-laws")
    sig = bundles.signature(bundles.BOOL)
    ctxs = standard_contexts(cfg.ctx_bound)
    image_depth = max(cfg.depth_bound - 1, 0)
    unit_n = assoc_n = rename_n = 0
    for X in ctxs:
        T = enumerate_terms(sig, X, cfg.depth_bound)
        bT = TermBatch(T)
        if bT.substitute(TermSubstitution.unit(X)) != T:
            res.fail(f"right unit law fails over {X}")
        unit_n += len(T)
        for Y in ctxs:
            subs_xy = enumerate_substitutions(X, Y, sig, image_depth)
            for s in subs_xy:
                A = bT.substitute(s)
                unit_n += len(X)
                for x in X:
                    if A[T.index(Var(x))] != s(x):
                        res.fail(f"left unit law fails at {x} under {s}")
                bA = TermBatch(A)
                for Z in ctxs:
                    for r in enumerate_substitutions(Y, Z, sig, image_depth):
                        assoc_n += len(T)
                        if bA.substitute(r) != bT.substitute(s.then(r)):
                            res.fail(f"associativity fails for {s} then {r}")
            for f in enumerate_renamings(X, Y):
                fT = [rename(t, f) for t in T]
                for Z in ctxs:
                    for g in enumerate_renamings(Y, Z):
                        rename_n += len(T)
                        fg = f.then(g)
                        if [rename(t, g) for t in fT] != [rename(t, fg) for t in T]:
                            res.fail(f"rename composition fails for {f} then {g}")
            if [rename(t, Renaming.identity(X)) for t in T] != T:
                res.fail(f"rename identity fails over {X}")
    res.instances = unit_n + assoc_n + rename_n
    res.details = {"signature": sig.name, "depth": cfg.depth_bound, "image_depth": image_depth,
                   "unit": unit_n, "associativity": assoc_n, "renaming": rename_n}
    return res


# -- suplattices -----------------------------------------------------------------------------

def duality(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("duality")
    sampler = MorphismSampler(cfg.seed, 6)
    surj = inj = 0
    for k, f in enumerate(sampler.sample(cfg.samples)):
        rep = surjectivity_duality_check(f)
        g = right_adjoint(f)
        surj += rep.surjective
        inj += rep.injective
        if not rep.holds:
            res.fail(f"sample {k}: {rep}")
        if not adjunction_holds(f, g):
            res.fail(f"sample {k}: adjunction fails")
        if left_adjoint(g).images != f.images:
            res.fail(f"sample {k}: left adjoint of right adjoint differs")
        gf = f.then(g)
        if closure_violation(f.source, gf.images):
            res.fail(f"sample {k}: g after f is not a closure")
        if interior_violation(f.target, g.then(f).images):
            res.fail(f"sample {k}: f after g is not an interior operator")
        res.instances += 1
    res.details = {"seed": cfg.seed, "surjective": surj, "injective": inj}
    return res


def factorisation(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("factorisation")
    sampler = MorphismSampler(cfg.seed, 6)
    for k, f in enumerate(sampler.sample(cfg.samples)):
        e, m = image_factorization(f)
        if e.q.then(m).images != f.images:
            res.fail(f"sample {k}: composite differs from f")
        if not m.is_injective() or not e.q.is_surjective():
            res.fail(f"sample {k}: factors are not surjective/injective")
        img, _ = image_lattice(f)
        if iso_search(e.target, img) is None:
            res.fail(f"sample {k}: middle object is not the set-image")
        res.instances += 1
    res.details = {"seed": cfg.seed}
    return res


def bijection(cfg: RunConfig) -> SuiteResult:
    """Closure operators, consequence relations and quotients on every small lattice."""
    res = SuiteResult("bijection")
    lattices = all_lattices(cfg.max_elems)
    ops = 0
    for L in lattices:
        for j in all_closure_operators(L):
            ops += 1
            c = closure_to_consequence(j)
            if c.violations():
                res.fail(f"{L.name}: induced relation violates {c.violations()[0]}")
            if consequence_to_closure(c) != j:
                res.fail(f"{L.name}: closure -> consequence -> closure differs for {j}")
            if closure_to_consequence(consequence_to_closure(c)) != c:
                res.fail(f"{L.name}: consequence round trip differs")
            q = closure_to_quotient(j)
            if quotient_to_closure(q) != j:
                res.fail(f"{L.name}: closure -> quotient -> closure differs for {j}")
            q2 = closure_to_quotient(quotient_to_closure(q))
            if quotient_iso(q, q2) is None:
                res.fail(f"{L.name}: quotient round trip is not isomorphic over the source")
            for w in range(L.n):
                closed = j(w) == w
                char = all(L.leq(y, w) for y in c.consequences(w))
                if closed != char:
                    res.fail(f"{L.name}: closed-theory characterisation fails at {L.label(w)}")
            res.instances += 1
    res.details = {"max_elems": cfg.max_elems, "lattices": len(lattices), "closures": ops}
    return res


def lifting(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("lifting")
    rng = random.Random(cfg.seed)
    sampler = MorphismSampler(cfg.seed, 6)
    for k in range(cfg.samples):
        q = QuotientFin(sampler.surjection(), check=False)
        T = [f"t{i}" for i in range(rng.randint(0, 3))]
        P = free_suplattice(T)
        s = free_extension(P, q.target, [rng.randrange(q.target.n) for _ in T])
        L = lift_through_surjection(s, q)
        if L.then(q.q).images != s.images:
            res.fail(f"sample {k}: lift does not commute")
        res.instances += 1
    res.details = {"seed": cfg.seed}
    return res


def _quotients_of_p2():
    P = free_suplattice(["a", "b"])
    qs = [closure_to_quotient(j) for j in all_closure_operators(P)]
    out = []
    for q in qs:
        out.append(q)
        # the same quotient presented on a relabelled, reordered target
        B = q.target
        perm = list(reversed(range(B.n)))
        labels = [f"y{k}" for k in range(B.n)]
        up = [0] * B.n
        for i in range(B.n):
            up[perm[i]] = sum(1 << perm[j] for j in range(B.n) if B.leq(i, j))
        B2 = FiniteSupLattice(labels, up, B.name + "'")
        out.append(QuotientFin(SupMorphism(P, B2, [perm[y] for y in q.q.images], check=False),
                               check=False))
    return out


def quotient_iso_suite(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("quotient-iso")
    qs = _quotients_of_p2()
    positive = negative = 0
    for q1, q2 in itertools.product(qs, repeat=2):
        out = equivalence_via_quotient_iso(q1, q2, cfg.guards.iso_elements)
        res.instances += 1
        if out is None:
            negative += 1
            if q1.target.n == q2.target.n and iso_search(q1.target, q2.target) is not None:
                res.fail("negative answer for isomorphic targets")
            continue
        positive += 1
        bad = [k for k, v in out.checks.items() if not v]
        if bad:
            res.fail(f"{q1} vs {q2}: {bad}")
    res.details = {"quotients": len(qs), "isomorphic_pairs": positive,
                   "non_isomorphic_pairs": negative}
    return res


# -- algebra ------------------------------------------------------------------------------------

def funcass(cfg: RunConfig) -> SuiteResult:
    """Evaluation along a renaming equals evaluation of the renamed term."""
    res = SuiteResult("funcass")
    sig = bundles.signature(bundles.BOOL)
    A = bundles.b2(bundles.BOOL)
    rep = FuncassReport()
    for X in standard_contexts(cfg.ctx_bound):
        T = enumerate_terms(sig, X, cfg.depth_bound)
        for Y in standard_contexts(cfg.ctx_bound):
            for f in enumerate_renamings(X, Y):
                for e in all_evaluations(A, Y):
                    funcass_check(A, f, e, T, rep)
    res.instances = rep.checked
    for msg in rep.failures[:10]:
        res.fail(msg)
    return res


def _term_vectors(table: PointTable, terms):
    return [table.vector(t) for t in terms]


def _eq_mask(va, vb) -> int:
    m = 0
    for k, (a, b) in enumerate(zip(va, vb)):
        if a == b:
            m |= 1 << k
    return m


def structurality(cfg: RunConfig) -> SuiteResult:
    """E |=_K F implies E^f |=_K F^f, and the same for the CPC matrix engine.

    Equation sets are classified by their satisfaction masks before and
    after renaming; the implication is then checked between every pair of
    classes, which covers every pair of sets exactly once by count.
    """
    res = SuiteResult("structurality")
    sig = bundles.signature(bundles.BOOL)
    K = [bundles.b2(bundles.BOOL)]
    ctxs = standard_contexts(cfg.ctx_bound)
    eq_instances = 0
    for X in ctxs:
        tX = PointTable(K, X, cfg.guards.eval_points)
        T = enumerate_terms(sig, X, cfg.depth_bound)
        vx = _term_vectors(tX, T)
        for Y in ctxs:
            tY = PointTable(K, Y, cfg.guards.eval_points)
            for f in enumerate_renamings(X, Y):
                vy = _term_vectors(tY, [rename(t, f) for t in T])
                groups: dict = {}
                for i, key in enumerate(zip(vx, vy)):
                    groups.setdefault(key, []).append(i)
                keys = list(groups)
                items = [((_eq_mask(a[0], b[0]), _eq_mask(a[1], b[1])),
                          Equation(T[groups[a][0]], T[groups[b][0]]),
                          len(groups[a]) * len(groups[b]))
                         for a in keys for b in keys]
                classes = grouped_sets(items, cfg.set_size_bound, (tX.full, tY.full))
                for cA in classes:
                    for cB in classes:
                        eq_instances += cA.count * cB.count
                        if cA.key[0] & ~cB.key[0] == 0 and cA.key[1] & ~cB.key[1] != 0:
                            res.fail(f"{[str(e) for e in cA.rep]} |= {[str(e) for e in cB.rep]} "
                                     f"over {X} but not after {f}")
    engine = bundles.cpc_matrices()
    pairs = [(X, Y) for X in ctxs for Y in ctxs]
    rep = structurality_test(engine, pairs, cfg.depth_bound, cfg.set_size_bound)
    for msg in rep.failures:
        res.fail(msg)
    res.instances = eq_instances + rep.checked
    res.details = {"equation_pairs": eq_instances, "matrix_pairs": rep.checked}
    return res


def lindenbaum_tarski(cfg: RunConfig) -> SuiteResult:
    """Equality in the free algebra coincides with K-validity of the equation."""
    res = SuiteResult("lindenbaum-tarski")
    sig = bundles.signature(bundles.HEYT)
    classes = {"B2": AlgebraClass((bundles.b2(),)),
               "B2+H3": AlgebraClass((bundles.b2(), bundles.h3()))}
    sizes = {}
    for name, K in classes.items():
        for X in standard_contexts(cfg.ctx_bound):
            fr = free_algebra(K, X, cfg.guards.free_carrier, cfg.guards.eval_points)
            sizes[f"{name}/{len(X)}"] = fr.alg.n
            T = enumerate_terms(sig, X, cfg.depth_bound)
            blocks: dict[int, list] = {}
            for t in T:
                blocks.setdefault(fr.lam(t), []).append(t)
            reps = [b[0] for b in blocks.values()]
            for b in blocks.values():
                for t in b[1:]:
                    if not semantic_consequence(K, X, [], [Equation(b[0], t)]):
                        res.fail(f"{name}: equal in the free algebra but not valid: {t}")
            for r1, r2 in itertools.combinations(reps, 2):
                if semantic_consequence(K, X, [], [Equation(r1, r2)]):
                    res.fail(f"{name}: valid but distinct in the free algebra: {r1} ~ {r2}")
            res.instances += len(T) * len(T)
            if not fr.check_homomorphism():
                res.fail(f"{name}: free algebra tables are not componentwise")
    res.details = {"free_algebra_sizes": sizes, "signature": sig.name}
    return res


def algebraisation(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("algebraisation")
    sig = bundles.signature(bundles.CPC)
    engine = bundles.cpc_matrices()
    K = AlgebraClass((bundles.b2(bundles.CPC),))
    domain = Domain(cfg.ctx_bound, cfg.depth_bound, cfg.set_size_bound)
    tau, delta = bundles.translation("cpc.tr", sig)
    v = algebraisation_check(engine, K, tau, delta, domain)
    res.instances += v.representation_forward.checked + v.inversion.checked
    if v.status != "pass":
        res.fail(f"CPC verdict is {v.status}")
    _, broken = bundles.translation("broken.tr", sig)
    vb = algebraisation_check(engine, K, tau, broken, domain)
    res.instances += vb.representation_forward.checked + vb.inversion.checked
    if vb.status != "fail" or vb.inversion.status != "fail":
        res.fail("broken delta was not rejected on inversion")
    res.details = {"cpc": v.status, "broken_delta": vb.status,
                   "broken_counterexample": (vb.inversion.counterexamples or [None])[0]}
    return res


SUITES: dict[str, Callable[[RunConfig], SuiteResult]] = {
    "monad-laws": monad_laws,
    "duality": duality,
    "bijection": bijection,
    "factorisation": factorisation,
    "funcass": funcass,
    "structurality": structurality,
    "lindenbaum-tarski": lindenbaum_tarski,
    "algebraisation": algebraisation,
    "lifting": lifting,
    "quotient-iso": quotient_iso_suite,
}
