import pytest
from hypothesis import given, strategies as st

from aalkit import bundles
from aalkit.algebra import AlgebraClass, semantic_consequence
from aalkit.consequence import (Answer, Budget, EquationalEngine, LogicalMatrix, MatrixEngine,
                                Rule, RuleEngine, RuleSystem, all_subsets, axiom_extension, conj,
                                derive, find_derivation, grouped_sets, matrix_entails,
                                structurality_test, theories_lattice)
from aalkit.errors import AlgebraError, BudgetError, GuardError, TermError
from aalkit.parsing import parse_term, parse_terms
from aalkit.terms import Equation, Var, VarContext, enumerate_terms, standard_contexts

from conftest import terms_over

CPC = bundles.signature(bundles.CPC)
HEYT = bundles.signature(bundles.HEYT)
PQ = VarContext.of("p", "q")


def T(text, sig=CPC):
    return parse_term(text, sig, None)


def test_conj():
    assert conj([]) is Answer.YES
    assert conj([Answer.YES, Answer.UNKNOWN]) is Answer.UNKNOWN
    assert conj([Answer.UNKNOWN, Answer.NO]) is Answer.NO


def test_matrix_validation():
    with pytest.raises(AlgebraError):
        LogicalMatrix(bundles.b2(), frozenset())
    M = LogicalMatrix.of(bundles.b2(), ["1"])
    assert M.name == "<B2,{1}>"
    with pytest.raises(AlgebraError):
        MatrixEngine([M, bundles.matrix("b2.alg", CPC)])


MATRICES = [bundles.matrix("b2.alg"), bundles.matrix("h3.alg"),
            LogicalMatrix.of(bundles.h3(), ["h", "1"])]


@given(st.lists(terms_over(HEYT, ("p", "q"), 2), max_size=3),
       st.lists(terms_over(HEYT, ("p", "q"), 2), max_size=2),
       st.sets(st.integers(0, 2), min_size=1))
def test_matrix_engine_agrees_with_direct_enumeration(gamma, delta, which):
    ms = [MATRICES[i] for i in sorted(which)]
    eng = MatrixEngine(ms)
    direct = matrix_entails(ms, PQ, gamma, delta)
    assert (eng.entails(PQ, gamma, delta) is Answer.YES) == direct
    cm = eng.countermodel(PQ, gamma, delta)
    assert (cm is None) == direct
    if cm is not None:
        M, e = cm
        assert not matrix_entails([M], PQ, gamma, delta)


def test_modus_ponens_matrix():
    eng = bundles.cpc_matrices()
    assert eng.entails(PQ, parse_terms("p, (imp p q)", CPC, PQ), [Var("q")]) is Answer.YES
    assert eng.entails(PQ, [Var("q")], [Var("p")]) is Answer.NO


@given(st.lists(terms_over(HEYT, ("p", "q"), 2), min_size=2, max_size=4))
def test_equational_engine_agrees_with_semantics(ts):
    K = AlgebraClass((bundles.b2(), bundles.h3()))
    eng = EquationalEngine(K)
    E = [Equation(ts[0], ts[1])]
    F = [Equation(a, b) for a, b in zip(ts[1:], ts[2:])] or [Equation(ts[1], ts[0])]
    assert (eng.entails(PQ, E, F) is Answer.YES) == semantic_consequence(K, PQ, E, F)


def test_rule_schematic_context():
    r = Rule("MP", (Var("p"), T("(imp p q)")), Var("q"))
    assert r.schematic.vars == ("p", "q")
    with pytest.raises(TermError):
        Rule("bad", (Var("p"),), Var("q"), VarContext.of("p"))
    with pytest.raises(TermError):
        RuleSystem(CPC, (), (Rule("A", (Var("p"),), Var("p")),))


def test_derive_modus_ponens():
    R = bundles.cpc_rules()
    gamma = parse_terms("p, (imp p q)", CPC, PQ)
    assert derive(R, PQ, gamma, Var("q"), Budget(1, 1)) is Answer.YES
    d = find_derivation(R, PQ, gamma, Var("q"), Budget(1, 1))
    assert d.rounds == 1 and d.trace[-1].startswith("q  [MP")


def test_identity_needs_two_rounds():
    R = bundles.cpc_rules()
    ctx = VarContext.of("p")
    assert derive(R, ctx, [], T("(imp p p)"), Budget(1, 1)) is Answer.UNKNOWN
    d = find_derivation(R, ctx, [], T("(imp p p)"), Budget(3, 1))
    assert d.answer is Answer.YES and d.rounds == 2


def test_rule_engine_is_sound_for_the_boolean_matrix():
    """Everything derived within a small budget is a matrix consequence."""
    eng = RuleEngine(bundles.cpc_rules(), Budget(2, 0))
    M = bundles.cpc_matrices()
    ctx = VarContext.of("p")
    gamma = [T("(imp p (not p))")]
    for phi in enumerate_terms(CPC, ctx, 2):
        a = eng.entails(ctx, gamma, [phi])
        assert a is not Answer.NO
        if a is Answer.YES:
            assert M.entails(ctx, gamma, [phi]) is Answer.YES


def test_instance_guard():
    eng = RuleEngine(bundles.cpc_rules(), Budget(1, 1, instance_guard=100))
    with pytest.raises(GuardError):
        eng.entails(PQ, [], [Var("p")])


def test_axiom_extension_filters_matrices():
    peirce = T("(imp (imp (imp p q) p) p)")
    eng = MatrixEngine([bundles.matrix("b2.alg", CPC), bundles.matrix("h3.alg", CPC)])
    ext = axiom_extension(eng, peirce, "peirce")
    assert [M.name for M in ext.matrices] == ["<B2,{1}>"]
    R = axiom_extension(RuleEngine(bundles.cpc_rules()), peirce, "peirce")
    assert [a.name for a in R.system.axioms][-1] == "peirce"


@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 3)), max_size=7),
       st.integers(0, 3))
def test_grouped_sets_matches_brute_force(keys, k):
    items = [((a, b), i) for i, (a, b) in enumerate(keys)]
    full = (7, 3)
    brute: dict = {}
    for S in all_subsets(items, k):
        key = full
        for kk, _ in S:
            key = (key[0] & kk[0], key[1] & kk[1])
        brute[key] = brute.get(key, 0) + 1
    classes = grouped_sets(items, k, full)
    assert {c.key: c.count for c in classes} == brute
    key_of = {i: kk for kk, i in items}
    for c in classes:
        key = full
        for x in c.rep:
            key = (key[0] & key_of[x][0], key[1] & key_of[x][1])
        assert key == c.key and len(c.rep) <= k


def test_grouped_sets_weights_count_like_copies():
    plain = [((1,), "a"), ((1,), "b"), ((2,), "c")]
    weighted = [((1,), "a", 2), ((2,), "c", 1)]
    a = {c.key: c.count for c in grouped_sets(plain, 2, (3,))}
    b = {c.key: c.count for c in grouped_sets(weighted, 2, (3,))}
    assert a == b


class ForgetsQ(MatrixEngine):
    """Treats the variable q as never designated: not invariant under renaming."""

    def mask(self, ctx, t):
        return 0 if t == Var("q") else super().mask(ctx, t)


@pytest.mark.parametrize("grouped", [True, False])
def test_structurality_paths_agree(grouped):
    pairs = [(X, Y) for X in standard_contexts(2) for Y in standard_contexts(2)]
    good = structurality_test(bundles.cpc_matrices(), pairs, 1, 2, grouped=grouped)
    assert good.holds and good.checked > 0
    bad = structurality_test(ForgetsQ([bundles.matrix("b2.alg", CPC)]), pairs, 1, 2,
                             grouped=grouped)
    assert not bad.holds


def theories_oracle(engine, ctx, universe):
    """Closed subsets by checking every subset against every formula."""
    closed = 0
    for S in all_subsets(universe, len(universe)):
        if all(phi in S or not matrix_entails(engine.matrices, ctx, S, [phi]) for phi in universe):
            closed += 1
    return closed


@pytest.mark.parametrize("text,expected", [
    ("p, (not p), (or p q)", 6),
    ("p, q, (and p q)", 4),
    ("p, q, r", 8),
    ("", 1),
])
def test_theories_lattice_counts(text, expected):
    eng = MatrixEngine([bundles.matrix("b2.alg")])
    universe = parse_terms(text, HEYT, None)
    ctx = VarContext.of("p", "q", "r")
    P, j = theories_lattice(eng, ctx, universe)
    assert len(j.fixed_points()) == theories_oracle(eng, ctx, universe) == expected
    assert P.n == 2 ** len(universe)


def test_theories_guard():
    eng = bundles.cpc_matrices()
    universe = enumerate_terms(CPC, PQ, 1)[:13]
    with pytest.raises(GuardError):
        theories_lattice(eng, PQ, universe)


def test_theories_under_starved_budget_is_explicit():
    eng = RuleEngine(bundles.cpc_rules(), Budget(1, 0))
    ctx = VarContext.of("p", "q", "r")
    universe = parse_terms("p, (imp p q), q, (imp q r), r", CPC, ctx)
    with pytest.raises(BudgetError):
        theories_lattice(eng, ctx, universe)
