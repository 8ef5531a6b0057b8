import itertools

import pytest
from hypothesis import given, strategies as st

from aalkit import bundles
from aalkit.algebra import (AlgebraClass, Evaluation, FiniteAlgebra, PointTable,
                            all_evaluations, algebra_iso, evaluate, fast_consequence,
                            find_countermodel, free_algebra, funcass_check, lt_equal,
                            satisfies, semantic_consequence)
from aalkit.errors import AlgebraError, GuardError
from aalkit.terms import App, Equation, Renaming, Signature, Var, VarContext, enumerate_terms

from conftest import saturation_size, terms_over

HEYT = bundles.signature(bundles.HEYT)
B2, H3 = bundles.b2(), bundles.h3()


@pytest.mark.parametrize("members,names,expected", [
    ((B2,), (), 2),
    ((B2,), ("p",), 4),
    ((B2,), ("p", "q"), 16),
    ((H3,), ("p",), 6),
    ((B2, H3), ("p",), 6),
])
def test_free_algebra_size_matches_saturation_oracle(members, names, expected):
    ctx = VarContext(names)
    fr = free_algebra(AlgebraClass(members), ctx)
    assert fr.alg.n == saturation_size(members, ctx) == expected
    assert fr.check_homomorphism()


def test_free_algebra_generators_and_labels():
    fr = free_algebra(AlgebraClass((B2,)), VarContext.of("p", "q"))
    assert [fr.alg.label(fr.generators[x]) for x in "pq"] == ["t0", "t1"]
    assert fr.witnesses[0] == Var("p")
    again = free_algebra(AlgebraClass((B2,)), VarContext.of("p", "q"))
    assert again.alg == fr.alg  # labelling is stable


def test_free_algebra_guard():
    with pytest.raises(GuardError):
        free_algebra(AlgebraClass((B2,)), VarContext.of("p", "q"), guard=10)


def test_empty_class_and_empty_context():
    sig = Signature("F", (("f", 1),))
    fr = free_algebra(AlgebraClass((), sig), VarContext())
    assert fr.alg.n == 0
    with pytest.raises(AlgebraError):
        AlgebraClass(())


PQ = VarContext.of("p", "q")
FREE_PQ = [free_algebra(K, PQ) for K in (AlgebraClass((B2,)), AlgebraClass((B2, H3)))]


@given(terms_over(HEYT, ("p", "q"), 3), terms_over(HEYT, ("p", "q"), 3))
def test_lt_equal_agrees_with_semantic_validity(s, t):
    for fr in FREE_PQ:
        K = fr.klass
        assert lt_equal(fr, s, t) == semantic_consequence(K, PQ, [], [Equation(s, t)])
        # the table-computed image is the componentwise value vector
        assert fr.tuples[fr.lam(s)] == fr.lam_tuple(s)


def test_h3_is_not_boolean():
    ctx = VarContext.of("p")
    p = Var("p")
    lem = Equation(App("or", (p, App("not", (p,)))), App("top"))
    assert semantic_consequence(AlgebraClass((B2,)), ctx, [], [lem])
    assert not semantic_consequence(AlgebraClass((B2, H3)), ctx, [], [lem])
    e = find_countermodel(AlgebraClass((B2, H3)), ctx, [], [lem])
    assert e.alg.name == "H3" and e.as_labels() == {"p": "h"}


def test_algebra_validation():
    sig = Signature("U", (("f", 1),))
    with pytest.raises(AlgebraError) as e:
        FiniteAlgebra("A", sig, [], {"f": []})
    assert e.value.kind == "empty-carrier"
    with pytest.raises(AlgebraError) as e:
        FiniteAlgebra("A", sig, ["a", "b"], {"f": [0]})
    assert e.value.kind == "partial-table"
    with pytest.raises(AlgebraError) as e:
        FiniteAlgebra("A", sig, ["a", "b"], {"f": [0, 2]})
    assert e.value.kind == "outside-carrier"
    with pytest.raises(AlgebraError) as e:
        FiniteAlgebra("A", sig, ["a", "b"], {"f": [0, 1], "g": [0]})
    assert e.value.kind == "unknown-op"
    with pytest.raises(AlgebraError) as e:
        FiniteAlgebra("A", sig, ["a", "b"], {})
    assert e.value.kind == "missing-table"


def test_reduct_keeps_tables():
    cpc = bundles.signature(bundles.CPC)
    R = B2.reduct(cpc)
    assert R.sig == cpc and R.tables["imp"] == B2.tables["imp"]


def test_evaluation_guard():
    with pytest.raises(GuardError):
        list(all_evaluations(H3, VarContext.of("p", "q", "r"), guard=20))


@given(st.data())
def test_evaluation_along_renaming(data):
    X = VarContext(("p", "q", "r")[:data.draw(st.integers(0, 3))])
    Y = VarContext(("s", "u")[:data.draw(st.integers(1, 2))])
    f = Renaming(X, Y, data.draw(st.tuples(*[st.sampled_from(Y.vars) for _ in X])))
    ts = data.draw(st.lists(terms_over(HEYT, X.vars, 3), max_size=5))
    for A in (B2, H3):
        for e in all_evaluations(A, Y):
            assert funcass_check(A, f, e, ts).holds


def test_point_table_matches_direct_evaluation():
    ctx = VarContext.of("p", "q")
    tab = PointTable([B2, H3], ctx)
    evals = [e for S in (B2, H3) for e in all_evaluations(S, ctx)]
    assert tab.size == len(evals) == 13
    for t in enumerate_terms(HEYT, ctx, 1):
        assert tab.vector(t) == tuple(evaluate(t, e) for e in evals)
    T = enumerate_terms(HEYT, ctx, 1)[:8]
    K = AlgebraClass((B2, H3))
    for a, b, c in itertools.product(T, repeat=3):
        E, F = [Equation(a, b)], [Equation(b, c)]
        assert fast_consequence(tab, E, F) == semantic_consequence(K, ctx, E, F)


def test_satisfies_rejects_foreign_evaluation():
    e = Evaluation(VarContext.of("p"), H3, (2,))
    with pytest.raises(AlgebraError):
        satisfies(B2, e, Equation(Var("p"), Var("p")))


def test_algebra_iso():
    swapped = FiniteAlgebra("B2s", HEYT, ["1", "0"],
                            {s: [1 - B2.tables[s][sum(((1 - d) * 2 ** (ar - 1 - k))
                                                      for k, d in enumerate(args))]
                                 for args in itertools.product(range(2), repeat=ar)]
                             for s, ar in HEYT.ops})
    assert algebra_iso(B2, swapped, [1, 0])
    assert not algebra_iso(B2, swapped, [0, 1])
