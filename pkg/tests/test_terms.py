import itertools

import pytest
from hypothesis import given, strategies as st

from aalkit.errors import SignatureError, TermError
from aalkit.terms import (App, Equation, Renaming, Signature, TermBatch, TermSubstitution, Var,
                          VarContext, check_term, depth, enumerate_renamings,
                          enumerate_substitutions, enumerate_terms, flatten, print_term, rename,
                          standard_contexts, substitute, subst_equation, variables)

from conftest import contexts, substitutions, terms_over

BOOL = Signature("BOOL", (("and", 2), ("not", 1), ("top", 0)))


def count_terms(sig, nvars, d):
    """Terms of depth <= d, by the recurrence N(0) = |X| + #constants."""
    n = nvars + len(sig.constants)
    for _ in range(d):
        n = nvars + len(sig.constants) + sum(n ** a for _, a in sig.ops if a > 0)
    return n


def test_signature_rejects_duplicates_and_negative_arity():
    with pytest.raises(SignatureError) as e:
        Signature("S", (("f", 1), ("f", 2)))
    assert e.value.kind == "duplicate-symbol"
    with pytest.raises(SignatureError) as e:
        Signature("S", (("f", -1),))
    assert e.value.kind == "bad-arity"


def test_unknown_op_and_arity_errors():
    ctx = VarContext.of("p")
    with pytest.raises(TermError) as e:
        check_term(App("or", (Var("p"), Var("p"))), BOOL, ctx)
    assert e.value.kind == "unknown-identifier"
    with pytest.raises(TermError) as e:
        check_term(App("and", (Var("p"),)), BOOL, ctx)
    assert e.value.kind == "arity-mismatch"
    with pytest.raises(TermError) as e:
        check_term(Var("q"), BOOL, ctx)
    assert e.value.kind == "unknown-variable"


def test_depth_convention():
    assert depth(Var("p")) == 0
    assert depth(App("top")) == 0
    assert depth(App("not", (App("top"),))) == 1
    assert depth(App("and", (Var("p"), App("not", (Var("q"),))))) == 2


@pytest.mark.parametrize("nvars", [0, 1, 2])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_enumeration_matches_counting_recurrence(nvars, d):
    ctx = VarContext(("p", "q")[:nvars])
    T = enumerate_terms(BOOL, ctx, d)
    assert len(T) == count_terms(BOOL, nvars, d)
    assert len(set(T)) == len(T)
    assert all(depth(t) <= d for t in T)
    for t in T:
        check_term(t, BOOL, ctx)


def test_enumeration_is_depth_stratified():
    ctx = VarContext.of("p", "q")
    small, big = enumerate_terms(BOOL, ctx, 1), enumerate_terms(BOOL, ctx, 2)
    assert big[:len(small)] == small
    assert [depth(t) for t in big] == sorted(depth(t) for t in big)


def test_empty_context_without_constants_has_no_terms():
    sig = Signature("F", (("f", 1),))
    assert enumerate_terms(sig, VarContext(), 3) == []


def test_renaming_and_substitution_counts():
    X, Y = VarContext.of("p", "q"), VarContext.of("r", "s")
    assert len(enumerate_renamings(X, Y)) == 4
    assert len(enumerate_renamings(VarContext(), Y)) == 1
    assert enumerate_renamings(X, VarContext()) == []
    pool = count_terms(BOOL, 2, 1)
    assert len(enumerate_substitutions(X, Y, BOOL, 1)) == pool ** 2


@given(st.data())
def test_unit_laws(data):
    X, Y = data.draw(contexts), data.draw(contexts)
    t = data.draw(terms_over(BOOL, X.vars))
    s = data.draw(substitutions(BOOL, X, Y))
    assert substitute(t, TermSubstitution.unit(X)) == t
    for x in X:
        assert substitute(Var(x), s) == s(x)


@given(st.data())
def test_kleisli_associativity(data):
    X, Y, Z, W = (data.draw(contexts) for _ in range(4))
    t = data.draw(terms_over(BOOL, X.vars))
    s = data.draw(substitutions(BOOL, X, Y))
    r = data.draw(substitutions(BOOL, Y, Z))
    u = data.draw(substitutions(BOOL, Z, W))
    assert substitute(substitute(t, s), r) == substitute(t, s.then(r))
    assert s.then(r).then(u) == s.then(r.then(u))


@given(st.data())
def test_batch_agrees_with_single_substitution(data):
    X, Y = data.draw(contexts), data.draw(contexts)
    ts = data.draw(st.lists(terms_over(BOOL, X.vars), max_size=8))
    s = data.draw(substitutions(BOOL, X, Y))
    assert TermBatch(ts).substitute(s) == [substitute(t, s) for t in ts]


@given(st.data())
def test_renaming_is_functorial(data):
    X, Y, Z = (data.draw(contexts) for _ in range(3))
    if (X and not Y) or (Y and not Z):
        return
    t = data.draw(terms_over(BOOL, X.vars))
    f = Renaming(X, Y, data.draw(st.tuples(*[st.sampled_from(Y.vars) for _ in X])))
    g = Renaming(Y, Z, data.draw(st.tuples(*[st.sampled_from(Z.vars) for _ in Y])))
    assert rename(rename(t, f), g) == rename(t, f.then(g))
    assert rename(t, Renaming.identity(X)) == t
    assert rename(t, f) == substitute(t, f.as_substitution())


def test_flatten_plugs_handles():
    target = VarContext.of("p")
    handles = {"h1": App("not", (Var("p"),)), "h2": App("top")}
    t = App("and", (Var("h1"), Var("h2")))
    assert print_term(flatten(t, handles, target)) == "(and (not p) top)"


def test_variables_in_first_occurrence_order():
    t = App("and", (Var("q"), App("and", (Var("p"), Var("q")))))
    assert variables(t) == ("q", "p")


def test_substitution_rejects_images_outside_target():
    with pytest.raises(TermError) as e:
        TermSubstitution(VarContext.of("p"), VarContext.of("q"), (Var("p"),))
    assert e.value.kind == "image-outside-target"


def test_equation_renaming():
    f = Renaming.from_mapping(VarContext.of("p", "q"), VarContext.of("r"), {"p": "r", "q": "r"})
    eq = Equation(Var("p"), App("not", (Var("q"),)))
    assert str(subst_equation(eq, f)) == "r ~ (not r)"


def test_standard_contexts():
    assert [c.vars for c in standard_contexts(2)] == [(), ("p",), ("p", "q")]


def test_exhaustive_associativity_small():
    """Every depth-1 term over {p} through every pair of depth-1 substitutions."""
    X = VarContext.of("p")
    T = enumerate_terms(BOOL, X, 1)
    for Y, Z in itertools.product(standard_contexts(1), repeat=2):
        for s in enumerate_substitutions(X, Y, BOOL, 1):
            for r in enumerate_substitutions(Y, Z, BOOL, 1):
                for t in T:
                    assert substitute(substitute(t, s), r) == substitute(t, s.then(r))
