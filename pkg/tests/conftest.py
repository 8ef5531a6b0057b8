import itertools
import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from aalkit import bundles
from aalkit.algebra import all_evaluations, evaluate
from aalkit.terms import App, TermSubstitution, Var, VarContext

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

POOL = ("p", "q", "r", "s")


@pytest.fixture(scope="session")
def bool_sig():
    return bundles.signature(bundles.BOOL)


@pytest.fixture(scope="session")
def heyt_sig():
    return bundles.signature(bundles.HEYT)


@pytest.fixture(scope="session")
def cpc_sig():
    return bundles.signature(bundles.CPC)


def terms_over(sig, names, max_depth=3):
    """Strategy for terms over ``sig`` with variables among ``names``."""
    leaves = [st.sampled_from([Var(x) for x in names])] if names else []
    consts = [App(c, ()) for c in sig.constants]
    if consts:
        leaves.append(st.sampled_from(consts))
    base = st.one_of(*leaves)
    ops = [(s, a) for s, a in sig.ops if a > 0]

    def extend(inner):
        return st.one_of(*[st.tuples(*[inner] * a).map(lambda xs, s=s: App(s, tuple(xs)))
                           for s, a in ops])

    return st.recursive(base, extend, max_leaves=2 ** max_depth)


contexts = st.integers(0, 3).map(lambda n: VarContext(POOL[:n]))


def substitutions(sig, source, target, max_depth=2):
    return st.tuples(*[terms_over(sig, target.vars, max_depth) for _ in source]).map(
        lambda imgs: TermSubstitution(source, target, imgs))


def saturation_size(members, ctx):
    """Distinct value vectors reachable from the generators, found term by term."""
    points = [e for S in members for e in all_evaluations(S, ctx)]
    sig = members[0].sig

    def vec(t):
        return tuple(evaluate(t, e) for e in points)

    reps = {}
    for t in [Var(x) for x in ctx] + [App(c, ()) for c in sig.constants]:
        reps.setdefault(vec(t), t)
    while True:
        terms = list(reps.values())
        new = {}
        for sym, ar in sig.ops:
            for args in itertools.product(terms, repeat=ar):
                t = App(sym, args)
                v = vec(t)
                if v not in reps and v not in new:
                    new[v] = t
        if not new:
            return len(reps)
        reps.update(new)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
