"""Command-line front end.

Every command builds one report tree (command echo, config echo, result,
verdict).  ``--json PATH`` writes that tree as JSON; the text on stdout is a
rendering of the same tree.  Wall-clock time is printed to stderr only, so
the JSON is byte-stable across runs.

Exit codes: 0 pass/yes, 1 fail/no, 2 usage or parse error, 3 inconclusive,
4 guard exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Optional

from . import bundles, lemmas
from .algebra import AlgebraClass, find_countermodel, free_algebra, lt_equal, semantic_consequence
from .config import Guards, RunConfig
from .consequence import (Budget, EquationalEngine, MatrixEngine, RuleEngine,
                          theories_lattice)
from .equivalence import Domain, algebraisation_check
from .errors import AalError, BudgetError, GuardError
from .parsing import parse_context, parse_equations, parse_rules, parse_terms
from .suplattice import (MonotoneMap, SupMorphism, fixed_point_lattice, image_factorization,
                         image_lattice, iso_search)
from .terms import (Equation, TermSubstitution, VarContext, depth, print_term, substitute,
                    variables)

EXIT = {"pass": 0, "yes": 0, "ok": 0, "fail": 1, "no": 1,
        "inconclusive": 3, "unknown": 3}
EXIT_USAGE, EXIT_GUARD = 2, 4
CACHE_ENV = "AALKIT_CACHE"


class UsageError(Exception):
    pass


# -- shared loading ---------------------------------------------------------------------

def config_from(args) -> RunConfig:
    guards = Guards(eval_points=args.guard_eval, free_carrier=args.guard_free,
                    iso_elements=args.guard_iso, universe=args.guard_universe,
                    instances=args.guard_instances)
    try:
        return RunConfig(seed=args.seed, depth_bound=args.depth, ctx_bound=args.ctx,
                         set_size_bound=args.sets, derivation_budget=args.budget,
                         instance_depth=args.instance_depth, samples=args.samples,
                         max_elems=args.max_elems, guards=guards, parallelism=args.parallel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sig(args):
    return bundles.signature(args.sig) if args.sig else None


def _klass(args, sig=None) -> AlgebraClass:
    sig = sig or _sig(args)
    members = tuple(bundles.algebra(f, sig) for f in args.klass)
    if not members and sig is None:
        raise UsageError("an empty class needs --sig")
    return AlgebraClass(members, sig)


def _matrices(args, cfg, sig=None) -> MatrixEngine:
    sig = sig or _sig(args)
    designated = args.designated.split() if getattr(args, "designated", None) else None
    ms = [bundles.matrix(f, sig, designated) for f in args.matrices]
    return MatrixEngine(ms, cfg.guards.eval_points, sig)


def _rules(args, cfg) -> RuleEngine:
    if not args.sig:
        raise UsageError("a rule file needs --sig")
    text, src = bundles.read_source(args.rules)
    R = parse_rules(text, bundles.signature(args.sig), src)
    return RuleEngine(R, Budget(cfg.derivation_budget, cfg.instance_depth, cfg.guards.instances))


def _formula_engine(args, cfg):
    if getattr(args, "rules", None):
        return _rules(args, cfg)
    if getattr(args, "matrices", None):
        return _matrices(args, cfg)
    raise UsageError("give --matrices or --rules")


def _ctx(args, terms) -> VarContext:
    if args.vars is not None:
        return parse_context(args.vars)
    seen: list[str] = []
    for t in terms:
        for x in variables(t):
            if x not in seen:
                seen.append(x)
    return VarContext(tuple(seen))


def _loose_ctx(text: Optional[str]) -> Optional[VarContext]:
    return parse_context(text) if text is not None else None


# -- commands --------------------------------------------------------------------------

def cmd_check_sig(args, cfg):
    sig = bundles.signature(args.file)
    return {"signature": sig.name,
            "ops": [{"symbol": s, "arity": a} for s, a in sig.ops],
            "constants": list(sig.constants)}, "ok"


def cmd_term(args, cfg):
    sig = bundles.signature(args.sig)
    ctx = _loose_ctx(args.vars)
    t = parse_terms(args.term, sig, ctx)
    if len(t) != 1:
        raise UsageError("expected exactly one term")
    t = t[0]
    ctx = ctx or VarContext(tuple(variables(t)))
    out = {"term": print_term(t), "depth": depth(t), "variables": list(variables(t)),
           "context": list(ctx.vars)}
    if args.subst:
        mapping = {}
        for part in args.subst.split(";"):
            if "=" not in part:
                raise UsageError(f"substitution entries look like x=term, got {part!r}")
            x, s = part.split("=", 1)
            mapping[x.strip()] = s.strip()
        images = {x: parse_terms(s, sig, None)[0] for x, s in mapping.items()}
        for x in ctx:
            images.setdefault(x, parse_terms(x, sig, ctx)[0])
        target = VarContext(tuple(dict.fromkeys(v for x in ctx for v in variables(images[x]))))
        sigma = TermSubstitution.from_mapping(ctx, target, {x: images[x] for x in ctx})
        out["substituted"] = print_term(substitute(t, sigma))
    return out, "ok"


def cmd_entail(args, cfg):
    if args.matrices:
        eng = _matrices(args, cfg)
        gamma = parse_terms(args.gamma, eng.sig, _loose_ctx(args.vars))
        delta = parse_terms(args.phi, eng.sig, _loose_ctx(args.vars))
        ctx = _ctx(args, gamma + delta)
        ans = eng.entails(ctx, gamma, delta)
        out = {"engine": eng.describe(), "context": list(ctx.vars),
               "gamma": [print_term(t) for t in gamma], "phi": [print_term(t) for t in delta],
               "answer": ans.value}
        cm = eng.countermodel(ctx, gamma, delta)
        if cm is not None:
            out["countermodel"] = {"matrix": cm[0].name, "evaluation": cm[1].as_labels()}
        return out, ans.value
    if args.klass:
        K = _klass(args)
        E = parse_equations(args.hyp, K.sig, _loose_ctx(args.vars))
        F = parse_equations(args.eq, K.sig, _loose_ctx(args.vars))
        ctx = _ctx(args, [s for e in E + F for s in e])
        ok = semantic_consequence(K, ctx, E, F, cfg.guards.eval_points)
        out = {"class": K.names, "context": list(ctx.vars), "hypotheses": [str(e) for e in E],
               "conclusions": [str(e) for e in F], "answer": "yes" if ok else "no"}
        if not ok:
            e = find_countermodel(K, ctx, E, F, cfg.guards.eval_points)
            out["countermodel"] = {"algebra": e.alg.name, "evaluation": e.as_labels()}
        return out, out["answer"]
    raise UsageError("give --matrices or --class")


def cmd_derive(args, cfg):
    eng = _rules(args, cfg)
    gamma = parse_terms(args.gamma, eng.sig, _loose_ctx(args.vars))
    phi = parse_terms(args.phi, eng.sig, _loose_ctx(args.vars))
    if len(phi) != 1:
        raise UsageError("--phi takes exactly one formula")
    ctx = _ctx(args, gamma + phi)
    d = eng.derive(ctx, gamma, phi[0], trace=True)
    return {"engine": eng.describe(), "context": list(ctx.vars),
            "gamma": [print_term(t) for t in gamma], "phi": print_term(phi[0]),
            "answer": d.answer.value, "rounds": d.rounds, "derived": d.derived,
            "trace": d.trace}, d.answer.value


def _free_algebra_report(args, cfg) -> dict:
    K = _klass(args)
    ctx = parse_context(args.vars)
    fr = free_algebra(K, ctx, cfg.guards.free_carrier, cfg.guards.eval_points)
    out = {"class": K.names, "signature": K.sig.name, "context": list(ctx.vars),
           "carrier_size": fr.alg.n,
           "generators": {x: fr.alg.label(i) for x, i in fr.generators.items()},
           "elements": [{"label": fr.alg.label(i), "witness": print_term(w)}
                        for i, w in enumerate(fr.witnesses)]}
    if args.tables:
        out["tables"] = {s: [[fr.alg.label(a) for a in args_] + [fr.alg.label(v)]
                             for args_, v in fr.alg.rows(s)] for s, _ in K.sig.ops}
    return out


def _cache_key(args, cfg) -> str:
    h = hashlib.sha256()
    for f in list(args.klass) + ([args.sig] if args.sig else []):
        h.update(bundles.read_source(f)[0].encode())
        h.update(b"\0")
    h.update(json.dumps([args.vars, args.tables, cfg.guards.free_carrier,
                         cfg.guards.eval_points]).encode())
    return h.hexdigest()


def cmd_free_algebra(args, cfg):
    cache = os.environ.get(CACHE_ENV)
    path = None
    if cache:
        path = os.path.join(cache, f"free-{_cache_key(args, cfg)}.json")
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                return json.load(fh), "ok"
    out = _free_algebra_report(args, cfg)
    if path:
        os.makedirs(cache, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(out, fh, sort_keys=True)
    return out, "ok"


def cmd_lt(args, cfg):
    K = _klass(args)
    ctx = parse_context(args.vars)
    left = parse_terms(args.left, K.sig, ctx)[0]
    right = parse_terms(args.right, K.sig, ctx)[0]
    fr = free_algebra(K, ctx, cfg.guards.free_carrier, cfg.guards.eval_points)
    same = lt_equal(fr, left, right)
    direct = semantic_consequence(K, ctx, [], [Equation(left, right)], cfg.guards.eval_points)
    return {"class": K.names, "context": list(ctx.vars), "carrier_size": fr.alg.n,
            "left": {"term": print_term(left), "element": fr.label_of(left)},
            "right": {"term": print_term(right), "element": fr.label_of(right)},
            "equal_in_free_algebra": same, "valid_in_class": direct,
            "agree": same == direct}, "yes" if same else "no"


def cmd_theories(args, cfg):
    if args.klass:
        K = _klass(args)
        eng = EquationalEngine(K, cfg.guards.eval_points)
        universe = parse_equations(args.universe, K.sig, _loose_ctx(args.vars))
        ctx = _ctx(args, [s for e in universe for s in e])
    else:
        eng = _formula_engine(args, cfg)
        universe = parse_terms(args.universe, eng.sig, _loose_ctx(args.vars))
        ctx = _ctx(args, universe)
    P, j = theories_lattice(eng, ctx, universe, cfg.guards.universe)
    show = P.label

    T, _ = fixed_point_lattice(j)
    return {"engine": eng.describe(), "context": list(ctx.vars),
            "universe": list(P.generators), "closed_theories": T.n,
            "elements": [show(S) for S in j.fixed_points()],
            "covers": [[T.label(a), T.label(b)] for a, b in T.covers()],
            "closure": {show(S): show(j(S)) for S in range(P.n)}}, "ok"


def _parse_map(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"map entries look like a=b, got {part!r}")
        a, b = part.split("=", 1)
        out[a.strip()] = b.strip()
    return out


def cmd_factorize(args, cfg):
    P = bundles.lattice(args.source)
    Q = bundles.lattice(args.target)
    mapping = _parse_map(args.map)
    missing = [e for e in P.elements if e not in mapping]
    if missing:
        raise UsageError(f"map misses source elements {missing}")
    f = MonotoneMap.from_labels(P, Q, mapping)
    f = SupMorphism(P, Q, f.images)
    e, m = image_factorization(f)
    img, _ = image_lattice(f)
    composite = e.q.then(m).images == f.images
    rho = iso_search(e.target, img, cfg.guards.iso_elements)
    ok = composite and rho is not None
    return {"source": P.to_dict(), "target": Q.to_dict(), "map": f.as_labels(),
            "surjection": e.q.as_labels(), "injection": m.as_labels(),
            "middle": e.target.to_dict(), "composite_equals_map": composite,
            "middle_matches_image": rho is not None}, "pass" if ok else "fail"


def cmd_lattice_iso(args, cfg):
    A = bundles.lattice(args.first)
    B = bundles.lattice(args.second)
    phi = iso_search(A, B, cfg.guards.iso_elements)
    out = {"first": A.to_dict(), "second": B.to_dict(), "isomorphic": phi is not None}
    if phi is not None:
        out["map"] = {A.label(i): B.label(y) for i, y in enumerate(phi)}
    return out, "yes" if phi is not None else "no"


def cmd_algebraise(args, cfg):
    eng = _formula_engine(args, cfg)
    K = _klass(args, eng.sig)
    tau, delta = bundles.translation(args.translation, eng.sig)
    if tau is None or delta is None:
        raise UsageError("the translation file needs both tau and delta")
    dom = Domain(cfg.ctx_bound, cfg.depth_bound, cfg.set_size_bound)
    v = algebraisation_check(eng, K, tau, delta, dom, symmetric=args.symmetric)
    out = {"engine": eng.describe(), "class": K.names}
    out.update(v.to_dict())
    return out, v.status


def cmd_check_lemmas(args, cfg):
    names = list(lemmas.SUITES)
    chosen = names
    if args.only:
        chosen = [x.strip() for part in args.only for x in part.split(",") if x.strip()]
        bad = [x for x in chosen if x not in lemmas.SUITES]
        if bad:
            raise UsageError(f"unknown lemma {', '.join(bad)}; valid names: {', '.join(names)}")
    results = []
    for name in chosen:
        t0 = time.perf_counter()
        r = lemmas.SUITES[name](cfg)
        print(f"[{name}] {time.perf_counter() - t0:.2f}s", file=sys.stderr)
        results.append(r.to_dict())
    status = "pass" if all(r["status"] == "pass" for r in results) else "fail"
    return {"suites": results, "total_instances": sum(r["instances"] for r in results)}, status


# -- rendering --------------------------------------------------------------------------

def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    return str(v)


def render(node, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(node, dict):
        for k, v in node.items():
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.extend(render(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(node, list):
        for v in node:
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                sub = render(v, indent + 1)
                lines.append(f"{pad}- {sub[0].strip()}")
                lines.extend(sub[1:])
            else:
                lines.append(f"{pad}- {_inline(v)}")
    else:
        lines.append(pad + _scalar(node))
    return lines


def _flat_list(v) -> bool:
    """Short lists of scalars (or of such lists) are rendered on one line."""
    return (isinstance(v, list) and len(_inline(v)) <= 72
            and all(not isinstance(x, (dict, list)) or _flat_list(x) for x in v))


def _inline(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{}"
    return _scalar(v)


def _render_lemmas(result) -> list[str]:
    out = []
    for r in result["suites"]:
        out.append(f"{r['name']:<20} {r['status']:<5} {r['instances']:>12} instances")
        out.extend(f"    {msg}" for msg in r["failures"])
    out.append(f"total instances: {result['total_instances']}")
    return out


# -- argument parsing -------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    d = RunConfig()
    g = d.guards
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--depth", type=int, default=d.depth_bound, help="term depth bound")
    p.add_argument("--ctx", type=int, default=d.ctx_bound, help="context size bound")
    p.add_argument("--sets", type=int, default=d.set_size_bound, help="set size bound")
    p.add_argument("--budget", type=int, default=d.derivation_budget,
                   help="forward-chaining rounds")
    p.add_argument("--instance-depth", type=int, default=d.instance_depth)
    p.add_argument("--samples", type=int, default=d.samples)
    p.add_argument("--max-elems", type=int, default=d.max_elems)
    p.add_argument("--guard-eval", type=int, default=g.eval_points)
    p.add_argument("--guard-free", type=int, default=g.free_carrier)
    p.add_argument("--guard-iso", type=int, default=g.iso_elements)
    p.add_argument("--guard-universe", type=int, default=g.universe)
    p.add_argument("--guard-instances", type=int, default=g.instances)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--json", metavar="PATH", help="write the report as JSON ('-' for stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="aalkit", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("check-sig", cmd_check_sig, "parse and show a signature file")
    p.add_argument("file")

    p = add("term", cmd_term, "parse a term, optionally substitute into it")
    p.add_argument("term")
    p.add_argument("--sig", required=True)
    p.add_argument("--vars")
    p.add_argument("--subst", help="x=term;y=term")

    p = add("entail", cmd_entail, "matrix or equational entailment")
    p.add_argument("--matrices", nargs="+", default=[])
    p.add_argument("--designated")
    p.add_argument("--class", dest="klass", nargs="+", default=[])
    p.add_argument("--sig")
    p.add_argument("--vars")
    p.add_argument("--gamma", default="")
    p.add_argument("--phi", default="")
    p.add_argument("--hyp", default="")
    p.add_argument("--eq", default="")

    p = add("derive", cmd_derive, "bounded forward chaining in a rule system")
    p.add_argument("--rules", required=True)
    p.add_argument("--sig", required=True)
    p.add_argument("--vars")
    p.add_argument("--gamma", default="")
    p.add_argument("--phi", required=True)

    p = add("free-algebra", cmd_free_algebra, "free algebra of a finite class")
    p.add_argument("--class", dest="klass", nargs="*", default=[])
    p.add_argument("--sig")
    p.add_argument("--vars", required=True)
    p.add_argument("--tables", action="store_true")

    p = add("lt", cmd_lt, "compare two terms in the free algebra")
    p.add_argument("--class", dest="klass", nargs="+", required=True)
    p.add_argument("--sig")
    p.add_argument("--vars", required=True)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = add("theories", cmd_theories, "lattice of closed theories over a finite universe")
    p.add_argument("--matrices", nargs="+", default=[])
    p.add_argument("--designated")
    p.add_argument("--rules")
    p.add_argument("--class", dest="klass", nargs="+", default=[])
    p.add_argument("--sig")
    p.add_argument("--vars")
    p.add_argument("--universe", required=True)

    p = add("factorize", cmd_factorize, "image factorisation of a join-preserving map")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--map", required=True, help="a=x,b=y,...")

    p = add("check-lemmas", cmd_check_lemmas, "run the property suites")
    p.add_argument("--all", action="store_true")
    p.add_argument("--only", action="append", help="suite name (repeatable, comma-separated)")

    p = add("algebraise", cmd_algebraise, "check an algebraisation bundle")
    p.add_argument("--matrices", nargs="+", default=[])
    p.add_argument("--designated")
    p.add_argument("--rules")
    p.add_argument("--class", dest="klass", nargs="+", required=True)
    p.add_argument("--sig")
    p.add_argument("--translation", required=True)
    p.add_argument("--symmetric", action="store_true")

    p = add("lattice-iso", cmd_lattice_iso, "decide isomorphism of two finite lattices")
    p.add_argument("first")
    p.add_argument("second")
    return top


def _echo(args) -> dict:
    skip = {"func", "json", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(report: dict, args, human: list[str]):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.json == "-":
        sys.stdout.write(text)
    else:
        print("\n".join(human))
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"command": args.command, "args": _echo(args)}
    t0 = time.perf_counter()
    try:
        cfg = config_from(args)
        report["config"] = cfg.to_dict()
        result, verdict = args.func(args, cfg)
    except UsageError as exc:
        return _fail(report, args, "usage", str(exc), EXIT_USAGE)
    except GuardError as exc:
        return _fail(report, args, exc.kind, str(exc), EXIT_GUARD)
    except BudgetError as exc:
        return _fail(report, args, exc.kind, str(exc), EXIT["inconclusive"])
    except AalError as exc:
        return _fail(report, args, exc.kind, str(exc), EXIT_USAGE)
    report["result"] = result
    report["verdict"] = verdict
    human = _render_lemmas(result) if args.command == "check-lemmas" else render(result)
    human.append(f"verdict: {verdict}")
    _emit(report, args, human)
    print(f"elapsed: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT[verdict]


def _fail(report, args, kind, message, code) -> int:
    report["error"] = {"kind": kind, "message": message}
    report["verdict"] = "error"
    print(f"error [{kind}]: {message}", file=sys.stderr)
    if args.json and args.json != "-":
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif args.json == "-":
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
