"""Run the algebraisation check on classical logic and two controls.

Rows: the correct translation pair, a translation with a broken delta, and
the correct pair against a matrix class that also contains the three-element
Heyting chain (whose logic is not the one the Boolean class algebraises).
"""

import argparse
import json
import time
from dataclasses import dataclass

from aalkit import bundles
from aalkit.algebra import AlgebraClass
from aalkit.consequence import MatrixEngine
from aalkit.equivalence import Domain, algebraisation_check


@dataclass(frozen=True)
class Config:
    ctx_bound: int = 2
    depth: int = 2
    set_size: int = 2
    symmetric: bool = True


def main(cfg: Config):
    sig = bundles.signature(bundles.CPC)
    K = AlgebraClass((bundles.b2(bundles.CPC),))
    tau, delta = bundles.translation("cpc.tr", sig)
    _, broken = bundles.translation("broken.tr", sig)
    boolean = bundles.cpc_matrices()
    mixed = MatrixEngine([bundles.matrix("b2.alg", sig), bundles.matrix("h3.alg", sig)])
    dom = Domain(cfg.ctx_bound, cfg.depth, cfg.set_size)
    rows = [("cpc", boolean, delta), ("broken delta", boolean, broken),
            ("B2+H3 matrices", mixed, delta)]
    for name, eng, d in rows:
        t0 = time.perf_counter()
        v = algebraisation_check(eng, K, tau, d, dom, symmetric=cfg.symmetric)
        extra = " ".join(f"{r.name}={r.status}" for r in v.symmetric)
        print(f"{name:<16} {v.status:<5} representation={v.representation_forward.status} "
              f"inversion={v.inversion.status} {extra} ({time.perf_counter() - t0:.2f}s)")
        for r in (v.representation_forward, v.inversion):
            if r.counterexamples:
                print("    first counterexample:", json.dumps(r.counterexamples[0]))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ctx", type=int, default=Config.ctx_bound)
    ap.add_argument("--depth", type=int, default=Config.depth)
    ap.add_argument("--sets", type=int, default=Config.set_size)
    ap.add_argument("--no-symmetric", action="store_true")
    a = ap.parse_args()
    main(Config(a.ctx, a.depth, a.sets, not a.no_symmetric))
