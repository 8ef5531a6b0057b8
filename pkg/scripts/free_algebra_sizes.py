"""Table of free-algebra sizes for small classes of Heyting algebras.

    python3 scripts/free_algebra_sizes.py --max-vars 2
"""

import argparse
import time
from dataclasses import dataclass

from aalkit import bundles
from aalkit.algebra import AlgebraClass, free_algebra
from aalkit.terms import VarContext


@dataclass(frozen=True)
class Config:
    max_vars: int = 2
    guard: int = 20000


def classes():
    b2, h3, one = bundles.b2(), bundles.h3(), bundles.one()
    return {"{1}": (one,), "{B2}": (b2,), "{H3}": (h3,), "{B2,H3}": (b2, h3)}


def main(cfg: Config):
    print(f"{'class':<10} {'vars':>4} {'size':>7} {'seconds':>8}")
    for name, members in classes().items():
        for n in range(cfg.max_vars + 1):
            ctx = VarContext(("p", "q", "r")[:n])
            t0 = time.perf_counter()
            fr = free_algebra(AlgebraClass(members), ctx, cfg.guard)
            print(f"{name:<10} {n:>4} {fr.alg.n:>7} {time.perf_counter() - t0:>8.2f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-vars", type=int, default=Config.max_vars)
    ap.add_argument("--guard", type=int, default=Config.guard)
    a = ap.parse_args()
    main(Config(a.max_vars, a.guard))
