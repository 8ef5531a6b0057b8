"""Closure operators and quotients of every small lattice.

For each lattice up to the size bound, count its closure operators, check
the closure/consequence/quotient round trips, and tally the sizes of the
resulting quotient targets.
"""

import argparse
from collections import Counter
from dataclasses import dataclass

from aalkit.suplattice import (all_closure_operators, all_lattices, closure_to_consequence,
                               closure_to_quotient, consequence_to_closure, quotient_to_closure)


@dataclass(frozen=True)
class Config:
    max_elems: int = 5


def main(cfg: Config):
    total = ok = 0
    for L in all_lattices(cfg.max_elems):
        sizes = Counter()
        ops = all_closure_operators(L)
        for j in ops:
            q = closure_to_quotient(j)
            sizes[q.target.n] += 1
            total += 1
            ok += (consequence_to_closure(closure_to_consequence(j)) == j
                   and quotient_to_closure(q) == j)
        covers = [(L.label(a), L.label(b)) for a, b in L.covers()]
        dist = ", ".join(f"{k}:{v}" for k, v in sorted(sizes.items()))
        print(f"{L.name:<8} n={L.n}  closures={len(ops):<3} quotient sizes {{{dist}}}  "
              f"covers={covers}")
    print(f"round trips: {ok}/{total}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-elems", type=int, default=Config.max_elems)
    main(Config(ap.parse_args().max_elems))
