"""Built-in signatures, algebras, rule systems and translations.

Names resolve first as filesystem paths and then against the package's
``data`` directory, so ``b2.alg`` works from any working directory.
"""

from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources
from typing import Optional

from .algebra import AlgebraClass, FiniteAlgebra
from .consequence import LogicalMatrix, MatrixEngine, RuleSystem
from .errors import ParseError
from .parsing import (parse_algebra, parse_matrix, parse_rules, parse_signature,
                      parse_suplattice, parse_translation)
from .terms import Signature


def builtin_names() -> list[str]:
    return sorted(p.name for p in resources.files("aalkit").joinpath("data").iterdir()
                  if not p.name.startswith("_"))


def read_source(name: str) -> tuple[str, str]:
    """Return (text, source label) for a path or a built-in data file."""
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return fh.read(), name
    res = resources.files("aalkit").joinpath("data", name)
    if res.is_file():
        return res.read_text(encoding="utf-8"), f"<builtin>/{name}"
    raise ParseError(f"no such file or built-in: {name!r}", "missing-file", source=name)


@lru_cache(maxsize=None)
def signature(name: str) -> Signature:
    text, src = read_source(name)
    return parse_signature(text, src)


BOOL = "bool.sig"
HEYT = "heyting.sig"
CPC = "cpc.sig"


def algebra(name: str, sig: Optional[Signature] = None) -> FiniteAlgebra:
    """Load an algebra file, taking a reduct when ``sig`` is a subsignature."""
    text, src = read_source(name)
    A = parse_algebra(text, None, src)
    return A if sig is None or sig.ops == A.sig.ops else A.reduct(sig)


def matrix(name: str, sig: Optional[Signature] = None, designated=None) -> LogicalMatrix:
    text, src = read_source(name)
    M = parse_matrix(text, None, designated, src)
    if sig is None or sig.ops == M.alg.sig.ops:
        return M
    return LogicalMatrix(M.alg.reduct(sig), M.designated)


def b2(sig_name: str = HEYT) -> FiniteAlgebra:
    return algebra("b2.alg", signature(sig_name))


def h3(sig_name: str = HEYT) -> FiniteAlgebra:
    return algebra("h3.alg", signature(sig_name))


def one(sig_name: str = HEYT) -> FiniteAlgebra:
    return algebra("one.alg", signature(sig_name))


def klass(*members: FiniteAlgebra, sig: Optional[Signature] = None) -> AlgebraClass:
    return AlgebraClass(tuple(members), sig)


def cpc_rules() -> RuleSystem:
    text, src = read_source("cpc.rules")
    return parse_rules(text, signature(CPC), src)


def cpc_matrices() -> MatrixEngine:
    return MatrixEngine([matrix("b2.alg", signature(CPC))])


def translation(name: str, sig: Signature):
    text, src = read_source(name)
    return parse_translation(text, sig, src)


def lattice(name: str):
    text, src = read_source(name)
    return parse_suplattice(text, src)
