"""Finite suplattices, join-preserving maps and their adjoints.

Elements are referred to by index throughout; labels are only for display
and I/O.  Order is stored as bitmasks (``_up[i]`` is the set of elements above
``i``), which keeps joins and meets cheap at the sizes we care about.

The module also carries the three-way correspondence between closure
operators, consequence relations and quotients on a single lattice, image
factorisation, lifting through surjections and isomorphism search.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .errors import GuardError, LatticeError


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteSupLattice:
    """A finite poset with all joins.

    Build it with :func:`make_lattice` (or the parser) to get validation;
    the raw constructor trusts its input unless ``check=True``.
    """

    def __init__(self, elements: Sequence, up: Sequence[int], name: str = "L",
                 check: bool = False):
        self.name = name
        self.elements = tuple(str(e) for e in elements)
        self._up = tuple(up)
        n = len(self.elements)
        if len(self._up) != n:
            raise LatticeError("order rows do not match elements")
        if len(set(self.elements)) != n:
            raise LatticeError("duplicate element labels")
        self._down = tuple(sum(1 << i for i in range(n) if (self._up[i] >> j) & 1)
                           for j in range(n))
        self._pos = {e: i for i, e in enumerate(self.elements)}
        self._join_cache: dict[tuple[int, int], int] = {}
        self._bottom = None
        self._top = None
        if check:
            rep = check_suplattice(self)
            if not rep.valid:
                raise LatticeError(f"{name} is not a suplattice: {rep.summary()}")

    # -- basic structure
    @property
    def n(self) -> int:
        return len(self.elements)

    def __len__(self):
        return self.n

    def index(self, label) -> int:
        try:
            return self._pos[str(label)]
        except KeyError:
            raise LatticeError(f"{label!r} is not an element of {self.name}",
                               "unknown-element") from None

    def label(self, i: int) -> str:
        return self.elements[i]

    def leq(self, i: int, j: int) -> bool:
        return bool((self._up[i] >> j) & 1)

    def up(self, i: int) -> int:
        return self._up[i]

    def down(self, i: int) -> int:
        return self._down[i]

    def _least_in(self, mask: int) -> Optional[int]:
        for u in _bits(mask):
            if mask & ~self._up[u] == 0:
                return u
        return None

    def _greatest_in(self, mask: int) -> Optional[int]:
        for u in _bits(mask):
            if mask & ~self._down[u] == 0:
                return u
        return None

    @property
    def bottom(self) -> int:
        if self._bottom is None:
            b = self._least_in((1 << self.n) - 1)
            if b is None:
                raise LatticeError(f"{self.name} has no bottom")
            self._bottom = b
        return self._bottom

    @property
    def top(self) -> int:
        if self._top is None:
            t = self._greatest_in((1 << self.n) - 1)
            if t is None:
                raise LatticeError(f"{self.name} has no top")
            self._top = t
        return self._top

    def join2(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        r = self._join_cache.get(key)
        if r is None:
            r = self._least_in(self._up[i] & self._up[j])
            if r is None:
                raise LatticeError(f"no join of {self.label(i)}, {self.label(j)}")
            self._join_cache[key] = r
        return r

    def join(self, xs: Iterable[int]) -> int:
        acc = self.bottom
        for x in xs:
            acc = self.join2(acc, x)
        return acc

    def meet(self, xs: Iterable[int]) -> int:
        """Greatest lower bound, computed as the join of all lower bounds."""
        lower = (1 << self.n) - 1
        for x in xs:
            lower &= self._down[x]
        return self.join(_bits(lower))

    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram as (lower, upper) index pairs."""
        out = []
        for i in range(self.n):
            strict_up = self._up[i] & ~(1 << i)
            for j in _bits(strict_up):
                between = strict_up & self._down[j] & ~(1 << j)
                if not between:
                    out.append((i, j))
        return out

    # -- identity and display
    def _key(self):
        return (self.elements, self._up)

    def __eq__(self, other):
        return isinstance(other, FiniteSupLattice) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteSupLattice({self.name!r}, {list(self.elements)})"

    def to_dict(self) -> dict:
        return {"name": self.name, "elements": list(self.elements),
                "covers": [[self.label(a), self.label(b)] for a, b in self.covers()]}


class FreeSupLattice(FiniteSupLattice):
    """Powerset of a finite generating set; element index is the bitmask."""

    def __init__(self, generators: Sequence[str], name: Optional[str] = None):
        self.generators = tuple(str(g) for g in generators)
        k = len(self.generators)
        self.name = name or "P(" + ",".join(self.generators) + ")"
        self.elements = tuple(self._subset_label(m) for m in range(1 << k))
        self._pos = {e: i for i, e in enumerate(self.elements)}
        self._bottom = 0
        self._top = (1 << k) - 1
        self._join_cache = {}
        self._mat = None

    def _subset_label(self, m: int) -> str:
        return "{" + ",".join(self.generators[i] for i in _bits(m)) + "}"

    def subset(self, i: int) -> tuple[str, ...]:
        return tuple(self.generators[b] for b in _bits(i))

    def of_subset(self, items: Iterable[str]) -> int:
        m = 0
        gen = {g: b for b, g in enumerate(self.generators)}
        for x in items:
            try:
                m |= 1 << gen[str(x)]
            except KeyError:
                raise LatticeError(f"{x!r} is not a generator of {self.name}",
                                   "unknown-element") from None
        return m

    def singleton(self, t: int) -> int:
        return 1 << t

    def _materialize(self):
        if self._mat is None:
            n = self.n
            up = tuple(sum(1 << j for j in range(n) if i & ~j == 0) for i in range(n))
            down = tuple(sum(1 << i for i in range(n) if i & ~j == 0) for j in range(n))
            self._mat = (up, down)
        return self._mat

    @property
    def _up(self):
        return self._materialize()[0]

    @property
    def _down(self):
        return self._materialize()[1]

    def leq(self, i, j):
        return i & ~j == 0

    def join2(self, i, j):
        return i | j

    def join(self, xs):
        acc = 0
        for x in xs:
            acc |= x
        return acc

    def meet(self, xs):
        acc = self._top
        for x in xs:
            acc &= x
        return acc

    def _key(self):
        return ("free", self.generators)


def make_lattice(elements: Sequence, leq_pairs: Iterable[tuple], name: str = "L") -> FiniteSupLattice:
    """Build a validated lattice from a generating set of ``a <= b`` pairs.

    The reflexive-transitive closure is taken; antisymmetry violations and
    missing joins raise :class:`LatticeError`.
    """
    elements = [str(e) for e in elements]
    pos = {e: i for i, e in enumerate(elements)}
    if len(pos) != len(elements):
        raise LatticeError("duplicate element labels", "duplicate-element")
    n = len(elements)
    up = [1 << i for i in range(n)]
    for a, b in leq_pairs:
        try:
            ia, ib = pos[str(a)], pos[str(b)]
        except KeyError as exc:
            raise LatticeError(f"unknown element {exc.args[0]!r}", "unknown-element") from None
        up[ia] |= 1 << ib
    # Warshall on bitmasks
    for k in range(n):
        for i in range(n):
            if (up[i] >> k) & 1:
                up[i] |= up[k]
    for i in range(n):
        for j in range(i + 1, n):
            if (up[i] >> j) & 1 and (up[j] >> i) & 1:
                raise LatticeError(f"antisymmetry violated: {elements[i]} and {elements[j]}",
                                   "antisymmetry")
    return FiniteSupLattice(elements, up, name, check=True)


def chain(n: int, name: Optional[str] = None) -> FiniteSupLattice:
    labels = [str(i) for i in range(n)]
    return make_lattice(labels, [(labels[i], labels[i + 1]) for i in range(n - 1)],
                        name or f"C{n}")


# -- validation ----------------------------------------------------------------

@dataclass
class LatticeReport:
    violations: list[tuple[str, list[str]]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        return "; ".join(f"{ax} at {{{', '.join(w)}}}" for ax, w in self.violations)


def check_suplattice(L: FiniteSupLattice) -> LatticeReport:
    """Every violated axiom with a witnessing subset; valid iff none."""
    rep = LatticeReport()
    n = L.n
    lab = L.elements
    for i in range(n):
        if not L.leq(i, i):
            rep.violations.append(("reflexivity", [lab[i]]))
    for i in range(n):
        for j in range(i + 1, n):
            if L.leq(i, j) and L.leq(j, i):
                rep.violations.append(("antisymmetry", [lab[i], lab[j]]))
    for i in range(n):
        for j in range(n):
            if not L.leq(i, j):
                continue
            for k in range(n):
                if L.leq(j, k) and not L.leq(i, k):
                    rep.violations.append(("transitivity", [lab[i], lab[j], lab[k]]))
    if rep.violations:
        return rep
    full = (1 << n) - 1
    if L._least_in(full) is None:
        rep.violations.append(("join", []))
    for i in range(n):
        for j in range(i + 1, n):
            if L._least_in(L.up(i) & L.up(j)) is None:
                rep.violations.append(("join", [lab[i], lab[j]]))
    return rep


# -- maps ----------------------------------------------------------------------

class MonotoneMap:
    """An order-preserving map between finite lattices, stored by index."""

    def __init__(self, source: FiniteSupLattice, target: FiniteSupLattice,
                 images: Sequence[int], check: bool = True):
        self.source = source
        self.target = target
        self.images = tuple(images)
        if len(self.images) != source.n:
            raise LatticeError("map is not total on its source", "not-total")
        if any(not 0 <= y < target.n for y in self.images):
            raise LatticeError("map image outside target", "image-outside-target")
        if check:
            self._validate()

    def _validate(self):
        if not is_monotone(self):
            raise LatticeError("map is not monotone", "not-monotone")

    @classmethod
    def from_labels(cls, source, target, mapping: Mapping, **kw):
        return cls(source, target,
                   tuple(target.index(mapping[e]) for e in source.elements), **kw)

    @classmethod
    def identity(cls, L):
        return cls(L, L, range(L.n), check=False)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def then(self, g: MonotoneMap):
        """Diagrammatic composite: first ``self``, then ``g``."""
        if self.target != g.source:
            raise LatticeError("composite of non-matching maps", "type-mismatch")
        cls = SupMorphism if isinstance(self, SupMorphism) and isinstance(g, SupMorphism) \
            else MonotoneMap
        return cls(self.source, g.target, tuple(g.images[y] for y in self.images),
                   check=False)

    def is_surjective(self) -> bool:
        return len(set(self.images)) == self.target.n

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def same_map(self, other: MonotoneMap) -> bool:
        return (self.source == other.source and self.target == other.target
                and self.images == other.images)

    __eq__ = same_map

    def __hash__(self):
        return hash(self.images)

    def as_labels(self) -> dict[str, str]:
        return {self.source.label(i): self.target.label(y) for i, y in enumerate(self.images)}

    def __repr__(self):
        return f"{type(self).__name__}({self.as_labels()})"


class SupMorphism(MonotoneMap):
    def _validate(self):
        bad = join_violation(self)
        if bad is not None:
            raise LatticeError(f"map does not preserve joins at {bad}", "not-join-preserving")


def is_monotone(f: MonotoneMap) -> bool:
    S, T, im = f.source, f.target, f.images
    return all(T.leq(im[i], im[j]) for i in range(S.n) for j in _bits(S.up(i)))


def join_violation(f: MonotoneMap) -> Optional[list[str]]:
    """A witnessing subset (as labels) where joins are not preserved, or None."""
    S, T, im = f.source, f.target, f.images
    if im[S.bottom] != T.bottom:
        return []
    for i in range(S.n):
        for j in range(i + 1, S.n):
            if im[S.join2(i, j)] != T.join2(im[i], im[j]):
                return [S.label(i), S.label(j)]
    return None


def meet_violation(g: MonotoneMap) -> Optional[list[str]]:
    S, T, im = g.source, g.target, g.images
    if im[S.top] != T.top:
        return []
    for i in range(S.n):
        for j in range(i + 1, S.n):
            if im[S.meet((i, j))] != T.meet((im[i], im[j])):
                return [S.label(i), S.label(j)]
    return None


def as_sup_morphism(f: MonotoneMap) -> SupMorphism:
    return SupMorphism(f.source, f.target, f.images)


def right_adjoint(f: MonotoneMap) -> MonotoneMap:
    """g(y) = join of all x with f(x) <= y."""
    if join_violation(f) is not None:
        raise LatticeError("right adjoint requires a join-preserving map",
                           "not-join-preserving")
    P, Q, im = f.source, f.target, f.images
    imgs = [P.join(x for x in range(P.n) if Q.leq(im[x], y)) for y in range(Q.n)]
    return MonotoneMap(Q, P, imgs, check=False)


def left_adjoint(g: MonotoneMap) -> SupMorphism:
    """f(x) = meet of all y with g(y) >= x."""
    bad = meet_violation(g)
    if bad is not None:
        raise LatticeError(f"left adjoint requires a meet-preserving map (fails at {bad})",
                           "not-meet-preserving")
    Q, P, im = g.source, g.target, g.images
    imgs = [Q.meet(y for y in range(Q.n) if P.leq(x, im[y])) for x in range(P.n)]
    return SupMorphism(P, Q, imgs, check=False)


def adjunction_holds(f: MonotoneMap, g: MonotoneMap) -> bool:
    P, Q = f.source, f.target
    return all(Q.leq(f(x), y) == P.leq(x, g(y)) for x in range(P.n) for y in range(Q.n))


@dataclass(frozen=True)
class DualityReport:
    surjective: bool
    injective: bool
    adjoint_injective: bool
    adjoint_surjective: bool

    @property
    def holds(self) -> bool:
        return (self.surjective == self.adjoint_injective
                and self.injective == self.adjoint_surjective)


def surjectivity_duality_check(f: MonotoneMap) -> DualityReport:
    g = right_adjoint(f)
    return DualityReport(f.is_surjective(), f.is_injective(),
                         g.is_injective(), g.is_surjective())


# -- closure operators, consequence relations, quotients ----------------------

class ClosureOperator:
    def __init__(self, lattice: FiniteSupLattice, images: Sequence[int], check: bool = True):
        self.lattice = lattice
        self.images = tuple(images)
        if len(self.images) != lattice.n:
            raise LatticeError("closure is not total", "not-total")
        if check:
            problem = closure_violation(lattice, self.images)
            if problem:
                raise LatticeError(f"not a closure operator: {problem}", "not-closure")

    def __call__(self, i):
        return self.images[i]

    def fixed_points(self) -> list[int]:
        return [i for i in range(self.lattice.n) if self.images[i] == i]

    def __eq__(self, other):
        return (isinstance(other, ClosureOperator) and self.lattice == other.lattice
                and self.images == other.images)

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        L = self.lattice
        return "ClosureOperator({" + ", ".join(
            f"{L.label(i)}: {L.label(y)}" for i, y in enumerate(self.images)) + "})"


def closure_violation(L: FiniteSupLattice, im: Sequence[int]) -> Optional[str]:
    for i in range(L.n):
        if not L.leq(i, im[i]):
            return f"not extensive at {L.label(i)}"
        if im[im[i]] != im[i]:
            return f"not idempotent at {L.label(i)}"
        for j in _bits(L.up(i)):
            if not L.leq(im[i], im[j]):
                return f"not monotone at {L.label(i)} <= {L.label(j)}"
    return None


def interior_violation(L: FiniteSupLattice, im: Sequence[int]) -> Optional[str]:
    for i in range(L.n):
        if not L.leq(im[i], i):
            return f"not deflationary at {L.label(i)}"
        if im[im[i]] != im[i]:
            return f"not idempotent at {L.label(i)}"
        for j in _bits(L.up(i)):
            if not L.leq(im[i], im[j]):
                return f"not monotone at {L.label(i)} <= {L.label(j)}"
    return None


class ConsequenceRelationFin:
    """A relation ``x |- y`` on one lattice, stored as a set of index pairs."""

    def __init__(self, lattice: FiniteSupLattice, rel: Iterable[tuple[int, int]]):
        self.lattice = lattice
        self.rel = frozenset(rel)
        rows = [0] * lattice.n
        for x, y in self.rel:
            rows[x] |= 1 << y
        self._rows = tuple(rows)

    def entails(self, x: int, y: int) -> bool:
        return bool((self._rows[x] >> y) & 1)

    def consequences(self, x: int) -> list[int]:
        return list(_bits(self._rows[x]))

    def violations(self) -> list[str]:
        L = self.lattice
        out = []
        for x in range(L.n):
            for y in _bits(L.down(x)):
                if not self.entails(x, y):
                    out.append(f"{L.label(x)} >= {L.label(y)} but not {L.label(x)} |- {L.label(y)}")
            for y in self.consequences(x):
                for z in self.consequences(y):
                    if not self.entails(x, z):
                        out.append(f"transitivity fails: {L.label(x)} |- {L.label(y)} |- "
                                   f"{L.label(z)}")
            top = L.join(self.consequences(x))
            if not self.entails(x, top):
                out.append(f"{L.label(x)} does not entail the join {L.label(top)} of its "
                           f"consequences")
        return out

    def __eq__(self, other):
        return (isinstance(other, ConsequenceRelationFin) and self.lattice == other.lattice
                and self.rel == other.rel)

    def __hash__(self):
        return hash(self.rel)


def closure_to_consequence(j: ClosureOperator) -> ConsequenceRelationFin:
    L = j.lattice
    return ConsequenceRelationFin(L, ((x, y) for x in range(L.n) for y in _bits(L.down(j(x)))))


def consequence_to_closure(c: ConsequenceRelationFin) -> ClosureOperator:
    bad = c.violations()
    if bad:
        raise LatticeError("not a consequence relation: " + "; ".join(bad[:3]),
                           "not-consequence")
    L = c.lattice
    return ClosureOperator(L, [L.join(c.consequences(x)) for x in range(L.n)])


class QuotientFin:
    """A surjective join-preserving map, considered up to target isomorphism."""

    def __init__(self, q: MonotoneMap, check: bool = True):
        if check:
            if not q.is_surjective():
                raise LatticeError("quotient map is not surjective", "not-surjective")
            if join_violation(q) is not None:
                raise LatticeError("quotient map does not preserve joins", "not-join-preserving")
        self.q = q if isinstance(q, SupMorphism) else SupMorphism(q.source, q.target,
                                                                   q.images, check=False)

    @property
    def source(self):
        return self.q.source

    @property
    def target(self):
        return self.q.target

    def __call__(self, i):
        return self.q(i)

    def __repr__(self):
        return f"QuotientFin({self.q.as_labels()})"


def fixed_point_lattice(j: ClosureOperator, name: Optional[str] = None) -> tuple[FiniteSupLattice, list[int]]:
    """Fixed points of ``j`` with inherited order and labels, plus their indices in P."""
    L = j.lattice
    fix = j.fixed_points()
    pos = {x: k for k, x in enumerate(fix)}
    up = [sum(1 << pos[y] for y in _bits(L.up(x)) if y in pos) for x in fix]
    return FiniteSupLattice([L.label(x) for x in fix], up, name or f"{L.name}_j"), fix


def closure_to_quotient(j: ClosureOperator) -> QuotientFin:
    Pj, fix = fixed_point_lattice(j)
    pos = {x: k for k, x in enumerate(fix)}
    return QuotientFin(SupMorphism(j.lattice, Pj, [pos[j(x)] for x in range(j.lattice.n)],
                                   check=False), check=False)


def quotient_to_closure(q: QuotientFin) -> ClosureOperator:
    return ClosureOperator(q.source, q.q.then(right_adjoint(q.q)).images)


def quotient_iso(q1: QuotientFin, q2: QuotientFin) -> Optional[MonotoneMap]:
    """The isomorphism rho with q1;rho = q2, if the quotients are equivalent.

    Surjectivity of q1 forces rho(q1(x)) = q2(x), so the only candidate is
    built directly and then checked to be a well-defined order isomorphism.
    """
    if q1.source != q2.source:
        return None
    A, B = q1.target, q2.target
    if A.n != B.n:
        return None
    rho = [-1] * A.n
    for x in range(q1.source.n):
        a, b = q1(x), q2(x)
        if rho[a] == -1:
            rho[a] = b
        elif rho[a] != b:
            return None
    if len(set(rho)) != B.n:
        return None
    if any(A.leq(a, c) != B.leq(rho[a], rho[c]) for a in range(A.n) for c in range(A.n)):
        return None
    return SupMorphism(A, B, rho, check=False)


def inverse(rho: MonotoneMap) -> MonotoneMap:
    inv = [0] * rho.target.n
    for a, b in enumerate(rho.images):
        inv[b] = a
    return type(rho)(rho.target, rho.source, inv, check=False)


def image_lattice(f: MonotoneMap) -> tuple[FiniteSupLattice, list[int]]:
    """Set-image of ``f`` with the order induced from the target."""
    Q = f.target
    img = sorted(set(f.images))
    pos = {y: k for k, y in enumerate(img)}
    up = [sum(1 << pos[z] for z in _bits(Q.up(y)) if z in pos) for y in img]
    return FiniteSupLattice([Q.label(y) for y in img], up, f"im({Q.name})"), img


def image_factorization(f: MonotoneMap) -> tuple[QuotientFin, SupMorphism]:
    """Factor ``f`` as a surjection onto the fixed points of f_* f followed by an injection."""
    g = right_adjoint(f)
    eps = ClosureOperator(f.source, f.then(g).images, check=False)
    e = closure_to_quotient(eps)
    fix = eps.fixed_points()
    m = SupMorphism(e.target, f.target, [f(x) for x in fix])
    return e, m


# -- free suplattices and lifting -------------------------------------------------

def free_suplattice(T: Sequence[str], name: Optional[str] = None) -> FreeSupLattice:
    return FreeSupLattice(T, name)


def free_extension(P: FreeSupLattice, A: FiniteSupLattice, l: Sequence[int]) -> SupMorphism:
    """The join-preserving map P -> A sending each singleton {t} to l[t]."""
    if len(l) != len(P.generators):
        raise LatticeError("generator assignment is not total", "not-total")
    imgs = [A.join(l[t] for t in _bits(S)) for S in range(P.n)]
    return SupMorphism(P, A, imgs, check=False)


def lift_through_surjection(s: MonotoneMap, q: QuotientFin) -> SupMorphism:
    """A join-preserving L with L;q = s, choosing minimal-index preimages on generators."""
    P = s.source
    if not isinstance(P, FreeSupLattice):
        raise LatticeError("lifting needs a free suplattice as source", "not-free")
    if s.target != q.target:
        raise LatticeError("s and q have different targets", "type-mismatch")
    first: dict[int, int] = {}
    for x in range(q.source.n):
        first.setdefault(q(x), x)
    return free_extension(P, q.source, [first[s(1 << t)] for t in range(len(P.generators))])


# -- isomorphism search --------------------------------------------------------------

def _invariant(L: FiniteSupLattice, i: int):
    up, down = L.up(i), L.down(i)
    return (bin(down).count("1"), bin(up).count("1"),
            sorted(bin(L.down(j)).count("1") for j in _bits(up)))


def iso_search(L1: FiniteSupLattice, L2: FiniteSupLattice, bound: int = 12) -> Optional[tuple[int, ...]]:
    """An order isomorphism L1 -> L2 (as an index tuple) or None if none exists."""
    if max(L1.n, L2.n) > bound:
        raise GuardError(f"iso_search refuses lattices above {bound} elements "
                         f"({L1.n}, {L2.n})")
    if L1.n != L2.n:
        return None
    n = L1.n
    inv1 = [_invariant(L1, i) for i in range(n)]
    inv2 = [_invariant(L2, i) for i in range(n)]
    if sorted(inv1) != sorted(inv2):
        return None
    # Assign elements of L1 bottom-up so that order checks prune early.
    order = sorted(range(n), key=lambda i: (inv1[i][0], i))
    cand = [[j for j in range(n) if inv2[j] == inv1[i]] for i in range(n)]
    phi = [-1] * n
    used = [False] * n

    def ok(i, j):
        for k in range(n):
            if phi[k] >= 0 and (L1.leq(i, k) != L2.leq(j, phi[k])
                                or L1.leq(k, i) != L2.leq(phi[k], j)):
                return False
        return True

    def search(pos):
        if pos == n:
            return True
        i = order[pos]
        for j in cand[i]:
            if not used[j] and ok(i, j):
                phi[i], used[j] = j, True
                if search(pos + 1):
                    return True
                phi[i], used[j] = -1, False
        return False

    return tuple(phi) if search(0) else None


# -- catalogue and random instances ---------------------------------------------------

def _canonical_up(n: int, up: Sequence[int]) -> tuple[int, ...]:
    best = None
    for perm in itertools.permutations(range(n)):
        # perm[i] = new index of old element i
        new = [0] * n
        for i in range(n):
            new[perm[i]] = sum(1 << perm[j] for j in _bits(up[i]))
        key = tuple(new)
        if best is None or key < best:
            best = key
    return best


def all_lattices(max_size: int) -> list[FiniteSupLattice]:
    """Every finite lattice with 1..max_size elements, one per isomorphism class.

    Element 0 is the bottom and element n-1 the top; the middle is every
    partial order on n-2 points that makes the whole a lattice.
    """
    out = []
    for n in range(1, max_size + 1):
        if n <= 2:
            out.append(chain(n, f"L{n}_0"))
            continue
        m = n - 2
        pairs = [(a, b) for a in range(m) for b in range(m) if a != b]
        seen = set()
        k = 0
        for choice in itertools.product((False, True), repeat=len(pairs)):
            up = [1 << a for a in range(m)]
            for (a, b), c in zip(pairs, choice):
                if c:
                    up[a] |= 1 << b
            # must already be a partial order (transitive, antisymmetric)
            if any((up[a] >> b) & 1 and not (up[a] & up[b]) == up[b] for a in range(m)
                   for b in range(m)):
                continue
            if any(a != b and (up[a] >> b) & 1 and (up[b] >> a) & 1 for a in range(m)
                   for b in range(m)):
                continue
            full = [(u << 1) | (1 << (n - 1)) for u in up]
            ups = [(1 << n) - 1] + full + [1 << (n - 1)]
            L = FiniteSupLattice([str(i) for i in range(n)], ups, "tmp")
            if not check_suplattice(L).valid:
                continue
            key = _canonical_up(n, ups)
            if key in seen:
                continue
            seen.add(key)
            L.name = f"L{n}_{k}"
            k += 1
            out.append(L)
    return out


def all_closure_operators(L: FiniteSupLattice) -> list[ClosureOperator]:
    """Closure operators as meet-closed families containing the top."""
    others = [i for i in range(L.n) if i != L.top]
    out = []
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            fam = set(extra) | {L.top}
            if any(L.meet((a, b)) not in fam for a in fam for b in fam):
                continue
            imgs = [L.meet(y for y in fam if L.leq(x, y)) for x in range(L.n)]
            out.append(ClosureOperator(L, imgs, check=False))
    return out


def all_sup_morphisms(P: FiniteSupLattice, A: FiniteSupLattice) -> list[SupMorphism]:
    """Exhaustive and slow: every join-preserving map P -> A."""
    out = []
    for imgs in itertools.product(range(A.n), repeat=P.n):
        f = MonotoneMap(P, A, imgs, check=False)
        if join_violation(f) is None:
            out.append(SupMorphism(P, A, imgs, check=False))
    return out


def relabel(L: FiniteSupLattice, prefix: str) -> FiniteSupLattice:
    return FiniteSupLattice([f"{prefix}{e}" for e in L.elements], L._up, f"{prefix}{L.name}")


def join_irreducibles(L: FiniteSupLattice) -> list[int]:
    out = []
    for i in range(L.n):
        if i == L.bottom:
            continue
        below = L.down(i) & ~(1 << i)
        if L.join(_bits(below)) != i:
            out.append(i)
    return out


def extend_from_irreducibles(P, Q, assign: Mapping[int, int]) -> MonotoneMap:
    imgs = [Q.join(assign[j] for j in assign if P.leq(j, x)) for x in range(P.n)]
    return MonotoneMap(P, Q, imgs, check=False)


def random_closure(rng: random.Random, L: FiniteSupLattice) -> ClosureOperator:
    fam = {L.top}
    for x in range(L.n):
        if rng.random() < 0.5:
            fam.add(x)
    changed = True
    while changed:
        changed = False
        for a in list(fam):
            for b in list(fam):
                m = L.meet((a, b))
                if m not in fam:
                    fam.add(m)
                    changed = True
    imgs = [L.meet(y for y in fam if L.leq(x, y)) for x in range(L.n)]
    return ClosureOperator(L, imgs, check=False)


def random_sub_inclusion(rng: random.Random, Q: FiniteSupLattice) -> SupMorphism:
    """Inclusion of a random join-closed subset containing bottom."""
    sub = {Q.bottom} | {x for x in range(Q.n) if rng.random() < 0.5}
    changed = True
    while changed:
        changed = False
        for a in list(sub):
            for b in list(sub):
                j = Q.join2(a, b)
                if j not in sub:
                    sub.add(j)
                    changed = True
    img = sorted(sub)
    pos = {y: k for k, y in enumerate(img)}
    up = [sum(1 << pos[z] for z in _bits(Q.up(y)) if z in pos) for y in img]
    sublat = FiniteSupLattice([Q.label(y) for y in img], up, f"sub({Q.name})")
    return SupMorphism(sublat, Q, img, check=False)


@lru_cache(maxsize=None)
def _catalogue(max_elems: int) -> tuple[FiniteSupLattice, ...]:
    return tuple(all_lattices(max_elems))


class MorphismSampler:
    """Seeded source of join-preserving maps between lattices of bounded size.

    Draws from four families in rotation so that surjective, injective and
    generic maps all appear: random images of join-irreducibles, quotients by
    random closure operators, inclusions of random sub-suplattices, and
    composites of a quotient with an inclusion.
    """

    def __init__(self, seed: int = 0, max_elems: int = 6):
        self.rng = random.Random(seed)
        self.catalogue = _catalogue(max_elems)

    def lattice(self) -> FiniteSupLattice:
        return self.rng.choice(self.catalogue)

    def generic(self) -> SupMorphism:
        P, Q = self.lattice(), self.lattice()
        ji = join_irreducibles(P)
        for _ in range(20):
            f = extend_from_irreducibles(P, Q, {j: self.rng.randrange(Q.n) for j in ji})
            if join_violation(f) is None:
                return SupMorphism(P, Q, f.images, check=False)
        return SupMorphism(P, Q, [Q.bottom] * P.n, check=False)

    def surjection(self) -> SupMorphism:
        return closure_to_quotient(random_closure(self.rng, self.lattice())).q

    def injection(self) -> SupMorphism:
        return random_sub_inclusion(self.rng, self.lattice())

    def composite(self) -> SupMorphism:
        m = random_sub_inclusion(self.rng, self.lattice())
        e = closure_to_quotient(random_closure(self.rng, m.target)).q
        return m.then(e)

    def morphism(self, k: int) -> SupMorphism:
        kind = k % 4
        if kind == 0:
            return self.generic()
        if kind == 1:
            return self.surjection()
        if kind == 2:
            return self.injection()
        return self.composite()

    def sample(self, count: int) -> list[SupMorphism]:
        return [self.morphism(k) for k in range(count)]
