"""Finite posets, inf-semilattices and Heyting algebras.

Every fiber of a doctrine is one of the lattice classes below.  They share
an informal protocol: ``elements``, ``size``, ``leq``, ``meet``, ``top`` and,
for Heyting algebras, ``bottom``, ``join``, ``impl`` and ``neg``.  Elements are
any hashable values; posets read from files use strings, powerset fibers use
integer bitmasks.

Adjoints of monotone maps are found by exhaustive minimum/maximum search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Elem = Hashable


class OrderError(ValueError):
    """Base class for order-theoretic validation failures."""


class NotReflexive(OrderError):
    def __init__(self, x: Elem):
        super().__init__(f"not reflexive at {x!r}")
        self.x = x


class NotAntisymmetric(OrderError):
    def __init__(self, x: Elem, y: Elem):
        super().__init__(f"not antisymmetric: {x!r} <= {y!r} <= {x!r}")
        self.x, self.y = x, y


class NotTransitive(OrderError):
    def __init__(self, x: Elem, y: Elem, z: Elem):
        super().__init__(f"not transitive: {x!r} <= {y!r} <= {z!r}")
        self.x, self.y, self.z = x, y, z


class NotMonotone(OrderError):
    def __init__(self, x: Elem, y: Elem):
        super().__init__(f"map not monotone on {x!r} <= {y!r}")
        self.x, self.y = x, y


class NoMeet(OrderError):
    def __init__(self, a: Elem, b: Elem, kind: str = "meet"):
        super().__init__(f"no {kind} for {a!r} and {b!r}")
        self.a, self.b, self.kind = a, b, kind


class NoAdjoint(OrderError):
    """Raised when the optimal candidate for ``b`` does not exist.

    ``candidates`` is the antichain of minimal (or maximal) candidates.
    """

    def __init__(self, b: Elem, candidates: tuple, side: str = "left"):
        super().__init__(f"no {side} adjoint at {b!r}; extremal candidates {candidates!r}")
        self.b, self.candidates, self.side = b, candidates, side


class NotHeyting(OrderError):
    def __init__(self, a: Elem, b: Elem, c: Elem):
        super().__init__(f"residuation fails for a={a!r}, b={b!r}, c={c!r}")
        self.a, self.b, self.c = a, b, c


# ============================================================================
# Posets
# ============================================================================


class FinPoset:
    """A validated finite poset.  Order is stored as down-set bitmasks."""

    __slots__ = ("elements", "_index", "_down")

    def __init__(self, elements: Sequence[Elem], down: Sequence[int]):
        self.elements = tuple(elements)
        self._index = {e: i for i, e in enumerate(self.elements)}
        self._down = tuple(down)

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, a: Elem) -> int:
        return self._index[a]

    def __contains__(self, a: object) -> bool:
        return a in self._index

    def leq(self, a: Elem, b: Elem) -> bool:
        return bool((self._down[self._index[b]] >> self._index[a]) & 1)

    def down(self, a: Elem) -> list:
        mask = self._down[self._index[a]]
        return [e for i, e in enumerate(self.elements) if (mask >> i) & 1]

    def pairs(self) -> list[tuple[Elem, Elem]]:
        return [(a, b) for b in self.elements for a in self.down(b)]

    def minimal(self, subset: Iterable[Elem]) -> list:
        subset = list(subset)
        return [a for a in subset if not any(b != a and self.leq(b, a) for b in subset)]

    def maximal(self, subset: Iterable[Elem]) -> list:
        subset = list(subset)
        return [a for a in subset if not any(b != a and self.leq(a, b) for b in subset)]

    def __repr__(self) -> str:
        return f"FinPoset({len(self.elements)} elements)"


def poset_from_leq(elements: Sequence[Elem], leq: Callable[[Elem, Elem], bool]) -> FinPoset:
    """Build a poset from a trusted order predicate (no law checks)."""
    elements = tuple(elements)
    down = []
    for b in elements:
        mask = 0
        for i, a in enumerate(elements):
            if leq(a, b):
                mask |= 1 << i
        down.append(mask)
    return FinPoset(elements, down)


def check_poset(elements: Sequence[Elem], leq: Iterable[tuple[Elem, Elem]]) -> FinPoset:
    """Validate raw order data, raising the first violated law."""
    elements = tuple(elements)
    if len(set(elements)) != len(elements):
        dup = next(e for e in elements if elements.count(e) > 1)
        raise OrderError(f"duplicate element {dup!r}")
    index = {e: i for i, e in enumerate(elements)}
    down = [0] * len(elements)
    for a, b in leq:
        if a not in index or b not in index:
            raise OrderError(f"pair ({a!r}, {b!r}) mentions an unknown element")
        down[index[b]] |= 1 << index[a]
    for i, x in enumerate(elements):
        if not (down[i] >> i) & 1:
            raise NotReflexive(x)
    for i, x in enumerate(elements):
        for j in range(i + 1, len(elements)):
            if (down[j] >> i) & 1 and (down[i] >> j) & 1:
                raise NotAntisymmetric(x, elements[j])
    for j, y in enumerate(elements):
        for i, x in enumerate(elements):
            if not (down[j] >> i) & 1:
                continue
            for k, z in enumerate(elements):
                if (down[k] >> j) & 1 and not (down[k] >> i) & 1:
                    raise NotTransitive(x, y, z)
    return FinPoset(elements, down)


def chain(n: int) -> FinPoset:
    """The chain 0 < 1 < ... < n-1 with string ids."""
    return poset_from_leq([str(i) for i in range(n)], lambda a, b: int(a) <= int(b))


# ============================================================================
# Lattices
# ============================================================================


class InfSemilattice:
    """A finite poset with a top element and binary meets (tabulated)."""

    def __init__(self, base: FinPoset, top: Elem, meet: Mapping[tuple[Elem, Elem], Elem]):
        self.base = base
        self.top = top
        self._meet = dict(meet)

    @property
    def elements(self) -> tuple:
        return self.base.elements

    @property
    def size(self) -> int:
        return self.base.size

    def leq(self, a: Elem, b: Elem) -> bool:
        return self.base.leq(a, b)

    def meet(self, a: Elem, b: Elem) -> Elem:
        return self._meet[a, b]

    def __contains__(self, a: object) -> bool:
        return a in self.base

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.size} elements)"


def _extremum(poset: FinPoset, cands: list, least: bool) -> Elem | None:
    for c in cands:
        if all(poset.leq(c, d) if least else poset.leq(d, c) for d in cands):
            return c
    return None


def inf_semilattice(poset: FinPoset) -> InfSemilattice:
    """Tabulate meets and the top of ``poset``; raise NoMeet if one is missing."""
    els = poset.elements
    top = _extremum(poset, list(els), least=False)
    if top is None:
        raise NoMeet(None, None, "top")
    meet = {}
    for a in els:
        for b in els:
            lower = [c for c in els if poset.leq(c, a) and poset.leq(c, b)]
            m = _extremum(poset, lower, least=False)
            if m is None:
                raise NoMeet(a, b)
            meet[a, b] = m
    return InfSemilattice(poset, top, meet)


class HeytingAlgebra(InfSemilattice):
    """A finite Heyting algebra with tabulated join and implication."""

    def __init__(self, base: InfSemilattice, bottom: Elem, join: Mapping, impl: Mapping):
        super().__init__(base.base, base.top, base._meet)
        self.bottom = bottom
        self._join = dict(join)
        self._impl = dict(impl)

    def join(self, a: Elem, b: Elem) -> Elem:
        return self._join[a, b]

    def impl(self, a: Elem, b: Elem) -> Elem:
        return self._impl[a, b]

    def neg(self, a: Elem) -> Elem:
        return self._impl[a, self.bottom]


def heyting_complete(lat: InfSemilattice) -> HeytingAlgebra:
    """Compute joins and implication; reject lattices where residuation fails."""
    P = lat.base
    els = P.elements
    bottom = _extremum(P, list(els), least=True)
    if bottom is None:
        raise NoMeet(None, None, "bottom")
    join = {}
    for a in els:
        for b in els:
            upper = [c for c in els if P.leq(a, c) and P.leq(b, c)]
            j = _extremum(P, upper, least=True)
            if j is None:
                raise NoMeet(a, b, "join")
            join[a, b] = j

    def big_join(xs: list) -> Elem:
        acc = bottom
        for x in xs:
            acc = join[acc, x]
        return acc

    impl = {}
    for a in els:
        for b in els:
            impl[a, b] = big_join([c for c in els if P.leq(lat.meet(c, a), b)])
    for a in els:
        for b in els:
            ab = impl[a, b]
            for c in els:
                if P.leq(c, ab) != P.leq(lat.meet(c, a), b):
                    raise NotHeyting(a, b, c)
    return HeytingAlgebra(lat, bottom, join, impl)


class PowersetAlgebra:
    """Subsets of {0..n-1} as integer bitmasks; a Boolean algebra.

    Elements are enumerated lazily so that large fibers can still be used
    pointwise (reindexing, meets) without ever being listed.
    """

    def __init__(self, n: int):
        self.n = n
        self.top = (1 << n) - 1
        self.bottom = 0
        self._elements: tuple | None = None

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def elements(self) -> tuple:
        if self._elements is None:
            if self.n > 20:
                raise OrderError(f"refusing to enumerate 2^{self.n} subsets")
            self._elements = tuple(range(1 << self.n))
        return self._elements

    def __contains__(self, a: object) -> bool:
        return isinstance(a, int) and 0 <= a <= self.top

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def meet(self, a: int, b: int) -> int:
        return a & b

    def join(self, a: int, b: int) -> int:
        return a | b

    def impl(self, a: int, b: int) -> int:
        return (~a | b) & self.top

    def neg(self, a: int) -> int:
        return ~a & self.top

    def __repr__(self) -> str:
        return f"PowersetAlgebra({self.n})"


class SubSemilattice:
    """A subset of a lattice closed under meets and containing the top."""

    def __init__(self, parent, elements: Sequence[Elem]):
        self.parent = parent
        self._elements = tuple(elements)
        self._set = frozenset(self._elements)
        self.top = parent.top

    @property
    def elements(self) -> tuple:
        return self._elements

    @property
    def size(self) -> int:
        return len(self._elements)

    def __contains__(self, a: object) -> bool:
        return a in self._set

    def leq(self, a: Elem, b: Elem) -> bool:
        return self.parent.leq(a, b)

    def meet(self, a: Elem, b: Elem) -> Elem:
        return self.parent.meet(a, b)

    def __repr__(self) -> str:
        return f"SubSemilattice({self.size} of {self.parent!r})"


def as_poset(lat) -> FinPoset:
    """The underlying FinPoset of any lattice-like fiber."""
    base = getattr(lat, "base", None)
    if isinstance(base, FinPoset):
        return base
    return poset_from_leq(lat.elements, lat.leq)


def is_heyting(lat) -> bool:
    return hasattr(lat, "impl") and hasattr(lat, "join")


# ============================================================================
# Monotone maps and adjoints
# ============================================================================


@dataclass(frozen=True)
class MonotoneMap:
    """A total monotone map between finite posets (or lattices)."""

    dom: object
    cod: object
    graph: Mapping

    def __call__(self, a: Elem) -> Elem:
        return self.graph[a]

    def check(self) -> "MonotoneMap":
        for a in self.dom.elements:
            if a not in self.graph:
                raise OrderError(f"map undefined at {a!r}")
            if self.graph[a] not in self.cod:
                raise OrderError(f"image of {a!r} outside codomain")
        for a in self.dom.elements:
            for b in self.dom.elements:
                if self.dom.leq(a, b) and not self.cod.leq(self.graph[a], self.graph[b]):
                    raise NotMonotone(a, b)
        return self


def monotone(dom, cod, fn: Callable[[Elem], Elem]) -> MonotoneMap:
    return MonotoneMap(dom, cod, {a: fn(a) for a in dom.elements})


def least_with(poset, pred: Callable[[Elem], bool], at: Elem = None) -> Elem:
    """Minimum of the elements satisfying ``pred`` or NoAdjoint with the minimal ones."""
    cands = [a for a in poset.elements if pred(a)]
    best = _extremum_generic(poset, cands, least=True)
    if best is None:
        raise NoAdjoint(at, tuple(_minimal_generic(poset, cands)), "left")
    return best


def greatest_with(poset, pred: Callable[[Elem], bool], at: Elem = None) -> Elem:
    cands = [a for a in poset.elements if pred(a)]
    best = _extremum_generic(poset, cands, least=False)
    if best is None:
        raise NoAdjoint(at, tuple(_maximal_generic(poset, cands)), "right")
    return best


def _extremum_generic(poset, cands: list, least: bool) -> Elem | None:
    if not cands:
        return None
    # a unique minimal element of an up-closed finite set is its minimum, but
    # the candidate sets here need not be up-closed, so test every element
    for c in (_minimal_generic(poset, cands) if least else _maximal_generic(poset, cands)):
        if all(poset.leq(c, d) if least else poset.leq(d, c) for d in cands):
            return c
    return None


def _minimal_generic(poset, cands: list) -> list:
    return [a for a in cands if not any(b != a and poset.leq(b, a) for b in cands)]


def _maximal_generic(poset, cands: list) -> list:
    return [a for a in cands if not any(b != a and poset.leq(a, b) for b in cands)]


def left_adjoint(f: MonotoneMap) -> MonotoneMap:
    """g(b) = min{a | b <= f(a)}; the result satisfies g(b) <= a iff b <= f(a)."""
    graph = {}
    for b in f.cod.elements:
        graph[b] = least_with(f.dom, lambda a: f.cod.leq(b, f(a)), at=b)
    g = MonotoneMap(f.cod, f.dom, graph)
    _assert_adjunction(g, f)
    return g


def right_adjoint(f: MonotoneMap) -> MonotoneMap:
    """h(b) = max{a | f(a) <= b}; the result satisfies f(a) <= b iff a <= h(b)."""
    graph = {}
    for b in f.cod.elements:
        graph[b] = greatest_with(f.dom, lambda a: f.cod.leq(f(a), b), at=b)
    h = MonotoneMap(f.cod, f.dom, graph)
    _assert_adjunction(f, h)
    return h


def _assert_adjunction(lower: MonotoneMap, upper: MonotoneMap) -> None:
    # lower: X -> Y, upper: Y -> X with lower(x) <= y iff x <= upper(y)
    X, Y = lower.dom, lower.cod
    for x in X.elements:
        lx = lower(x)
        for y in Y.elements:
            if Y.leq(lx, y) != X.leq(x, upper(y)):
                raise NoAdjoint(x, (lx, y), "adjunction")


def is_adjunction(lower: MonotoneMap, upper: MonotoneMap) -> bool:
    try:
        _assert_adjunction(lower, upper)
    except NoAdjoint:
        return False
    return True


def preserves_existing_meets(f: MonotoneMap) -> bool:
    """True iff f maps the meet of every subset that has one to a meet of the image.

    When the domain is a finite lattice, f has a left adjoint exactly when this
    holds (the empty subset included, whose meet is the top).  On other posets
    it is only necessary.
    """
    dom, cod = f.dom, f.cod
    els = list(dom.elements)
    n = len(els)
    for mask in range(1 << n):
        sub = [els[i] for i in range(n) if (mask >> i) & 1]
        lower = [c for c in els if all(dom.leq(c, s) for s in sub)]
        m = _extremum_generic(dom, lower, least=False)
        if m is None:
            continue
        img = [f(s) for s in sub]
        cod_lower = [c for c in cod.elements if all(cod.leq(c, s) for s in img)]
        cm = _extremum_generic(cod, cod_lower, least=False)
        if cm is None or cm != f(m):
            return False
    return True
