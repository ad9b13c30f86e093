"""Doctrines over finite categories and checkers for their structure.

A doctrine assigns a finite inf-semilattice ``fiber(A)`` to each object and
a reindexing map ``reindex(f, x)`` to each arrow.  Fibers may be large enough
that they are never listed (powersets of a 16-element set, say); every
operation below works pointwise, and exhaustive checks skip objects whose
fibers exceed a ``max_fiber`` guard, reporting how many were skipped.

Quantifiers and equality are computed, never declared.  The base class finds
them as order adjoints by search; subclasses may add fast routes (images for
subset fibers, post-composition for variations) and the test suite checks
that both routes agree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .fincat import Category, CategoryError, FinCategory, FinSetCategory, MissingProduct, Product, triple
from .order import (
    FinPoset,
    InfSemilattice,
    MonotoneMap,
    NoAdjoint,
    OrderError,
    PowersetAlgebra,
    check_poset,
    heyting_complete,
    inf_semilattice,
    left_adjoint,
    right_adjoint,
)

Obj = Hashable
Arrow = Hashable
Elem = Hashable

MAX_FIBER = 4096


class DoctrineError(ValueError):
    pass


class NotFunctorial(DoctrineError):
    def __init__(self, f, g, detail: str = ""):
        super().__init__(f"reindexing is not functorial at {g!r} . {f!r} {detail}".rstrip())
        self.f, self.g = f, g


class NotMeetPreserving(DoctrineError):
    def __init__(self, f, a, b):
        super().__init__(f"reindexing along {f!r} does not preserve the meet of {a!r}, {b!r}")
        self.f, self.a, self.b = f, a, b


class NoDelta(DoctrineError):
    def __init__(self, a, detail: str = ""):
        super().__init__(f"no equality predicate over {a!r} {detail}".rstrip())
        self.a = a


class NoLeftAdjoint(DoctrineError):
    def __init__(self, pr, alpha=None):
        super().__init__(f"reindexing along {pr!r} has no left adjoint (at {alpha!r})")
        self.pr, self.alpha = pr, alpha


class NoRightAdjoint(DoctrineError):
    def __init__(self, pr, alpha=None):
        super().__init__(f"reindexing along {pr!r} has no right adjoint (at {alpha!r})")
        self.pr, self.alpha = pr, alpha


class BeckChevalleyFails(DoctrineError):
    def __init__(self, f, pr, alpha, kind: str = "exists"):
        super().__init__(f"Beck-Chevalley ({kind}) fails for {f!r} against {pr!r} at {alpha!r}")
        self.f, self.pr, self.alpha, self.kind = f, pr, alpha, kind


class MissingExponential(DoctrineError):
    def __init__(self, a, b):
        super().__init__(f"no weak exponential of {b!r} to the power {a!r}")
        self.a, self.b = a, b


class OutOfScope(DoctrineError):
    """A construction left the finite fragment; callers count it as truncation."""


@dataclass(frozen=True)
class Verdict:
    """A boolean outcome with a replayable witness and a truncation count."""

    ok: bool
    witness: tuple = ()
    detail: str = ""
    truncated: int = 0

    def __bool__(self) -> bool:
        return self.ok


# ============================================================================
# Base class
# ============================================================================


class Doctrine:
    """An indexed inf-semilattice over ``base``.

    Subclasses implement ``fiber`` and ``_reindex``.  Everything else has a
    generic implementation by search in the (enumerable) fibers.
    """

    name = "P"

    def __init__(self, base: Category, name: str | None = None):
        self.base = base
        if name is not None:
            self.name = name
        self._rcache: dict = {}
        self._ecache: dict = {}
        self._acache: dict = {}
        self._dcache: dict = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"

    @property
    def objects(self) -> tuple:
        return self.base.objects

    # primitives -----------------------------------------------------------

    def fiber(self, a: Obj):
        raise NotImplementedError

    def _reindex(self, f: Arrow, x: Elem) -> Elem:
        raise NotImplementedError

    def reindex(self, f: Arrow, x: Elem) -> Elem:
        key = (f, x)
        r = self._rcache.get(key)
        if r is None:
            r = self._reindex(f, x)
            self._rcache[key] = r
        return r

    def reindex_map(self, f: Arrow) -> MonotoneMap:
        C = self.base
        dom, cod = self.fiber(C.tgt(f)), self.fiber(C.src(f))
        return MonotoneMap(dom, cod, {x: self.reindex(f, x) for x in dom.elements})

    def top(self, a: Obj) -> Elem:
        return self.fiber(a).top

    def leq(self, a: Obj, x: Elem, y: Elem) -> bool:
        return self.fiber(a).leq(x, y)

    def meet(self, a: Obj, x: Elem, y: Elem) -> Elem:
        return self.fiber(a).meet(x, y)

    def fiber_size(self, a: Obj) -> int:
        return self.fiber(a).size

    # Heyting structure, generic by search ---------------------------------

    def bottom(self, a: Obj) -> Elem:
        F = self.fiber(a)
        if hasattr(F, "bottom"):
            return F.bottom
        return _least(F, F.elements, ("bottom", a))

    def join(self, a: Obj, x: Elem, y: Elem) -> Elem:
        F = self.fiber(a)
        if hasattr(F, "join"):
            return F.join(x, y)
        return _least(F, [c for c in F.elements if F.leq(x, c) and F.leq(y, c)], ("join", a, x, y))

    def impl(self, a: Obj, x: Elem, y: Elem) -> Elem:
        F = self.fiber(a)
        if hasattr(F, "impl"):
            return F.impl(x, y)
        key = ("impl", a, x, y)
        if key not in self._dcache:
            cands = [c for c in F.elements if F.leq(F.meet(c, x), y)]
            self._dcache[key] = _greatest(F, cands, key)
        return self._dcache[key]

    def neg(self, a: Obj, x: Elem) -> Elem:
        return self.impl(a, x, self.bottom(a))

    # quantifiers ------------------------------------------------------------

    def exists_along(self, f: Arrow, x: Elem) -> Elem:
        """Least y over tgt(f) with x <= f*y."""
        key = (f, x)
        if key not in self._ecache:
            self._ecache[key] = self._exists_generic(f, x)
        return self._ecache[key]

    def forall_along(self, f: Arrow, x: Elem) -> Elem:
        """Greatest y over tgt(f) with f*y <= x."""
        key = (f, x)
        if key not in self._acache:
            self._acache[key] = self._forall_generic(f, x)
        return self._acache[key]

    def _exists_generic(self, f: Arrow, x: Elem) -> Elem:
        C = self.base
        A, B = C.src(f), C.tgt(f)
        FA, FB = self.fiber(A), self.fiber(B)
        cands = [y for y in FB.elements if FA.leq(x, self.reindex(f, y))]
        try:
            return _least(FB, cands, x)
        except NoAdjoint:
            raise NoLeftAdjoint(f, x) from None

    def _forall_generic(self, f: Arrow, x: Elem) -> Elem:
        C = self.base
        A, B = C.src(f), C.tgt(f)
        FA, FB = self.fiber(A), self.fiber(B)
        cands = [y for y in FB.elements if FA.leq(self.reindex(f, y), x)]
        try:
            return _greatest(FB, cands, x)
        except NoAdjoint:
            raise NoRightAdjoint(f, x) from None

    def exists_generic(self, f: Arrow, x: Elem) -> Elem:
        """The search route, bypassing any fast override (used for cross-checks)."""
        return self._exists_generic(f, x)

    def forall_generic(self, f: Arrow, x: Elem) -> Elem:
        return self._forall_generic(f, x)

    # equality ---------------------------------------------------------------

    def delta(self, a: Obj) -> Elem:
        """The equality candidate over ``a``: the image of the top along the diagonal.

        This is what the elementary law forces at X = 1; ``find_elementary``
        checks the law everywhere and searches independently on small fibers.
        """
        key = ("delta", a)
        if key not in self._dcache:
            C = self.base
            self._dcache[key] = self.exists_along(C.diagonal(a), self.top(a))
        return self._dcache[key]

    # comprehension hook -----------------------------------------------------

    def comprehension_candidates(self, a: Obj, x: Elem) -> Iterable[Arrow]:
        return ()


def _least(F, cands: Sequence, at) -> Elem:
    for c in cands:
        if all(F.leq(c, d) for d in cands):
            return c
    raise NoAdjoint(at, tuple(c for c in cands if not any(d != c and F.leq(d, c) for d in cands)), "left")


def _greatest(F, cands: Sequence, at) -> Elem:
    for c in reversed(cands):
        if all(F.leq(d, c) for d in cands):
            return c
    raise NoAdjoint(at, tuple(c for c in cands if not any(d != c and F.leq(c, d) for d in cands)), "right")


# ============================================================================
# Explicit doctrines
# ============================================================================


class TableDoctrine(Doctrine):
    """Fibers and reindexing maps given by tables (description files, fixtures).

    Reindexing along an identity may be omitted and defaults to the identity.
    """

    def __init__(self, base: Category, fibers: Mapping, reindex: Mapping, name: str = "T"):
        super().__init__(base, name)
        self.fibers = dict(fibers)
        self.tables = {f: dict(m) for f, m in reindex.items()}

    def fiber(self, a):
        return self.fibers[a]

    def _reindex(self, f, x):
        m = self.tables.get(f)
        if m is None:
            if f == self.base.identity(self.base.src(f)):
                return x
            raise DoctrineError(f"no reindexing table for {f!r}")
        return m[x]


def lattice_from_order(elements: Sequence, leq_pairs: Iterable) -> InfSemilattice:
    """Validate an order and tabulate its meets; Heyting-complete it when possible."""
    lat = inf_semilattice(check_poset(elements, leq_pairs))
    try:
        return heyting_complete(lat)
    except OrderError:
        return lat


class ConstantDoctrine(Doctrine):
    """The same lattice over every object; every reindexing is the identity."""

    def __init__(self, base: Category, lattice, name: str = "const"):
        super().__init__(base, name)
        self.lattice = lattice

    def fiber(self, a):
        return self.lattice

    def _reindex(self, f, x):
        return x

    def exists_along(self, f, x):
        return x

    def forall_along(self, f, x):
        return x


def constant_doctrine(C: Category, lattice=None, name: str = "const") -> ConstantDoctrine:
    """Every fiber is ``lattice`` (default: one point) and every reindexing is the identity."""
    if lattice is None:
        lattice = lattice_from_order(["*"], [("*", "*")])
    return ConstantDoctrine(C, lattice, name)


def _all_objects(C: Category) -> tuple:
    return tuple(C.objects)


# ============================================================================
# Subset fibers: Sub over finite sets, and the powerset-of-points doctrine
# ============================================================================


class SubsetDoctrine(Doctrine):
    """Fiber over A is the powerset of the points of A, reindexing is preimage.

    ``points(a)`` gives the number of points of an object and ``table(f)`` the
    function an arrow induces on points.  Subsets are bitmasks.
    """

    def __init__(self, base: Category, points: Callable[[Obj], int], table: Callable[[Arrow], Sequence[int]], name: str = "Sub"):
        super().__init__(base, name)
        self.points = points
        self.table = table
        self._fibers: dict = {}

    def fiber(self, a):
        n = self.points(a)
        F = self._fibers.get(n)
        if F is None:
            F = self._fibers[n] = PowersetAlgebra(n)
        return F

    def _reindex(self, f, x):
        out = 0
        for i, v in enumerate(self.table(f)):
            if (x >> v) & 1:
                out |= 1 << i
        return out

    def exists_along(self, f, x):
        out = 0
        for i, v in enumerate(self.table(f)):
            if (x >> i) & 1:
                out |= 1 << v
        return out

    def forall_along(self, f, x):
        n = self.points(self.base.tgt(f))
        bad = 0
        for i, v in enumerate(self.table(f)):
            if not (x >> i) & 1:
                bad |= 1 << v
        return ((1 << n) - 1) & ~bad

    def delta(self, a):
        return self.exists_along(self.base.diagonal(a), self.top(a))

    def comprehension_candidates(self, a, x):
        hook = getattr(self.base, "comprehension_candidates", None)
        if hook is not None:
            yield from hook(a, x)


def subobject_doctrine(C: Category, objects: Iterable | None = None) -> Doctrine:
    """Sub(C): subsets for finite sets, mono classes for an explicit category."""
    if isinstance(C, FinSetCategory):
        return SubsetDoctrine(C, lambda n: n, lambda f: f.table, name="Sub")
    return VariationDoctrine(C, objects=objects, monos_only=True, name="Sub")


# ============================================================================
# Variations: the poset reflection of the slice
# ============================================================================


class VariationFiber:
    """Classes of arrows into an object, ordered by factorization."""

    def __init__(self, D: "VariationDoctrine", a: Obj):
        self.D = D
        self.a = a
        self._leq: dict = {}
        self._meet: dict = {}

    @cached_property
    def elements(self) -> tuple:
        return tuple(self.D._reps(self.a))

    @property
    def size(self) -> int:
        return len(self.elements)

    @cached_property
    def top(self):
        return self.D.classify(self.D.base.identity(self.a))

    def __contains__(self, x) -> bool:
        return x in set(self.elements)

    def leq(self, x, y) -> bool:
        key = (x, y)
        r = self._leq.get(key)
        if r is None:
            r = self._leq[key] = self.D.base.factor(x, y) is not None
        return r

    def meet(self, x, y):
        key = (x, y)
        r = self._meet.get(key)
        if r is None:
            C = self.D.base
            sq = C.weak_pullback(x, y)
            if sq is None:
                raise OutOfScope(f"no weak pullback for {x!r}, {y!r}")
            r = self._meet[key] = self.D.classify(C.compose(x, sq.p))
        return r

    def __repr__(self) -> str:
        return f"VariationFiber({self.a!r})"


class VariationDoctrine(Doctrine):
    """Wsb(C): arrows into A modulo mutual factorization; reindexing by weak pullback.

    Representatives come from the category's ``variation_rep``/``variation_key``
    hooks when it has them; otherwise every arrow from a scope object is
    enumerated and grouped by factorization.  With ``monos_only`` only monic
    representatives are kept, which gives the subobject doctrine of an
    explicit category.
    """

    def __init__(self, base: Category, objects: Iterable | None = None, monos_only: bool = False, use_hooks: bool = True, name: str = "Wsb"):
        super().__init__(base, name)
        self.scope = tuple(objects) if objects is not None else tuple(base.objects)
        self.monos_only = monos_only
        self.use_hooks = use_hooks and hasattr(base, "variation_key") and not monos_only
        self._fibers: dict = {}
        self._classes: dict = {}

    def fiber(self, a):
        F = self._fibers.get(a)
        if F is None:
            F = self._fibers[a] = VariationFiber(self, a)
        return F

    def _reps(self, a):
        C = self.base
        if self.use_hooks:
            return [r for r in C.variation_reps(a) if r is not None]
        reps: list = []
        for x in self.scope:
            for h in C.hom(x, a):
                if self.monos_only and not C.is_mono(h, self.scope):
                    continue
                if not any(_equivalent(C, h, r) for r in reps):
                    reps.append(h)
        return reps

    def classify(self, h):
        """The chosen representative of the class of ``h``."""
        C = self.base
        if self.use_hooks:
            key = (C.tgt(h), C.variation_key(h))
            r = self._classes.get(key)
            if r is None:
                r = C.variation_rep(C.tgt(h), key[1])
                if r is None:
                    raise OutOfScope(f"class of {h!r} has no representative in the fragment")
                self._classes[key] = r
            return r
        for r in self.fiber(C.tgt(h)).elements:
            if _equivalent(C, h, r):
                return r
        raise OutOfScope(f"class of {h!r} has no representative in the scope")

    def _reindex(self, f, x):
        C = self.base
        sq = C.weak_pullback(f, x)
        if sq is None:
            raise OutOfScope(f"no weak pullback of {x!r} along {f!r}")
        return self.classify(sq.p)

    def exists_along(self, f, x):
        return self.classify(self.base.compose(f, x))

    def _powerset(self, a) -> bool:
        hook = getattr(self.base, "variation_is_powerset", None)
        return self.use_hooks and hook is not None and hook(a)

    def impl(self, a, x, y):
        # when variations are classified by image the fiber is a powerset
        if self._powerset(a):
            C = self.base
            full = (1 << a) - 1
            return self.classify(C.variation_rep(a, (full & ~C.variation_key(x)) | C.variation_key(y)))
        return super().impl(a, x, y)

    def comprehension_candidates(self, a, x):
        yield x


def _equivalent(C: Category, f, g) -> bool:
    return C.factor(f, g) is not None and C.factor(g, f) is not None


def variation_doctrine(C: Category, objects: Iterable | None = None, use_hooks: bool = True) -> VariationDoctrine:
    return VariationDoctrine(C, objects=objects, use_hooks=use_hooks, name="Wsb")


# ============================================================================
# Functoriality and meets
# ============================================================================


def _enumerable(P: Doctrine, a, max_fiber: int) -> bool:
    try:
        return P.fiber_size(a) <= max_fiber
    except (OrderError, OutOfScope, CategoryError):
        return False


def check_doctrine(P: Doctrine, objects: Iterable | None = None, max_fiber: int = MAX_FIBER) -> Doctrine:
    """Exhaustive functoriality and top/meet preservation over the scope.

    Raises NotFunctorial or NotMeetPreserving with the first failure; returns
    ``P`` otherwise.  Objects whose fiber exceeds ``max_fiber`` are skipped.
    """
    C = P.base
    objs = [a for a in (P.objects if objects is None else objects) if _enumerable(P, a, max_fiber)]
    tables: dict = {}
    for a in objs:
        for b in objs:
            for f in C.hom(a, b):
                Fa, Fb = P.fiber(a), P.fiber(b)
                t = {}
                for x in Fb.elements:
                    y = P.reindex(f, x)
                    if y not in Fa:
                        raise NotFunctorial(f, None, f"(image of {x!r} leaves the fiber)")
                    t[x] = y
                tables[f] = t
                if t[Fb.top] != Fa.top:
                    raise NotMeetPreserving(f, Fb.top, Fb.top)
                for x in Fb.elements:
                    for y in Fb.elements:
                        if t[Fb.meet(x, y)] != Fa.meet(t[x], t[y]):
                            raise NotMeetPreserving(f, x, y)
    for a in objs:
        i = C.identity(a)
        if any(v != k for k, v in tables[i].items()):
            raise NotFunctorial(i, i, "(identity)")
    for a in objs:
        for b in objs:
            for f in C.hom(a, b):
                tf = tables[f]
                for c in objs:
                    for g in C.hom(b, c):
                        tgf = tables[C.compose(g, f)]
                        tg = tables[g]
                        for x, y in tg.items():
                            if tgf[x] != tf[y]:
                                raise NotFunctorial(f, g)
    return P


def doctrine_verdict(P: Doctrine, objects: Iterable | None = None, max_fiber: int = MAX_FIBER) -> Verdict:
    """check_doctrine as a verdict instead of an exception."""
    try:
        check_doctrine(P, objects, max_fiber)
    except (NotFunctorial, NotMeetPreserving) as err:
        return Verdict(False, (type(err).__name__,), str(err))
    return Verdict(True)


# ============================================================================
# Elementary structure
# ============================================================================


@dataclass(frozen=True)
class ElementaryStructure:
    delta: Mapping
    searched: tuple = ()  # objects where the whole fiber was searched
    truncated: int = 0


def _e_arrow(C: Category, x, a):
    """e = <pr1, pr2, pr2>: X x A -> (X x A) x A, with the triple's projections."""
    t = triple(C, x, a)
    e = C.pair(C.identity(t.xa.obj), t.xa.pr2)
    return t, e


def elementary_law_holds(P: Doctrine, a, d, objects: Sequence, max_fiber: int = MAX_FIBER) -> tuple[bool, tuple, int]:
    """Check E_e(alpha) = exists_e(alpha) for every admissible X and alpha.

    E_e(alpha) = <p1,p2>*alpha /\\ <p2,p3>*d.  Returns (ok, witness, skipped).
    """
    C = P.base
    skipped = 0
    for x in objects:
        try:
            t, e = _e_arrow(C, x, a)
        except MissingProduct:
            skipped += 1
            continue
        if not _enumerable(P, t.xa.obj, max_fiber):
            skipped += 1
            continue
        p12 = t.outer.pr1
        p23 = C.pair(t.p2(C), t.p3(C))
        dd = P.reindex(p23, d)
        for alpha in P.fiber(t.xa.obj).elements:
            lhs = P.meet(t.obj, P.reindex(p12, alpha), dd)
            if lhs != P.exists_along(e, alpha):
                return False, (x, alpha), skipped
    return True, (), skipped


def find_elementary(P: Doctrine, objects: Iterable | None = None, max_fiber: int = MAX_FIBER, search_limit: int = 256) -> ElementaryStructure:
    """Find delta_A for every scope object A whose square A x A exists.

    Fibers over A x A with at most ``search_limit`` elements are searched
    exhaustively and the least valid candidate is returned; larger fibers
    test only the candidate the law forces at X = 1.
    """
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    deltas, searched, trunc = {}, [], 0
    for a in objs:
        if not C.has_product(a, a):
            continue
        aa = C.product(a, a).obj
        size = P.fiber_size(aa) if _enumerable(P, aa, search_limit) else None
        if size is not None:
            cands = list(P.fiber(aa).elements)
            searched.append(a)
        else:
            cands = [_forced_delta(P, a)]
        good = []
        for d in cands:
            ok, _, skipped = elementary_law_holds(P, a, d, objs, max_fiber)
            if ok:
                good.append(d)
                trunc = max(trunc, skipped)
        if not good:
            raise NoDelta(a)
        F = P.fiber(aa)
        least = [d for d in good if all(F.leq(d, g) for g in good)]
        deltas[a] = least[0] if least else good[0]
    return ElementaryStructure(deltas, tuple(searched), trunc)


def _forced_delta(P: Doctrine, a):
    C = P.base
    t, e = _e_arrow(C, C.terminal, a)
    dd = P.exists_along(e, P.top(t.xa.obj))
    # (1 x A) x A  <-  A x A  via <<!, pr1>, pr2>
    aa = C.product(a, a)
    k = C.pair(C.pair(C.to_terminal(aa.obj), aa.pr1), aa.pr2)
    return P.reindex(k, dd)


# ============================================================================
# Comprehension and diagonals
# ============================================================================


@dataclass(frozen=True)
class ComprehensionReport:
    weak: object = None
    strong: bool = False
    full: bool = False
    truncated: int = 0


def _validates(P: Doctrine, g, alpha) -> bool:
    C = P.base
    s = C.src(g)
    return P.reindex(g, alpha) == P.top(s)


def find_comprehension(P: Doctrine, a, alpha, objects: Iterable | None = None):
    """Some weak comprehension arrow of alpha, or None.

    Candidates proposed by the doctrine come first, then every arrow from a
    scope object.  Universality is tested against arrows from scope objects.
    """
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    tests = [g for x in objs for g in C.hom(x, a) if _validates(P, g, alpha)]

    def universal(c) -> bool:
        return _validates(P, c, alpha) and all(C.factor(g, c) is not None for g in tests)

    for c in P.comprehension_candidates(a, alpha):
        if c is not None and universal(c):
            return c
    for c in tests:
        if universal(c):
            return c
    return None


def check_comprehension(P: Doctrine, a, alpha, objects: Iterable | None = None) -> ComprehensionReport:
    """Weak comprehension of alpha, whether it is monic, and fullness against every beta."""
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    c = find_comprehension(P, a, alpha, objs)
    if c is None:
        return ComprehensionReport()
    strong = C.is_mono(c, objs)
    full, trunc = True, 0
    for beta in P.fiber(a).elements:
        cb = find_comprehension(P, a, beta, objs)
        if cb is None:
            trunc += 1
            continue
        if C.factor(c, cb) is not None and not P.leq(a, alpha, beta):
            full = False
            break
    return ComprehensionReport(c, strong, full, trunc)


def has_full_weak_comprehensions(P: Doctrine, objects: Iterable | None = None, max_fiber: int = 256) -> Verdict:
    objs = tuple(P.objects if objects is None else objects)
    trunc = 0
    for a in objs:
        if not _enumerable(P, a, max_fiber):
            trunc += 1
            continue
        for alpha in P.fiber(a).elements:
            r = check_comprehension(P, a, alpha, objs)
            trunc += r.truncated
            if r.weak is None or not r.full:
                return Verdict(False, (a, alpha), "no full weak comprehension", trunc)
    return Verdict(True, (), "", trunc)


def check_comprehensive_diagonals(P: Doctrine, objects: Iterable | None = None) -> Verdict:
    """Parallel arrows f, g with top <= <f,g>*delta must be equal."""
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    trunc = 0
    for y in objs:
        if not C.has_product(y, y):
            trunc += 1
            continue
        d = P.delta(y)
        for x in objs:
            hom = list(C.hom(x, y))
            for f, g in itertools.combinations(hom, 2):
                if P.reindex(C.pair(f, g), d) == P.top(x):
                    return Verdict(False, (f, g), "distinct arrows are internally equal", trunc)
    return Verdict(True, (), "", trunc)


# ============================================================================
# Quantifiers
# ============================================================================


@dataclass(frozen=True)
class QuantifierStructure:
    """Adjoints along the projections pr1: A x B -> A, keyed by (A, B)."""

    exists_along: Mapping
    forall_along: Mapping
    truncated: int = 0


def check_quantifiers(P: Doctrine, objects: Iterable | None = None, max_fiber: int = MAX_FIBER, bc_arrows: int | None = None) -> QuantifierStructure:
    """Compute both adjoints of reindexing along each projection, then Beck-Chevalley.

    The adjoints come from ``order.left_adjoint``/``right_adjoint`` on the
    tabulated reindexing map; the Beck-Chevalley squares are those of every
    scope arrow f: X -> A against pr1: A x B -> A.
    """
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    ex, fa, trunc = {}, {}, 0
    for a in objs:
        for b in objs:
            if not C.has_product(a, b):
                continue
            p = C.product(a, b)
            if not (_enumerable(P, p.obj, max_fiber) and _enumerable(P, a, max_fiber)):
                trunc += 1
                continue
            r = P.reindex_map(p.pr1)
            try:
                ex[a, b] = left_adjoint(r)
            except NoAdjoint as err:
                raise NoLeftAdjoint(p.pr1, err.args) from None
            try:
                fa[a, b] = right_adjoint(r)
            except NoAdjoint as err:
                raise NoRightAdjoint(p.pr1, err.args) from None
    for (a, b), E in ex.items():
        A_ = fa[a, b]
        pr = C.product(a, b).pr1
        for x in objs:
            if (x, b) not in ex:
                continue
            for k, f in enumerate(C.hom(x, a)):
                if bc_arrows is not None and k >= bc_arrows:
                    trunc += 1
                    break
                fb = C.cross(f, C.identity(b))
                E2, A2 = ex[x, b], fa[x, b]
                for alpha in P.fiber(C.product(a, b).obj).elements:
                    try:
                        beta = P.reindex(fb, alpha)
                        lhs_e, lhs_a = P.reindex(f, E(alpha)), P.reindex(f, A_(alpha))
                    except OutOfScope:
                        trunc += 1
                        continue
                    if lhs_e != E2(beta):
                        raise BeckChevalleyFails(f, pr, alpha, "exists")
                    if lhs_a != A2(beta):
                        raise BeckChevalleyFails(f, pr, alpha, "forall")
    return QuantifierStructure(ex, fa, trunc)


# ============================================================================
# Relations
# ============================================================================


@dataclass(frozen=True)
class Relation:
    host: object
    dom: object
    cod: object


def check_equivalence_relation(P: Doctrine, a, rho) -> Verdict:
    """Reflexivity, symmetry and transitivity of rho in P(A x A)."""
    C = P.base
    aa = C.product(a, a)
    if not P.leq(aa.obj, P.delta(a), rho):
        return Verdict(False, ("reflexivity",))
    sw = C.pair(aa.pr2, aa.pr1)
    if not P.leq(aa.obj, rho, P.reindex(sw, rho)):
        return Verdict(False, ("symmetry",))
    t = triple(C, a, a)
    p1, p2, p3 = t.p1(C), t.p2(C), t.p3(C)
    r12 = P.reindex(C.pair(p1, p2), rho)
    r23 = P.reindex(C.pair(p2, p3), rho)
    r13 = P.reindex(C.pair(p1, p3), rho)
    if not P.leq(t.obj, P.meet(t.obj, r12, r23), r13):
        return Verdict(False, ("transitivity",))
    return Verdict(True)


def is_entire(P: Doctrine, a, b, r) -> bool:
    C = P.base
    p = C.product(a, b)
    return P.exists_along(p.pr1, r) == P.top(a)


def is_functional(P: Doctrine, a, b, r) -> bool:
    """R(a,b) /\\ R(a,b') <= b = b' over (A x B) x B."""
    C = P.base
    t = triple(C, a, b)
    r12 = P.reindex(C.pair(t.p1(C), t.p2(C)), r)
    r13 = P.reindex(C.pair(t.p1(C), t.p3(C)), r)
    eq = P.reindex(C.pair(t.p2(C), t.p3(C)), P.delta(b))
    return P.leq(t.obj, P.meet(t.obj, r12, r13), eq)


def graph_of(P: Doctrine, f):
    """The P-graph <f.pr1, pr2>*delta_B of f: A -> B."""
    C = P.base
    a, b = C.src(f), C.tgt(f)
    p = C.product(a, b)
    return P.reindex(C.pair(C.compose(f, p.pr1), p.pr2), P.delta(b))


def contains_graph(P: Doctrine, f, r) -> bool:
    """top <= <id, f>*R."""
    C = P.base
    a = C.src(f)
    return P.reindex(C.pair(C.identity(a), f), r) == P.top(a)


def _rule_counterexample(P: Doctrine, rule: str, a, b):
    C = P.base
    ab = C.product(a, b).obj
    arrows = list(C.hom(a, b))
    graphs = [graph_of(P, f) for f in arrows] if rule == "RUC" else None
    for r in P.fiber(ab).elements:
        if not is_entire(P, a, b, r):
            continue
        if rule == "RC":
            if not any(contains_graph(P, f, r) for f in arrows):
                return r
        elif is_functional(P, a, b, r) and r not in graphs:
            return r
    return None


def check_rule(P: Doctrine, rule: str, objects: Iterable | None = None, max_fiber: int = MAX_FIBER) -> Verdict:
    """RC: every entire R contains a graph.  RUC: every entire functional R is a graph."""
    if rule not in ("RC", "RUC"):
        raise ValueError(f"unknown rule {rule!r}")
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    trunc = 0
    for a in objs:
        for b in objs:
            if not C.has_product(a, b):
                continue
            ab = C.product(a, b).obj
            if not _enumerable(P, ab, max_fiber):
                trunc += 1
                continue
            try:
                bad = _rule_counterexample(P, rule, a, b)
            except (MissingProduct, OutOfScope):
                trunc += 1
                continue
            if bad is not None:
                what = "entire relation without a choice arrow" if rule == "RC" else "entire functional relation that is no graph"
                return Verdict(False, (a, b, bad), what, trunc)
    return Verdict(True, (), "", trunc)


# ============================================================================
# Choice axioms
# ============================================================================


def exists_unique(P: Doctrine, a, b, r):
    """(exists b. R(a,b)) /\\ forall b b'. R(a,b) /\\ R(a,b') -> b = b', in P(A)."""
    C = P.base
    p = C.product(a, b)
    t = triple(C, a, b)
    r12 = P.reindex(C.pair(t.p1(C), t.p2(C)), r)
    r13 = P.reindex(C.pair(t.p1(C), t.p3(C)), r)
    eq = P.reindex(C.pair(t.p2(C), t.p3(C)), P.delta(b))
    uniq = P.impl(t.obj, P.meet(t.obj, r12, r13), eq)
    # (A x B) x B -> A x B -> A
    inner = P.forall_along(t.outer.pr1, uniq)
    return P.meet(a, P.exists_along(p.pr1, r), P.forall_along(p.pr1, inner))


def check_axiom(
    P: Doctrine,
    axiom: str,
    a,
    weak_exponentials: Mapping | None = None,
    objects: Iterable | None = None,
    max_fiber: int = MAX_FIBER,
    codomains: Iterable | None = None,
) -> Verdict:
    """forall a. exists(!) b. R(a,b) |- exists f:W. forall a. R(a, ev(f,a)) for every B and R.

    ``weak_exponentials`` maps B to (W, ev) with ev: W x A -> B; missing
    entries are requested from the base category's ``weak_exponential`` hook
    and MissingExponential is raised when neither has one.  ``codomains``
    restricts the objects B tried (default: the scope).
    """
    if axiom not in ("AC", "AUC"):
        raise ValueError(f"unknown axiom {axiom!r}")
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    one = C.terminal
    trunc = 0
    for b in (objs if codomains is None else tuple(codomains)):
        if not C.has_product(a, b):
            continue
        we = (weak_exponentials or {}).get(b)
        if we is None:
            hook = getattr(C, "weak_exponential", None)
            we = hook(a, b) if hook is not None else None
        if we is None:
            raise MissingExponential(a, b)
        w, ev = we
        p = C.product(a, b)
        if not _enumerable(P, p.obj, max_fiber):
            trunc += 1
            continue
        wa = C.product(w, a)
        pr2_ev = C.pair(wa.pr2, ev)  # W x A -> A x B
        for r in P.fiber(p.obj).elements:
            inner = exists_unique(P, a, b, r) if axiom == "AUC" else P.exists_along(p.pr1, r)
            lhs = P.forall_along(C.to_terminal(a), inner)
            body = P.forall_along(wa.pr1, P.reindex(pr2_ev, r))
            rhs = P.exists_along(C.to_terminal(w), body)
            if not P.leq(one, lhs, rhs):
                return Verdict(False, (b, r), f"{axiom} fails", trunc)
    return Verdict(True, (), "", trunc)


# ============================================================================
# Skolem arrows
# ============================================================================


def check_skolem(P: Doctrine, alpha, eps) -> bool:
    """exists_{pr1} alpha = <id, eps>* alpha for alpha over Y x B and eps: Y -> B."""
    C = P.base
    y, b = C.src(eps), C.tgt(eps)
    p = C.product(y, b)
    return P.exists_along(p.pr1, alpha) == P.reindex(C.pair(C.identity(y), eps), alpha)


# ============================================================================
# The comprehension adjunction with variations
# ============================================================================


@dataclass(frozen=True)
class AdjunctionReport:
    L: Mapping  # (A, [f]) -> element of P(A)
    compr: Mapping  # (A, alpha) -> element of Wsb(A)
    retract: bool  # L . compr = id
    unit: bool  # id <= compr . L
    equality: bool  # the unit is an equality
    witness: tuple = ()
    truncated: int = 0


def comprehension_adjunction(P: Doctrine, W: VariationDoctrine | None = None, objects: Iterable | None = None, max_fiber: int = 512) -> AdjunctionReport:
    """L[f] = exists_f(top) and compr(alpha) = [comprehension of alpha], compared both ways."""
    C = P.base
    W = W or variation_doctrine(C, objects)
    objs = tuple(P.objects if objects is None else objects)
    L, K = {}, {}
    retract = unit = equality = True
    witness: tuple = ()
    trunc = 0
    for a in objs:
        if not (_enumerable(P, a, max_fiber) and _enumerable(W, a, max_fiber)):
            trunc += 1
            continue
        for alpha in P.fiber(a).elements:
            c = find_comprehension(P, a, alpha, objs)
            if c is None:
                trunc += 1
                continue
            K[a, alpha] = W.classify(c)
        for f in W.fiber(a).elements:
            L[a, f] = P.exists_along(f, P.top(C.src(f)))
        for alpha in P.fiber(a).elements:
            if (a, alpha) in K and L.get((a, K[a, alpha])) != alpha:
                retract = False
                witness = witness or ("retract", a, alpha)
        for f in W.fiber(a).elements:
            back = K.get((a, L[a, f]))
            if back is None:
                trunc += 1
                continue
            if not W.leq(a, f, back):
                unit = False
                witness = witness or ("unit", a, f)
            elif back != f:
                equality = False
                witness = witness or ("strict", a, f)
    return AdjunctionReport(L, K, retract, unit, unit and equality, witness, trunc)


def frobenius_check(P: Doctrine, adj: AdjunctionReport, W: VariationDoctrine) -> Verdict:
    """L(f) /\\ alpha = L(f /\\ compr(alpha)) wherever both sides are defined."""
    for (a, f), lf in adj.L.items():
        for (a2, alpha), k in adj.compr.items():
            if a2 != a:
                continue
            m = W.meet(a, f, k)
            if (a, m) not in adj.L:
                continue
            if P.meet(a, lf, alpha) != adj.L[a, m]:
                return Verdict(False, (a, f, alpha))
    return Verdict(True)


def double_negation_check(P: Doctrine, W: VariationDoctrine | None = None, objects: Iterable | None = None, arrows: Iterable | None = None, max_fiber: int = 512) -> Verdict:
    """compr . L maps [f] to not-not [f] in every Wsb fiber.

    First checks the hypotheses on the finite data: exists_f is stable under
    double negation for the arrows tested and compr(bottom) is the bottom.
    When a hypothesis fails the verdict is negative with detail "hypothesis"
    and the main comparison is skipped.
    """
    C = P.base
    W = W or variation_doctrine(C, objects)
    objs = tuple(P.objects if objects is None else objects)
    adj = comprehension_adjunction(P, W, objs, max_fiber)
    test_arrows = list(arrows) if arrows is not None else list(C.arrows(objs))
    for f in test_arrows:
        a, b = C.src(f), C.tgt(f)
        if not (_enumerable(P, a, max_fiber) and _enumerable(P, b, max_fiber)):
            continue
        for x in P.fiber(a).elements:
            e = P.exists_along(f, x)
            if e != P.neg(b, P.neg(b, e)):
                return Verdict(False, (f, x), "hypothesis: exists not stable under double negation", adj.truncated)
    for a in objs:
        if (a, P.bottom(a)) in adj.compr and adj.compr[a, P.bottom(a)] != W.bottom(a):
            return Verdict(False, (a,), "hypothesis: comprehension of bottom is not bottom", adj.truncated)
    for (a, f), lf in adj.L.items():
        k = adj.compr.get((a, lf))
        if k is None:
            continue
        nn = W.neg(a, W.neg(a, f))
        if k != nn:
            return Verdict(False, (a, f, k, nn), "compr . L differs from double negation", adj.truncated)
    return Verdict(True, (), "", adj.truncated)
