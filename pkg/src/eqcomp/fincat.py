"""Finite categories with chosen products, a terminal object and weak pullbacks.

Two kinds of category live here.  ``FinCategory`` stores every arrow and the
whole composition table explicitly; it is what description files decode to.
``FinSetCategory`` is generated: objects are sizes n standing for {0..n-1},
arrows are function tables, and hom-sets are produced on demand, so that
fragments with a 16-element object can be used without listing 16^16 arrows.

Every category has a *scope*, the tuple ``objects``.  Exhaustive checks
quantify over arrows between scope objects; products and pullbacks may land
outside the scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

Obj = Hashable
Arrow = Hashable


class CategoryError(ValueError):
    pass


class NotAssociative(CategoryError):
    def __init__(self, f, g, h):
        super().__init__(f"(h.g).f != h.(g.f) for f={f!r}, g={g!r}, h={h!r}")
        self.f, self.g, self.h = f, g, h


class BadIdentity(CategoryError):
    def __init__(self, a, detail: str = ""):
        super().__init__(f"identity law fails at {a!r} {detail}".rstrip())
        self.a = a


class MissingComposite(CategoryError):
    def __init__(self, g, f):
        super().__init__(f"no composite recorded for {g!r} . {f!r}")
        self.g, self.f = g, f


class NotClosed(CategoryError):
    def __init__(self, a, b):
        super().__init__(f"sizes not closed under product: {a}*{b} is missing")
        self.a, self.b = a, b


class MissingProduct(CategoryError):
    def __init__(self, a, b):
        super().__init__(f"no chosen product for ({a!r}, {b!r})")
        self.a, self.b = a, b


class BadProduct(CategoryError):
    pass


class BadShape(CategoryError):
    pass


class Product(NamedTuple):
    obj: Obj
    pr1: Arrow
    pr2: Arrow


class Square(NamedTuple):
    """A chosen weak pullback (W, p, q) of a cospan f, g: f.p = g.q."""

    obj: Obj
    p: Arrow
    q: Arrow


# ============================================================================
# Protocol
# ============================================================================


class Category:
    """Common interface; subclasses provide the primitive operations."""

    objects: tuple
    terminal: Obj | None = None

    def src(self, f: Arrow) -> Obj:
        raise NotImplementedError

    def tgt(self, f: Arrow) -> Obj:
        raise NotImplementedError

    def hom(self, a: Obj, b: Obj) -> Sequence[Arrow]:
        raise NotImplementedError

    def hom_size(self, a: Obj, b: Obj) -> int:
        return len(self.hom(a, b))

    def compose(self, g: Arrow, f: Arrow) -> Arrow:
        """g . f"""
        raise NotImplementedError

    def identity(self, a: Obj) -> Arrow:
        raise NotImplementedError

    def product(self, a: Obj, b: Obj) -> Product:
        raise MissingProduct(a, b)

    def has_product(self, a: Obj, b: Obj) -> bool:
        try:
            self.product(a, b)
        except MissingProduct:
            return False
        return True

    def pair(self, f: Arrow, g: Arrow) -> Arrow:
        """The unique <f,g> into the chosen product of the codomains."""
        if self.src(f) != self.src(g):
            raise BadShape(f"pairing arrows with different sources {f!r}, {g!r}")
        p = self.product(self.tgt(f), self.tgt(g))
        hits = [
            h
            for h in self.hom(self.src(f), p.obj)
            if self.compose(p.pr1, h) == f and self.compose(p.pr2, h) == g
        ]
        if len(hits) != 1:
            raise BadProduct(f"{len(hits)} mediating arrows for <{f!r},{g!r}>")
        return hits[0]

    def to_terminal(self, a: Obj) -> Arrow:
        if self.terminal is None:
            raise CategoryError("no terminal object")
        (h,) = self.hom(a, self.terminal)
        return h

    def weak_pullback(self, f: Arrow, g: Arrow) -> Square | None:
        return None

    def factor(self, f: Arrow, g: Arrow) -> Arrow | None:
        """Some h with g . h = f, or None."""
        for h in self.hom(self.src(f), self.src(g)):
            if self.compose(g, h) == f:
                return h
        return None

    def arrows(self, objects: Iterable[Obj] | None = None) -> Iterator[Arrow]:
        objs = self.objects if objects is None else tuple(objects)
        for a in objs:
            for b in objs:
                yield from self.hom(a, b)

    # derived combinators -------------------------------------------------

    def cross(self, f: Arrow, g: Arrow) -> Arrow:
        """f x g = <f.pr1, g.pr2> between chosen products."""
        p = self.product(self.src(f), self.src(g))
        return self.pair(self.compose(f, p.pr1), self.compose(g, p.pr2))

    def diagonal(self, a: Obj) -> Arrow:
        i = self.identity(a)
        return self.pair(i, i)

    def swap(self, a: Obj, b: Obj) -> Arrow:
        p = self.product(a, b)
        return self.pair(p.pr2, p.pr1)

    def is_mono(self, f: Arrow, objects: Iterable[Obj] | None = None) -> bool:
        objs = self.objects if objects is None else objects
        for x in objs:
            seen = {}
            for h in self.hom(x, self.src(f)):
                k = self.compose(f, h)
                if k in seen and seen[k] != h:
                    return False
                seen[k] = h
        return True

    def is_iso(self, f: Arrow) -> bool:
        a, b = self.src(f), self.tgt(f)
        return any(
            self.compose(g, f) == self.identity(a) and self.compose(f, g) == self.identity(b)
            for g in self.hom(b, a)
        )


@dataclass(frozen=True)
class Triple:
    """Projections out of (X x A) x A, the chosen triple product."""

    obj: Obj
    xa: Product  # X x A
    outer: Product  # (X x A) x A

    def p1(self, C: Category) -> Arrow:
        return C.compose(self.xa.pr1, self.outer.pr1)

    def p2(self, C: Category) -> Arrow:
        return C.compose(self.xa.pr2, self.outer.pr1)

    def p3(self, C: Category) -> Arrow:
        return self.outer.pr2


def triple(C: Category, x: Obj, a: Obj, b: Obj | None = None) -> Triple:
    b = a if b is None else b
    xa = C.product(x, a)
    outer = C.product(xa.obj, b)
    return Triple(outer.obj, xa, outer)


# ============================================================================
# Explicit finite categories
# ============================================================================


class FinCategory(Category):
    """A category given by complete tables."""

    def __init__(
        self,
        objects: Sequence[Obj],
        arrows: Mapping[Arrow, tuple[Obj, Obj]],
        compose: Mapping[tuple[Arrow, Arrow], Arrow],
        identities: Mapping[Obj, Arrow],
        products: Mapping[tuple[Obj, Obj], Product] | None = None,
        terminal: Obj | None = None,
        pullbacks: Mapping[tuple[Arrow, Arrow], Square] | None = None,
        name: str = "C",
    ):
        self.objects = tuple(objects)
        self.arrow_ends = dict(arrows)
        self.table = dict(compose)
        self.identities = dict(identities)
        self.products = {k: Product(*v) for k, v in (products or {}).items()}
        self.terminal = terminal
        self.pullbacks = {k: Square(*v) for k, v in (pullbacks or {}).items()}
        self.name = name
        self._hom: dict = {}
        for f, (s, t) in self.arrow_ends.items():
            self._hom.setdefault((s, t), []).append(f)
        self._pair_cache: dict = {}

    def src(self, f):
        return self.arrow_ends[f][0]

    def tgt(self, f):
        return self.arrow_ends[f][1]

    def hom(self, a, b):
        return self._hom.get((a, b), [])

    def compose(self, g, f):
        try:
            return self.table[g, f]
        except KeyError:
            raise MissingComposite(g, f) from None

    def identity(self, a):
        return self.identities[a]

    def product(self, a, b):
        try:
            return self.products[a, b]
        except KeyError:
            raise MissingProduct(a, b) from None

    def pair(self, f, g):
        key = (f, g)
        if key not in self._pair_cache:
            self._pair_cache[key] = Category.pair(self, f, g)
        return self._pair_cache[key]

    def weak_pullback(self, f, g):
        return self.pullbacks.get((f, g))

    def __repr__(self):
        return f"FinCategory({self.name}: {len(self.objects)} objects, {len(self.arrow_ends)} arrows)"


def check_category(raw: Mapping) -> FinCategory:
    """Validate raw tables and return the category, or raise the first violation.

    ``raw`` has keys objects, arrows ([{id, src, tgt}]), compose ({"g.f": h} or
    [[g, f, h]]), identities (optional; searched if absent), products
    (optional {"A,B": [P, pr1, pr2]} or list form), terminal, pullbacks.
    """
    objects = list(raw["objects"])
    arrows = {}
    for a in raw["arrows"]:
        if a["id"] in arrows:
            raise CategoryError(f"duplicate arrow id {a['id']!r}")
        if a["src"] not in objects or a["tgt"] not in objects:
            raise CategoryError(f"arrow {a['id']!r} has an unknown endpoint")
        arrows[a["id"]] = (a["src"], a["tgt"])
    table = {}
    comp = raw.get("compose", [])
    rows = comp.items() if isinstance(comp, Mapping) else [((g, f), h) for g, f, h in comp]
    for key, h in rows:
        g, f = key.split(".", 1) if isinstance(key, str) else key
        table[g, f] = h
    identities = dict(raw.get("identities") or {})
    C = FinCategory(objects, arrows, table, identities)
    for g in arrows:
        for f in arrows:
            if C.src(g) == C.tgt(f):
                if (g, f) not in table:
                    raise MissingComposite(g, f)
                h = table[g, f]
                if h not in arrows or arrows[h] != (C.src(f), C.tgt(g)):
                    raise CategoryError(f"composite {g}.{f} = {h!r} has wrong endpoints")
            elif (g, f) in table:
                raise CategoryError(f"composite recorded for non-composable {g}.{f}")
    for a in objects:
        if a not in identities:
            cands = [
                i
                for i in C.hom(a, a)
                if all(table[f, i] == f for f in arrows if C.src(f) == a)
                and all(table[i, f] == f for f in arrows if C.tgt(f) == a)
            ]
            if not cands:
                raise BadIdentity(a, "(no unit arrow)")
            identities[a] = cands[0]
    C.identities = identities
    check_laws(C)
    products = raw.get("products") or {}
    prow = products.items() if isinstance(products, Mapping) else [((p[0], p[1]), p[2:]) for p in products]
    for key, val in prow:
        a, b = key.split(",", 1) if isinstance(key, str) else key
        C.products[a, b] = Product(*val)
    C.terminal = raw.get("terminal")
    pullbacks = raw.get("pullbacks") or {}
    qrow = pullbacks.items() if isinstance(pullbacks, Mapping) else [((p[0], p[1]), p[2:]) for p in pullbacks]
    for key, val in qrow:
        f, g = key.split(",", 1) if isinstance(key, str) else key
        C.pullbacks[f, g] = Square(*val)
    if C.terminal is not None:
        check_terminal(C)
    if C.products:
        check_products(C)
    if C.pullbacks:
        check_weak_pullbacks(C)
    return C


def tabulate(C: Category, objects: Iterable[Obj] | None = None):
    """Index the arrows among ``objects``; return (arrows, index, comp matrix).

    comp[i, j] is the index of arrows[i] . arrows[j], or -1 when not composable.
    """
    objs = C.objects if objects is None else tuple(objects)
    arrows = list(C.arrows(objs))
    index = {f: i for i, f in enumerate(arrows)}
    n = len(arrows)
    comp = np.full((n, n), -1, dtype=np.int64)
    by_src: dict = {}
    for i, f in enumerate(arrows):
        by_src.setdefault(C.src(f), []).append(i)
    for j, f in enumerate(arrows):
        for i in by_src.get(C.tgt(f), ()):
            h = C.compose(arrows[i], f)
            if h not in index:
                raise CategoryError(f"composite {arrows[i]!r}.{f!r} leaves the arrow set")
            comp[i, j] = index[h]
    return arrows, index, comp


def check_laws(C: Category, objects: Iterable[Obj] | None = None) -> None:
    """Exhaustive unit and associativity laws over the scope (vectorized)."""
    objs = C.objects if objects is None else tuple(objects)
    arrows, index, comp = tabulate(C, objs)
    for a in objs:
        i = C.identity(a)
        if i not in index or C.src(i) != a or C.tgt(i) != a:
            raise BadIdentity(a)
        k = index[i]
        for j, f in enumerate(arrows):
            if C.tgt(f) == a and comp[k, j] != j:
                raise BadIdentity(a, f"(id . {f!r})")
            if C.src(f) == a and comp[j, k] != j:
                raise BadIdentity(a, f"({f!r} . id)")
    src = [C.src(f) for f in arrows]
    tgt = [C.tgt(f) for f in arrows]
    into: dict = {}
    out: dict = {}
    for i in range(len(arrows)):
        into.setdefault(tgt[i], []).append(i)
        out.setdefault(src[i], []).append(i)
    for g in range(len(arrows)):
        F = np.array(into.get(src[g], []), dtype=np.int64)
        H = np.array(out.get(tgt[g], []), dtype=np.int64)
        if not len(F) or not len(H):
            continue
        hg = comp[H, g]  # h.g for each h
        gf = comp[g, F]  # g.f for each f
        left = comp[hg[:, None], F[None, :]]
        right = comp[H[:, None], gf[None, :]]
        bad = np.argwhere(left != right)
        if len(bad):
            hi, fi = bad[0]
            raise NotAssociative(arrows[F[fi]], arrows[g], arrows[H[hi]])


def check_terminal(C: Category, objects: Iterable[Obj] | None = None) -> None:
    objs = C.objects if objects is None else objects
    for a in objs:
        if C.hom_size(a, C.terminal) != 1:
            raise BadProduct(f"{C.hom_size(a, C.terminal)} arrows from {a!r} to the terminal")


def check_products(C: Category, objects: Iterable[Obj] | None = None) -> None:
    """Every chosen product has unique pairings and <pr1,pr2> = id."""
    objs = C.objects if objects is None else tuple(objects)
    for a in objs:
        for b in objs:
            if not C.has_product(a, b):
                continue
            p = C.product(a, b)
            if C.src(p.pr1) != p.obj or C.tgt(p.pr1) != a or C.src(p.pr2) != p.obj or C.tgt(p.pr2) != b:
                raise BadProduct(f"projections of {a!r}x{b!r} have wrong endpoints")
            if C.pair(p.pr1, p.pr2) != C.identity(p.obj):
                raise BadProduct(f"<pr1,pr2> != id on {a!r}x{b!r}")
            for x in objs:
                for f in C.hom(x, a):
                    for g in C.hom(x, b):
                        h = C.pair(f, g)
                        if C.compose(p.pr1, h) != f or C.compose(p.pr2, h) != g:
                            raise BadProduct(f"<{f!r},{g!r}> does not commute")


def check_weak_pullbacks(C: Category, objects: Iterable[Obj] | None = None) -> None:
    """Chosen squares commute and weakly factor every cone from the scope."""
    objs = C.objects if objects is None else tuple(objects)
    cospans = []
    if isinstance(C, FinCategory):
        cospans = list(C.pullbacks)
    else:
        arrs = list(C.arrows(objs))
        cospans = [(f, g) for f in arrs for g in arrs if C.tgt(f) == C.tgt(g)]
    for f, g in cospans:
        sq = C.weak_pullback(f, g)
        if sq is None:
            continue
        if C.compose(f, sq.p) != C.compose(g, sq.q):
            raise BadProduct(f"weak pullback square of {f!r},{g!r} does not commute")
        for x in objs:
            for u in C.hom(x, C.src(f)):
                for v in C.hom(x, C.src(g)):
                    if C.compose(f, u) != C.compose(g, v):
                        continue
                    if not any(
                        C.compose(sq.p, h) == u and C.compose(sq.q, h) == v
                        for h in C.hom(x, sq.obj)
                    ):
                        raise BadProduct(f"cone ({u!r},{v!r}) does not factor through {sq!r}")


# ============================================================================
# Finite sets
# ============================================================================


class Fn(NamedTuple):
    """A function {0..src-1} -> {0..tgt-1} given by its table."""

    src: int
    tgt: int
    table: tuple

    def __call__(self, i: int) -> int:
        return self.table[i]

    def image_mask(self) -> int:
        m = 0
        for v in self.table:
            m |= 1 << v
        return m


class FinSetCategory(Category):
    """Finite sets {0..n-1} for n in ``sizes`` with all functions between them.

    The product of n and m is n*m with pr1(i) = i // m and pr2(i) = i % m;
    sizes must contain every product that fits under ``cap``.
    """

    def __init__(self, sizes: Iterable[int], cap: int, scope: Iterable[int] | None = None):
        self.sizes = tuple(sorted(set(sizes)))
        self.cap = cap
        if 1 not in self.sizes:
            raise BadShape("sizes must contain 1")
        for a in self.sizes:
            for b in self.sizes:
                if a * b <= cap and a * b not in self.sizes:
                    raise NotClosed(a, b)
        self.objects = tuple(sorted(set(scope))) if scope is not None else self.sizes
        self.terminal = 1

    def __repr__(self):
        return f"FinSetCategory(sizes={self.sizes}, cap={self.cap})"

    def src(self, f):
        return f.src

    def tgt(self, f):
        return f.tgt

    def hom_size(self, a, b):
        return b**a

    def hom(self, a, b):
        return _finset_hom(a, b)

    def compose(self, g, f):
        if f.tgt != g.src:
            raise MissingComposite(g, f)
        gt = g.table
        return Fn(f.src, g.tgt, tuple(gt[i] for i in f.table))

    def identity(self, a):
        return Fn(a, a, tuple(range(a)))

    def const(self, a, b, v):
        return Fn(a, b, (v,) * a)

    def product(self, a, b):
        n = a * b
        if n not in self.sizes:
            raise MissingProduct(a, b)
        return Product(n, Fn(n, a, tuple(i // b for i in range(n))), Fn(n, b, tuple(i % b for i in range(n))))

    def pair(self, f, g):
        if f.src != g.src:
            raise BadShape("pairing arrows with different sources")
        p = self.product(f.tgt, g.tgt)
        m = g.tgt
        return Fn(f.src, p.obj, tuple(x * m + y for x, y in zip(f.table, g.table)))

    def to_terminal(self, a):
        return Fn(a, 1, (0,) * a)

    def weak_pullback(self, f, g):
        """Pullback when its size is available, otherwise a covering weak pullback."""
        pts = [(x, y) for x in range(f.src) for y in range(g.src) if f(x) == g(y)]
        k = len(pts)
        fits = [n for n in self.sizes if n >= k and (n > 0 or k == 0) and (k > 0 or n == 0)]
        if not fits:
            return None
        n = fits[0]
        cover = [pts[min(i, k - 1)] for i in range(n)]
        return Square(n, Fn(n, f.src, tuple(c[0] for c in cover)), Fn(n, g.src, tuple(c[1] for c in cover)))

    def factor(self, f, g):
        inv: dict = {}
        for j, v in enumerate(g.table):
            inv.setdefault(v, j)
        try:
            return Fn(f.src, g.src, tuple(inv[v] for v in f.table))
        except KeyError:
            return None

    def is_mono(self, f, objects=None):
        return len(set(f.table)) == f.src

    def is_iso(self, f):
        return f.src == f.tgt and len(set(f.table)) == f.src

    def subset_object(self, mask: int, n: int) -> Fn | None:
        """The inclusion of a subset of {0..n-1} if its size is an object."""
        elems = [i for i in range(n) if (mask >> i) & 1]
        if len(elems) not in self.sizes:
            return None
        return Fn(len(elems), n, tuple(elems))

    def cover(self, mask: int, n: int) -> Fn | None:
        """An arrow with image exactly ``mask``: the inclusion if that size is an
        object, else a surjection onto it from the smallest larger size."""
        elems = [i for i in range(n) if (mask >> i) & 1]
        k = len(elems)
        fits = [m for m in self.sizes if m >= k and (m == 0) == (k == 0)]
        if not fits:
            return None
        m = fits[0]
        return Fn(m, n, tuple(elems[min(i, k - 1)] for i in range(m)))

    # hooks used by the doctrines -------------------------------------------

    def variation_key(self, f: Fn) -> int:
        return f.image_mask()

    def variation_rep(self, a: int, key: int) -> Fn | None:
        return self.cover(key, a)

    def variation_reps(self, a: int) -> list:
        if a > 16:
            raise CategoryError(f"refusing to list the 2^{a} variations over {a}")
        return [self.cover(m, a) for m in range(1 << a)]

    def variation_is_powerset(self, a: int) -> bool:
        """Every subset of a has an inclusion, so variations are classified by image alone."""
        return all(k in self.sizes for k in range(a + 1))

    def comprehension_candidates(self, a: int, mask: int):
        c = self.cover(mask, a)
        if c is not None:
            yield c

    def weak_exponential(self, a: int, b: int):
        """(B^A, ev) with the w-th function of ``hom(a, b)`` at index w."""
        w = b**a
        if w not in self.sizes or w * a not in self.sizes:
            return None
        funcs = self.hom(a, b) if w <= 1 << 20 else None
        if funcs is None:
            return None
        table = tuple(funcs[i // a].table[i % a] for i in range(w * a))
        return w, Fn(w * a, b, table)


@lru_cache(maxsize=None)
def _finset_hom(a: int, b: int) -> tuple:
    if b**a > 1 << 20:
        raise CategoryError(f"hom({a},{b}) has {b**a} arrows; refusing to enumerate")
    return tuple(Fn(a, b, t) for t in itertools.product(range(b), repeat=a))


def finset_category(sizes: Iterable[int], cap: int, scope: Iterable[int] | None = None) -> FinSetCategory:
    return FinSetCategory(sizes, cap, scope)


def product_closure(seed: Iterable[int], cap: int) -> tuple[int, ...]:
    """Smallest superset of ``seed`` with every product under ``cap``."""
    out = set(seed) | {1}
    changed = True
    while changed:
        changed = False
        for a in list(out):
            for b in list(out):
                if a * b <= cap and a * b not in out:
                    out.add(a * b)
                    changed = True
    return tuple(sorted(out))


# ============================================================================
# Parameterized natural numbers on finite data
# ============================================================================


@dataclass(frozen=True)
class PnnoVerdict:
    status: str  # "Holds" | "FailsExistence" | "FailsUniqueness"
    witness: tuple = ()
    truncated: int = 0

    @property
    def holds(self) -> bool:
        return self.status == "Holds"


def check_pnno(
    C: Category,
    N: Obj,
    z: Arrow,
    s: Arrow,
    bound: int = 1 << 16,
    pairs: Iterable[tuple[Arrow, Arrow]] | None = None,
) -> PnnoVerdict:
    """Test recursion k.<id,z.!> = a and k.(id x s) = f.k for each (a, f).

    Candidates k range over hom(A x N, X); hom-sets larger than ``bound`` are
    skipped and counted in ``truncated``.  ``pairs`` restricts the (a, f)
    tested; by default every a: A -> X, f: X -> X in the scope is used.
    """
    one = C.terminal
    if C.src(z) != one or C.tgt(z) != N:
        raise BadShape(f"zero must be 1 -> N, got {C.src(z)!r} -> {C.tgt(z)!r}")
    if C.src(s) != N or C.tgt(s) != N:
        raise BadShape("successor must be N -> N")
    if pairs is None:
        pairs = [
            (a, f)
            for A in C.objects
            for X in C.objects
            for a in C.hom(A, X)
            for f in C.hom(X, X)
        ]
    truncated = 0
    for a, f in pairs:
        A, X = C.src(a), C.tgt(a)
        if C.src(f) != X or C.tgt(f) != X:
            raise BadShape(f"{f!r} is not an endo-arrow on {X!r}")
        p = C.product(A, N)
        if C.hom_size(p.obj, X) > bound:
            truncated += 1
            continue
        base = C.pair(C.identity(A), C.compose(z, C.to_terminal(A)))
        step = C.cross(C.identity(A), s)
        sols = [
            k
            for k in C.hom(p.obj, X)
            if C.compose(k, base) == a and C.compose(k, step) == C.compose(f, k)
        ]
        if not sols:
            return PnnoVerdict("FailsExistence", (a, f), truncated)
        if len(sols) > 1:
            return PnnoVerdict("FailsUniqueness", (a, f, sols[0], sols[1]), truncated)
    return PnnoVerdict("Holds", (), truncated)
