"""Assemblies over the pca, partitioned assemblies, and their doctrines on finite fragments.

A partitioned assembly is a finite carrier with one code per element.  Arrows
between partitioned assemblies are the functions that some program tracks; on
finite carriers those are exactly the code-respecting functions (elements with
equal codes go to elements with equal codes), and a tracker can always be
synthesized from the induced map on codes.  ``check_tracked`` replays a
tracker on the machine, so no tracker is taken on trust.

Variations of a partitioned assembly A are handled through their "code
images": an arrow f: (X, T) -> A gives the sets F_n = {f(x) | T x = n}, each
inside one code class of A, and f factors through g exactly when every F_n
lies inside some G_m.  A variation is therefore a down-set of nonempty
single-class subsets of A, which is how ``WsbPAsm`` computes with them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from . import pca
from .doctrine import (
    OutOfScope,
    SubsetDoctrine,
    VariationDoctrine,
    Verdict,
)
from .fincat import BadShape, Category, CategoryError, MissingComposite, MissingProduct, Product, Square

DEFAULT_CODE_BOUND = 64


class FragmentTooSmall(Exception):
    """A construction needs a tracker or object beyond the fragment bounds."""

    def __init__(self, what: str, witness=None):
        super().__init__(what)
        self.witness = witness


# ============================================================================
# Assemblies
# ============================================================================


@dataclass(frozen=True)
class Assembly:
    """A finite carrier with a nonempty set of codes for each element."""

    carrier: tuple
    realizes: tuple  # frozensets of codes, aligned with carrier

    def __post_init__(self):
        if len(self.carrier) != len(self.realizes):
            raise BadShape("carrier and realizers differ in length")
        for x, r in zip(self.carrier, self.realizes):
            if not r:
                raise BadShape(f"{x!r} has no realizer")

    @property
    def size(self) -> int:
        return len(self.carrier)

    @property
    def partitioned(self) -> bool:
        return all(len(r) == 1 for r in self.realizes)


@dataclass(frozen=True, eq=False)
class PAsm:
    """A partitioned assembly: carrier elements and one code for each."""

    carrier: tuple
    codes: tuple
    name: str = field(default="", compare=False)
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.carrier) != len(self.codes):
            raise BadShape("carrier and codes differ in length")
        object.__setattr__(self, "_hash", hash((self.carrier, self.codes)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, PAsm) and self._hash == other._hash and self.carrier == other.carrier and self.codes == other.codes

    def __repr__(self) -> str:
        if self.name:
            return self.name
        body = ", ".join(f"{x!r}:{c}" for x, c in zip(self.carrier, self.codes))
        return "{" + body + "}"

    @property
    def size(self) -> int:
        return len(self.carrier)

    @cached_property
    def classes(self) -> dict:
        """code -> bitmask of the elements carrying it"""
        out: dict = {}
        for i, c in enumerate(self.codes):
            out[c] = out.get(c, 0) | (1 << i)
        return out

    @cached_property
    def class_of(self) -> tuple:
        return tuple(self.classes[c] for c in self.codes)

    def as_assembly(self) -> Assembly:
        return Assembly(self.carrier, tuple(frozenset((c,)) for c in self.codes))


def partitioned(carrier: Iterable, codes: Iterable[int], name: str = "") -> PAsm:
    return PAsm(tuple(carrier), tuple(codes), name)


def naturals(bound: int) -> PAsm:
    """The truncated naturals 0..bound, each realized by itself."""
    return PAsm(tuple(range(bound + 1)), tuple(range(bound + 1)), f"N{bound}")


TERMINAL = PAsm(("*",), (0,), "1")


class PMap(NamedTuple):
    """A function between carriers, by element indices."""

    src: PAsm
    tgt: PAsm
    table: tuple

    def __repr__(self) -> str:
        return f"PMap({self.src!r} -> {self.tgt!r}: {self.table})"

    def code_map(self) -> dict | None:
        """The induced map on codes, or None if f does not respect codes."""
        out: dict = {}
        for i, j in enumerate(self.table):
            n, m = self.src.codes[i], self.tgt.codes[j]
            if out.setdefault(n, m) != m:
                return None
        return out


# ============================================================================
# Tracking
# ============================================================================


@dataclass(frozen=True)
class TrackedMap:
    fn: PMap
    tracker: int
    fuel: int


def check_tracked(f: PMap, tracker: int, fuel: int = pca.DEFAULT_FUEL) -> Verdict:
    """Every realizer n of every x is sent by the tracker to a realizer of f(x)."""
    for i, j in enumerate(f.table):
        n = f.src.codes[i]
        r = pca.apply(tracker, n, fuel)
        if not isinstance(r, pca.Halted) or r.value != f.tgt.codes[j]:
            return Verdict(False, (f.src.carrier[i], n), f"tracker gives {r!r}")
    return Verdict(True)


def check_tracked_asm(src: Assembly, tgt: Assembly, table: Sequence[int], tracker: int, fuel: int = pca.DEFAULT_FUEL) -> Verdict:
    for i, j in enumerate(table):
        for n in sorted(src.realizes[i]):
            r = pca.apply(tracker, n, fuel)
            if not isinstance(r, pca.Halted) or r.value not in tgt.realizes[j]:
                return Verdict(False, (src.carrier[i], n), f"tracker gives {r!r}")
    return Verdict(True)


def find_tracker(f: PMap, code_bound: int = DEFAULT_CODE_BOUND, fuel: int = pca.DEFAULT_FUEL) -> int | None:
    """Least code <= code_bound tracking f; None is not a proof that f is untrackable."""
    cm = f.code_map()
    if cm is None:
        return None
    return find_code_for(cm, code_bound, fuel)


_CODE_RUNS: dict = {}


def _run_small(t: int, n: int, fuel: int):
    key = (t, n, fuel)
    r = _CODE_RUNS.get(key)
    if r is None:
        r = _CODE_RUNS[key] = pca.apply(t, n, fuel)
    return r


def find_code_for(code_map: Mapping[int, int], code_bound: int = DEFAULT_CODE_BOUND, fuel: int = pca.DEFAULT_FUEL) -> int | None:
    """Least t <= code_bound with phi_t(n) = code_map[n] for all n."""
    items = sorted(code_map.items())
    for t in range(code_bound + 1):
        for n, m in items:
            r = _run_small(t, n, fuel)
            if not isinstance(r, pca.Halted) or r.value != m:
                break
        else:
            return t
    return None


def synthesize_tracker(f: PMap) -> tuple[int, int]:
    """A lookup-table tracker for a code-respecting f and fuel enough to run it."""
    cm = f.code_map()
    if cm is None:
        raise CategoryError(f"{f!r} does not respect codes, so nothing tracks it")
    return pca.lookup_code(cm), pca.lookup_steps_bound(cm)


def track(f: PMap, code_bound: int = DEFAULT_CODE_BOUND, fuel: int = pca.DEFAULT_FUEL) -> TrackedMap:
    """A verified tracker: a small one if the search finds it, else a synthesized table."""
    t = find_tracker(f, code_bound, fuel)
    if t is not None:
        return TrackedMap(f, t, fuel)
    t, need = synthesize_tracker(f)
    fuel = max(fuel, need)
    v = check_tracked(f, t, fuel)
    if not v:
        raise AssertionError(f"synthesized tracker failed on {v.witness}")
    return TrackedMap(f, t, fuel)


# ============================================================================
# The category
# ============================================================================


def _respecting_functions(a: PAsm, b: PAsm):
    """All code-respecting functions a -> b, as index tables."""
    classes = list(a.classes.items())
    targets = list(b.classes.items())
    per_class = []
    for _, mask in classes:
        idx = [i for i in range(a.size) if (mask >> i) & 1]
        options = []
        for _, tmask in targets:
            tidx = [j for j in range(b.size) if (tmask >> j) & 1]
            for choice in itertools.product(tidx, repeat=len(idx)):
                options.append(tuple(zip(idx, choice)))
        per_class.append(options)
    for combo in itertools.product(*per_class):
        table = [0] * a.size
        for part in combo:
            for i, j in part:
                table[i] = j
        yield tuple(table)


def count_respecting(a: PAsm, b: PAsm) -> int:
    n = 1
    for mask in a.classes.values():
        k = bin(mask).count("1")
        n *= sum(bin(t).count("1") ** k for t in b.classes.values())
    return n


class PAsmCategory(Category):
    """A lazily generated fragment of partitioned assemblies.

    ``objects`` is the scope used by exhaustive checks; products, pullbacks
    and weak exponentials are built on demand, refusing carriers above ``cap``.
    """

    def __init__(
        self,
        objects: Iterable[PAsm],
        cap: int = 64,
        fuel: int = pca.DEFAULT_FUEL,
        code_bound: int = DEFAULT_CODE_BOUND,
        hom_limit: int = 1 << 16,
        synthesize: bool = True,
    ):
        self.objects = tuple(objects)
        self.synthesize = synthesize
        self.cap = cap
        self.fuel = fuel
        self.code_bound = code_bound
        self.hom_limit = hom_limit
        self.terminal = TERMINAL
        self._hom: dict = {}
        self._prod: dict = {}
        self._exp: dict = {}

    def __repr__(self) -> str:
        return f"PAsmCategory({len(self.objects)} objects, cap={self.cap})"

    def src(self, f):
        return f.src

    def tgt(self, f):
        return f.tgt

    def hom_size(self, a, b):
        return count_respecting(a, b)

    def hom(self, a, b):
        key = (a, b)
        h = self._hom.get(key)
        if h is None:
            if count_respecting(a, b) > self.hom_limit:
                raise OutOfScope(f"hom({a!r}, {b!r}) too large to list")
            h = self._hom[key] = [PMap(a, b, t) for t in _respecting_functions(a, b)]
        return h

    def compose(self, g, f):
        if f.tgt != g.src:
            raise MissingComposite(g, f)
        gt = g.table
        return PMap(f.src, g.tgt, tuple(gt[i] for i in f.table))

    def identity(self, a):
        return PMap(a, a, tuple(range(a.size)))

    def product(self, a, b):
        key = (a, b)
        p = self._prod.get(key)
        if p is None:
            n = a.size * b.size
            if n > self.cap:
                raise MissingProduct(a, b)
            carrier = tuple((x, y) for x in a.carrier for y in b.carrier)
            codes = tuple(pca.pair(s, t) for s in a.codes for t in b.codes)
            name = f"({a!r} x {b!r})" if a.name and b.name else ""
            obj = PAsm(carrier, codes, name)
            m = b.size
            p = Product(obj, PMap(obj, a, tuple(i // m for i in range(n))), PMap(obj, b, tuple(i % m for i in range(n))))
            self._prod[key] = p
        return p

    def pair(self, f, g):
        if f.src != g.src:
            raise BadShape("pairing arrows with different sources")
        p = self.product(f.tgt, g.tgt)
        m = g.tgt.size
        return PMap(f.src, p.obj, tuple(x * m + y for x, y in zip(f.table, g.table)))

    def to_terminal(self, a):
        return PMap(a, TERMINAL, (0,) * a.size)

    def weak_pullback(self, f, g):
        """The pullback: pairs with equal images, coded as pairs of codes."""
        pts = [(i, j) for i in range(f.src.size) for j in range(g.src.size) if f.table[i] == g.table[j]]
        obj = PAsm(
            tuple((f.src.carrier[i], g.src.carrier[j]) for i, j in pts),
            tuple(pca.pair(f.src.codes[i], g.src.codes[j]) for i, j in pts),
        )
        return Square(obj, PMap(obj, f.src, tuple(i for i, _ in pts)), PMap(obj, g.src, tuple(j for _, j in pts)))

    def factor(self, f, g):
        """Some code-respecting h with g.h = f: each code class of src f must land in one class of src g."""
        y = g.src
        table = [0] * f.src.size
        for mask in f.src.classes.values():
            idx = [i for i in range(f.src.size) if (mask >> i) & 1]
            for ymask in y.classes.values():
                choice = []
                for i in idx:
                    hits = [j for j in range(y.size) if (ymask >> j) & 1 and g.table[j] == f.table[i]]
                    if not hits:
                        break
                    choice.append(hits[0])
                else:
                    for i, j in zip(idx, choice):
                        table[i] = j
                    break
            else:
                return None
        return PMap(f.src, y, tuple(table))

    def is_mono(self, f, objects=None):
        return len(set(f.table)) == len(f.table)

    def is_iso(self, f):
        if f.src.size != f.tgt.size or not self.is_mono(f):
            return False
        inv = [0] * f.tgt.size
        for i, j in enumerate(f.table):
            inv[j] = i
        return PMap(f.tgt, f.src, tuple(inv)).code_map() is not None and f.code_map() is not None

    # sub-assemblies and variations -----------------------------------------

    def inclusion(self, a: PAsm, mask: int) -> PMap:
        idx = [i for i in range(a.size) if (mask >> i) & 1]
        sub = PAsm(tuple(a.carrier[i] for i in idx), tuple(a.codes[i] for i in idx))
        return PMap(sub, a, tuple(idx))

    def comprehension_candidates(self, a: PAsm, mask: int):
        yield self.inclusion(a, mask)

    def variation_key(self, f: PMap) -> frozenset:
        return code_image(f)

    def variation_rep(self, a: PAsm, key: frozenset) -> PMap:
        return variation_arrow(a, key)

    def variation_reps(self, a: PAsm, limit: int = 1 << 16) -> list:
        return [variation_arrow(a, k) for k in antichains(a, limit)]

    # weak exponentials -----------------------------------------------------

    def weak_exponential(self, a: PAsm, b: PAsm):
        """(W, ev) with W the pairs (f, t), t <= code_bound tracking f, coded by t."""
        key = (a, b)
        if key not in self._exp:
            try:
                self._exp[key] = weak_exponential(self, a, b, synthesize=self.synthesize)
            except (MissingProduct, FragmentTooSmall):
                self._exp[key] = None
        got = self._exp[key]
        if got is None:
            return None
        return got.W, got.ev


# ============================================================================
# Code images and down-sets
# ============================================================================


def code_image(f: PMap) -> frozenset:
    """The maximal sets among F_n = {f(x) | T x = n}, as bitmasks over the target."""
    sets: dict = {}
    for i, j in enumerate(f.table):
        n = f.src.codes[i]
        sets[n] = sets.get(n, 0) | (1 << j)
    return maximal(sets.values())


def maximal(masks: Iterable[int]) -> frozenset:
    ms = set(masks)
    return frozenset(m for m in ms if not any(m != o and m & o == m for o in ms))


def variation_arrow(a: PAsm, key: Iterable[int]) -> PMap:
    """The canonical representative: one code per generating set."""
    carrier, codes, table = [], [], []
    for k, s in enumerate(sorted(key)):
        for j in range(a.size):
            if (s >> j) & 1:
                carrier.append((a.carrier[j], k))
                codes.append(k)
                table.append(j)
    return PMap(PAsm(tuple(carrier), tuple(codes)), a, tuple(table))


def single_class_subsets(a: PAsm) -> list[int]:
    """Nonempty subsets of the carrier inside one code class, as bitmasks."""
    out = []
    for mask in a.classes.values():
        sub = mask
        while sub:
            out.append(sub)
            sub = (sub - 1) & mask
    return sorted(out)


def downset(a: PAsm, key: Iterable[int]) -> frozenset:
    gens = list(key)
    return frozenset(s for s in single_class_subsets(a) if any(s & g == s for g in gens))


def antichains(a: PAsm, limit: int = 1 << 16) -> list[frozenset]:
    """Every antichain of single-class subsets: the elements of the variation fiber."""
    subs = single_class_subsets(a)
    # order by decreasing size so that each choice only needs checking against earlier ones
    subs.sort(key=lambda s: (-bin(s).count("1"), s))
    out: list = []

    def grow(start: int, chosen: list):
        if len(out) > limit:
            raise OutOfScope(f"more than {limit} variations over {a!r}")
        out.append(frozenset(chosen))
        for k in range(start, len(subs)):
            s = subs[k]
            if any(s & c == s for c in chosen):
                continue
            chosen.append(s)
            grow(k + 1, chosen)
            chosen.pop()

    grow(0, [])
    return out


# ============================================================================
# Doctrines
# ============================================================================


def pgamma_doctrine(C: PAsmCategory) -> SubsetDoctrine:
    """Subsets of carriers; reindexing is preimage."""
    return SubsetDoctrine(C, lambda a: a.size, lambda f: f.table, name="PGamma")


class DownsetFiber:
    """Variations over A as down-sets of single-class subsets."""

    def __init__(self, D: "WsbPAsm", a: PAsm):
        self.D = D
        self.a = a

    @cached_property
    def elements(self) -> tuple:
        return tuple(self.D.rep(self.a, k) for k in antichains(self.a, self.D.fiber_limit))

    @property
    def size(self) -> int:
        return len(self.elements)

    @cached_property
    def top(self):
        return self.D.rep(self.a, maximal(self.a.classes.values()))

    @property
    def bottom(self):
        return self.D.rep(self.a, frozenset())

    def __contains__(self, x) -> bool:
        return isinstance(x, PMap) and x.tgt == self.a and x == self.D.classify(x)

    def down(self, x) -> frozenset:
        return downset(self.a, code_image(x))

    def leq(self, x, y) -> bool:
        ys = code_image(y)
        return all(any(s & g == s for g in ys) for s in code_image(x))

    def meet(self, x, y):
        return self.D.from_down(self.a, self.down(x) & self.down(y))

    def join(self, x, y):
        return self.D.rep(self.a, maximal(code_image(x) | code_image(y)))

    def impl(self, x, y):
        dx, dy = self.down(x), self.down(y)
        subs = single_class_subsets(self.a)
        keep = [s for s in subs if all(t in dy for t in subs if t & s == t and t in dx)]
        return self.D.from_down(self.a, frozenset(keep))

    def __repr__(self) -> str:
        return f"DownsetFiber({self.a!r})"


class WsbPAsm(VariationDoctrine):
    """Wsb(PAsm) computed on down-sets of single-class subsets.

    The plain ``VariationDoctrine`` over the same category (weak pullbacks
    and factorization search) is the reference this is tested against.
    """

    def __init__(self, base: PAsmCategory, objects: Iterable | None = None, fiber_limit: int = 1 << 16):
        super().__init__(base, objects=objects, use_hooks=True, name="Wsb(PAsm)")
        self.fiber_limit = fiber_limit
        self._dfibers: dict = {}

    def fiber(self, a):
        F = self._dfibers.get(a)
        if F is None:
            F = self._dfibers[a] = DownsetFiber(self, a)
        return F

    def rep(self, a: PAsm, key: frozenset) -> PMap:
        return variation_arrow(a, key)

    def from_down(self, a: PAsm, down: frozenset) -> PMap:
        return self.rep(a, maximal(down))

    def classify(self, h):
        return self.rep(h.tgt, code_image(h))

    def _reindex(self, f, x):
        """f*(D) = {U | f(U) in D}"""
        X, A = f.src, f.tgt
        gens = code_image(x)
        keep = []
        for U in single_class_subsets(X):
            img = 0
            for i in range(X.size):
                if (U >> i) & 1:
                    img |= 1 << f.table[i]
            if any(img & g == img for g in gens):
                keep.append(U)
        return self.from_down(X, frozenset(keep))

    def meet(self, a, x, y):
        return self.fiber(a).meet(x, y)

    def impl(self, a, x, y):
        return self.fiber(a).impl(x, y)

    def join(self, a, x, y):
        return self.fiber(a).join(x, y)

    def bottom(self, a):
        return self.fiber(a).bottom

    def forall_along(self, f, x):
        """{S | every U with f(U) inside S is in E}"""
        X, A = f.src, f.tgt
        E = self.fiber(X).down(x)
        images = []
        for U in single_class_subsets(X):
            img = 0
            for i in range(X.size):
                if (U >> i) & 1:
                    img |= 1 << f.table[i]
            images.append((U, img))
        keep = []
        for S in single_class_subsets(A):
            if all(U in E for U, img in images if img & S == img):
                keep.append(S)
        return self.from_down(A, frozenset(keep))

    def fiber_size(self, a):
        return self.fiber(a).size


def wsb_pasm_doctrine(C: PAsmCategory) -> WsbPAsm:
    return WsbPAsm(C)


class AMap(NamedTuple):
    src: Assembly
    tgt: Assembly
    table: tuple


ASM_TERMINAL = Assembly(("*",), (frozenset((0,)),))


class AsmCategory(Category):
    """A fragment of assemblies; arrows are the functions some program tracks."""

    def __init__(self, objects: Iterable[Assembly], cap: int = 64):
        self.objects = tuple(objects)
        self.cap = cap
        self.terminal = ASM_TERMINAL
        self._hom: dict = {}

    def src(self, f):
        return f.src

    def tgt(self, f):
        return f.tgt

    def hom(self, a, b):
        key = (a, b)
        h = self._hom.get(key)
        if h is None:
            if b.size ** a.size > 1 << 16:
                raise OutOfScope(f"hom({a!r}, {b!r}) too large to list")
            h = self._hom[key] = [AMap(a, b, t) for t in itertools.product(range(b.size), repeat=a.size) if asm_code_map(a, b, t) is not None]
        return h

    def compose(self, g, f):
        if f.tgt != g.src:
            raise MissingComposite(g, f)
        return AMap(f.src, g.tgt, tuple(g.table[i] for i in f.table))

    def identity(self, a):
        return AMap(a, a, tuple(range(a.size)))

    def product(self, a, b):
        if a.size * b.size > self.cap:
            raise MissingProduct(a, b)
        carrier = tuple((x, y) for x in a.carrier for y in b.carrier)
        realizes = tuple(frozenset(pca.pair(n, m) for n in r for m in s) for r in a.realizes for s in b.realizes)
        obj = Assembly(carrier, realizes)
        m, n = b.size, a.size * b.size
        return Product(obj, AMap(obj, a, tuple(i // m for i in range(n))), AMap(obj, b, tuple(i % m for i in range(n))))

    def pair(self, f, g):
        p = self.product(f.tgt, g.tgt)
        return AMap(f.src, p.obj, tuple(x * g.tgt.size + y for x, y in zip(f.table, g.table)))

    def to_terminal(self, a):
        return AMap(a, ASM_TERMINAL, (0,) * a.size)

    def weak_pullback(self, f, g):
        pts = [(i, j) for i in range(f.src.size) for j in range(g.src.size) if f.table[i] == g.table[j]]
        obj = Assembly(
            tuple((f.src.carrier[i], g.src.carrier[j]) for i, j in pts),
            tuple(frozenset(pca.pair(n, m) for n in f.src.realizes[i] for m in g.src.realizes[j]) for i, j in pts),
        )
        return Square(obj, AMap(obj, f.src, tuple(i for i, _ in pts)), AMap(obj, g.src, tuple(j for _, j in pts)))

    def is_mono(self, f, objects=None):
        return len(set(f.table)) == len(f.table)

    def comprehension_candidates(self, a, mask):
        idx = [i for i in range(a.size) if (mask >> i) & 1]
        yield AMap(strong_subobject(a, mask), a, tuple(idx))


def ssb_asm_doctrine(C: AsmCategory) -> SubsetDoctrine:
    return SubsetDoctrine(C, lambda a: a.size, lambda f: f.table, name="Ssb(Asm)")


def strong_subobject(a: Assembly, mask: int) -> Assembly:
    idx = [i for i in range(a.size) if (mask >> i) & 1]
    return Assembly(tuple(a.carrier[i] for i in idx), tuple(a.realizes[i] for i in idx))


# ============================================================================
# The universal quantifier along a projection, built as a partitioned assembly
# ============================================================================


def forall_assembly(C: PAsmCategory, p: PAsm, m: PAsm, f: PMap, code_bound: int | None = None) -> PMap:
    """pr1: (Q, R) -> P for a variation f: Y -> P x M.

    Q holds the triples (x, h, t) with h: M -> Y a section of f over x and
    t tracking h; R(x, h, t) = <T x, t>.  Trackers of h only matter through
    the map h induces on codes, so one tracker per code map is enough: the
    least one within ``code_bound``, else a synthesized table.
    """
    y = f.src
    prod = C.product(p, m)
    if f.tgt != prod.obj:
        raise BadShape("f must land in the chosen product")
    bound = C.code_bound if code_bound is None else code_bound
    carrier, codes, table = [], [], []
    ms = m.size
    for xi in range(p.size):
        fibers = []
        for mi in range(ms):
            target = xi * ms + mi
            fibers.append([j for j in range(y.size) if f.table[j] == target])
        if any(not fb for fb in fibers):
            continue
        for h in itertools.product(*fibers):
            hm = PMap(m, y, tuple(h))
            cm = hm.code_map()
            if cm is None:
                continue
            t = find_code_for(cm, bound, C.fuel)
            if t is None:
                t = pca.lookup_code(cm)
            carrier.append((p.carrier[xi], tuple(y.carrier[j] for j in h), t))
            codes.append(pca.pair(p.codes[xi], t))
            table.append(xi)
    q = PAsm(tuple(carrier), tuple(codes))
    return PMap(q, p, tuple(table))


# ============================================================================
# Weak exponentials
# ============================================================================


@dataclass(frozen=True)
class WeakExponential:
    a: PAsm
    b: PAsm
    W: PAsm
    ev: PMap
    members: tuple  # (function table, tracker) per element of W
    fuel: int = pca.DEFAULT_FUEL  # enough to run every tracker in W

    def element(self, table: tuple, t: int) -> int:
        return self.members.index((table, t))


def tracked_tables(a: PAsm, b: PAsm, t: int, fuel: int) -> list[tuple]:
    """Every function a -> b that t tracks."""
    choices = []
    for i in range(a.size):
        r = _run_small(t, a.codes[i], fuel)
        if not isinstance(r, pca.Halted):
            return []
        hits = [j for j in range(b.size) if b.codes[j] == r.value]
        if not hits:
            return []
        choices.append(hits)
    return [tuple(c) for c in itertools.product(*choices)]


def weak_exponential(C: PAsmCategory, a: PAsm, b: PAsm, code_bound: int | None = None, fuel: int | None = None, synthesize: bool = False) -> WeakExponential:
    """W = pairs (f, t) with t <= code_bound tracking f, realized by t; ev((f, t), x) = f(x).

    With ``synthesize`` every map on codes that no small program realizes
    gets a lookup-table tracker as well, so every code-respecting function
    appears in W and mediating arrows always exist.
    """
    bound = C.code_bound if code_bound is None else code_bound
    fuel = C.fuel if fuel is None else fuel
    members = []
    for t in range(bound + 1):
        for table in tracked_tables(a, b, t, fuel):
            members.append((table, t))
    need = fuel
    if synthesize:
        realized = {tuple(sorted(PMap(a, b, tab).code_map().items())) for tab, _ in members}
        acodes = sorted(a.classes)
        for choice in itertools.product(sorted(b.classes), repeat=len(acodes)):
            cm = dict(zip(acodes, choice))
            if tuple(sorted(cm.items())) in realized:
                continue
            t = pca.lookup_code(cm)
            need = max(need, pca.lookup_steps_bound(cm))
            opts = [[j for j in range(b.size) if b.codes[j] == cm[a.codes[i]]] for i in range(a.size)]
            for table in itertools.product(*opts):
                members.append((tuple(table), t))
    W = PAsm(tuple(members), tuple(t for _, t in members), f"W({a!r},{b!r})" if a.name and b.name else "")
    prod = C.product(W, a)
    ev = PMap(prod.obj, b, tuple(members[k // a.size][0][k % a.size] for k in range(prod.obj.size)))
    return WeakExponential(a, b, W, ev, tuple(members), need)


def check_ev_tracked(E: WeakExponential, fuel: int | None = None) -> Verdict:
    """ev((f, t), x) = f(x) is tracked by the universal program."""
    return check_tracked(E.ev, pca.eval_code(), E.fuel + 16 if fuel is None else fuel)


def mediating_arrow(C: PAsmCategory, E: WeakExponential, z: PAsm, f: PMap) -> PMap:
    """g: z -> W with ev.(g x id_A) = f, choosing the least tracker for each curried map."""
    a = E.a
    table = []
    for zi in range(z.size):
        row = tuple(f.table[zi * a.size + ai] for ai in range(a.size))
        candidates = [k for k, (tab, _) in enumerate(E.members) if tab == row]
        if not candidates:
            raise FragmentTooSmall(f"no tracker <= bound for {row} at {z.carrier[zi]!r}", (z, zi, row))
        table.append(candidates)
    # codes of z must go to equal trackers
    out = [0] * z.size
    for code, mask in z.classes.items():
        idx = [i for i in range(z.size) if (mask >> i) & 1]
        common = None
        for t in sorted({E.members[k][1] for k in table[idx[0]]}):
            if all(any(E.members[k][1] == t for k in table[i]) for i in idx):
                common = t
                break
        if common is None:
            raise FragmentTooSmall(f"no common tracker for the code class {code} of {z!r}", (z, code))
        for i in idx:
            out[i] = next(k for k in table[i] if E.members[k][1] == common)
    return PMap(z, E.W, tuple(out))


@dataclass(frozen=True)
class UniversalReport:
    ok: bool
    checked: int
    too_small: tuple = ()
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def check_exponential_universal(C: PAsmCategory, E: WeakExponential, objects: Iterable[PAsm] | None = None) -> UniversalReport:
    """Every f: Z x A -> B factors as ev.(g x id) for some g: Z -> W."""
    objs = tuple(C.objects if objects is None else objects)
    checked = 0
    small = []
    for z in objs:
        try:
            prod = C.product(z, E.a)
            fs = C.hom(prod.obj, E.b)
        except (MissingProduct, OutOfScope):
            small.append((z, "hom"))
            continue
        for f in fs:
            checked += 1
            try:
                g = mediating_arrow(C, E, z, f)
            except FragmentTooSmall as e:
                small.append(e.witness)
                continue
            back = C.compose(E.ev, C.cross(g, C.identity(E.a)))
            if back != f:
                return UniversalReport(False, checked, tuple(small), (z, f, g))
            if g.code_map() is None:
                return UniversalReport(False, checked, tuple(small), (z, f, g, "untracked"))
    return UniversalReport(True, checked, tuple(small))


def check_product_universal(C: PAsmCategory, a: PAsm, b: PAsm, objects: Iterable[PAsm] | None = None) -> UniversalReport:
    """Unique mediating arrows, and tracked projections and pairings."""
    objs = tuple(C.objects if objects is None else objects)
    p = C.product(a, b)
    for pr, code in ((p.pr1, pca.FST_CODE), (p.pr2, pca.SND_CODE)):
        v = check_tracked(pr, code, C.fuel)
        if not v:
            return UniversalReport(False, 0, (), ("projection", pr, v.witness))
    checked = 0
    for z in objs:
        for f in C.hom(z, a):
            for g in C.hom(z, b):
                checked += 1
                hs = [h for h in C.hom(z, p.obj) if C.compose(p.pr1, h) == f and C.compose(p.pr2, h) == g]
                if len(hs) != 1:
                    return UniversalReport(False, checked, (), (z, f, g, len(hs)))
                tf, tg = track(f), track(g)
                t = pca.tuple_codes(tf.tracker, tg.tracker)
                v = check_tracked(hs[0], t, max(tf.fuel, tg.fuel) + 64)
                if not v:
                    return UniversalReport(False, checked, (), (z, f, g, "pairing tracker", v.witness))
    return UniversalReport(True, checked)


# ============================================================================
# Assemblies as a category, and the comparison with the completion
# ============================================================================


def asm_code_map(src: Assembly, tgt: Assembly, table: Sequence[int]) -> dict | None:
    """A map on codes witnessing that the function is tracked, if one exists."""
    need: dict = {}
    for i, j in enumerate(table):
        for n in src.realizes[i]:
            allowed = need.get(n)
            need[n] = tgt.realizes[j] if allowed is None else allowed & tgt.realizes[j]
    if any(not s for s in need.values()):
        return None
    return {n: min(s) for n, s in need.items()}


def asm_isomorphism(x: Assembly, y: Assembly) -> tuple | None:
    """A bijection tracked both ways, or None."""
    if x.size != y.size:
        return None
    for perm in itertools.permutations(range(y.size)):
        if asm_code_map(x, y, perm) is None:
            continue
        inv = [0] * x.size
        for i, j in enumerate(perm):
            inv[j] = i
        if asm_code_map(y, x, inv) is not None:
            return perm
    return None


def quotient_assembly(a: PAsm, rho: int) -> tuple[Assembly, tuple]:
    """Classes of rho (a bitmask over a x a) with the union of their codes; also the class of each point."""
    n = a.size
    cls = [-1] * n
    classes: list[list[int]] = []
    for i in range(n):
        if cls[i] >= 0:
            continue
        members = [j for j in range(n) if (rho >> (i * n + j)) & 1]
        for j in members:
            cls[j] = len(classes)
        classes.append(members)
    carrier = tuple(tuple(a.carrier[j] for j in c) for c in classes)
    realizes = tuple(frozenset(a.codes[j] for j in c) for c in classes)
    return Assembly(carrier, realizes), tuple(cls)


def cover(x: Assembly) -> PAsm:
    """The partitioned assembly of pairs (x, n) with n realizing x, coded by n."""
    carrier, codes = [], []
    for e, rs in zip(x.carrier, x.realizes):
        for n in sorted(rs):
            carrier.append((e, n))
            codes.append(n)
    return PAsm(tuple(carrier), tuple(codes))


def partition_shape(a: PAsm) -> tuple:
    """Isomorphism invariant of a partitioned assembly: sorted code-class sizes."""
    return tuple(sorted(bin(m).count("1") for m in a.classes.values()))


def bounded_assemblies(max_points: int, codes: Sequence[int]) -> list[Assembly]:
    """All assemblies with up to ``max_points`` elements and realizers drawn from ``codes``."""
    subsets = [frozenset(c) for k in range(1, len(codes) + 1) for c in itertools.combinations(codes, k)]
    out = []
    for n in range(max_points + 1):
        for rs in itertools.combinations_with_replacement(subsets, n):
            out.append(Assembly(tuple(f"x{i}" for i in range(n)), tuple(rs)))
    return out


def all_partitioned(max_points: int) -> list[PAsm]:
    """One partitioned assembly per shape (set partition) with at most max_points points."""
    out = []
    for n in range(max_points + 1):
        for shape in _partitions(n):
            codes = []
            for k, size in enumerate(shape):
                codes.extend([k] * size)
            name = "P" + "".join(map(str, shape)) if shape else "P0"
            out.append(PAsm(tuple(f"p{i}" for i in range(n)), tuple(codes), name))
    return out


def _partitions(n: int, largest: int | None = None) -> list[tuple]:
    if n == 0:
        return [()]
    largest = n if largest is None else largest
    out = []
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            out.append((k,) + rest)
    return out


@dataclass(frozen=True)
class CarfurReport:
    objects: int
    faithful: bool
    full: bool
    essentially_surjective: bool
    checked_assemblies: int
    truncated: tuple
    mismatches: tuple

    @property
    def ok(self) -> bool:
        return self.faithful and self.full and self.essentially_surjective and not self.mismatches


def check_carfur_fragment(fragment: Sequence[PAsm], max_points: int = 3, codes: Sequence[int] = (0, 1), cap: int = 64, fuel: int = pca.DEFAULT_FUEL, code_bound: int = DEFAULT_CODE_BOUND) -> CarfurReport:
    """The comparison functor from the completion of PGamma to assemblies, on a fragment.

    (A, rho) goes to the assembly of rho-classes realized by their members'
    codes, and [f] to the induced map of classes.  Faithfulness and fullness
    are checked on every pair of objects; essential surjectivity against
    every assembly with at most ``max_points`` points and realizers in
    ``codes``.  An assembly that is not hit counts as truncation when its
    cover is outside the fragment, and as a genuine mismatch otherwise.
    """
    from .completion import complete

    C = PAsmCategory(fragment, cap=cap, fuel=fuel, code_bound=code_bound)
    P = pgamma_doctrine(C)
    Q = complete(P, fragment)
    QC = Q.base
    images = {}
    for x in Q.objects:
        images[x] = quotient_assembly(x.carrier, x.rho)
    faithful = full = True
    mismatches: list = []
    for x in Q.objects:
        ax, cx = images[x]
        for y in Q.objects:
            ay, cy = images[y]
            seen = {}
            for arrow in QC.hom(x, y):
                f = arrow.rep
                induced = [None] * ax.size
                for i, j in enumerate(f.table):
                    k = cx[i]
                    if induced[k] is None:
                        induced[k] = cy[j]
                    elif induced[k] != cy[j]:
                        mismatches.append(("ill-defined", x, y, f))
                induced_t = tuple(induced)
                if induced_t in seen and seen[induced_t] != arrow:
                    faithful = False
                    mismatches.append(("not faithful", x, y, induced_t))
                seen[induced_t] = arrow
            for table in itertools.product(range(ay.size), repeat=ax.size):
                if asm_code_map(ax, ay, table) is not None and table not in seen:
                    full = False
                    mismatches.append(("not full", x, y, table))
    shapes = {partition_shape(a) for a in fragment}
    truncated = []
    surjective = True
    bounded = bounded_assemblies(max_points, codes)
    for target in bounded:
        if any(asm_isomorphism(images[x][0], target) is not None for x in Q.objects):
            continue
        cov = cover(target)
        if partition_shape(cov) in shapes:
            surjective = False
            mismatches.append(("not hit", target))
        else:
            truncated.append(target)
    return CarfurReport(len(Q.objects), faithful, full, surjective, len(bounded), tuple(truncated), tuple(mismatches))


# ============================================================================
# Church's thesis at fragment scale
# ============================================================================


def nn_exponential(C: PAsmCategory, bound: int, code_bound: int | None = None, fuel: int | None = None) -> WeakExponential:
    """The weak exponential of the truncated naturals with themselves."""
    n = naturals(bound)
    return weak_exponential(C, n, n, code_bound, fuel)


def kleene_w(e: int, x: int, y: int, g_x: int) -> bool:
    """T(e, x, y) = 1 and U(y) = g(x)"""
    return pca.kleene_T(e, x, y) == 1 and pca.kleene_U(y) == g_x


@dataclass(frozen=True)
class TctReport:
    ok: bool
    members: int
    bound: int
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def check_tct_pgamma(bound: int, fuel: int = pca.DEFAULT_FUEL, code_bound: int = DEFAULT_CODE_BOUND, quantifier_bound: int | None = None) -> TctReport:
    """Every (g, t) in W has a code e, namely t, computing g on 0..quantifier_bound."""
    C = PAsmCategory([naturals(bound)], cap=(bound + 1) * (code_bound + 1) * (bound + 1), fuel=fuel, code_bound=code_bound)
    E = nn_exponential(C, bound)
    qb = bound if quantifier_bound is None else quantifier_bound
    for table, t in E.members:
        e = t
        for x in range(qb + 1):
            y = pca.trace(e, x, fuel)
            if y is None or not kleene_w(e, x, y, table[x]):
                return TctReport(False, len(E.members), qb, (table, t, x))
    return TctReport(True, len(E.members), qb)


@dataclass(frozen=True)
class SkolemReport:
    ok: bool
    checked: int
    undefined: tuple
    tracker: int
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def skolem_min_search(E: WeakExponential, programs: Sequence[int], bound: int, fuel: int = pca.DEFAULT_FUEL, search_fuel: int = 200_000) -> tuple[dict, SkolemReport]:
    """gamma((g, t), e, x) = least y with T(e, x, y) = 1 and U(y) = g(x).

    Returns the table of gamma on W x programs x 0..bound (None where no
    trace exists within fuel) and a report checking the Skolem equation
    exists y. alpha(w, e, x, y) <=> alpha(w, e, x, gamma(w, e, x)) and that the
    min-search program tracks gamma wherever gamma is defined.
    """
    code = pca.min_search_code()
    gamma: dict = {}
    undefined = []
    checked = 0
    for k, (table, t) in enumerate(E.members):
        for e in programs:
            for x in range(bound + 1):
                checked += 1
                y = pca.trace(e, x, fuel)
                holds = y is not None and pca.kleene_U(y) == table[x]
                value = y if holds else None
                gamma[k, e, x] = value
                if value is None:
                    undefined.append((k, e, x))
                    # no y below the fuel bound; alpha fails at any candidate too
                    if y is not None and kleene_w(e, x, y, table[x]):
                        return gamma, SkolemReport(False, checked, tuple(undefined), code, (k, e, x, "missed"))
                    continue
                if not kleene_w(e, x, value, table[x]):
                    return gamma, SkolemReport(False, checked, tuple(undefined), code, (k, e, x, "equation"))
                if value > 0 and any(kleene_w(e, x, yy, table[x]) for yy in _below(value)):
                    return gamma, SkolemReport(False, checked, tuple(undefined), code, (k, e, x, "not least"))
                r = pca.apply(code, pca.pair(pca.pair(t, e), x), search_fuel)
                if not isinstance(r, pca.Halted) or r.value != value:
                    return gamma, SkolemReport(False, checked, tuple(undefined), code, (k, e, x, "tracker", r))
    return gamma, SkolemReport(True, checked, tuple(undefined), code)


def _below(y: int, sample: int = 8) -> list[int]:
    """A few smaller trace codes: same step count with other values, and earlier steps."""
    k, r = pca.unpair(y)
    out = {pca.pair(k, v) for v in range(min(r, sample))}
    out |= {pca.pair(s, r) for s in range(max(0, k - sample), k)}
    return sorted(v for v in out if v < y)


def skolem_projection(E: WeakExponential, programs: Sequence[int], bound: int, fuel: int = pca.DEFAULT_FUEL) -> SkolemReport:
    """epsilon(g, t) = t for beta(f, e) = all x <= bound. exists y. T(e,x,y) = 1 and U(y) = f(x).

    Checks exists e. beta(w, e) <=> beta(w, epsilon(w)) over ``programs``
    together with every tracker, and that the identity program tracks epsilon.
    """
    def beta(table, e):
        for x in range(bound + 1):
            y = pca.trace(e, x, fuel)
            if y is None or not kleene_w(e, x, y, table[x]):
                return False
        return True

    for k, (table, t) in enumerate(E.members):
        some = any(beta(table, e) for e in list(programs) + [t])
        if some != beta(table, t):
            return SkolemReport(False, k, (), pca.ID_CODE, (table, t))
    eps = PMap(E.W, naturals(max([t for _, t in E.members], default=0)), tuple(t for _, t in E.members))
    v = check_tracked(eps, pca.ID_CODE, fuel)
    if not v:
        return SkolemReport(False, len(E.members), (), pca.ID_CODE, v.witness)
    return SkolemReport(True, len(E.members), (), pca.ID_CODE)


@dataclass(frozen=True)
class CtVerdict:
    ok: bool
    code: int | None
    choice: tuple
    route: str
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def decide(r: int, x: int, n: int, fuel: int) -> bool | None:
    res = pca.apply(r, pca.pair(x, n), fuel)
    if not isinstance(res, pca.Halted):
        return None
    return res.value != 0


def check_ct_instance(r: int, bound: int, fuel: int = pca.DEFAULT_FUEL, code_bound: int = DEFAULT_CODE_BOUND, witness_bound: int | None = None) -> CtVerdict:
    """A code e with T(e, x, y) = 1 and R(x, U(y)) for x <= bound, via choice then TCT.

    Choice picks the least n <= witness_bound (default 2 bound + 2) with
    R(x, n) for each x: a function g
    on the truncated naturals.  A tracker t of g makes (g, t) a member of the
    weak exponential, and TCT for that member gives e := t.
    """
    wb = 2 * bound + 2 if witness_bound is None else witness_bound
    choice = []
    for x in range(bound + 1):
        n = next((n for n in range(wb + 1) if decide(r, x, n, fuel)), None)
        if n is None:
            return CtVerdict(False, None, tuple(choice), "choice", (x, "no witness within bound"))
        choice.append(n)
    g = tuple(choice)
    top = max(g)
    f = PMap(naturals(bound), naturals(top), g)
    t = find_tracker(f, code_bound, fuel)
    route = "choice+search"
    run_fuel = fuel
    if t is None:
        t, need = synthesize_tracker(f)
        run_fuel = max(fuel, need)
        route = "choice+table"
    for x in range(bound + 1):
        y = pca.trace(t, x, run_fuel)
        if y is None or pca.kleene_T(t, x, y) != 1 or not decide(r, x, pca.kleene_U(y), fuel):
            return CtVerdict(False, t, g, route, (x, y))
    return CtVerdict(True, t, g, route)


# decision programs for sample relations: k = <x, n> |-> 1 or 0

_CMPN = pca._CMP


def relation_code(test) -> int:
    """Compile a named-term test on variables x and n into a decision program."""
    body = pca._lams("k", pca.app(pca._lams("x n", test), pca.tfst("k"), pca.tsnd("k")))
    return pca.encode(pca.compile_named(body))


def _is(a, b):
    return ("case", pca.app(_CMPN, a, b), pca.num(1), "_", pca.num(0))


RELATIONS: dict[str, Callable[[], int]] = {
    "successor": lambda: relation_code(_is("n", pca.succ("x"))),
    "anything": lambda: pca.const_code(1),
    "at-least": lambda: relation_code(("case", pca.app(_CMPN, "n", "x"), pca.num(1), "c", ("case", "c", pca.num(0), "_", pca.num(1)))),
    "double": lambda: relation_code(
        _is("n", pca.app(pca.fix(pca._lams("d y", ("case", "y", pca.num(0), "p", pca.succ(pca.succ(pca.app("d", "p")))))), "x"))
    ),
    "parity": lambda: relation_code(
        _is(
            "n",
            pca.app(pca.fix(pca._lams("p y", ("case", "y", pca.num(0), "q", ("case", pca.app("p", "q"), pca.num(1), "_", pca.num(0))))), "x"),
        )
    ),
}


def table_relation(table: Mapping[int, int]) -> int:
    """The graph of a finite function, as a decision program."""
    look = pca.lookup_code(table)
    return relation_code(_is("n", pca.app(pca.num(look), "x")))
