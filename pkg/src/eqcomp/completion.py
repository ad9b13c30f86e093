"""The elementary quotient completion of a doctrine, and the choice transfer checks.

Objects of the completed category are pairs (A, rho) with rho an equivalence
relation in the fiber over A x A; arrows are classes of base arrows that
respect the relations, under f ~ g iff rho(a,a') |- sigma(f a, g a').  The
fiber over (A, rho) is the poset of descent data for rho.

Hom-sets are partitioned explicitly whenever the base hom-set has at most
``hom_limit`` arrows, and the class is then stored with every member.  Arrows
out of larger objects (products of products, say) carry a representative
only; they are used for reindexing and quantifying, never compared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .doctrine import (
    MAX_FIBER,
    Doctrine,
    DoctrineError,
    MissingExponential,
    OutOfScope,
    Verdict,
    check_axiom,
    check_comprehensive_diagonals,
    check_equivalence_relation,
    check_rule,
    find_comprehension,
    has_full_weak_comprehensions,
)
from .fincat import Category, CategoryError, MissingProduct, Product

HOM_LIMIT = 1 << 14


@dataclass(frozen=True)
class QuotObject:
    carrier: object
    rho: object

    def __repr__(self) -> str:
        return f"({self.carrier!r}, {self.rho!r})"


@dataclass(frozen=True)
class QuotArrow:
    """A class of base arrows; ``members`` is None when the hom-set was too big to partition."""

    src: QuotObject
    tgt: QuotObject
    rep: object
    members: frozenset | None = None

    def __repr__(self) -> str:
        n = "?" if self.members is None else len(self.members)
        return f"[{self.rep!r}]/{n}"


class QuotCategory(Category):
    """The base category of the completion of ``P``."""

    def __init__(self, P: Doctrine, objects: Iterable[QuotObject], hom_limit: int = HOM_LIMIT):
        self.P = P
        self.C = P.base
        self.objects = tuple(objects)
        self.hom_limit = hom_limit
        self._hom: dict = {}
        self._class_of: dict = {}
        C = self.C
        self.terminal = QuotObject(C.terminal, P.top(C.product(C.terminal, C.terminal).obj))

    def __repr__(self) -> str:
        return f"QuotCategory({self.P.name}: {len(self.objects)} objects)"

    # relation tests ---------------------------------------------------------

    def respects(self, x: QuotObject, y: QuotObject, f) -> bool:
        return self.related(x, y, f, f)

    def related(self, x: QuotObject, y: QuotObject, f, g) -> bool:
        """rho(a,a') |- sigma(f a, g a')"""
        P, C = self.P, self.C
        aa = C.product(x.carrier, x.carrier).obj
        return P.leq(aa, x.rho, P.reindex(C.cross(f, g), y.rho))

    # Category interface -----------------------------------------------------

    def src(self, f: QuotArrow):
        return f.src

    def tgt(self, f: QuotArrow):
        return f.tgt

    def hom(self, x: QuotObject, y: QuotObject) -> list:
        key = (x, y)
        if key in self._hom:
            return self._hom[key]
        C = self.C
        if C.hom_size(x.carrier, y.carrier) > self.hom_limit:
            raise OutOfScope(f"hom({x.carrier!r}, {y.carrier!r}) too large to partition")
        classes: list[list] = []
        for f in C.hom(x.carrier, y.carrier):
            if not self.respects(x, y, f):
                continue
            for cl in classes:
                if self.related(x, y, cl[0], f):
                    cl.append(f)
                    break
            else:
                classes.append([f])
        out = []
        for cl in classes:
            arrow = QuotArrow(x, y, cl[0], frozenset(cl))
            out.append(arrow)
            for f in cl:
                self._class_of[x, y, f] = arrow
        self._hom[key] = out
        return out

    def hom_size(self, x, y):
        return len(self.hom(x, y))

    def arrow(self, x: QuotObject, y: QuotObject, f) -> QuotArrow:
        """The class of base arrow f as an arrow x -> y."""
        C = self.C
        if C.hom_size(x.carrier, y.carrier) <= self.hom_limit:
            self.hom(x, y)
            got = self._class_of.get((x, y, f))
            if got is None:
                raise CategoryError(f"{f!r} does not respect the relations of {x!r} -> {y!r}")
            return got
        return QuotArrow(x, y, f, None)

    def compose(self, g: QuotArrow, f: QuotArrow) -> QuotArrow:
        if f.tgt != g.src:
            raise CategoryError("non-composable classes")
        return self.arrow(f.src, g.tgt, self.C.compose(g.rep, f.rep))

    def identity(self, x: QuotObject) -> QuotArrow:
        return self.arrow(x, x, self.C.identity(x.carrier))

    def product(self, x: QuotObject, y: QuotObject) -> Product:
        P, C = self.P, self.C
        p = C.product(x.carrier, y.carrier)
        pp = C.product(p.obj, p.obj)
        l, r = pp.pr1, pp.pr2
        pr13 = C.pair(C.compose(p.pr1, l), C.compose(p.pr1, r))
        pr24 = C.pair(C.compose(p.pr2, l), C.compose(p.pr2, r))
        rel = P.meet(pp.obj, P.reindex(pr13, x.rho), P.reindex(pr24, y.rho))
        xy = QuotObject(p.obj, rel)
        return Product(xy, self.arrow(xy, x, p.pr1), self.arrow(xy, y, p.pr2))

    def pair(self, f: QuotArrow, g: QuotArrow) -> QuotArrow:
        p = self.product(f.tgt, g.tgt)
        return self.arrow(f.src, p.obj, self.C.pair(f.rep, g.rep))

    def to_terminal(self, x: QuotObject) -> QuotArrow:
        return self.arrow(x, self.terminal, self.C.to_terminal(x.carrier))

    def weak_exponential(self, x: QuotObject, y: QuotObject):
        """(W', theta) and the class of ev: a weak exponential of y to the power x.

        W' comprehends the functions respecting the relations and theta is
        extensional equality: theta(t,t') = forall a a'. rho(a,a') -> sigma(ev(t,a), ev(t',a')).
        """
        P, C = self.P, self.C
        hook = getattr(C, "weak_exponential", None)
        we = hook(x.carrier, y.carrier) if hook is not None else None
        if we is None:
            return None
        w, ev = we
        try:
            theta = _extensional_equality(P, x, y, w, ev)
        except (MissingProduct, OutOfScope):
            return None
        ww = C.product(w, w)
        diag = C.diagonal(w)
        respecting = P.reindex(diag, theta)
        c = find_comprehension(P, w, respecting)
        if c is None:
            return None
        w2 = C.src(c)
        rel = P.reindex(C.cross(c, c), theta)
        obj = QuotObject(w2, rel)
        ev2 = C.compose(ev, C.cross(c, C.identity(x.carrier)))
        del ww
        return obj, self.arrow(self.product(obj, x).obj, y, ev2)


def _extensional_equality(P: Doctrine, x: QuotObject, y: QuotObject, w, ev):
    C = P.base
    a = x.carrier
    ww = C.product(w, w)
    aa = C.product(a, a)
    big = C.product(ww.obj, aa.obj)
    t1 = C.compose(ww.pr1, big.pr1)
    t2 = C.compose(ww.pr2, big.pr1)
    a1 = C.compose(aa.pr1, big.pr2)
    a2 = C.compose(aa.pr2, big.pr2)
    v1 = C.compose(ev, C.pair(t1, a1))
    v2 = C.compose(ev, C.pair(t2, a2))
    body = P.impl(big.obj, P.reindex(big.pr2, x.rho), P.reindex(C.pair(v1, v2), y.rho))
    return P.forall_along(big.pr1, body)


class DescentFiber:
    """Descent data of rho inside the base fiber, with the base's operations."""

    def __init__(self, P: Doctrine, x: QuotObject):
        self.P = P
        self.x = x
        self.a = x.carrier
        self.base_fiber = P.fiber(x.carrier)
        self.top = self.base_fiber.top

    def is_descent(self, alpha) -> bool:
        P, C = self.P, self.P.base
        aa = C.product(self.a, self.a)
        lhs = P.meet(aa.obj, P.reindex(aa.pr1, alpha), self.x.rho)
        return P.leq(aa.obj, lhs, P.reindex(aa.pr2, alpha))

    @cached_property
    def elements(self) -> tuple:
        return tuple(al for al in self.base_fiber.elements if self.is_descent(al))

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, alpha) -> bool:
        return alpha in self.base_fiber and self.is_descent(alpha)

    def leq(self, u, v) -> bool:
        return self.base_fiber.leq(u, v)

    def meet(self, u, v):
        return self.base_fiber.meet(u, v)

    @property
    def bottom(self):
        return self.P.bottom(self.a)

    def join(self, u, v):
        return self.P.join(self.a, u, v)

    def impl(self, u, v):
        return self.P.impl(self.a, u, v)

    def __repr__(self) -> str:
        return f"DescentFiber({self.x!r})"


class QuotDoctrine(Doctrine):
    """The completed doctrine: descent data, reindexed along representatives."""

    def __init__(self, P: Doctrine, objects: Iterable[QuotObject], hom_limit: int = HOM_LIMIT):
        super().__init__(QuotCategory(P, objects, hom_limit), f"Q({P.name})")
        self.P = P
        self._fibers: dict = {}

    def fiber(self, x: QuotObject):
        F = self._fibers.get(x)
        if F is None:
            F = self._fibers[x] = DescentFiber(self.P, x)
        return F

    def fiber_size(self, x) -> int:
        if self.P.fiber_size(x.carrier) > MAX_FIBER:
            raise OutOfScope(f"descent fiber over {x!r} too large to list")
        return self.fiber(x).size

    def _reindex(self, f: QuotArrow, alpha):
        return self.P.reindex(f.rep, alpha)

    def delta(self, x: QuotObject):
        return x.rho

    def exists_along(self, f: QuotArrow, alpha):
        """The sigma-saturation of the base image: exists b'. E_f(alpha)(b') /\\ sigma(b', b)."""
        P, C = self.P, self.P.base
        b = f.tgt.carrier
        bb = C.product(b, b)
        e = P.exists_along(f.rep, alpha)
        return P.exists_along(bb.pr2, P.meet(bb.obj, P.reindex(bb.pr1, e), f.tgt.rho))


def equivalence_relations(P: Doctrine, a, max_fiber: int = MAX_FIBER) -> list:
    """Every rho over A x A passing the equivalence check, in fiber order."""
    C = P.base
    aa = C.product(a, a).obj
    if P.fiber_size(aa) > max_fiber:
        raise OutOfScope(f"fiber over {aa!r} too large to search for relations")
    return [r for r in P.fiber(aa).elements if check_equivalence_relation(P, a, r)]


def complete(P: Doctrine, objects: Iterable | None = None, relations: Mapping | None = None, max_fiber: int = MAX_FIBER, hom_limit: int = HOM_LIMIT) -> QuotDoctrine:
    """The elementary quotient completion of P restricted to the carriers in ``objects``.

    ``relations`` may map a carrier to the relations wanted over it; every
    relation given is still validated.  Carriers whose square is missing or
    whose fiber is too large are left out.
    """
    C = P.base
    objs = tuple(P.objects if objects is None else objects)
    qobjs = []
    for a in objs:
        if not C.has_product(a, a):
            continue
        if relations is not None and a in relations:
            rels = list(relations[a])
            for r in rels:
                v = check_equivalence_relation(P, a, r)
                if not v:
                    raise DoctrineError(f"{r!r} over {a!r} is not an equivalence relation: {v.witness}")
        else:
            try:
                rels = equivalence_relations(P, a, max_fiber)
            except OutOfScope:
                continue
        qobjs.extend(QuotObject(a, r) for r in rels)
    return QuotDoctrine(P, qobjs, hom_limit)


def base_embedding(Q: QuotDoctrine) -> list[QuotObject]:
    """The objects (A, delta_A) through which the base sits inside the completion."""
    P = Q.P
    return [x for x in Q.objects if x.rho == P.delta(x.carrier)]


# ============================================================================
# Effective quotients
# ============================================================================


def q_equivalence_relations(Q: QuotDoctrine, x: QuotObject) -> list:
    """Equivalence relations on x computed inside the completed doctrine.

    Needs the triple product of x in the completion, so only small carriers fit.
    """
    QC = Q.base
    xx = QC.product(x, x).obj
    return [s for s in Q.fiber(xx).elements if check_equivalence_relation(Q, x, s)]


def equivalences_above(Q: QuotDoctrine, x: QuotObject) -> list:
    """Base equivalence relations containing rho; these are the equivalence relations on x."""
    P, C = Q.P, Q.P.base
    aa = C.product(x.carrier, x.carrier).obj
    return [s for s in equivalence_relations(P, x.carrier) if P.leq(aa, x.rho, s)]


def kernel(Q: QuotDoctrine, f: QuotArrow):
    """(f x f)* of the target relation, computed on representatives."""
    C = Q.P.base
    return Q.P.reindex(C.cross(f.rep, f.rep), f.tgt.rho)


def is_quotient(Q: QuotDoctrine, q: QuotArrow, sigma, targets: Iterable[QuotObject]) -> Verdict:
    """sigma |- q a = q a', and each g killing sigma factors uniquely through q."""
    P, QC = Q.P, Q.base
    x, y = q.src, q.tgt
    aa = P.base.product(x.carrier, x.carrier).obj
    if not P.leq(aa, sigma, kernel(Q, q)):
        return Verdict(False, ("not constant on classes", q))
    for z in targets:
        for g in QC.hom(x, z):
            if not P.leq(aa, sigma, kernel(Q, g)):
                continue
            hs = [h for h in QC.hom(y, z) if QC.compose(h, q) == g]
            if len(hs) != 1:
                return Verdict(False, ("factorization", g, len(hs)))
    return Verdict(True)


def pullback_of(Q: QuotDoctrine, q: QuotArrow, f: QuotArrow):
    """A pullback of q: X -> Y along f: Z -> Y built from a base comprehension.

    The carrier comprehends <f pr1, q pr2>* delta_Y over Z x X and carries the
    product relation; returns (obj, q', f') with q' into Z, or None when the
    comprehension leaves the fragment.
    """
    P, C, QC = Q.P, Q.P.base, Q.base
    z, x, y = f.src, q.src, q.tgt
    zx = C.product(z.carrier, x.carrier)
    phi = P.reindex(C.pair(C.compose(f.rep, zx.pr1), C.compose(q.rep, zx.pr2)), y.rho)
    k = find_comprehension(P, zx.obj, phi)
    if k is None:
        return None
    prod = QC.product(z, x).obj
    rel = P.reindex(C.cross(k, k), prod.rho)
    obj = QuotObject(C.src(k), rel)
    return obj, QC.arrow(obj, z, C.compose(zx.pr1, k)), QC.arrow(obj, x, C.compose(zx.pr2, k))


def check_effective_quotients(Q: QuotDoctrine, objects: Iterable[QuotObject] | None = None, stability: bool = True) -> Verdict:
    """[id_A]: (A, rho) -> (A, sigma) is an effective quotient, stable under pullback.

    For each object and each equivalence relation sigma on it: the kernel of
    [id] is sigma, [id] has the quotient property against every target in
    scope, and for every arrow f into (A, sigma) the pulled-back arrow is a
    quotient of its own kernel.  Pullbacks that leave the fragment are
    counted as truncation.
    """
    QC = Q.base
    objs = tuple(Q.objects if objects is None else objects)
    trunc = 0
    for x in objs:
        try:
            sigmas = equivalences_above(Q, x)
        except (MissingProduct, OutOfScope):
            trunc += 1
            continue
        for s in sigmas:
            y = QuotObject(x.carrier, s)
            q = QC.arrow(x, y, Q.P.base.identity(x.carrier))
            k = kernel(Q, q)
            if k != s:
                return Verdict(False, (x, s, "kernel", k), "quotient is not effective", trunc)
            v = is_quotient(Q, q, s, objs)
            if not v:
                return Verdict(False, (x, s) + v.witness, "no quotient property", trunc)
            if not stability:
                continue
            for z in objs:
                try:
                    fs = QC.hom(z, y)
                except OutOfScope:
                    trunc += 1
                    continue
                for f in fs:
                    try:
                        pb = pullback_of(Q, q, f)
                    except (MissingProduct, OutOfScope):
                        pb = None
                    if pb is None:
                        trunc += 1
                        continue
                    obj, q2, f2 = pb
                    if QC.compose(q, f2) != QC.compose(f, q2) and not _same_class(QC, QC.compose(q, f2), QC.compose(f, q2)):
                        return Verdict(False, (x, s, f, "square"), "pullback square does not commute", trunc)
                    try:
                        k2 = kernel(Q, q2)
                        v2 = is_quotient(Q, q2, k2, objs)
                    except (MissingProduct, OutOfScope):
                        trunc += 1
                        continue
                    if not v2:
                        return Verdict(False, (x, s, f) + v2.witness, "pulled-back quotient fails", trunc)
    return Verdict(True, (), "", trunc)


def _same_class(QC: QuotCategory, f: QuotArrow, g: QuotArrow) -> bool:
    return f.src == g.src and f.tgt == g.tgt and QC.related(f.src, f.tgt, f.rep, g.rep)


# ============================================================================
# Transfer of choice principles
# ============================================================================


@dataclass(frozen=True)
class TransferReport:
    name: str
    hypotheses: Mapping
    left: Verdict
    right: Verdict
    discrepancy: bool
    detail: str = ""

    @property
    def agree(self) -> bool:
        return not self.discrepancy


def _hypotheses(P: Doctrine, objects) -> dict:
    return {
        "full_weak_comprehensions": bool(has_full_weak_comprehensions(P, objects)),
        "comprehensive_diagonals": bool(check_comprehensive_diagonals(P, objects)),
    }


def check_ruc_transfer(P: Doctrine, Q: QuotDoctrine | None = None, objects: Iterable | None = None) -> TransferReport:
    """RC in P against RUC in the completion; they must agree under the hypotheses."""
    objs = tuple(P.objects if objects is None else objects)
    Q = Q or complete(P, objs)
    hyp = _hypotheses(P, objs)
    rc = check_rule(P, "RC", objs)
    ruc = check_rule(Q, "RUC", Q.objects)
    applies = all(hyp.values())
    return TransferReport("RC<=>RUC", hyp, rc, ruc, applies and rc.ok != ruc.ok)


def _ac_everywhere(P: Doctrine, axiom: str, objects, codomains) -> Verdict:
    trunc = 0
    for a in objects:
        try:
            v = check_axiom(P, axiom, a, objects=objects, codomains=codomains)
        except MissingExponential:
            trunc += 1
            continue
        trunc += v.truncated
        if not v:
            return Verdict(False, (a,) + v.witness, v.detail, trunc)
    return Verdict(True, (), "", trunc)


def check_auc_transfer(P: Doctrine, Q: QuotDoctrine | None = None, objects: Iterable | None = None, q_objects: Iterable | None = None) -> TransferReport:
    """AC in P gives AUC in the completion; AUC there gives AC back with full weak comprehensions."""
    objs = tuple(P.objects if objects is None else objects)
    Q = Q or complete(P, objs)
    qobjs = tuple(Q.objects if q_objects is None else q_objects)
    hyp = _hypotheses(P, objs)
    ac = _ac_everywhere(P, "AC", objs, objs)
    auc = _ac_everywhere(Q, "AUC", qobjs, qobjs)
    forward = ac.ok and not auc.ok
    backward = auc.ok and hyp["full_weak_comprehensions"] and not ac.ok
    detail = "forward fails" if forward else "converse fails" if backward else ""
    return TransferReport("AC=>AUC", hyp, ac, auc, forward or backward, detail)


def check_ac_on_object_transfer(P: Doctrine, a, Q: QuotDoctrine | None = None, objects: Iterable | None = None) -> TransferReport:
    """AC on A in P against AC on (A, delta_A) in the completion."""
    objs = tuple(P.objects if objects is None else objects)
    Q = Q or complete(P, objs)
    hyp = _hypotheses(P, objs)
    left = check_axiom(P, "AC", a, objects=objs, codomains=objs)
    xa = QuotObject(a, P.delta(a))
    right = check_axiom(Q, "AC", xa, objects=Q.objects, codomains=Q.objects)
    return TransferReport("AC-on-object", hyp, left, right, left.ok != right.ok)
