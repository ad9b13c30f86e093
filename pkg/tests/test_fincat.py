from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from eqcomp.fincat import (
    BadIdentity,
    Fn,
    MissingComposite,
    NotAssociative,
    NotClosed,
    check_category,
    check_laws,
    check_pnno,
    check_products,
    check_terminal,
    check_weak_pullbacks,
    finset_category,
    product_closure,
)

C = finset_category(range(13), 12, scope=(0, 1, 2, 3))


def functions(a, b):
    return [Fn(a, b, t) for t in itertools.product(range(b), repeat=a)]


fns = st.sampled_from([f for a in (1, 2, 3) for b in (1, 2, 3) for f in functions(a, b)])


def monoid(table):
    """A one-object category with identity e and the given products of a, b."""
    full = {("e", x): x for x in "eab"} | {(x, "e"): x for x in "eab"} | table
    return {
        "objects": ["*"],
        "arrows": [{"id": x, "src": "*", "tgt": "*"} for x in "eab"],
        "compose": [[g, f, h] for (g, f), h in full.items()],
        "identities": {"*": "e"},
    }


def test_finset_laws_products_and_terminal():
    check_laws(C)
    check_terminal(C)
    check_products(C)
    check_weak_pullbacks(C, (1, 2))


def test_sizes_must_be_closed_under_products():
    with pytest.raises(NotClosed):
        finset_category([0, 1, 2], 4)
    assert product_closure([2, 3], 12) == (1, 2, 3, 4, 6, 8, 9, 12)


@given(fns, fns, fns)
def test_composition_is_function_composition(f, g, h):
    if f.tgt == g.src and g.tgt == h.src:
        gf = C.compose(g, f)
        assert all(gf(i) == g(f(i)) for i in range(f.src))
        assert C.compose(h, gf) == C.compose(C.compose(h, g), f)
    elif f.tgt != g.src:
        with pytest.raises(MissingComposite):
            C.compose(g, f)


@given(fns, fns)
def test_pairing_is_the_unique_mediator(f, g):
    if f.src != g.src:
        return
    p = C.product(f.tgt, g.tgt)
    h = C.pair(f, g)
    assert C.compose(p.pr1, h) == f and C.compose(p.pr2, h) == g
    mediators = [k for k in C.hom(f.src, p.obj) if C.compose(p.pr1, k) == f and C.compose(p.pr2, k) == g]
    assert mediators == [h]


@given(fns, fns)
def test_weak_pullback_commutes_and_covers(f, g):
    if f.tgt != g.tgt:
        return
    sq = C.weak_pullback(f, g)
    assert sq is not None
    assert C.compose(f, sq.p) == C.compose(g, sq.q)
    points = {(sq.p(i), sq.q(i)) for i in range(sq.obj)}
    assert points == {(x, y) for x in range(f.src) for y in range(g.src) if f(x) == g(y)}


def test_hom_sizes_match_counting():
    for a, b in itertools.product(range(4), repeat=2):
        assert len(C.hom(a, b)) == b**a == C.hom_size(a, b)


def test_check_category_accepts_a_monoid_and_finds_identities():
    raw = monoid({("a", "a"): "e", ("a", "b"): "b", ("b", "a"): "b", ("b", "b"): "b"})
    del raw["identities"]
    M = check_category(raw)
    assert M.identity("*") == "e"


def test_check_category_rejects_non_associative_tables():
    raw = monoid({("a", "a"): "b", ("a", "b"): "a", ("b", "a"): "b", ("b", "b"): "b"})
    with pytest.raises(NotAssociative):
        check_category(raw)


def test_check_category_rejects_missing_composites_and_units():
    raw = monoid({("a", "a"): "e", ("a", "b"): "b", ("b", "a"): "b"})
    with pytest.raises(MissingComposite):
        check_category(raw)
    raw = monoid({("a", "a"): "e", ("a", "b"): "b", ("b", "a"): "b", ("b", "b"): "b"})
    raw["compose"] = [[g, f, "a" if (g, f) == ("e", "b") else h] for g, f, h in raw["compose"]]
    raw["identities"] = {}
    with pytest.raises((BadIdentity, NotAssociative)):
        check_category(raw)


def test_finite_sets_have_no_natural_numbers_object():
    # a cycle of length 2 cannot start at 1 and then be sent to 0 forever
    N, z = 2, Fn(1, 2, (0,))
    s = Fn(2, 2, (1, 0))
    v = check_pnno(C, N, z, s)
    assert v.status == "FailsExistence"
    # the one-point "numbers": recursion forces a = f . a
    v = check_pnno(C, 1, Fn(1, 1, (0,)), Fn(1, 1, (0,)))
    assert not v.holds


@pytest.mark.parametrize("n", [2, 3])
def test_pnno_counterexamples_replay(n):
    s = Fn(n, n, tuple((i + 1) % n for i in range(n)))
    v = check_pnno(C, n, Fn(1, n, (0,)), s)
    assert v.status == "FailsExistence"
    a, f = v.witness
    p = C.product(C.src(a), n)
    base = C.pair(C.identity(C.src(a)), C.compose(Fn(1, n, (0,)), C.to_terminal(C.src(a))))
    step = C.cross(C.identity(C.src(a)), s)
    assert not any(C.compose(k, base) == a and C.compose(k, step) == C.compose(f, k) for k in C.hom(p.obj, C.tgt(a)))


def finset_raw(sizes):
    fns = {}
    for a in sizes:
        for b in sizes:
            for t in itertools.product(range(b), repeat=a):
                fns[f"{a}>{b}:{t}"] = Fn(a, b, t)
    ids = {str(a): f"{a}>{a}:{tuple(range(a))}" for a in sizes}
    name = {f: k for k, f in fns.items()}
    compose = [[g, f, name[Fn(fns[f].src, fns[g].tgt, tuple(fns[g].table[i] for i in fns[f].table))]] for g in fns for f in fns if fns[f].tgt == fns[g].src]
    arrows = [{"id": k, "src": str(f.src), "tgt": str(f.tgt)} for k, f in fns.items()]
    return {"objects": [str(a) for a in sizes], "arrows": arrows, "compose": compose, "identities": ids}


def test_single_identity_is_a_category():
    raw = {"objects": ["*"], "arrows": [{"id": "e", "src": "*", "tgt": "*"}], "compose": [["e", "e", "e"]]}
    assert check_category(raw).identity("*") == "e"


def test_unclosed_loop_is_rejected():
    raw = {"objects": ["*"], "arrows": [{"id": "e", "src": "*", "tgt": "*"}, {"id": "l", "src": "*", "tgt": "*"}], "compose": [["e", "e", "e"], ["e", "l", "l"], ["l", "e", "l"]]}
    with pytest.raises((MissingComposite, NotAssociative)):
        check_category(raw)


def test_finset_one_two_four_by_tables():
    M = check_category(finset_raw((1, 2, 4)))
    # sum of b^a over a, b in {1, 2, 4}
    assert len(M.arrow_ends) == 301
    assert len(M.hom("2", "2")) == 4


def test_small_finset_fragments():
    assert len(finset_category((1, 2, 4), 4).hom(2, 2)) == 4
    T = finset_category((1,), 1)
    assert T.objects == (1,) and T.hom(1, 1) == (Fn(1, 1, (0,)),)
    with pytest.raises(NotClosed):
        finset_category((1, 2, 3), 9)


def test_capped_successor_has_recursion_on_these_data():
    F = finset_category(range(17), 16, scope=(1, 4))
    z = Fn(1, 4, (0,))
    s = Fn(4, 4, (1, 2, 3, 3))
    pairs = [(a, s) for a in F.hom(1, 4)]
    assert check_pnno(F, 4, z, s, pairs=pairs).holds
    ident = Fn(4, 4, (0, 1, 2, 3))
    v = check_pnno(F, 4, z, ident, pairs=pairs)
    assert v.status == "FailsExistence"
