from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from eqcomp.order import (
    NoAdjoint,
    NotAntisymmetric,
    NotHeyting,
    NotReflexive,
    NotTransitive,
    OrderError,
    PowersetAlgebra,
    chain,
    check_poset,
    heyting_complete,
    inf_semilattice,
    is_adjunction,
    left_adjoint,
    monotone,
    preserves_existing_meets,
    right_adjoint,
)


@st.composite
def posets(draw, max_size=4):
    """Random orders: the transitive closure of random pairs i < j."""
    n = draw(st.integers(1, max_size))
    rel = {(i, i) for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        if draw(st.booleans()):
            rel.add((i, j))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return check_poset(range(n), rel)


@st.composite
def monotone_maps(draw):
    P = draw(posets(3))
    Q = draw(posets(3))
    for _ in range(20):
        graph = {a: draw(st.sampled_from(Q.elements)) for a in P.elements}
        if all(Q.leq(graph[a], graph[b]) for a in P.elements for b in P.elements if P.leq(a, b)):
            return monotone(P, Q, graph.__getitem__)
    return monotone(P, Q, lambda a: Q.elements[0])


def brute_adjoints(f, side):
    """Every map g with the Galois condition, found by listing all maps."""
    X, Y = f.dom, f.cod
    found = []
    for values in itertools.product(X.elements, repeat=len(Y.elements)):
        g = dict(zip(Y.elements, values))
        if side == "right":
            ok = all(Y.leq(f(x), y) == X.leq(x, g[y]) for x in X.elements for y in Y.elements)
        else:
            ok = all(X.leq(g[y], x) == Y.leq(y, f(x)) for x in X.elements for y in Y.elements)
        if ok:
            found.append(g)
    return found


def test_check_poset_rejects_each_law():
    with pytest.raises(NotReflexive):
        check_poset([0, 1], [(0, 0)])
    with pytest.raises(NotAntisymmetric):
        check_poset([0, 1], [(0, 0), (1, 1), (0, 1), (1, 0)])
    with pytest.raises(NotTransitive):
        check_poset([0, 1, 2], [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)])
    with pytest.raises(OrderError):
        check_poset([0, 0], [(0, 0)])


def test_chain_meets_and_implication():
    H = heyting_complete(inf_semilattice(chain(3)))
    assert H.meet("0", "2") == "0"
    assert H.join("0", "2") == "2"
    assert H.impl("2", "1") == "1"
    assert H.impl("1", "2") == "2"
    assert H.neg("0") == "2"


def test_diamond_lattice_is_heyting_but_m3_is_not():
    # 0 < a, b < 1
    diamond = check_poset(["0", "a", "b", "1"], [(x, x) for x in "0ab1"] + [("0", "a"), ("0", "b"), ("0", "1"), ("a", "1"), ("b", "1")])
    H = heyting_complete(inf_semilattice(diamond))
    assert H.neg("a") == "b"
    m3 = ["0", "a", "b", "c", "1"]
    pairs = [(x, x) for x in m3] + [("0", x) for x in m3[1:]] + [(x, "1") for x in "abc"]
    with pytest.raises(OrderError):
        heyting_complete(inf_semilattice(check_poset(m3, pairs)))


@given(posets())
def test_order_is_recovered(P):
    Q = check_poset(P.elements, P.pairs())
    assert all(P.leq(a, b) == Q.leq(a, b) for a in P.elements for b in P.elements)


@settings(max_examples=60)
@given(monotone_maps())
def test_adjoints_agree_with_brute_force(f):
    for side, build in (("right", right_adjoint), ("left", left_adjoint)):
        brute = brute_adjoints(f, side)
        assert len(brute) <= 1
        try:
            g = build(f)
        except NoAdjoint:
            assert brute == []
        else:
            assert brute == [dict(g.graph)]


@settings(max_examples=60)
@given(monotone_maps())
def test_left_adjoint_needs_meets_preserved(f):
    try:
        left_adjoint(f)
        has_left = True
    except NoAdjoint:
        has_left = False
    if has_left:
        assert preserves_existing_meets(f)
    elif is_lattice(f.dom):
        assert not preserves_existing_meets(f)


def is_lattice(P):
    try:
        heyting_complete(inf_semilattice(P))
    except NotHeyting:
        return True
    except OrderError:
        return False
    return True


@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
def test_powerset_residuation(a, b, c):
    P = PowersetAlgebra(4)
    assert P.leq(P.meet(c, a), b) == P.leq(c, P.impl(a, b))
    assert P.join(a, P.neg(a)) == P.top


def test_adjunction_on_powerset_image():
    # image along x |-> x // 2 from 4 points to 2 points, against preimage
    P4, P2 = PowersetAlgebra(4), PowersetAlgebra(2)

    def pre(b):
        return sum(1 << x for x in range(4) if b >> (x // 2) & 1)

    def img(a):
        out = 0
        for x in range(4):
            if a >> x & 1:
                out |= 1 << (x // 2)
        return out

    f = monotone(P2, P4, pre)
    g = monotone(P4, P2, img)
    assert is_adjunction(g, f)
    assert dict(left_adjoint(f).graph) == dict(g.graph)


DIAMOND = check_poset(["0", "a", "b", "1"], [(x, x) for x in "0ab1"] + [("0", "a"), ("0", "b"), ("0", "1"), ("a", "1"), ("b", "1")])


def test_chain_and_powerset_orders():
    P = check_poset([0, 1, 2], [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)])
    assert P.leq(0, 2) and not P.leq(2, 0)
    sets = [frozenset(s) for s in ([], [0], [1], [0, 1])]
    B = check_poset(sets, [(x, y) for x in sets for y in sets if x <= y])
    lat = inf_semilattice(B)
    assert lat.size == 4
    assert lat.meet(sets[1], sets[2]) == sets[0]


def test_identity_is_its_own_adjoint():
    C3 = chain(3)
    ident = monotone(C3, C3, lambda a: a)
    assert dict(left_adjoint(ident).graph) == dict(ident.graph)
    assert dict(right_adjoint(ident).graph) == dict(ident.graph)


def test_adjoints_of_the_map_to_a_point():
    point = chain(1)
    bang = monotone(chain(2), point, lambda a: "0")
    assert left_adjoint(bang)("0") == "0"
    assert right_adjoint(bang)("0") == "1"


def test_inclusion_of_the_bounds_into_the_diamond():
    # the two-element sublattice {0, 1} sits in the diamond with both adjoints:
    # middle elements go up to 1 on the left and down to 0 on the right
    ends = check_poset(["0", "1"], [("0", "0"), ("1", "1"), ("0", "1")])
    inc = monotone(ends, DIAMOND, lambda a: a)
    assert left_adjoint(inc)("a") == "1"
    assert right_adjoint(inc)("a") == "0"


def test_no_left_adjoint_when_a_meet_is_lost():
    # 0 -> 0 and everything else -> 1 sends a /\ b = 0 to 0 but a, b to 1
    two = chain(2)
    f = monotone(DIAMOND, two, lambda a: "0" if a == "0" else "1")
    with pytest.raises(NoAdjoint) as err:
        left_adjoint(f)
    assert set(err.value.args[0].split("extremal candidates")[1]) >= set("ab")
    assert not preserves_existing_meets(f)


def test_boolean_and_powerset_implication():
    B = heyting_complete(inf_semilattice(chain(2)))
    table = {(x, y): B.impl(x, y) for x in "01" for y in "01"}
    assert table == {("0", "0"): "1", ("0", "1"): "1", ("1", "0"): "0", ("1", "1"): "1"}
    P = PowersetAlgebra(2)
    for a in range(4):
        for b in range(4):
            assert P.impl(a, b) == (~a & 3) | b


def test_m3_is_not_heyting():
    m3 = ["0", "a", "b", "c", "1"]
    pairs = [(x, x) for x in m3] + [("0", x) for x in m3[1:]] + [(x, "1") for x in "abc"]
    with pytest.raises(NotHeyting):
        heyting_complete(inf_semilattice(check_poset(m3, pairs)))


@given(posets())
def test_heyting_negation_laws(P):
    try:
        H = heyting_complete(inf_semilattice(P))
    except OrderError:
        return
    for a in H.elements:
        assert H.meet(a, H.neg(a)) == H.bottom
        assert H.leq(a, H.neg(H.neg(a)))
