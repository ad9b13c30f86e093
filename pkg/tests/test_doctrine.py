from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from eqcomp import corpus
from eqcomp.cli import load
from eqcomp.doctrine import (
    NotFunctorial,
    NotMeetPreserving,
    check_axiom,
    check_doctrine,
    check_quantifiers,
    check_rule,
    check_skolem,
    comprehension_adjunction,
    doctrine_verdict,
    double_negation_check,
    find_elementary,
    has_full_weak_comprehensions,
    subobject_doctrine,
    variation_doctrine,
)
from eqcomp.fincat import Fn
from conftest import FIXTURES

C = corpus.finset_fragment((0, 1, 2), 16)
SUB = subobject_doctrine(C)
arrows = st.sampled_from([f for a in (0, 1, 2, 4) for b in (1, 2, 4) if b**a <= 256 for f in C.hom(a, b)])


def preimage(f, x):
    return {i for i in range(f.src) if f(i) in x}


def mask(s):
    return sum(1 << i for i in s)


def subsets(n):
    return [set(c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]


@pytest.mark.parametrize("name", sorted(corpus.BUILTIN))
def test_builtin_doctrines_pass_every_check(name):
    P = corpus.builtin(name)
    assert doctrine_verdict(P)
    E = find_elementary(P)
    assert E.delta
    check_quantifiers(P)


def test_planted_failure_is_caught():
    P = load(FIXTURES / "planted-nonmonotone.doctrine.json", "doctrine").doctrine
    with pytest.raises((NotFunctorial, NotMeetPreserving)):
        check_doctrine(P)
    assert not doctrine_verdict(P)


@settings(max_examples=80)
@given(arrows)
def test_subset_quantifiers_match_brute_force(f):
    for x in subsets(f.src):
        image = {f(i) for i in x}
        assert SUB.exists_along(f, mask(x)) == mask(image)
        # forall: the largest y whose preimage sits inside x
        best = max((y for y in subsets(f.tgt) if preimage(f, y) <= x), key=len)
        assert SUB.forall_along(f, mask(x)) == mask(best)
        assert SUB.exists_along(f, mask(x)) == SUB.exists_generic(f, mask(x))
        assert SUB.forall_along(f, mask(x)) == SUB.forall_generic(f, mask(x))
    for y in subsets(f.tgt):
        assert SUB.reindex(f, mask(y)) == mask(preimage(f, y))


def test_equality_on_finite_sets_is_the_diagonal():
    # pairs (i, j) sit at index i * n + j
    assert SUB.delta(2) == 0b1001
    assert SUB.delta(1) == 1
    assert find_elementary(SUB).delta[2] == 0b1001


def test_variations_with_and_without_hooks_agree():
    small = corpus.finset_fragment((0, 1, 2), 4)
    fast = variation_doctrine(small)
    slow = variation_doctrine(small, use_hooks=False)
    for a in (0, 1, 2):
        assert fast.fiber_size(a) == slow.fiber_size(a)
    for a, b in itertools.product((0, 1, 2), repeat=2):
        for f in small.hom(a, b):
            for x in fast.fiber(b).elements:
                r1 = fast.reindex(f, x)
                r2 = slow.reindex(f, slow.classify(x))
                assert r1.image_mask() == r2.image_mask()
            for x in fast.fiber(a).elements:
                assert fast.exists_along(f, x).image_mask() == slow.exists_along(f, slow.classify(x)).image_mask()


def test_variation_implication_fast_path():
    W = variation_doctrine(corpus.finset_fragment((0, 1, 2), 16))
    for x, y in itertools.product(W.fiber(2).elements, repeat=2):
        fast = W.impl(2, x, y)
        F = W.fiber(2)
        cands = [c for c in F.elements if F.leq(F.meet(c, x), y)]
        slow = [c for c in cands if all(F.leq(d, c) for d in cands)]
        assert slow == [fast]


def test_choice_rules_on_finite_sets():
    assert check_rule(SUB, "RC")
    assert check_rule(SUB, "RUC")
    W = variation_doctrine(C)
    assert check_axiom(W, "AC", 2, codomains=(0, 1, 2))


def test_choice_rules_fail_without_global_elements():
    P = load(FIXTURES / "planted-ruc.doctrine.json", "doctrine").doctrine
    v = check_rule(P, "RC")
    assert not v
    b = v.witness[1]
    assert P.base.hom(P.base.terminal, b) == []


def test_skolem_arrow_for_a_graph():
    # alpha = graph of the swap on 2, over 2 x 2
    swap = Fn(2, 2, (1, 0))
    alpha = SUB.exists_along(C.pair(C.identity(2), swap), SUB.top(2))
    assert check_skolem(SUB, alpha, swap)
    assert not check_skolem(SUB, alpha, C.identity(2))


def test_comprehension_adjunction_on_subsets():
    adj = comprehension_adjunction(SUB, objects=(0, 1, 2))
    assert adj.retract and adj.unit
    assert has_full_weak_comprehensions(SUB)


def test_double_negation_on_powerset_of_points():
    P = corpus.builtin("pgamma")
    assert double_negation_check(P)


from eqcomp.doctrine import (  # noqa: E402
    BeckChevalleyFails,
    MissingExponential,
    TableDoctrine,
    check_comprehension,
    check_comprehensive_diagonals,
    check_equivalence_relation,
    constant_doctrine,
    lattice_from_order,
)
from eqcomp.pasm import WsbPAsm  # noqa: E402


def chain_lattice(n):
    return lattice_from_order(list(range(n)), [(i, j) for i in range(n) for j in range(n) if i <= j])


def pointless():
    return load(FIXTURES / "pointless.category.json", "category").category


def test_constant_one_point_doctrine():
    P = constant_doctrine(corpus.finset_fragment((0, 1, 2), 8))
    check_doctrine(P)
    E = find_elementary(P)
    assert all(d == "*" for d in E.delta.values())
    Q = check_quantifiers(P)
    for E_, A_ in zip(Q.exists_along.values(), Q.forall_along.values()):
        assert dict(E_.graph) == {"*": "*"} == dict(A_.graph)


def test_subobjects_of_small_finite_sets():
    F = corpus.finset_fragment((1, 2, 4), 16)
    P = subobject_doctrine(F)
    check_doctrine(P)
    assert [P.fiber_size(a) for a in (1, 2, 4)] == [2, 4, 16]


def test_variations_over_finite_sets_are_images():
    W = variation_doctrine(C)
    assert W.fiber_size(2) == SUB.fiber_size(2) == 4
    assert W.fiber_size(1) == 2
    for x in W.fiber(2).elements:
        for y in W.fiber(2).elements:
            assert W.leq(2, x, y) == (x.image_mask() & ~y.image_mask() == 0)


def test_variations_over_assemblies_are_finer_than_subsets():
    # tracked maps only factor along code maps, so Wsb separates more than subsets do
    frag = corpus.pasm_fragment(2)
    W, G = WsbPAsm(frag), corpus.builtin("pgamma")
    sizes = {repr(a): (W.fiber_size(a), G.fiber_size(a)) for a in frag.objects}
    assert sizes == {"P0": (1, 1), "P1": (2, 2), "P2": (5, 4), "P11": (4, 4)}


def test_comprehensions():
    # subsets: the inclusion is a strong full comprehension
    for alpha in SUB.fiber(2).elements:
        r = check_comprehension(SUB, 2, alpha)
        assert r.strong and r.full
    W = variation_doctrine(C)
    for f in W.fiber(2).elements:
        r = check_comprehension(W, 2, f)
        assert r.weak is not None and r.full
    K = constant_doctrine(C)
    assert check_comprehension(K, 2, "*").weak is not None


def test_comprehensive_diagonals():
    assert check_comprehensive_diagonals(SUB)
    # with equality always true, the two points of 2 are internally equal
    K = constant_doctrine(C)
    v = check_comprehensive_diagonals(K)
    assert not v and v.witness[0] != v.witness[1]
    one = corpus.finset_fragment((1,), 1)
    assert check_comprehensive_diagonals(constant_doctrine(one))


def test_beck_chevalley_failure_is_reported():
    # reindexing along ! : A -> 1 misses the middle of a 3-chain
    B = pointless()
    two, three = chain_lattice(2), chain_lattice(3)
    ident3 = {x: x for x in range(3)}
    P = TableDoctrine(B, {"1": two, "A": three}, {"!": {0: 0, 1: 2}, "idA": ident3, "id1": {0: 0, 1: 1}})
    check_doctrine(P)
    with pytest.raises(BeckChevalleyFails):
        check_quantifiers(P)


def test_equivalence_relations_on_two_points():
    top = SUB.top(4)
    assert check_equivalence_relation(SUB, 2, SUB.delta(2))
    assert check_equivalence_relation(SUB, 2, top)
    v = check_equivalence_relation(SUB, 2, 1 << 1)  # only the pair (0, 1)
    assert v.witness == ("reflexivity",)


def test_axiom_at_terminal_and_missing_exponentials():
    assert check_axiom(SUB, "AC", 1, codomains=(0, 1, 2))
    P = load(FIXTURES / "planted-ruc.doctrine.json", "doctrine").doctrine
    with pytest.raises(MissingExponential):
        check_axiom(P, "AC", "A")


def test_skolem_examples():
    # exists b. b = eps(y): eps witnesses its own graph
    for eps in C.hom(2, 2):
        alpha = SUB.reindex(C.cross(eps, C.identity(2)), SUB.delta(2))
        assert check_skolem(SUB, alpha, eps)
    # an entire relation and an eps that misses the only witness of row 1
    alpha = 0b0110  # pairs (0, 1) and (1, 0)
    assert not check_skolem(SUB, alpha, C.identity(2))


def test_comprehension_adjunction_cases():
    W = variation_doctrine(C)
    adj = comprehension_adjunction(W, W, (0, 1, 2))
    assert adj.retract and adj.equality
    assert comprehension_adjunction(SUB, objects=(0, 1, 2)).equality
    frag = corpus.pasm_fragment(2)
    G = corpus.builtin("pgamma")
    adj = comprehension_adjunction(G, WsbPAsm(frag), frag.objects)
    assert adj.retract and adj.unit and not adj.equality


def test_double_negation_cases():
    assert double_negation_check(SUB, objects=(0, 1, 2))
    # in a 3-chain the middle is not stable under double negation
    K = constant_doctrine(C, chain_lattice(3))
    v = double_negation_check(K, objects=(0, 1, 2))
    assert not v and v.detail.startswith("hypothesis")
