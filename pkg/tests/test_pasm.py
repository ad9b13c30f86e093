from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from eqcomp import corpus, pca
from eqcomp.doctrine import check_doctrine, check_quantifiers, variation_doctrine
from eqcomp.order import right_adjoint
from eqcomp.pasm import (
    RELATIONS,
    FragmentTooSmall,
    PAsmCategory,
    PMap,
    WsbPAsm,
    all_partitioned,
    asm_code_map,
    check_carfur_fragment,
    check_ct_instance,
    check_ev_tracked,
    check_exponential_universal,
    check_product_universal,
    check_tct_pgamma,
    check_tracked,
    count_respecting,
    find_tracker,
    forall_assembly,
    mediating_arrow,
    naturals,
    nn_exponential,
    partitioned,
    quotient_assembly,
    skolem_min_search,
    skolem_projection,
    table_relation,
    track,
    weak_exponential,
)

C = corpus.pasm_fragment(2, code_bound=64)
P1, P2, P11 = (next(a for a in C.objects if a.name == n) for n in ("P1", "P2", "P11"))
W = WsbPAsm(C)
pairs = st.tuples(st.sampled_from(C.objects), st.sampled_from(C.objects))


def test_fragment_shapes():
    assert [a.name for a in all_partitioned(3)] == ["P0", "P1", "P2", "P11", "P3", "P21", "P111"]
    assert P11.codes == (0, 1) and P2.codes == (0, 0)


@settings(max_examples=30, deadline=None)
@given(pairs)
def test_hom_counts_match_enumeration(ab):
    a, b = ab
    brute = sum(1 for t in itertools.product(range(b.size), repeat=a.size) if PMap(a, b, t).code_map() is not None)
    assert count_respecting(a, b) == brute == len(C.hom(a, b))


def test_tracking():
    swap = PMap(P11, P11, (1, 0))
    t = find_tracker(swap, 64)
    assert t is None  # no program below 64 swaps 0 and 1
    tm = track(swap)
    assert check_tracked(swap, tm.tracker, tm.fuel)
    ident = PMap(P11, P11, (0, 1))
    assert find_tracker(ident) == pca.ID_CODE
    # identity on codes does not realize the constant-1 map
    assert not check_tracked(PMap(P11, P11, (1, 1)), pca.ID_CODE)
    assert PMap(P2, P11, (0, 1)).code_map() is None


@pytest.mark.parametrize("a, b", [(x, y) for x in C.objects for y in C.objects])
def test_products_are_universal(a, b):
    assert check_product_universal(C, a, b)


@pytest.mark.parametrize("a, b", [(x, y) for x in C.objects for y in C.objects])
def test_weak_exponentials(a, b):
    E = weak_exponential(C, a, b, synthesize=True)
    assert check_ev_tracked(E)
    r = check_exponential_universal(C, E)
    assert r and not r.too_small


def test_small_code_bound_misses_the_swap():
    E = weak_exponential(C, P11, P11)
    pr = C.product(P1, P11)
    swap = PMap(pr.obj, P11, (1, 0))
    with pytest.raises(FragmentTooSmall):
        mediating_arrow(C, E, P1, swap)
    E2 = weak_exponential(C, P11, P11, synthesize=True)
    g = mediating_arrow(C, E2, P1, swap)
    assert C.compose(E2.ev, C.cross(g, C.identity(P11))) == swap


def test_wsb_over_assemblies_is_a_doctrine():
    check_doctrine(W)
    check_quantifiers(W)


def test_downset_fibers_match_factorization_classes():
    V = variation_doctrine(C, use_hooks=False)
    for a in C.objects:
        assert W.fiber_size(a) == V.fiber_size(a)
        for x in V.fiber(a).elements:
            for y in V.fiber(a).elements:
                wx, wy = W.classify(x), W.classify(y)
                assert V.leq(a, x, y) == W.leq(a, wx, wy)
                assert W.classify(V.meet(a, x, y)) == W.meet(a, wx, wy)
                assert W.classify(V.impl(a, x, y)) == W.impl(a, wx, wy)
        for b in C.objects:
            for f in C.hom(b, a):
                for x in V.fiber(a).elements:
                    assert W.classify(V.reindex(f, x)) == W.reindex(f, W.classify(x))


@pytest.mark.parametrize("p, m", [(x, y) for x in C.objects for y in C.objects])
def test_forall_assembly_is_the_right_adjoint(p, m):
    pr = C.product(p, m)
    r = right_adjoint(W.reindex_map(pr.pr1))
    for x in W.fiber(pr.obj).elements:
        q = forall_assembly(C, p, m, x)
        assert W.classify(q) == r(x) == W.forall_along(pr.pr1, x)


def test_quotient_assembly_and_code_maps():
    a = partitioned("xyz", (0, 1, 1))
    asm, cls = quotient_assembly(a, 0b110_110_001)
    assert cls == (0, 1, 1) and asm.realizes == (frozenset({0}), frozenset({1}))
    asm2, cls2 = quotient_assembly(a, (1 << 9) - 1)
    assert asm2.realizes == (frozenset({0, 1}),)
    assert asm_code_map(asm2, asm, (0,)) == {0: 0, 1: 0}
    # two points sharing a code cannot be separated
    asm3, _ = quotient_assembly(partitioned("uv", (0, 0)), 0b1001)
    assert asm_code_map(asm3, asm, (0, 1)) is None


@pytest.mark.parametrize("max_points, codes", [(2, (0, 1)), (3, (0, 1))])
def test_comparison_with_assemblies(max_points, codes):
    r = check_carfur_fragment(all_partitioned(max_points), max_points, codes)
    assert r.faithful and r.full and r.essentially_surjective
    assert not r.mismatches


@pytest.mark.parametrize("bound", [4, 8])
def test_tct(bound):
    r = check_tct_pgamma(bound, code_bound=64)
    assert r and r.members > 0


def test_skolem_functions():
    N = PAsmCategory([naturals(3)], cap=4 * 65 * 4, code_bound=64)
    E = nn_exponential(N, 3)
    progs = [pca.ID_CODE, pca.SUCC_CODE, pca.const_code(0), pca.const_code(2)]
    gamma, r = skolem_min_search(E, progs, 3)
    assert r and r.checked == len(E.members) * len(progs) * 4
    for (k, e, x), y in gamma.items():
        if y is not None:
            assert pca.kleene_T(e, x, y) == 1 and pca.kleene_U(y) == E.members[k][0][x]
    assert skolem_projection(E, progs, 3)


@pytest.mark.parametrize("name", sorted(RELATIONS))
def test_ct_on_sample_relations(name):
    v = check_ct_instance(RELATIONS[name](), 4)
    assert v, v.witness
    assert v.route.startswith("choice")


def test_ct_on_a_table_relation():
    v = check_ct_instance(table_relation({0: 3, 1: 0, 2: 2}), 2)
    assert v and v.choice == (3, 0, 2)


def test_ct_fails_without_witnesses():
    never = pca.const_code(0)
    v = check_ct_instance(never, 2)
    assert not v and v.witness[1] == "no witness within bound"
