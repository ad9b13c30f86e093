from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from eqcomp import corpus
from eqcomp.cli import load
from eqcomp.completion import (
    QuotObject,
    base_embedding,
    check_ac_on_object_transfer,
    check_auc_transfer,
    check_effective_quotients,
    check_ruc_transfer,
    complete,
    equivalence_relations,
    equivalences_above,
    q_equivalence_relations,
)
from eqcomp.doctrine import DoctrineError, check_doctrine, check_quantifiers, elementary_law_holds, subobject_doctrine
from conftest import FIXTURES

SUB = corpus.builtin("sub-finset")
Q = complete(SUB)


def set_partitions(items):
    """Set partitions by placing each item into an existing block or a new one."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def partition_mask(n, part):
    # pairs (i, j) sit at bit i * n + j in the product order of the fragment
    return sum(1 << (i * n + j) for block in part for i in block for j in block)


@pytest.mark.parametrize("n, bell", [(1, 1), (2, 2), (3, 5)])
def test_equivalence_relations_are_set_partitions(n, bell):
    P = subobject_doctrine(corpus.bell_fragment())
    found = equivalence_relations(P, n)
    expected = {partition_mask(n, p) for p in set_partitions(list(range(n)))}
    assert len(expected) == bell
    assert set(found) == expected


def test_product_bit_order_matches_the_oracle():
    C = corpus.bell_fragment()
    pr = C.product(3, 3)
    assert [(pr.pr1(k), pr.pr2(k)) for k in range(9)] == list(itertools.product(range(3), repeat=2))


def test_completion_objects_and_delta():
    assert Q.objects == (QuotObject(0, 0), QuotObject(1, 1), QuotObject(2, 0b1001), QuotObject(2, 0b1111))
    for x in Q.objects:
        assert Q.delta(x) == x.rho
    assert [x.carrier for x in base_embedding(Q)] == [0, 1, 2]


def test_completion_is_an_elementary_doctrine_with_quantifiers():
    check_doctrine(Q)
    # the full search partitions large hom-sets of products, so test the law for rho directly
    for x in Q.objects:
        ok, witness, _ = elementary_law_holds(Q, x, x.rho, Q.objects[:2])
        assert ok, witness
    check_quantifiers(Q)


def test_descent_fibers():
    # over the full relation only the constant predicates descend
    assert Q.fiber(QuotObject(2, 0b1111)).elements == (0, 0b11)
    assert Q.fiber_size(QuotObject(2, 0b1001)) == 4


def test_hom_classes_over_the_full_relation():
    QC = Q.base
    full = QuotObject(2, 0b1111)
    # every map into a point is related, every map out of the quotient is constant
    assert QC.hom_size(QuotObject(2, 0b1001), full) == 1
    assert QC.hom_size(full, QuotObject(2, 0b1001)) == 2


def test_effective_quotients():
    v = check_effective_quotients(Q)
    assert v and v.truncated == 0


def test_equivalence_relations_inside_the_completion_match_those_above_rho():
    for x in Q.objects:
        assert len(q_equivalence_relations(Q, x)) == len(equivalences_above(Q, x))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(Q.objects), st.sampled_from(Q.objects), st.data())
def test_exists_matches_the_generic_adjoint(x, y, data):
    fs = Q.base.hom(x, y)
    if not fs:
        return
    f = data.draw(st.sampled_from(fs))
    alpha = data.draw(st.sampled_from(Q.fiber(x).elements))
    assert Q.exists_along(f, alpha) == Q.exists_generic(f, alpha)


def test_relations_argument_is_validated():
    with pytest.raises(DoctrineError):
        complete(SUB, (2,), relations={2: [0b0110]})
    Qd = complete(SUB, (2,), relations={2: [SUB.delta(2)]})
    assert Qd.objects == (QuotObject(2, 0b1001),)


def test_transfers_on_subsets():
    for r in (check_ruc_transfer(SUB, Q), check_auc_transfer(SUB, Q), check_ac_on_object_transfer(SUB, 2, Q)):
        assert r.agree, r
        assert r.left and r.right
        assert all(r.hypotheses.values())


def test_transfer_on_planted_relational_choice_failure():
    P = load(FIXTURES / "planted-ruc.doctrine.json", "doctrine").doctrine
    r = check_ruc_transfer(P)
    assert not r.left and not r.right
    assert r.agree
