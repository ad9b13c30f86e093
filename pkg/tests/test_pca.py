from __future__ import annotations

import random

from hypothesis import given, settings, strategies as st

from eqcomp import pca
from oracles import evaluate, unpair as oracle_unpair

naturals = st.integers(0, 10**6)


@given(naturals, naturals)
def test_pairing_round_trip(n, m):
    assert pca.unpair(pca.pair(n, m)) == (n, m)


@given(st.integers(0, 10**30))
def test_unpair_matches_oracle(k):
    assert pca.unpair(k) == oracle_unpair(k)
    assert pca.pair(*pca.unpair(k)) == k


def test_pairing_bijective_up_to_ten_thousand():
    assert pca.check_pairing(10_000) == 10_001
    seen = {pca.pair(n, m) for n in range(150) for m in range(150) if n + m < 150}
    assert seen == set(range(150 * 151 // 2))


def test_small_program_codes():
    # frozen from encode; these codes appear in reports and fixtures
    assert pca.ID_CODE == 1
    assert pca.SUCC_CODE == 49
    assert pca.FST_CODE == 97
    assert pca.SND_CODE == 109


@given(st.integers(0, 2**32), st.integers(0, 4))
def test_decode_encode_round_trip(seed, depth):
    t = pca.random_term(random.Random(seed), depth, 1)
    assert pca.decode(pca.encode(t)) == t


@given(st.integers(0, 10**9))
def test_decode_is_total(code):
    t = pca.decode(code)
    assert isinstance(t, tuple)


def test_run_outcomes():
    assert pca.run(pca.SUCC_CODE, 4) == pca.Halted(5, 6)
    assert isinstance(pca.run(pca.LOOP_CODE, 0, 500), pca.OutOfFuel)
    assert isinstance(pca.run(pca.encode(pca.lam(pca.var(3))), 0), pca.Stuck)
    assert isinstance(pca.apply(pca.encode(pca.lam(pca.var(3))), 0), pca.OutOfFuel)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_machine_agrees_with_substitution_oracle(seed):
    rng = random.Random(seed)
    e = pca.random_program(rng, 4)
    x = rng.randrange(8)
    r = pca.run(e, x, 10_000)
    o = evaluate(e, x, 50_000)
    if isinstance(r, pca.Halted):
        assert o == ("halted", r.value)
    elif isinstance(r, pca.Stuck):
        assert o[0] in ("stuck", "budget")
    if o[0] == "halted" and isinstance(r, pca.Stuck):
        raise AssertionError("oracle halts where the machine is stuck")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_normal_form(seed):
    rng = random.Random(seed)
    e = pca.random_program(rng, 4)
    x = rng.randrange(8)
    r = pca.apply(e, x, 10_000)
    if isinstance(r, pca.Halted):
        y = pca.trace(e, x)
        assert pca.kleene_T(e, x, y) == 1
        assert pca.kleene_U(y) == r.value
        # no other step count or value is a trace
        for k in range(max(0, r.steps - 3), r.steps + 4):
            for v in {r.value, r.value + 1, 0}:
                if (k, v) != (r.steps, r.value):
                    assert pca.kleene_T(e, x, pca.pair(k, v)) == 0
    else:
        for k in (0, 1, 5, 50, 500):
            assert pca.kleene_T(e, x, pca.pair(k, 0)) == 0


def test_combinators():
    f, g = pca.SUCC_CODE, pca.const_code(7)
    assert pca.run(pca.compose_codes(f, f), 3).value == 5
    assert pca.run(pca.pair_codes(f, g), pca.pair(1, 2)).value == pca.pair(2, 7)
    assert pca.run(pca.tuple_codes(f, pca.ID_CODE), 4).value == pca.pair(5, 4)
    add = pca.encode(pca.compile_named(pca._lams("p", pca.tpair(pca.tsnd("p"), pca.tfst("p")))))
    c = pca.run(pca.curry_code(add), 3).value
    assert pca.run(c, 9).value == pca.pair(9, 3)
    assert pca.run(pca.eval_code(), pca.pair(pca.SUCC_CODE, 10)).value == 11


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.integers(0, 40), st.integers(0, 40), min_size=1, max_size=6))
def test_lookup_code_tracks_its_table(table):
    code = pca.lookup_code(table)
    fuel = pca.lookup_steps_bound(table)
    for k, v in table.items():
        r = pca.run(code, k, fuel)
        assert isinstance(r, pca.Halted) and r.value == v


def test_min_search_finds_the_trace():
    e, t, x = pca.SUCC_CODE, pca.SUCC_CODE, 2
    r = pca.run(pca.min_search_code(), pca.pair(pca.pair(t, e), x), 100_000)
    assert isinstance(r, pca.Halted)
    assert r.value == pca.trace(e, x)
    # with a wrong target value the search runs away
    wrong = pca.const_code(0)
    assert isinstance(pca.run(pca.min_search_code(), pca.pair(pca.pair(wrong, e), x), 20_000), pca.OutOfFuel)


def test_kt_charges_fuel():
    prog = pca.encode(pca.lam(pca.kt(pca.num(pca.LOOP_CODE), pca.num(0), pca.num(pca.pair(5000, 0)))))
    assert isinstance(pca.run(prog, 0, 1000), pca.OutOfFuel)
    assert pca.run(prog, 0, 10_000).value == 0
