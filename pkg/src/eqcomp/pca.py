"""A small partial combinatory algebra: programs are naturals, run by a CEK machine.

A code ``c`` decodes to a term of an untyped call-by-value calculus with
de Bruijn variables.  The low ``NTAGS`` residue of ``c`` picks the term former
and the quotient is its payload, with several subterms packed by Cantor
pairing.  Every natural decodes; codes whose payload is malformed decode to a
term that gets stuck.

Application of a numeral ``e`` to ``x`` decodes ``e`` and applies it.  Results
are quoted back into naturals, so closures are numbers too.  One machine
transition is one step of fuel, and the halting test ``kleene_T`` replays the
machine for exactly the number of steps named by the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Mapping

DEFAULT_FUEL = 10_000


# ============================================================================
# Cantor pairing
# ============================================================================


def pair(n: int, m: int) -> int:
    """<n,m> = (n+m)(n+m+1)/2 + m"""
    s = n + m
    return s * (s + 1) // 2 + m


def unpair(k: int) -> tuple[int, int]:
    if k < 0:
        raise ValueError("pairing is defined on naturals")
    w = (math.isqrt(8 * k + 1) - 1) // 2
    m = k - w * (w + 1) // 2
    return w - m, m


def fst(k: int) -> int:
    return unpair(k)[0]


def snd(k: int) -> int:
    return unpair(k)[1]


# ============================================================================
# Terms and their codes
# ============================================================================


class Tag(IntEnum):
    VAR = 0
    LAM = 1
    APP = 2
    NUM = 3
    SUCC = 4
    CASE = 5
    FIX = 6
    PAIR = 7
    FST = 8
    SND = 9
    ZERO = 10
    KT = 11


NTAGS = len(Tag)
BAD = -1

# Terms are tuples headed by a tag: (VAR, i), (LAM, body), (APP, f, a), (NUM, k),
# (SUCC, t), (CASE, t, z, s) where s binds the predecessor, (FIX, t),
# (PAIR, a, b), (FST, t), (SND, t), (ZERO,), (KT, e, x, y), and (BAD, code).


def var(i: int) -> tuple:
    return (Tag.VAR, i)


def lam(body: tuple) -> tuple:
    return (Tag.LAM, body)


def app(f: tuple, *args: tuple) -> tuple:
    for a in args:
        f = (Tag.APP, f, a)
    return f


def num(k: int) -> tuple:
    return (Tag.NUM, k)


def succ(t: tuple) -> tuple:
    return (Tag.SUCC, t)


def case(t: tuple, z: tuple, s: tuple) -> tuple:
    return (Tag.CASE, t, z, s)


def fix(t: tuple) -> tuple:
    return (Tag.FIX, t)


def tpair(a: tuple, b: tuple) -> tuple:
    return (Tag.PAIR, a, b)


def tfst(t: tuple) -> tuple:
    return (Tag.FST, t)


def tsnd(t: tuple) -> tuple:
    return (Tag.SND, t)


ZERO_TERM = (Tag.ZERO,)


def kt(e: tuple, x: tuple, y: tuple) -> tuple:
    return (Tag.KT, e, x, y)


def encode(t: tuple) -> int:
    tag = t[0]
    if tag == Tag.VAR or tag == Tag.NUM:
        payload = t[1]
    elif tag in (Tag.LAM, Tag.SUCC, Tag.FIX, Tag.FST, Tag.SND):
        payload = encode(t[1])
    elif tag in (Tag.APP, Tag.PAIR):
        payload = pair(encode(t[1]), encode(t[2]))
    elif tag in (Tag.CASE, Tag.KT):
        payload = pair(encode(t[1]), pair(encode(t[2]), encode(t[3])))
    elif tag == Tag.ZERO:
        payload = 0
    elif tag == BAD:
        return t[1]
    else:
        raise ValueError(f"not a term: {t!r}")
    return NTAGS * payload + tag


@lru_cache(maxsize=1 << 16)
def decode(code: int) -> tuple:
    if code < 0:
        raise ValueError("codes are naturals")
    payload, tag = divmod(code, NTAGS)
    if tag == Tag.VAR or tag == Tag.NUM:
        return (Tag(tag), payload)
    if tag in (Tag.LAM, Tag.SUCC, Tag.FIX, Tag.FST, Tag.SND):
        return (Tag(tag), decode(payload))
    if tag in (Tag.APP, Tag.PAIR):
        a, b = unpair(payload)
        return (Tag(tag), decode(a), decode(b))
    if tag in (Tag.CASE, Tag.KT):
        a, bc = unpair(payload)
        b, c = unpair(bc)
        return (Tag(tag), decode(a), decode(b), decode(c))
    if payload == 0:
        return ZERO_TERM
    return (BAD, code)


def show(t: tuple) -> str:
    tag = t[0]
    if tag == Tag.VAR:
        return f"#{t[1]}"
    if tag == Tag.NUM:
        return str(t[1])
    if tag == Tag.ZERO:
        return "Z"
    if tag == BAD:
        return f"<bad {t[1]}>"
    name = Tag(tag).name.lower()
    return f"{name}(" + ", ".join(show(s) for s in t[1:]) + ")"


# ============================================================================
# A named front end, compiled to de Bruijn terms
# ============================================================================


def compile_named(t, scope: tuple = ()) -> tuple:
    """Compile a term whose binders carry names.

    Named forms: ("lam", name, body), ("case", t, z, name, s) and strings for
    variables; other tuples are as for de Bruijn terms with named subterms.
    """
    if isinstance(t, str):
        if t not in scope:
            raise ValueError(f"unbound name {t!r}")
        return var(scope.index(t))
    head = t[0]
    if head == "lam":
        return lam(compile_named(t[2], (t[1],) + scope))
    if head == "case":
        return case(compile_named(t[1], scope), compile_named(t[2], scope), compile_named(t[4], (t[3],) + scope))
    if head in (Tag.NUM, Tag.VAR):
        return t
    if head == Tag.ZERO:
        return ZERO_TERM
    return (head,) + tuple(compile_named(s, scope) for s in t[1:])


def _lams(names: str, body):
    for n in reversed(names.split()):
        body = ("lam", n, body)
    return body


# ============================================================================
# The machine
# ============================================================================

# values: ("N", k) numerals, ("C", body, env) closures, ("F", v) fixpoints of v
# env: linked list (value, env) or ()
# frames: see the transition function

_N, _C, _F = "N", "C", "F"


@dataclass(frozen=True)
class Halted:
    value: int
    steps: int


@dataclass(frozen=True)
class OutOfFuel:
    steps: int


@dataclass(frozen=True)
class Stuck:
    steps: int
    reason: str


def _lookup(env, i):
    while i:
        if not env:
            return None
        env = env[1]
        i -= 1
    return env[0] if env else None


def quote(v) -> int:
    """The natural number a value stands for."""
    kind = v[0]
    if kind == _N:
        return v[1]
    if kind == _C:
        return encode(lam(_close(v[1], v[2], 1)))
    return encode(lam(app(fix(num(quote(v[1]))), var(0))))


def _close(t: tuple, env, depth: int) -> tuple:
    """Substitute the environment into the free variables of t under ``depth`` binders."""
    tag = t[0]
    if tag == Tag.VAR:
        i = t[1]
        if i < depth:
            return t
        v = _lookup(env, i - depth)
        return t if v is None else num(quote(v))
    if tag == Tag.LAM:
        return lam(_close(t[1], env, depth + 1))
    if tag == Tag.CASE:
        return case(_close(t[1], env, depth), _close(t[2], env, depth), _close(t[3], env, depth + 1))
    if tag in (Tag.NUM, Tag.ZERO, BAD):
        return t
    return (tag,) + tuple(_close(s, env, depth) for s in t[1:])


class _Exhausted(Exception):
    pass


class Machine:
    """A CEK machine run; ``state`` is ("E", term, env, kont) or ("R", value, kont)."""

    __slots__ = ("state", "steps", "stuck", "limit", "exhausted")

    def __init__(self, e: int, x: int):
        self.state = ("R", (_N, x), (("call", (_N, e)), ()))
        self.steps = 0
        self.stuck: str | None = None
        self.limit: float = math.inf
        self.exhausted = False

    @property
    def halted(self) -> bool:
        s = self.state
        return s[0] == "R" and s[2] == ()

    def result(self) -> int:
        return quote(self.state[1])

    def run(self, fuel: int):
        """Advance until halting, getting stuck, or spending ``fuel`` more steps."""
        self.limit = self.steps + fuel
        while not self.halted:
            if self.stuck is not None:
                return Stuck(self.steps, self.stuck)
            if self.steps >= self.limit or self.exhausted:
                return OutOfFuel(self.steps)
            self.step()
        return Halted(self.result(), self.steps)

    def step(self) -> None:
        s = self.state
        self.steps += 1
        try:
            if s[0] == "E":
                new = self._eval(s[1], s[2], s[3])
            else:
                new = self._ret(s[1], s[2])
        except _Exhausted:
            self.steps -= 1
            self.exhausted = True
            return
        if new is None:
            self.stuck = self.stuck or "stuck"
        else:
            self.state = new

    def _fail(self, why: str):
        self.stuck = why
        return None

    def _eval(self, t, env, k):
        tag = t[0]
        if tag == Tag.VAR:
            v = _lookup(env, t[1])
            if v is None:
                return self._fail(f"free variable #{t[1]}")
            return ("R", v, k)
        if tag == Tag.LAM:
            return ("R", (_C, t[1], env), k)
        if tag == Tag.NUM:
            return ("R", (_N, t[1]), k)
        if tag == Tag.ZERO:
            return ("R", (_N, 0), k)
        if tag == Tag.APP:
            return ("E", t[1], env, (("arg", t[2], env), k))
        if tag == Tag.CASE:
            return ("E", t[1], env, (("case", t[2], t[3], env), k))
        if tag == Tag.PAIR:
            return ("E", t[1], env, (("pair1", t[2], env), k))
        if tag == Tag.KT:
            return ("E", t[1], env, (("kt1", t[2], t[3], env), k))
        if tag in (Tag.SUCC, Tag.FIX, Tag.FST, Tag.SND):
            return ("E", t[1], env, ((tag,), k))
        return self._fail(f"undecodable code {t[1]}")

    def _apply(self, f, a, k):
        kind = f[0]
        if kind == _C:
            return ("E", f[1], (a, f[2]), k)
        if kind == _N:
            return ("E", decode(f[1]), (), (("argv", a), k))
        return ("E", (Tag.VAR, 0), (f, ()), (("call", f[1]), (("argv", a), k)))

    def _ret(self, v, k):
        frame, rest = k
        head = frame[0]
        if head == "arg":
            return ("E", frame[1], frame[2], (("call", v), rest))
        if head == "call":
            return self._apply(frame[1], v, rest)
        if head == "argv":
            return self._apply(v, frame[1], rest)
        if head == "case":
            n = quote(v)
            if n == 0:
                return ("E", frame[1], frame[3], rest)
            return ("E", frame[2], ((_N, n - 1), frame[3]), rest)
        if head == "pair1":
            return ("E", frame[1], frame[2], (("pair2", v), rest))
        if head == "pair2":
            return ("R", (_N, pair(quote(frame[1]), quote(v))), rest)
        if head == "kt1":
            return ("E", frame[1], frame[3], (("kt2", v, frame[2], frame[3]), rest))
        if head == "kt2":
            return ("E", frame[2], frame[3], (("kt3", frame[1], v), rest))
        if head == "kt3":
            # the replay is charged to this run: one step per replayed step
            y = quote(v)
            cost = fst(y)
            if self.steps + cost > self.limit:
                raise _Exhausted
            self.steps += cost
            return ("R", (_N, kleene_T(quote(frame[1]), quote(frame[2]), y)), rest)
        if head == Tag.SUCC:
            return ("R", (_N, quote(v) + 1), rest)
        if head == Tag.FIX:
            return ("R", (_F, v), rest)
        if head == Tag.FST:
            return ("R", (_N, fst(quote(v))), rest)
        if head == Tag.SND:
            return ("R", (_N, snd(quote(v))), rest)
        raise AssertionError(f"unknown frame {frame!r}")


# The fixpoint rule deserves a word: applying ("F", v) to a pushes "apply the
# result to a", then applies v to ("F", v) itself; evaluating #0 in the
# environment holding ("F", v) returns it to the "call v" frame.


def run(e: int, x: int, fuel: int = DEFAULT_FUEL):
    """Halted, OutOfFuel or Stuck for program e on input x."""
    return Machine(e, x).run(fuel)


def apply(e: int, x: int, fuel: int = DEFAULT_FUEL):
    """Halted(v, steps) or OutOfFuel; stuck runs never halt, so they are OutOfFuel."""
    r = run(e, x, fuel)
    if isinstance(r, Stuck):
        return OutOfFuel(fuel)
    return r


def kleene_T(e: int, x: int, y: int) -> int:
    """1 iff y = <k, r> and e on x halts at exactly step k with value r."""
    k, r = unpair(y)
    m = Machine(e, x)
    m.limit = k
    while m.steps < k:
        if m.halted or m.stuck is not None or m.exhausted:
            return 0
        m.step()
    if not m.halted or m.stuck is not None or m.steps != k:
        return 0
    return int(m.result() == r)


def kleene_U(y: int) -> int:
    return snd(y)


def trace(e: int, x: int, fuel: int = DEFAULT_FUEL) -> int | None:
    """The code of the halting trace, or None within fuel."""
    r = apply(e, x, fuel)
    if isinstance(r, Halted):
        return pair(r.steps, r.value)
    return None


def trace_bound(fuel: int, value: int) -> int:
    """Largest trace code for a run of at most ``fuel`` steps ending in ``value``."""
    return pair(fuel, value)


# ============================================================================
# Programs
# ============================================================================

ID_CODE = encode(lam(var(0)))
SUCC_CODE = encode(lam(succ(var(0))))
PRED_CODE = encode(lam(case(var(0), var(0), var(0))))
FST_CODE = encode(lam(tfst(var(0))))
SND_CODE = encode(lam(tsnd(var(0))))
SELF_APP_CODE = encode(lam(app(var(0), var(0))))
LOOP_CODE = encode(lam(app(fix(lam(var(0))), var(0))))


def const_code(k: int) -> int:
    return encode(lam(num(k)))


def compose_codes(e1: int, e2: int) -> int:
    """x |-> phi_e1(phi_e2(x))"""
    return encode(lam(app(num(e1), app(num(e2), var(0)))))


def pair_codes(e1: int, e2: int) -> int:
    """k |-> <phi_e1(fst k), phi_e2(snd k)>"""
    return encode(lam(tpair(app(num(e1), tfst(var(0))), app(num(e2), tsnd(var(0))))))


def tuple_codes(e1: int, e2: int) -> int:
    """x |-> <phi_e1(x), phi_e2(x)>"""
    return encode(lam(tpair(app(num(e1), var(0)), app(num(e2), var(0)))))


def curry_code(e: int) -> int:
    """a |-> code of (b |-> phi_e(<a, b>))"""
    return encode(lam(lam(app(num(e), tpair(var(1), var(0))))))


def eval_code() -> int:
    """k |-> phi_{fst k}(snd k)"""
    return encode(lam(app(tfst(var(0)), tsnd(var(0)))))


# three-way comparison: 0 if a = b, 1 if a < b, 2 if a > b
_CMP = fix(
    _lams(
        "c a b",
        ("case", "a", ("case", "b", num(0), "_", num(1)), "a1", ("case", "b", num(2), "b1", app("c", "a1", "b1"))),
    )
)
CMP_TERM = compile_named(_CMP)

# binary search tree lookup; a node is <<key, value>, <left, right>> + 1
_LOOKUP = fix(
    _lams(
        "go n t",
        (
            "case",
            "t",
            num(0),
            "c",
            app(
                ("lam", "r", ("case", "r", tsnd(tfst("c")), "r1", ("case", "r1", app("go", "n", tfst(tsnd("c"))), "_", app("go", "n", tsnd(tsnd("c")))))),
                app(_CMP, "n", tfst(tfst("c"))),
            ),
        ),
    )
)
LOOKUP_TERM = compile_named(_LOOKUP)


def table_tree(table: Mapping[int, int]) -> int:
    """Encode a finite map as a balanced search tree."""
    items = sorted(table.items())

    def build(lo: int, hi: int) -> int:
        if lo >= hi:
            return 0
        mid = (lo + hi) // 2
        k, v = items[mid]
        return pair(pair(k, v), pair(build(lo, mid), build(mid + 1, hi))) + 1

    return build(0, len(items))


def lookup_code(table: Mapping[int, int]) -> int:
    """A program sending each key of ``table`` to its value (and other inputs anywhere)."""
    return encode(lam(app(LOOKUP_TERM, var(0), num(table_tree(table)))))


def lookup_steps_bound(table: Mapping[int, int]) -> int:
    """Generous fuel for ``lookup_code(table)``: comparisons cost about 12 steps per unit."""
    if not table:
        return 64
    depth = max(1, len(table)).bit_length() + 1
    return 64 + depth * (16 * max(table) + 64)


# Codes grow about twice as long per level of nesting, so large subprograms
# are handed over at run time inside a pair rather than inlined deep down.

# s c e x g y: search y, y+1, ... for a halting trace of e on x with output g,
# c being the comparison program
_SEARCH = fix(
    _lams(
        "s c e x g y",
        (
            "case",
            kt("e", "x", "y"),
            app("s", "c", "e", "x", "g", succ("y")),
            "_",
            ("case", app("c", tsnd("y"), "g"), "y", "_", app("s", "c", "e", "x", "g", succ("y"))),
        ),
    )
)
SEARCH_TERM = compile_named(_SEARCH)

# p = <<search, cmp>, <<t, e>, x>>
_SEARCH_DRIVER = _lams(
    "p",
    app(
        _lams("s c t e x", app("s", "c", "e", "x", app("t", "x"), num(0))),
        tfst(tfst("p")),
        tsnd(tfst("p")),
        tfst(tfst(tsnd("p"))),
        tsnd(tfst(tsnd("p"))),
        tsnd(tsnd("p")),
    ),
)


def min_search_code() -> int:
    """<<t, e>, x> |-> least y with T(e, x, y) = 1 and U(y) = phi_t(x)."""
    helpers = tpair(num(encode(SEARCH_TERM)), num(encode(CMP_TERM)))
    return encode(lam(app(num(encode(compile_named(_SEARCH_DRIVER))), tpair(helpers, var(0)))))


def check_pairing(limit: int) -> int:
    """Exhaustive bijectivity of pairing on 0..limit; returns the count checked."""
    for k in range(limit + 1):
        n, m = unpair(k)
        if pair(n, m) != k:
            raise AssertionError(f"<fst {k}, snd {k}> != {k}")
    s = 0
    # diagonal s starts at s(s+1)/2, so later diagonals lie past the limit
    while s * (s + 1) // 2 <= limit:
        for n in range(s + 1):
            m = s - n
            k = pair(n, m)
            if k > limit:
                continue
            if unpair(k) != (n, m):
                raise AssertionError(f"unpair <{n},{m}> failed")
        s += 1
    return limit + 1


def codes_within(bound: int) -> Iterable[int]:
    return range(bound + 1)


# ============================================================================
# Random programs
# ============================================================================


def random_term(rng, depth: int, scope: int = 0) -> tuple:
    """A random term whose variables are bound in ``scope`` (recursion comes from fix)."""
    leaves = ["num", "zero"] + (["var"] * 3 if scope else [])
    if depth <= 0:
        kind = rng.choice(leaves)
    else:
        kind = rng.choice(leaves + ["lam", "app", "app", "succ", "case", "fix", "pair", "fst", "snd"])
    d = depth - 1
    if kind == "var":
        return var(rng.randrange(scope))
    if kind == "num":
        return num(rng.randrange(6))
    if kind == "zero":
        return ZERO_TERM
    if kind == "lam":
        return lam(random_term(rng, d, scope + 1))
    if kind == "app":
        return app(random_term(rng, d, scope), random_term(rng, d, scope))
    if kind == "succ":
        return succ(random_term(rng, d, scope))
    if kind == "case":
        return case(random_term(rng, d, scope), random_term(rng, d, scope), random_term(rng, d, scope + 1))
    if kind == "fix":
        return fix(lam(random_term(rng, d, scope + 1)))
    if kind == "pair":
        return tpair(random_term(rng, d, scope), random_term(rng, d, scope))
    if kind == "fst":
        return tfst(random_term(rng, d, scope))
    return tsnd(random_term(rng, d, scope))


def random_program(rng, depth: int = 4) -> int:
    """The code of a random one-argument program."""
    return encode(lam(random_term(rng, depth, 1)))
