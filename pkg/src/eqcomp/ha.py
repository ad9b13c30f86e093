"""Heyting arithmetic: syntax, Kleene realizability under explicit bounds, and a truth oracle.

Realizers are checked against the machine in ``pca``.  Implications and
universal statements quantify over every natural number; the checker tries
k = 0..qbound and marks the verdict as bounded when it had to stop there.
Running out of fuel gives Unknown.  A program that gets stuck (is undefined)
refutes the clause, as does a false equation.

Concrete syntax:

    formula := ("all" | "ex") ident ["<" term] "." formula | disj ["->" formula]
    disj    := conj ("\\/" conj)*
    conj    := unit ("/\\" unit)*
    unit    := "_|_" | term "=" term | "(" formula ")" | quantified formula
    term    := prod ("+" prod)*
    prod    := atom ("*" atom)*
    atom    := "0" | digits | "S" atom | ident | "(" term ")"

``all x<n. A`` stands for ``all x. (ex z. S(x + z) = n) -> A`` and
``ex x<n. A`` for ``ex x. (ex z. S(x + z) = n) /\\ A``, with z fresh.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import pca

DEFAULT_QBOUND = 16
DEFAULT_CODE_BOUND = 1 << 10


# ============================================================================
# Syntax
# ============================================================================


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Plus:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Times:
    left: "Term"
    right: "Term"


Term = Var | Zero | Succ | Plus | Times


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Eq | And | Or | Implies | Falsum | Exists | Forall

ZERO = Zero()
FALSUM = Falsum()


def numeral(n: int) -> Term:
    t: Term = ZERO
    for _ in range(n):
        t = Succ(t)
    return t


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Zero):
        return set()
    if isinstance(t, Succ):
        return term_vars(t.arg)
    return term_vars(t.left) | term_vars(t.right)


def free_vars(phi: Formula) -> set[str]:
    if isinstance(phi, Eq):
        return term_vars(phi.left) | term_vars(phi.right)
    if isinstance(phi, Falsum):
        return set()
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    return free_vars(phi.left) | free_vars(phi.right)


def all_names(phi) -> set[str]:
    """Every variable name occurring anywhere, bound or free."""
    if isinstance(phi, (Var, Zero, Succ, Plus, Times)):
        return term_vars(phi)
    if isinstance(phi, Eq):
        return term_vars(phi.left) | term_vars(phi.right)
    if isinstance(phi, Falsum):
        return set()
    if isinstance(phi, (Exists, Forall)):
        return all_names(phi.body) | {phi.var}
    return all_names(phi.left) | all_names(phi.right)


def fresh_name(avoid: set[str]) -> str:
    if "z" not in avoid:
        return "z"
    k = 0
    while f"z{k}" in avoid:
        k += 1
    return f"z{k}"


def _guard(x: str, n: Term, z: str) -> Formula:
    return Exists(z, Eq(Succ(Plus(Var(x), Var(z))), n))


def _bound_var(x: str, n: Term, body: Formula) -> str:
    return fresh_name(all_names(body) | term_vars(n) | {x})


def bounded_forall(x: str, n: Term, body: Formula) -> Formula:
    return Forall(x, Implies(_guard(x, n, _bound_var(x, n, body)), body))


def bounded_exists(x: str, n: Term, body: Formula) -> Formula:
    return Exists(x, And(_guard(x, n, _bound_var(x, n, body)), body))


def match_guard(phi: Formula) -> tuple[str, Term] | None:
    """ex z. S(x + z) = n  ->  (x, n), for a variable x and z not free in n."""
    if not isinstance(phi, Exists) or not isinstance(phi.body, Eq):
        return None
    lhs, n = phi.body.left, phi.body.right
    if not (isinstance(lhs, Succ) and isinstance(lhs.arg, Plus)):
        return None
    x, z = lhs.arg.left, lhs.arg.right
    if not (isinstance(x, Var) and isinstance(z, Var) and z.name == phi.var and x.name != phi.var):
        return None
    if phi.var in term_vars(n):
        return None
    return x.name, n


def match_bounded(phi: Formula) -> tuple[str, str, Term, Formula] | None:
    """Recognize the expansion of bounded quantifier sugar: (kind, x, n, body)."""
    if isinstance(phi, Forall) and isinstance(phi.body, Implies):
        kind, inner = "all", phi.body
    elif isinstance(phi, Exists) and isinstance(phi.body, And):
        kind, inner = "ex", phi.body
    else:
        return None
    g = match_guard(inner.left)
    if g is None or g[0] != phi.var or phi.var in term_vars(g[1]):
        return None
    return kind, phi.var, g[1], inner.right


# ---------------------------------------------------------------------------
# printing


def show_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Succ):
        return f"S({show_term(t.arg)})"
    if isinstance(t, Plus):
        return f"{show_term(t.left)} + {_operand(t.right, Plus)}"
    return f"{_operand(t.left, Plus)} * {_operand(t.right, (Plus, Times))}"


def _operand(t: Term, paren) -> str:
    s = show_term(t)
    return f"({s})" if isinstance(t, paren) else s


def show(phi: Formula) -> str:
    """Print so that ``parse(show(phi)) == phi``."""
    return _show(phi, 0)


def _show_bound(n: Term) -> str:
    k = 0
    t = n
    while isinstance(t, Succ):
        k, t = k + 1, t.arg
    return str(k) if isinstance(t, Zero) else show_term(n)


# precedence levels: 0 quantifier/implication position, 1 disjunct, 2 conjunct, 3 unit
def _show(phi: Formula, ctx: int) -> str:
    b = match_bounded(phi)
    if b is not None:
        kind, x, n, body = b
        rebuilt = bounded_forall(x, n, body) if kind == "all" else bounded_exists(x, n, body)
        if rebuilt == phi:
            s = f"{kind} {x}<{_show_bound(n)}. {_show(body, 0)}"
            return s if ctx == 0 else f"({s})"
    if isinstance(phi, Eq):
        return f"{show_term(phi.left)} = {show_term(phi.right)}"
    if isinstance(phi, Falsum):
        return "_|_"
    if isinstance(phi, (Forall, Exists)):
        q = "all" if isinstance(phi, Forall) else "ex"
        s = f"{q} {phi.var}. {_show(phi.body, 0)}"
        return s if ctx == 0 else f"({s})"
    if isinstance(phi, Implies):
        s = f"{_show(phi.left, 1)} -> {_show(phi.right, 0)}"
        return s if ctx == 0 else f"({s})"
    if isinstance(phi, Or):
        s = f"{_show(phi.left, 1)} \\/ {_show(phi.right, 2)}"
        return s if ctx <= 1 else f"({s})"
    s = f"{_show(phi.left, 2)} /\\ {_show(phi.right, 3)}"
    return s if ctx <= 2 else f"({s})"


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.message = message
        self.pos = pos
        self.text = text


_TOKEN = re.compile(r"\s*(?:(?P<op>/\\|\\/|->|_\|_|[=+*().<])|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*))")
KEYWORDS = {"all", "ex", "S"}


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """(kind, value, position) triples ending with an "end" token."""
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "id" and value in KEYWORDS:
            kind = "kw"
        out.append((kind, value, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def error(self, message: str):
        raise ParseError(message, self.peek()[2], self.text)

    def expect(self, value: str):
        t = self.peek()
        if t[1] != value or t[0] == "id":
            self.error(f"expected {value!r}, found {t[1] or 'end of input'!r}")
        return self.next()

    def at(self, value: str) -> bool:
        t = self.peek()
        return t[0] in ("op", "kw") and t[1] == value

    # formulas

    def formula(self) -> Formula:
        if self.at("all") or self.at("ex"):
            return self.quantified()
        left = self.disj()
        if self.at("->"):
            self.next()
            return Implies(left, self.formula())
        return left

    def quantified(self) -> Formula:
        q = self.next()[1]
        t = self.peek()
        if t[0] != "id":
            self.error("expected a variable name")
        x = self.next()[1]
        bound = None
        if self.at("<"):
            self.next()
            bound = self.term()
        self.expect(".")
        body = self.formula()
        if bound is None:
            return Forall(x, body) if q == "all" else Exists(x, body)
        if x in term_vars(bound):
            self.error(f"bound of {x} mentions {x}")
        return bounded_forall(x, bound, body) if q == "all" else bounded_exists(x, bound, body)

    def disj(self) -> Formula:
        left = self.conj()
        while self.at("\\/"):
            self.next()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unit()
        while self.at("/\\"):
            self.next()
            left = And(left, self.unit())
        return left

    def unit(self) -> Formula:
        if self.at("_|_"):
            self.next()
            return FALSUM
        if self.at("all") or self.at("ex"):
            return self.quantified()
        if self.at("("):
            # either a parenthesized formula or a term starting with "("
            save = self.i
            try:
                return self.equation()
            except ParseError:
                self.i = save
            self.next()
            phi = self.formula()
            self.expect(")")
            return phi
        return self.equation()

    def equation(self) -> Formula:
        left = self.term()
        self.expect("=")
        return Eq(left, self.term())

    # terms

    def term(self) -> Term:
        left = self.prod()
        while self.at("+"):
            self.next()
            left = Plus(left, self.prod())
        return left

    def prod(self) -> Term:
        left = self.atom()
        while self.at("*"):
            self.next()
            left = Times(left, self.atom())
        return left

    def atom(self) -> Term:
        kind, value, _ = self.peek()
        if kind == "num":
            self.next()
            return numeral(int(value))
        if kind == "id":
            self.next()
            return Var(value)
        if kind == "kw" and value == "S":
            self.next()
            return Succ(self.atom())
        if self.at("("):
            self.next()
            t = self.term()
            self.expect(")")
            return t
        self.error(f"expected a term, found {value or 'end of input'!r}")


def parse(text: str) -> Formula:
    p = _Parser(text)
    phi = p.formula()
    if p.peek()[0] != "end":
        p.error(f"unexpected {p.peek()[1]!r}")
    return phi


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.peek()[0] != "end":
        p.error(f"unexpected {p.peek()[1]!r}")
    return t


# ============================================================================
# Evaluation and the truth oracle
# ============================================================================


class FreeVariable(ValueError):
    pass


def value(t: Term, env: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise FreeVariable(t.name) from None
    if isinstance(t, Zero):
        return 0
    if isinstance(t, Succ):
        return value(t.arg, env) + 1
    if isinstance(t, Plus):
        return value(t.left, env) + value(t.right, env)
    return value(t.left, env) * value(t.right, env)


def _bind(env: Mapping[str, int], x: str, k: int) -> dict:
    e = dict(env)
    e[x] = k
    return e


def is_delta0(phi: Formula) -> bool:
    """Only bounded quantifiers (in their expanded form)."""
    b = match_bounded(phi)
    if b is not None:
        return is_delta0(b[3])
    if isinstance(phi, (Eq, Falsum)):
        return True
    if isinstance(phi, (Exists, Forall)):
        return False
    return is_delta0(phi.left) and is_delta0(phi.right)


def truth_oracle(phi: Formula, qbound: int = DEFAULT_QBOUND, env: Mapping[str, int] | None = None) -> bool:
    """Classical truth; bounded quantifiers range below their bound, others over 0..qbound."""
    env = {} if env is None else env
    b = match_bounded(phi)
    if b is not None:
        kind, x, n, body = b
        rng = range(value(n, env))
        if kind == "all":
            return all(truth_oracle(body, qbound, _bind(env, x, k)) for k in rng)
        return any(truth_oracle(body, qbound, _bind(env, x, k)) for k in rng)
    if isinstance(phi, Eq):
        return value(phi.left, env) == value(phi.right, env)
    if isinstance(phi, Falsum):
        return False
    if isinstance(phi, And):
        return truth_oracle(phi.left, qbound, env) and truth_oracle(phi.right, qbound, env)
    if isinstance(phi, Or):
        return truth_oracle(phi.left, qbound, env) or truth_oracle(phi.right, qbound, env)
    if isinstance(phi, Implies):
        return (not truth_oracle(phi.left, qbound, env)) or truth_oracle(phi.right, qbound, env)
    rng = range(qbound + 1)
    if isinstance(phi, Forall):
        return all(truth_oracle(phi.body, qbound, _bind(env, phi.var, k)) for k in rng)
    return any(truth_oracle(phi.body, qbound, _bind(env, phi.var, k)) for k in rng)


# ============================================================================
# Realizability
# ============================================================================


class Status(Enum):
    REALIZED = "Realized"
    REFUTED = "RefutedWithinBounds"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class RzVerdict:
    status: Status
    realizer: int | None = None
    bounded: bool = False  # some clause was only checked for k <= qbound
    witness: tuple = ()
    resources: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def realized(self) -> bool:
        return self.status is Status.REALIZED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED

    def __str__(self) -> str:
        if self.realized:
            return f"Realized({short_code(self.realizer)})" + (" up to qbound" if self.bounded else "")
        return self.status.value


def short_code(m: int) -> str:
    """Codes past a few dozen digits are shown by their size."""
    return str(m) if m.bit_length() <= 128 else f"<code of {m.bit_length()} bits>"


def Realized(m: int, bounded: bool = False) -> RzVerdict:
    return RzVerdict(Status.REALIZED, m, bounded)


@lru_cache(maxsize=1 << 16)
def _app(e: int, x: int, fuel: int):
    return pca.run(e, x, fuel)


class _Check:
    def __init__(self, fuel: int, qbound: int):
        self.fuel = fuel
        self.qbound = qbound
        self.bounded = False
        self.applications = 0

    def app(self, e: int, x: int):
        self.applications += 1
        return _app(e, x, self.fuel)

    def rz(self, m: int, phi: Formula, env: Mapping[str, int]) -> tuple[Status, tuple]:
        if isinstance(phi, Eq):
            ok = value(phi.left, env) == value(phi.right, env)
            return (Status.REALIZED, ()) if ok else (Status.REFUTED, ("false equation", show(phi), dict(env)))
        if isinstance(phi, Falsum):
            return Status.REFUTED, ("nothing realizes _|_",)
        if isinstance(phi, And):
            a, wa = self.rz(pca.fst(m), phi.left, env)
            if a is Status.REFUTED:
                return a, wa
            b, wb = self.rz(pca.snd(m), phi.right, env)
            return _both(a, b), wb or wa
        if isinstance(phi, Or):
            side = phi.left if pca.fst(m) == 0 else phi.right
            return self.rz(pca.snd(m), side, env)
        if isinstance(phi, Exists):
            return self.rz(pca.snd(m), phi.body, _bind(env, phi.var, pca.fst(m)))
        if isinstance(phi, Forall):
            self.bounded = True
            status, wit = Status.REALIZED, ()
            for k in range(self.qbound + 1):
                s, w = self._applied(m, k, phi.body, _bind(env, phi.var, k))
                if s is Status.REFUTED:
                    return s, (phi.var, k) + w
                if s is Status.UNKNOWN:
                    status, wit = s, w
            return status, wit
        # implication
        self.bounded = True
        status, wit = Status.REALIZED, ()
        for k in range(self.qbound + 1):
            a, _ = self.rz(k, phi.left, env)
            if a is Status.REFUTED:
                continue
            if a is Status.UNKNOWN:
                status = Status.UNKNOWN
                continue
            s, w = self._applied(m, k, phi.right, env)
            if s is Status.REFUTED:
                return s, ("antecedent realizer", k) + w
            if s is Status.UNKNOWN:
                status, wit = s, w
        return status, wit

    def _applied(self, m: int, k: int, phi: Formula, env) -> tuple[Status, tuple]:
        r = self.app(m, k)
        if isinstance(r, pca.Halted):
            return self.rz(r.value, phi, env)
        if isinstance(r, pca.Stuck):
            return Status.REFUTED, ("undefined application", m, k)
        return Status.UNKNOWN, ("out of fuel", m, k)


def _both(a: Status, b: Status) -> Status:
    if Status.REFUTED in (a, b):
        return Status.REFUTED
    if Status.UNKNOWN in (a, b):
        return Status.UNKNOWN
    return Status.REALIZED


def check_realizer(m: int, phi: Formula, fuel: int = pca.DEFAULT_FUEL, qbound: int = DEFAULT_QBOUND, env: Mapping[str, int] | None = None) -> RzVerdict:
    env = {} if env is None else dict(env)
    missing = free_vars(phi) - set(env)
    if missing:
        raise FreeVariable(", ".join(sorted(missing)))
    c = _Check(fuel, qbound)
    status, wit = c.rz(m, phi, env)
    res = {"applications": c.applications, "fuel": fuel, "qbound": qbound}
    if status is Status.REALIZED:
        return RzVerdict(status, m, c.bounded, (), res)
    return RzVerdict(status, None if status is Status.REFUTED else m, c.bounded, wit, res)


# ---------------------------------------------------------------------------
# realizers built from the structure of bounded sentences


def synthesize(phi: Formula, env: Mapping[str, int] | None = None) -> int | None:
    """A realizer for a true sentence with only bounded quantifiers, else None.

    Universal bounded quantifiers become lookup tables from x to a constant
    program returning the realizer of the instance.
    """
    env = {} if env is None else env
    g = match_guard(phi)
    if g is not None:
        x, n = g
        z = value(n, env) - env[x] - 1 if x in env else None
        return None if z is None or z < 0 else pca.pair(z, 0)
    b = match_bounded(phi)
    if b is not None:
        kind, x, n, body = b
        nv = value(n, env)
        if kind == "ex":
            for k in range(nv):
                r = synthesize(body, _bind(env, x, k))
                if r is not None:
                    return pca.pair(k, pca.pair(pca.pair(nv - k - 1, 0), r))
            return None
        table = {}
        for k in range(nv):
            r = synthesize(body, _bind(env, x, k))
            if r is None:
                return None
            table[k] = pca.const_code(r)
        return pca.lookup_code(table) if table else pca.const_code(0)
    if isinstance(phi, Eq):
        return 0 if value(phi.left, env) == value(phi.right, env) else None
    if isinstance(phi, Falsum):
        return None
    if isinstance(phi, And):
        a, c = synthesize(phi.left, env), synthesize(phi.right, env)
        return None if a is None or c is None else pca.pair(a, c)
    if isinstance(phi, Or):
        a = synthesize(phi.left, env)
        if a is not None:
            return pca.pair(0, a)
        c = synthesize(phi.right, env)
        return None if c is None else pca.pair(1, c)
    if isinstance(phi, Implies):
        if refutes(phi.left, env):
            return pca.const_code(0)
        c = synthesize(phi.right, env)
        return None if c is None else pca.const_code(c)
    return None


def refutes(phi: Formula, env: Mapping[str, int] | None = None, qbound: int = DEFAULT_QBOUND) -> bool:
    """A sound test that nothing realizes phi (False means "not shown")."""
    env = {} if env is None else env
    g = match_guard(phi)
    if g is not None:
        x, n = g
        return x in env and env[x] >= value(n, env)
    b = match_bounded(phi)
    if b is not None:
        kind, x, n, body = b
        rng = range(value(n, env))
        if kind == "all":
            return any(refutes(body, _bind(env, x, k), qbound) for k in rng)
        return all(refutes(body, _bind(env, x, k), qbound) for k in rng)
    if isinstance(phi, Eq):
        return value(phi.left, env) != value(phi.right, env)
    if isinstance(phi, Falsum):
        return True
    if isinstance(phi, And):
        return refutes(phi.left, env, qbound) or refutes(phi.right, env, qbound)
    if isinstance(phi, Or):
        return refutes(phi.left, env, qbound) and refutes(phi.right, env, qbound)
    if isinstance(phi, Implies):
        return synthesize(phi.left, env) is not None and refutes(phi.right, env, qbound)
    if isinstance(phi, Forall):
        return any(refutes(phi.body, _bind(env, phi.var, k), qbound) for k in range(qbound + 1))
    return False


def search_realizer(
    phi: Formula,
    code_bound: int = DEFAULT_CODE_BOUND,
    fuel: int = pca.DEFAULT_FUEL,
    qbound: int = DEFAULT_QBOUND,
    planted: Iterable[int] = (),
) -> RzVerdict:
    """The least realizer among 0..code_bound, any planted codes, and a synthesized one.

    Without a realizer the verdict is RefutedWithinBounds when nothing can
    realize the sentence, and Unknown otherwise.
    """
    if free_vars(phi):
        raise FreeVariable(", ".join(sorted(free_vars(phi))))
    extra = set(planted)
    s = synthesize(phi)
    if s is not None:
        extra.add(s)
    tried = 0
    unknown = 0
    for m in sorted(set(range(code_bound + 1)) | extra):
        tried += 1
        v = check_realizer(m, phi, fuel, qbound)
        if v.realized:
            return RzVerdict(v.status, m, v.bounded, (), {"tried": tried, "fuel": fuel, "qbound": qbound, "code_bound": code_bound})
        if v.status is Status.UNKNOWN:
            unknown += 1
    res = {"tried": tried, "unknown": unknown, "fuel": fuel, "qbound": qbound, "code_bound": code_bound}
    if refutes(phi, qbound=qbound):
        return RzVerdict(Status.REFUTED, None, False, ("no realizer exists",), res)
    return RzVerdict(Status.UNKNOWN, None, False, ("no realizer within bounds",), res)


# ============================================================================
# Corpus checks
# ============================================================================


def _double_code() -> int:
    double = pca.fix(pca._lams("d y", ("case", "y", pca.num(0), "p", pca.succ(pca.succ(pca.app("d", "p"))))))
    return pca.encode(pca.compile_named(pca._lams("x", pca.tpair(pca.app(double, "x"), pca.num(0)))))


def _succ_witness_code() -> int:
    """x |-> <S x, 0>"""
    return pca.encode(pca.lam(pca.tpair(pca.succ(pca.var(0)), pca.num(0))))


def _self_witness_code() -> int:
    """x |-> <x, 0>"""
    return pca.encode(pca.lam(pca.tpair(pca.var(0), pca.num(0))))


def _swap_code() -> int:
    """<a, b> |-> <b, a>: realizes A /\\ B -> B /\\ A"""
    return pca.encode(pca.lam(pca.tpair(pca.tsnd(pca.var(0)), pca.tfst(pca.var(0)))))


def _decide_zero_code() -> int:
    """x |-> <0, 0> if x = 0 else <1, <pred x, 0>>: realizes x = 0 \\/ ex y. x = S(y)"""
    body = ("case", "x", pca.tpair(pca.num(0), pca.num(0)), "p", pca.tpair(pca.num(1), pca.tpair("p", pca.num(0))))
    return pca.encode(pca.compile_named(pca._lams("x", body)))


PLANTED = {
    "double": _double_code,
    "succ-witness": _succ_witness_code,
    "self-witness": _self_witness_code,
    "swap": _swap_code,
    "decide-zero": _decide_zero_code,
    "identity": lambda: pca.ID_CODE,
    "const0": lambda: pca.const_code(0),
}


@dataclass(frozen=True)
class CorpusEntry:
    text: str
    delta0: bool
    truth: bool | None = None  # for bounded sentences
    planted: str | None = None  # name in PLANTED


@dataclass(frozen=True)
class CorpusRow:
    entry: CorpusEntry
    verdict: RzVerdict
    agrees: bool
    properties: bool
    detail: str = ""


@dataclass(frozen=True)
class CorpusReport:
    rows: tuple

    @property
    def ok(self) -> bool:
        return all(r.agrees and r.properties for r in self.rows)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not (r.agrees and r.properties)]


def witness_properties(m: int, phi: Formula, fuel: int, qbound: int, env: Mapping[str, int] | None = None) -> bool:
    """Existence and disjunction properties, recursively down the realized structure."""
    env = {} if env is None else env
    if isinstance(phi, Exists):
        k = pca.fst(m)
        e = _bind(env, phi.var, k)
        return check_realizer(pca.snd(m), phi.body, fuel, qbound, e).realized and witness_properties(pca.snd(m), phi.body, fuel, qbound, e)
    if isinstance(phi, Or):
        side = phi.left if pca.fst(m) == 0 else phi.right
        return check_realizer(pca.snd(m), side, fuel, qbound, env).realized and witness_properties(pca.snd(m), side, fuel, qbound, env)
    if isinstance(phi, And):
        return witness_properties(pca.fst(m), phi.left, fuel, qbound, env) and witness_properties(pca.snd(m), phi.right, fuel, qbound, env)
    return True


def check_kleeneequiv_corpus(
    corpus: Sequence[CorpusEntry],
    code_bound: int = DEFAULT_CODE_BOUND,
    fuel: int = pca.DEFAULT_FUEL,
    qbound: int = DEFAULT_QBOUND,
) -> CorpusReport:
    """Search against known statuses: truth for bounded sentences, planted realizers otherwise."""
    rows = []
    for entry in corpus:
        phi = parse(entry.text)
        planted = PLANTED[entry.planted]() if entry.planted else None
        v = search_realizer(phi, code_bound, fuel, qbound, () if planted is None else (planted,))
        agrees, detail = True, ""
        if entry.delta0:
            truth = truth_oracle(phi, qbound)
            if entry.truth is not None and entry.truth != truth:
                agrees, detail = False, "recorded truth differs from the oracle"
            elif truth and not v.realized:
                agrees, detail = False, f"true but {v}"
            elif not truth and not v.refuted:
                agrees, detail = False, f"false but {v}"
        if planted is not None:
            pv = check_realizer(planted, phi, fuel, qbound)
            if v.refuted or not pv.realized:
                agrees, detail = False, f"planted realizer gives {pv}, search gives {v}"
            elif v.realized and v.realizer > planted:
                agrees, detail = False, "search returned a code above the planted one"
        props = True
        if v.realized:
            props = witness_properties(v.realizer, phi, fuel, qbound)
            if not props:
                detail = detail or "existence or disjunction property fails"
        rows.append(CorpusRow(entry, v, agrees, props, detail))
    return CorpusReport(tuple(rows))


def check_tct_sentence(fuel: int = pca.DEFAULT_FUEL, qbound: int = DEFAULT_QBOUND, code_bound: int = DEFAULT_CODE_BOUND):
    """Every tracked total function on 0..qbound is computed by its own tracker."""
    from .pasm import check_tct_pgamma

    return check_tct_pgamma(qbound, fuel=fuel, code_bound=code_bound)
