"""Named doctrines and fragments shared by the command line, the tests and the acceptance run."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .doctrine import Doctrine, constant_doctrine, lattice_from_order, subobject_doctrine, variation_doctrine
from .fincat import FinSetCategory, finset_category
from .pasm import PAsmCategory, WsbPAsm, all_partitioned, pgamma_doctrine

# Sizes 0..64 with scope {0, 1, 2}: every product of scope objects and of
# their squares (up to 4 x 4 x 4) exists, which the transfer checks need.
FINSET_TOP = 64
FINSET_SCOPE = (0, 1, 2)
# carriers 1, 2, 3 for counting equivalence relations; 3 x 3 x 3 = 27
BELL_TOP = 27
BELL_SCOPE = (1, 2, 3)


def finset_fragment(scope=FINSET_SCOPE, top: int = FINSET_TOP) -> FinSetCategory:
    return finset_category(range(top + 1), top, scope)


def bell_fragment() -> FinSetCategory:
    return finset_fragment(BELL_SCOPE, BELL_TOP)


def pasm_fragment(points: int = 2, **kw) -> PAsmCategory:
    """One partitioned assembly per shape with at most ``points`` elements."""
    return PAsmCategory(all_partitioned(points), **kw)


@dataclass(frozen=True)
class Entry:
    name: str
    build: Callable[[], Doctrine]
    description: str


def _sub_finset() -> Doctrine:
    return subobject_doctrine(finset_fragment())


def _wsb_finset() -> Doctrine:
    return variation_doctrine(finset_fragment())


def _pgamma() -> Doctrine:
    return pgamma_doctrine(pasm_fragment(2))


def _wsb_pasm() -> Doctrine:
    return WsbPAsm(pasm_fragment(2))


def _constant() -> Doctrine:
    two = lattice_from_order([0, 1], [(0, 0), (1, 1), (0, 1)])
    return constant_doctrine(finset_fragment((0, 1, 2), 8), two, name="const2")


BUILTIN = {
    e.name: e
    for e in (
        Entry("sub-finset", _sub_finset, "subsets over finite sets 0, 1, 2"),
        Entry("wsb-finset", _wsb_finset, "variations over finite sets 0, 1, 2"),
        Entry("pgamma", _pgamma, "subsets of carriers over partitioned assemblies with at most 2 points"),
        Entry("wsb-pasm", _wsb_pasm, "variations over partitioned assemblies with at most 2 points"),
        Entry("constant", _constant, "the two-element chain over every finite set, identity reindexing"),
    )
}


def builtin(name: str) -> Doctrine:
    try:
        return BUILTIN[name].build()
    except KeyError:
        raise KeyError(f"unknown doctrine {name!r}; known: {', '.join(sorted(BUILTIN))}") from None
