"""Regenerate the description files under fixtures/ in canonical form."""

from __future__ import annotations

import itertools
import json
from pathlib import Path

from eqcomp.cli import SCHEMA_VERSION, dumps

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def write(name: str, doc) -> None:
    (OUT / name).write_text(dumps(doc))


def finset12():
    """Finite sets of size 1 and 2 with every function between them."""
    sizes = {"1": 1, "2": 2}
    arrows, fn = [], {}
    for s, t in itertools.product(sizes, repeat=2):
        for values in itertools.product(range(sizes[t]), repeat=sizes[s]):
            name = f"{s}>{t}:" + "".join(map(str, values))
            ident = s == t and values == tuple(range(sizes[s]))
            entry = {"id": name, "src": s, "tgt": t}
            if ident:
                entry["identity"] = True
            arrows.append(entry)
            fn[name] = (s, t, values)
    compose: dict = {}
    for g, (gs, gt, gv) in fn.items():
        for f, (fs, ft, fv) in fn.items():
            if ft == gs:
                h = tuple(gv[i] for i in fv)
                compose.setdefault(g, {})[f] = f"{fs}>{gt}:" + "".join(map(str, h))
    products = {
        "1": {"1": {"object": "1", "pr1": "1>1:0", "pr2": "1>1:0"}, "2": {"object": "2", "pr1": "2>1:00", "pr2": "2>2:01"}},
        "2": {"1": {"object": "2", "pr1": "2>2:01", "pr2": "2>1:00"}},
    }
    doc = {"schema_version": SCHEMA_VERSION, "kind": "category", "name": "finset12", "objects": list(sizes), "terminal": "1", "arrows": arrows, "compose": compose, "products": products}
    return doc, fn, sizes


def subsets_doctrine(fn, sizes):
    def label(bits):
        return "{" + ",".join(str(i) for i in bits) + "}"

    fibers = {}
    subs = {}
    for o, n in sizes.items():
        ss = [tuple(i for i in range(n) if m >> i & 1) for m in range(1 << n)]
        subs[o] = ss
        leq = [[label(a), label(b)] for a in ss for b in ss if set(a) <= set(b)]
        meet = {label(a): {label(b): label(tuple(sorted(set(a) & set(b)))) for b in ss} for a in ss}
        fibers[o] = {"elements": [label(a) for a in ss], "leq": leq, "top": label(tuple(range(n))), "meet": meet}
    reindex = {}
    for f, (s, t, v) in fn.items():
        reindex[f] = {"mapping": {label(b): label(tuple(i for i in range(sizes[s]) if v[i] in b)) for b in subs[t]}}
    return {"schema_version": SCHEMA_VERSION, "kind": "doctrine", "name": "sub-finset12", "base_ref": "finset12.category.json", "fibers": fibers, "reindex": reindex}


def pointless():
    """A terminal 1 and an object A with no global element."""
    arrows = [
        {"id": "id1", "src": "1", "tgt": "1", "identity": True},
        {"id": "idA", "src": "A", "tgt": "A", "identity": True},
        {"id": "!", "src": "A", "tgt": "1"},
    ]
    compose = {"id1": {"id1": "id1", "!": "!"}, "idA": {"idA": "idA"}, "!": {"idA": "!"}}
    products = {
        "1": {"1": {"object": "1", "pr1": "id1", "pr2": "id1"}, "A": {"object": "A", "pr1": "!", "pr2": "idA"}},
        "A": {"1": {"object": "A", "pr1": "idA", "pr2": "!"}, "A": {"object": "A", "pr1": "idA", "pr2": "idA"}},
    }
    return {"schema_version": SCHEMA_VERSION, "kind": "category", "name": "pointless", "objects": ["1", "A"], "terminal": "1", "arrows": arrows, "compose": compose, "products": products}


def chain_fiber():
    return {"elements": ["0", "1"], "leq": [["0", "0"], ["1", "1"], ["0", "1"]], "top": "1"}


def planted_ruc():
    """Two-element chains with identity reindexing over the pointless category."""
    ident = {"mapping": {"0": "0", "1": "1"}}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "doctrine",
        "name": "planted-ruc",
        "base_ref": "pointless.category.json",
        "fibers": {"1": chain_fiber(), "A": chain_fiber()},
        "reindex": {"id1": ident, "idA": ident, "!": ident},
    }


def planted_nonmonotone():
    """Reindexing along ! swaps the chain: not monotone."""
    ident = {"mapping": {"0": "0", "1": "1"}}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "doctrine",
        "name": "planted-nonmonotone",
        "base_ref": "pointless.category.json",
        "fibers": {"1": chain_fiber(), "A": chain_fiber()},
        "reindex": {"id1": ident, "idA": ident, "!": {"mapping": {"0": "1", "1": "0"}}},
    }


def fragment():
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fragment",
        "name": "two-points",
        "assemblies": [
            {"name": "P1", "carrier": ["a"], "realizes": [[0]]},
            {"name": "P2", "carrier": ["a", "b"], "realizes": [[0], [1]]},
            {"name": "P11", "carrier": ["a", "b"], "realizes": [[0], [0]]},
        ],
        "fuel": 10000,
        "code_bound": 64,
    }


def main() -> None:
    OUT.mkdir(exist_ok=True)
    cat, fn, sizes = finset12()
    write("finset12.category.json", cat)
    write("sub-finset12.doctrine.json", subsets_doctrine(fn, sizes))
    write("pointless.category.json", pointless())
    write("planted-ruc.doctrine.json", planted_ruc())
    write("planted-nonmonotone.doctrine.json", planted_nonmonotone())
    write("two-points.fragment.json", fragment())


if __name__ == "__main__":
    main()
