"""Command line driver: ingest description files, run checks, write JSON reports.

Every subcommand produces one or more RunReports.  The exit status is 0 unless
some check FAILED; with ``--strict`` an UNKNOWN verdict or a truncation flag
also counts as failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import jsonschema

from . import corpus, ha, pca
from .doctrine import (
    Doctrine,
    DoctrineError,
    TableDoctrine,
    check_quantifiers,
    check_rule,
    doctrine_verdict,
    find_elementary,
    lattice_from_order,
)
from .fincat import CategoryError, FinCategory, check_laws, check_products, check_terminal
from .order import OrderError
from .pasm import (
    RELATIONS,
    Assembly,
    PAsm,
    PAsmCategory,
    all_partitioned,
    check_carfur_fragment,
    check_ct_instance,
    check_ev_tracked,
    check_exponential_universal,
    check_product_universal,
    check_tct_pgamma,
    table_relation,
    weak_exponential,
)

SCHEMA_VERSION = 1
CHECK_VERSION = "1"
DEFAULT_FUEL = pca.DEFAULT_FUEL
DEFAULT_CODE_BOUND = 1 << 10
DEFAULT_QBOUND = 16


# ============================================================================
# Ingestion
# ============================================================================


class InputError(ValueError):
    """A description file that does not validate; ``pointer`` locates the problem."""

    def __init__(self, pointer: str, message: str, source: str = ""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message
        self.source = source


def json_pointer(path: Sequence) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def load_schema(kind: str) -> dict:
    text = resources.files("eqcomp").joinpath("data", f"{kind}.schema.json").read_text()
    return json.loads(text)


def validate(doc: Any, kind: str, source: str = "") -> None:
    schema = load_schema(kind)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        e = errors[0]
        raise InputError(json_pointer(e.absolute_path), e.message, source)


def dumps(doc: Any) -> str:
    """The canonical text of a description file."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _read(path: str | Path) -> tuple[Any, str]:
    p = Path(path)
    try:
        return json.loads(p.read_text()), str(p)
    except json.JSONDecodeError as err:
        raise InputError("", f"not JSON: {err}", str(p)) from None


@dataclass(frozen=True)
class LoadedCategory:
    category: FinCategory
    arrow_flags: Mapping  # arrow id -> identity flag as written
    source: str = ""


def ingest_category(doc: Mapping, source: str = "") -> LoadedCategory:
    validate(doc, "category", source)
    objects = list(doc["objects"])
    known = set(objects)
    ends, idents, flags = {}, {}, {}
    for k, a in enumerate(doc["arrows"]):
        ptr = f"/arrows/{k}"
        if a["id"] in ends:
            raise InputError(ptr + "/id", f"duplicate arrow {a['id']!r}", source)
        for end in ("src", "tgt"):
            if a[end] not in known:
                raise InputError(f"{ptr}/{end}", f"unknown object {a[end]!r}", source)
        ends[a["id"]] = (a["src"], a["tgt"])
        flags[a["id"]] = a.get("identity")
        if a.get("identity"):
            if a["src"] != a["tgt"]:
                raise InputError(ptr, "an identity must be an endomorphism", source)
            if a["src"] in idents:
                raise InputError(ptr, f"second identity on {a['src']!r}", source)
            idents[a["src"]] = a["id"]
    for o in objects:
        if o not in idents:
            raise InputError("/arrows", f"no identity on {o!r}", source)
    table = {}
    for g, row in doc["compose"].items():
        for f, h in row.items():
            for part, name in ((g, json_pointer(["compose", g])), (f, json_pointer(["compose", g, f])), (h, json_pointer(["compose", g, f]))):
                if part not in ends:
                    raise InputError(name, f"unknown arrow {part!r}", source)
            table[g, f] = h
    products = {}
    for a, row in doc.get("products", {}).items():
        for b, p in row.items():
            ptr = json_pointer(["products", a, b])
            if a not in known or b not in known or p["object"] not in known:
                raise InputError(ptr, "unknown object", source)
            for pr in ("pr1", "pr2"):
                if p[pr] not in ends:
                    raise InputError(f"{ptr}/{pr}", f"unknown arrow {p[pr]!r}", source)
            products[a, b] = (p["object"], p["pr1"], p["pr2"])
    terminal = doc.get("terminal")
    if terminal is not None and terminal not in known:
        raise InputError("/terminal", f"unknown object {terminal!r}", source)
    C = FinCategory(objects, ends, table, idents, products, terminal, name=doc.get("name", "C"))
    for (g, f) in [(g, f) for g in ends for f in ends if ends[g][0] == ends[f][1]]:
        if (g, f) not in table:
            raise InputError(json_pointer(["compose", g]), f"missing composite {g} . {f}", source)
        if ends[table[g, f]] != (ends[f][0], ends[g][1]):
            raise InputError(json_pointer(["compose", g, f]), "composite has the wrong endpoints", source)
    try:
        check_laws(C)
    except CategoryError as err:
        raise InputError("/compose", f"not a category: {err}", source) from None
    try:
        if terminal is not None:
            check_terminal(C)
        check_products(C)
    except CategoryError as err:
        raise InputError("/products" if products else "/terminal", str(err), source) from None
    return LoadedCategory(C, flags, source)


def serialize_category(L: LoadedCategory) -> dict:
    C = L.category
    doc: dict = {"schema_version": SCHEMA_VERSION, "kind": "category"}
    if C.name != "C":
        doc["name"] = C.name
    doc["objects"] = list(C.objects)
    if C.terminal is not None:
        doc["terminal"] = C.terminal
    arrows = []
    for f, (s, t) in C.arrow_ends.items():
        entry = {"id": f, "src": s, "tgt": t}
        if L.arrow_flags.get(f) is not None:
            entry["identity"] = L.arrow_flags[f]
        arrows.append(entry)
    doc["arrows"] = arrows
    compose: dict = {}
    for (g, f), h in C.table.items():
        compose.setdefault(g, {})[f] = h
    doc["compose"] = compose
    if C.products:
        products: dict = {}
        for (a, b), p in C.products.items():
            products.setdefault(a, {})[b] = {"object": p.obj, "pr1": p.pr1, "pr2": p.pr2}
        doc["products"] = products
    return doc


@dataclass(frozen=True)
class LoadedDoctrine:
    doctrine: TableDoctrine
    base: LoadedCategory
    base_ref: str
    orders: Mapping  # object -> (elements, leq pairs, top, meet table or None)
    source: str = ""


def ingest_doctrine(doc: Mapping, source: str = "", base: LoadedCategory | None = None) -> LoadedDoctrine:
    validate(doc, "doctrine", source)
    if base is None:
        ref = Path(source).parent / doc["base_ref"] if source else Path(doc["base_ref"])
        try:
            raw, src = _read(ref)
        except OSError as err:
            raise InputError("/base_ref", f"cannot read {ref}: {err.strerror}", source) from None
        base = ingest_category(raw, src)
    C = base.category
    fibers, orders = {}, {}
    for a, spec in doc["fibers"].items():
        ptr = json_pointer(["fibers", a])
        if a not in C.objects:
            raise InputError(ptr, f"unknown object {a!r}", source)
        elems = spec["elements"]
        for k, pair in enumerate(spec["leq"]):
            for x in pair:
                if x not in elems:
                    raise InputError(f"{ptr}/leq/{k}", f"unknown element {x!r}", source)
        try:
            lat = lattice_from_order(elems, [tuple(p) for p in spec["leq"]])
        except OrderError as err:
            raise InputError(ptr + "/leq", str(err), source) from None
        if spec["top"] != lat.top:
            raise InputError(ptr + "/top", f"{spec['top']!r} is not the top element", source)
        meet = spec.get("meet")
        if meet is not None:
            for x, row in meet.items():
                for y, m in row.items():
                    if x not in elems or y not in elems or m != lat.meet(x, y):
                        raise InputError(json_pointer(["fibers", a, "meet", x, y]), f"{m!r} is not the meet", source)
        fibers[a] = lat
        orders[a] = (list(elems), [list(p) for p in spec["leq"]], spec["top"], meet)
    missing = [a for a in C.objects if a not in fibers]
    if missing:
        raise InputError("/fibers", f"no fiber over {missing[0]!r}", source)
    tables = {}
    for f, spec in doc["reindex"].items():
        ptr = json_pointer(["reindex", f])
        if f not in C.arrow_ends:
            raise InputError(ptr, f"unknown arrow {f!r}", source)
        s, t = C.arrow_ends[f]
        mapping = spec["mapping"]
        for x, y in mapping.items():
            if x not in fibers[t].elements:
                raise InputError(json_pointer(["reindex", f, "mapping", x]), f"{x!r} is not over {t!r}", source)
            if y not in fibers[s].elements:
                raise InputError(json_pointer(["reindex", f, "mapping", x]), f"{y!r} is not over {s!r}", source)
        if set(mapping) != set(fibers[t].elements):
            raise InputError(ptr + "/mapping", "mapping must cover the whole fiber", source)
        tables[f] = dict(mapping)
    P = TableDoctrine(C, fibers, tables, name=doc.get("name", "T"))
    return LoadedDoctrine(P, base, doc["base_ref"], orders, source)


def serialize_doctrine(L: LoadedDoctrine) -> dict:
    P = L.doctrine
    doc: dict = {"schema_version": SCHEMA_VERSION, "kind": "doctrine"}
    if P.name != "T":
        doc["name"] = P.name
    doc["base_ref"] = L.base_ref
    fibers = {}
    for a, (elems, leq, top, meet) in L.orders.items():
        entry: dict = {"elements": elems}
        entry["leq"] = leq
        entry["top"] = P.fiber(a).top
        if meet is not None:
            entry["meet"] = {x: {y: P.fiber(a).meet(x, y) for y in row} for x, row in meet.items()}
        fibers[a] = entry
    doc["fibers"] = fibers
    doc["reindex"] = {f: {"mapping": dict(m)} for f, m in P.tables.items()}
    return doc


@dataclass(frozen=True)
class LoadedFragment:
    assemblies: tuple  # PAsm where every element has one code, Assembly otherwise
    names: tuple
    written: tuple  # realizer lists as given
    fuel: int
    code_bound: int
    name: str = ""
    source: str = ""

    @property
    def partitioned(self) -> tuple:
        return tuple(a for a in self.assemblies if isinstance(a, PAsm))

    def category(self, cap: int = 64) -> PAsmCategory:
        return PAsmCategory(self.partitioned, cap=cap, fuel=self.fuel, code_bound=self.code_bound)


def ingest_fragment(doc: Mapping, source: str = "") -> LoadedFragment:
    validate(doc, "fragment", source)
    out, names, written = [], [], []
    for k, a in enumerate(doc["assemblies"]):
        if len(a["carrier"]) != len(a["realizes"]):
            raise InputError(f"/assemblies/{k}/realizes", "one realizer list per carrier element", source)
        if len(set(a["carrier"])) != len(a["carrier"]):
            raise InputError(f"/assemblies/{k}/carrier", "repeated carrier element", source)
        rs = tuple(tuple(r) for r in a["realizes"])
        if all(len(r) == 1 for r in rs):
            out.append(PAsm(tuple(a["carrier"]), tuple(r[0] for r in rs), a.get("name", "")))
        else:
            out.append(Assembly(tuple(a["carrier"]), tuple(frozenset(r) for r in rs)))
        names.append(a.get("name", ""))
        written.append(rs)
    return LoadedFragment(tuple(out), tuple(names), tuple(written), doc["fuel"], doc["code_bound"], doc.get("name", ""), source)


def serialize_fragment(L: LoadedFragment) -> dict:
    doc: dict = {"schema_version": SCHEMA_VERSION, "kind": "fragment"}
    if L.name:
        doc["name"] = L.name
    items = []
    for a, name, rs in zip(L.assemblies, L.names, L.written):
        entry: dict = {}
        if name:
            entry["name"] = name
        entry["carrier"] = list(a.carrier)
        entry["realizes"] = [list(r) for r in rs]
        items.append(entry)
    doc["assemblies"] = items
    doc["fuel"] = L.fuel
    doc["code_bound"] = L.code_bound
    return doc


def load(path: str | Path, kind: str):
    doc, src = _read(path)
    if kind == "category":
        return ingest_category(doc, src)
    if kind == "doctrine":
        return ingest_doctrine(doc, src)
    if kind == "fragment":
        return ingest_fragment(doc, src)
    raise ValueError(kind)


def round_trip(path: str | Path, kind: str) -> bool:
    """parse, validate, serialize: is the output byte-identical to the file?"""
    text = Path(path).read_text()
    L = load(path, kind)
    ser = {"category": serialize_category, "doctrine": serialize_doctrine, "fragment": serialize_fragment}[kind]
    return dumps(ser(L)) == text


# ============================================================================
# Reports
# ============================================================================


class Outcome(Enum):
    PASSED = "PASSED"
    FAILED = "FAILED"
    UNKNOWN = "UNKNOWN"


@dataclass
class RunReport:
    check: str
    inputs: dict
    verdict: Outcome
    witnesses: list = field(default_factory=list)
    resources: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)

    @property
    def inputs_digest(self) -> str:
        return digest(self.inputs)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "check_version": CHECK_VERSION,
            "inputs": jsonable(self.inputs),
            "inputs_digest": self.inputs_digest,
            "verdict": self.verdict.value,
            "witnesses": jsonable(self.witnesses),
            "resources": jsonable(self.resources),
            "truncation": jsonable(self.truncation),
            "result": jsonable(self.result),
        }

    @property
    def flagged(self) -> bool:
        return any(bool(v) for v in self.truncation.values())


def jsonable(x: Any) -> Any:
    """A deterministic JSON image: sets sorted, big codes abbreviated, other objects by repr."""
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, bool) or x is None or isinstance(x, (float, str)):
        return x
    if isinstance(x, int):
        return x if x.bit_length() <= 128 else ha.short_code(x)
    if isinstance(x, Mapping):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (frozenset, set)):
        return sorted((jsonable(v) for v in x), key=lambda v: json.dumps(v, sort_keys=True))
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return repr(x)


def digest(x: Any) -> str:
    text = json.dumps(jsonable(x), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def report_document(reports: Sequence[RunReport], timestamp: bool = True) -> dict:
    body = [r.to_json() for r in reports]
    doc: dict = {"schema_version": SCHEMA_VERSION, "digest": digest(body)}
    if timestamp:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    doc["reports"] = body
    return doc


def exit_code(reports: Sequence[RunReport], strict: bool = False) -> int:
    for r in reports:
        if r.verdict is Outcome.FAILED:
            return 1
        if strict and (r.verdict is Outcome.UNKNOWN or r.flagged):
            return 1
    return 0


# ============================================================================
# Checks
# ============================================================================


@dataclass(frozen=True)
class Settings:
    fuel: int = DEFAULT_FUEL
    code_bound: int = DEFAULT_CODE_BOUND
    qbound: int = DEFAULT_QBOUND
    base_dir: Path = Path(".")


def resolve_doctrine(ref: str, settings: Settings) -> tuple[Doctrine, dict]:
    """``builtin:<name>`` or the path of a doctrine file."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        return corpus.builtin(name), {"doctrine": ref}
    path = settings.base_dir / ref
    L = load(path, "doctrine")
    return L.doctrine, {"doctrine": ref, "sha256": file_digest(path)}


def _expectation(outcome: str, expect: str | None) -> Outcome:
    """Compare a raw outcome ("pass", "fail", "unknown") with what the config expects."""
    if expect is None:
        return {"pass": Outcome.PASSED, "fail": Outcome.FAILED, "unknown": Outcome.UNKNOWN}[outcome]
    return Outcome.PASSED if outcome == expect else Outcome.FAILED


def check_doctrine_cmd(item: Mapping, s: Settings) -> RunReport:
    P, inputs = resolve_doctrine(item["doctrine"], s)
    expect = item.get("expect_each", {})
    results, witnesses = {}, []
    v = doctrine_verdict(P)
    results["doctrine"] = "pass" if v else "fail"
    if not v:
        witnesses.append({"doctrine": v.detail})
    try:
        E = find_elementary(P)
        results["elementary"] = "pass"
    except (DoctrineError, CategoryError, KeyError) as err:
        results["elementary"] = "fail"
        witnesses.append({"elementary": str(err)})
    try:
        Qs = check_quantifiers(P)
        results["quantifiers"] = "pass"
    except (DoctrineError, CategoryError, OrderError, KeyError) as err:
        results["quantifiers"] = "fail"
        witnesses.append({"quantifiers": str(err)})
    mismatched = [k for k, r in results.items() if r != expect.get(k, "pass")]
    verdict = Outcome.FAILED if mismatched else Outcome.PASSED
    if "expect" in item:
        verdict = _expectation("pass" if all(r == "pass" for r in results.values()) else "fail", item["expect"])
    return RunReport("check-doctrine", {**inputs, "expect_each": expect}, verdict, witnesses, {}, {}, {"results": results, "mismatched": mismatched})


def complete_cmd(item: Mapping, s: Settings) -> RunReport:
    from .completion import check_effective_quotients, complete

    P, inputs = resolve_doctrine(item["doctrine"], s)
    Q = complete(P)
    bad = [x for x in Q.objects if Q.delta(x) != x.rho]
    eq = check_effective_quotients(Q)
    counts: dict = {}
    for x in Q.objects:
        counts[repr(x.carrier)] = counts.get(repr(x.carrier), 0) + 1
    ok = not bad and eq.ok
    wit = [{"delta": repr(x)} for x in bad[:3]] + ([{"effective_quotients": repr(eq.witness)}] if not eq.ok else [])
    outcome = "pass" if ok else "fail"
    return RunReport(
        "complete",
        inputs,
        _expectation(outcome, item.get("expect")),
        wit,
        {"objects": len(Q.objects)},
        {"effective_quotients": eq.truncated},
        {"objects_per_carrier": counts},
    )


def transfer_cmd(item: Mapping, s: Settings) -> RunReport:
    from .completion import check_ac_on_object_transfer, check_auc_transfer, check_ruc_transfer, complete

    P, inputs = resolve_doctrine(item["doctrine"], s)
    kind = item.get("kind", "rc")
    inputs = {**inputs, "kind": kind}
    Q = complete(P)
    if kind == "rc":
        rep = check_ruc_transfer(P, Q)
    elif kind == "ac":
        rep = check_auc_transfer(P, Q)
    elif kind == "ac-object":
        objs = list(P.objects)
        target = item.get("object")
        a = next((o for o in objs if repr(o) == str(target) or o == target), objs[0])
        inputs["object"] = repr(a)
        rep = check_ac_on_object_transfer(P, a, Q)
    else:
        raise InputError("/kind", f"unknown transfer {kind!r}")
    wit = []
    for side, v in (("left", rep.left), ("right", rep.right)):
        if not v.ok:
            wit.append({side: repr(v.witness), "detail": v.detail})
    holds = rep.left.ok and rep.right.ok
    if rep.discrepancy:
        verdict = Outcome.FAILED
    else:
        verdict = _expectation("pass" if holds else "fail", item.get("expect"))
    return RunReport(
        "transfer",
        inputs,
        verdict,
        wit,
        {},
        {"left": rep.left.truncated, "right": rep.right.truncated},
        {"name": rep.name, "left": rep.left.ok, "right": rep.right.ok, "discrepancy": rep.discrepancy, "hypotheses": {k: bool(v) for k, v in rep.hypotheses.items()}},
    )


def _fragment(item: Mapping, s: Settings):
    if "fragment" in item:
        path = s.base_dir / item["fragment"]
        L = load(path, "fragment")
        return L.partitioned, L.fuel, L.code_bound, {"fragment": item["fragment"], "sha256": file_digest(path)}
    points = int(item.get("points", 2))
    return tuple(all_partitioned(points)), s.fuel, item.get("code_bound", min(s.code_bound, 64)), {"points": points}


def pasm_check_cmd(item: Mapping, s: Settings) -> RunReport:
    objs, fuel, bound, inputs = _fragment(item, s)
    synth = bool(item.get("synthesize", False))
    inputs = {**inputs, "code_bound": bound, "fuel": fuel, "synthesize": synth}
    C = PAsmCategory(objs, cap=4096, fuel=fuel, code_bound=bound)
    wit, too_small, checked = [], 0, 0
    for a in objs:
        for b in objs:
            u = check_product_universal(C, a, b)
            checked += u.checked
            if not u:
                wit.append({"product": [repr(a), repr(b)], "witness": repr(u.witness)})
            E = weak_exponential(C, a, b, synthesize=synth)
            u = check_exponential_universal(C, E)
            checked += u.checked
            too_small += len(u.too_small)
            if not u:
                wit.append({"exponential": [repr(a), repr(b)], "witness": repr(u.witness)})
            if not check_ev_tracked(E):
                wit.append({"ev": [repr(a), repr(b)]})
    outcome = "fail" if wit else "pass"
    return RunReport("pasm-check", inputs, _expectation(outcome, item.get("expect")), wit, {"maps_checked": checked}, {"fragment_too_small": too_small})


def carfur_cmd(item: Mapping, s: Settings) -> RunReport:
    points = int(item.get("points", 2))
    codes = tuple(item.get("codes", (0, 1)))
    r = check_carfur_fragment(all_partitioned(points), max_points=points, codes=codes, fuel=s.fuel)
    outcome = "pass" if r.ok else "fail"
    return RunReport(
        "carfur",
        {"points": points, "codes": list(codes)},
        _expectation(outcome, item.get("expect")),
        [repr(m) for m in r.mismatches[:5]],
        {"objects": r.objects, "assemblies_checked": r.checked_assemblies},
        {"assemblies_outside_fragment": len(r.truncated)},
        {"full": r.full, "faithful": r.faithful, "essentially_surjective": r.essentially_surjective},
    )


def tct_cmd(item: Mapping, s: Settings) -> RunReport:
    bound = int(item.get("bound", 8))
    r = check_tct_pgamma(bound, fuel=s.fuel, code_bound=s.code_bound)
    return RunReport(
        "tct",
        {"bound": bound, "fuel": s.fuel, "code_bound": s.code_bound},
        _expectation("pass" if r.ok else "fail", item.get("expect")),
        [repr(r.witness)] if not r.ok else [],
        {"members": r.members},
    )


def ct_cmd(item: Mapping, s: Settings) -> RunReport:
    bound = int(item.get("bound", 6))
    if "table" in item:
        table = {int(k): int(v) for k, v in item["table"].items()}
        r = table_relation(table)
        label = {"table": {str(k): v for k, v in sorted(table.items())}}
    else:
        name = item.get("relation", "successor")
        if name not in RELATIONS:
            raise InputError("/relation", f"unknown relation {name!r}; known: {', '.join(RELATIONS)}")
        r = RELATIONS[name]()
        label = {"relation": name}
    v = check_ct_instance(r, bound, fuel=s.fuel, code_bound=min(s.code_bound, 64))
    return RunReport(
        "ct",
        {**label, "bound": bound, "fuel": s.fuel},
        _expectation("pass" if v.ok else "fail", item.get("expect")),
        [repr(v.witness)] if not v.ok else [],
        {},
        {},
        {"route": v.route, "choice": list(v.choice), "code": v.code},
    )


def pca_eval_cmd(item: Mapping, s: Settings) -> RunReport:
    e, x = int(item["code"]), int(item.get("input", 0))
    r = pca.run(e, x, s.fuel)
    if isinstance(r, pca.Halted):
        outcome, result = "pass", {"value": r.value, "steps": r.steps, "trace": pca.trace(e, x, s.fuel)}
    elif isinstance(r, pca.Stuck):
        outcome, result = "pass", {"stuck": r.reason, "steps": r.steps}
    else:
        outcome, result = "unknown", {"out_of_fuel": r.steps}
    return RunReport("pca-eval", {"code": e, "input": x, "fuel": s.fuel}, _expectation(outcome, item.get("expect")), [], {"steps": result.get("steps", s.fuel)}, {"fuel": outcome == "unknown"}, result)


def ha_parse_cmd(item: Mapping, s: Settings) -> RunReport:
    text = item["text"]
    try:
        phi = ha.parse(text)
    except ha.ParseError as err:
        return RunReport("ha-parse", {"text": text}, _expectation("fail", item.get("expect")), [{"position": err.pos, "message": err.message}])
    return RunReport("ha-parse", {"text": text}, _expectation("pass", item.get("expect")), [], {}, {}, {"formula": ha.show(phi), "delta0": ha.is_delta0(phi)})


def realize_cmd(item: Mapping, s: Settings) -> RunReport:
    text = item["text"]
    phi = ha.parse(text)
    planted = tuple(ha.PLANTED[n]() for n in item.get("planted", ()))
    v = ha.search_realizer(phi, s.code_bound, s.fuel, s.qbound, planted)
    outcome = "pass" if v.realized else "fail" if v.refuted else "unknown"
    return RunReport(
        "realize",
        {"text": text, "planted": list(item.get("planted", ())), "fuel": s.fuel, "code_bound": s.code_bound, "qbound": s.qbound},
        _expectation(outcome, item.get("expect")),
        list(v.witness),
        v.resources,
        {"quantifier_bound": v.bounded},
        {"status": v.status.value, "realizer": v.realizer},
    )


def oracle_cmd(item: Mapping, s: Settings) -> RunReport:
    text = item["text"]
    value = ha.truth_oracle(ha.parse(text), s.qbound)
    return RunReport(
        "oracle",
        {"text": text, "qbound": s.qbound},
        _expectation("pass" if value else "fail", item.get("expect")),
        [],
        {},
        {"unbounded_quantifiers": not ha.is_delta0(ha.parse(text))},
        {"value": value},
    )


CHECKS: dict[str, Callable[[Mapping, Settings], RunReport]] = {
    "check-doctrine": check_doctrine_cmd,
    "complete": complete_cmd,
    "transfer": transfer_cmd,
    "pasm-check": pasm_check_cmd,
    "carfur": carfur_cmd,
    "tct": tct_cmd,
    "ct": ct_cmd,
    "pca-eval": pca_eval_cmd,
    "ha-parse": ha_parse_cmd,
    "realize": realize_cmd,
    "oracle": oracle_cmd,
}


def run_item(item: Mapping, s: Settings) -> RunReport:
    try:
        return CHECKS[item["check"]](item, s)
    except InputError as err:
        return RunReport(item["check"], dict(item), Outcome.FAILED, [{"input_error": str(err), "pointer": err.pointer}])


def run_config(doc: Mapping, base_dir: Path = Path("."), overrides: Mapping | None = None, jobs: int = 1, source: str = "") -> list[RunReport]:
    """Run every check of a config; reports come back in config order."""
    validate(doc, "config", source)
    d = dict(doc.get("defaults", {}))
    d.update({k: v for k, v in (overrides or {}).items() if v is not None})
    s = Settings(d.get("fuel", DEFAULT_FUEL), d.get("code_bound", DEFAULT_CODE_BOUND), d.get("qbound", DEFAULT_QBOUND), base_dir)
    items = list(doc.get("checks", []))
    if jobs <= 1:
        return [run_item(it, s) for it in items]
    with ThreadPoolExecutor(jobs) as pool:
        return list(pool.map(lambda it: run_item(it, s), items))


# ============================================================================
# Entry point
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strict", action="store_true", help="UNKNOWN verdicts and truncation flags fail the run")
    common.add_argument("--fuel", type=int, default=None, help=f"machine steps per application (default {DEFAULT_FUEL})")
    common.add_argument("--code-bound", type=int, default=None, help=f"largest program code searched (default {DEFAULT_CODE_BOUND})")
    common.add_argument("--qbound", type=int, default=None, help=f"quantifier instances checked (default {DEFAULT_QBOUND})")
    common.add_argument("--report", metavar="PATH", help="also write the JSON report here")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    ap = argparse.ArgumentParser(prog="eqcomp", description="Check doctrines, their quotient completions, and realizability on finite fragments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a JSON config of checks")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("check-doctrine", parents=[common], help="doctrine laws, equality and quantifiers")
    p.add_argument("doctrine", help="builtin:<name> or a doctrine file")

    p = sub.add_parser("complete", parents=[common], help="build the quotient completion and check its quotients")
    p.add_argument("doctrine")

    p = sub.add_parser("transfer", parents=[common], help="compare choice rules of a doctrine and its completion")
    p.add_argument("doctrine")
    p.add_argument("--kind", choices=["rc", "ac", "ac-object"], default="rc")
    p.add_argument("--object", help="object for ac-object (default: the first)")

    p = sub.add_parser("pasm-check", parents=[common], help="products and weak exponentials of partitioned assemblies")
    p.add_argument("fragment", nargs="?", help="fragment file (default: all shapes with --points points)")
    p.add_argument("--points", type=int, default=2)
    p.add_argument("--synthesize", action="store_true", help="add table trackers beyond the code bound")

    p = sub.add_parser("carfur", parents=[common], help="the comparison functor into assemblies")
    p.add_argument("--points", type=int, default=2)
    p.add_argument("--codes", type=int, nargs="+", default=[0, 1])

    p = sub.add_parser("tct", parents=[common], help="every tracked function is computed by its tracker")
    p.add_argument("--bound", type=int, default=8)

    p = sub.add_parser("ct", parents=[common], help="Church's thesis for a decidable relation")
    p.add_argument("--relation", choices=sorted(RELATIONS), default="successor")
    p.add_argument("--bound", type=int, default=6)

    p = sub.add_parser("pca-eval", parents=[common], help="run a program code on an input")
    p.add_argument("code", type=int)
    p.add_argument("input", type=int, nargs="?", default=0)

    for name, helptext in (("ha-parse", "parse and print a formula"), ("realize", "search for a realizer"), ("oracle", "classical truth with bounded quantifiers")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("text")
        if name == "realize":
            p.add_argument("--planted", nargs="*", default=[], choices=sorted(ha.PLANTED))
    return ap


def _item_from_args(args) -> dict:
    item: dict = {"check": args.command}
    for key in ("doctrine", "kind", "object", "fragment", "points", "codes", "bound", "relation", "code", "input", "text", "planted", "synthesize"):
        v = getattr(args, key, None)
        if v is not None and v != []:
            item[key] = v
    return item


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"fuel": args.fuel, "code_bound": args.code_bound, "qbound": args.qbound}
    try:
        if args.command == "run":
            doc, src = _read(args.config)
            reports = run_config(doc, Path(src).parent, overrides, args.jobs, src)
        else:
            reports = run_config({"schema_version": SCHEMA_VERSION, "checks": [_item_from_args(args)]}, Path("."), overrides)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    text = dumps(report_document(reports, timestamp=not args.no_timestamp))
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text)
    return exit_code(reports, args.strict)


if __name__ == "__main__":
    sys.exit(main())
