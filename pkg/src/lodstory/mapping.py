"""Declarative mapping engine turning table records into RDF triples.

Implements an RML-style subset (logical sources, subject / predicate-object
/ term maps, join conditions) driven by a JSON mapping document, extended
with a registry of user-defined functions.  Materialization is
deterministic: the output graph is identical whether triples maps run
sequentially or in parallel.

JSON dialect (full schema in docs/formats.md):

    {
      "prefixes": {"ex": "http://example.org/"},
      "sources": [{"id": "objects", "table": "object"}],
      "triplesMaps": [
        {"id": "tm1", "source": "objects",
         "subject": {"template": "http://e.o/object/{id}",
                     "classes": ["ex:Object"]},
         "predicateObjects": [
           {"predicate": "ex:material", "object": {"reference": "material"}},
           {"predicate": "ex:digitizes",
            "object": {"parentMap": "tm1"},
            "join": {"child": "object_id", "parent": "id"}}
         ]}
      ]
    }
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .rdf import (
    RDF_TYPE,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    make_iri,
)
from .tabular import Record, normalize_date

UdfFunc = Callable[[list[str]], list[str]]


class MappingLoadError(Exception):
    """Invalid mapping document; message names the offending element's path."""


class FunctionRegistryError(Exception):
    pass


class FunctionRegistry:
    """Named pure functions (list of strings -> list of strings)."""

    def __init__(self):
        self._functions: dict[str, UdfFunc] = {}

    def register(self, name: str, fn: UdfFunc) -> None:
        if name in self._functions:
            raise FunctionRegistryError(f"function {name!r} already registered")
        self._functions[name] = fn

    def resolve(self, name: str) -> UdfFunc:
        try:
            return self._functions[name]
        except KeyError:
            raise FunctionRegistryError(f"function {name!r} not registered") from None

    def __contains__(self, name: str) -> bool:
        return name in self._functions


def register_function(registry: FunctionRegistry, name: str, fn: UdfFunc) -> FunctionRegistry:
    registry.register(name, fn)
    return registry


def _udf_identity(values: list[str]) -> list[str]:
    return list(values)


def _udf_to_iso_date(values: list[str]) -> list[str]:
    out = []
    for v in values:
        norm = normalize_date(v)
        if norm is None:
            raise ValueError(f"cannot normalize date {v!r}")
        out.append(norm)
    return out


def _udf_lowercase(values: list[str]) -> list[str]:
    return [v.lower() for v in values]


def concat_with(sep: str) -> UdfFunc:
    def _concat(values: list[str]) -> list[str]:
        return [sep.join(values)] if values else []

    return _concat


def default_registry() -> FunctionRegistry:
    registry = FunctionRegistry()
    registry.register("identity", _udf_identity)
    registry.register("to_iso_date", _udf_to_iso_date)
    registry.register("lowercase", _udf_lowercase)
    registry.register("concat", concat_with(", "))
    return registry


@dataclass(frozen=True)
class LogicalSource:
    source_id: str
    table: str  # "object" | "process"


@dataclass(frozen=True)
class TermMap:
    kind: str  # constant | reference | template | function | parent
    term_type: str = "literal"  # iri | literal | blank
    constant: Term | None = None
    reference: str | None = None
    template: str | None = None
    function: str | None = None
    args: tuple["TermMap", ...] = ()
    parent_map: str | None = None
    datatype: Iri | None = None
    language: str | None = None


@dataclass(frozen=True)
class SubjectMap:
    term: TermMap
    classes: tuple[Iri, ...] = ()


@dataclass(frozen=True)
class JoinCondition:
    parent_map: str
    child: str
    parent: str


@dataclass(frozen=True)
class PredicateObjectMap:
    predicate: Iri
    object: TermMap
    join: JoinCondition | None = None


@dataclass(frozen=True)
class TriplesMap:
    id: str
    source: str
    subject: SubjectMap
    predicate_objects: tuple[PredicateObjectMap, ...] = ()


@dataclass(frozen=True)
class MappingDocument:
    prefixes: dict[str, str]
    sources: tuple[LogicalSource, ...]
    triples_maps: tuple[TriplesMap, ...]

    def source(self, source_id: str) -> LogicalSource:
        for s in self.sources:
            if s.source_id == source_id:
                return s
        raise KeyError(source_id)

    def triples_map(self, map_id: str) -> TriplesMap:
        for tm in self.triples_maps:
            if tm.id == map_id:
                return tm
        raise KeyError(map_id)


_TEMPLATE_RE = re.compile(r"\{([^{}]+)\}")

# Unreserved characters of RFC 3986; everything else percent-encodes.
_UNRESERVED = set(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"
)


def iri_encode(value: str) -> str:
    out = []
    for byte in value.encode("utf-8"):
        ch = chr(byte)
        if ch in _UNRESERVED:
            out.append(ch)
        else:
            out.append(f"%{byte:02X}")
    return "".join(out)


def template_columns(template: str) -> list[str]:
    return _TEMPLATE_RE.findall(template)


def expand_template(template: str, record: Record, encode: bool = True) -> str | None:
    """Fill {column} placeholders from a record.

    Returns None when any referenced column is absent or multivalued
    (subject/object for that row is simply not generated).
    """

    def repl(m: re.Match) -> str:
        values = record.get(m.group(1))
        if len(values) != 1:
            raise _AbsentColumn()
        return iri_encode(values[0]) if encode else values[0]

    try:
        return _TEMPLATE_RE.sub(repl, template)
    except _AbsentColumn:
        return None


class _AbsentColumn(Exception):
    pass


def _expand_curie(value: str, prefixes: dict[str, str], path: str) -> Iri:
    """Resolve a prefixed name or absolute IRI string from the document."""
    if ":" in value:
        prefix, _, local = value.partition(":")
        if prefix in prefixes:
            value = prefixes[prefix] + local
    try:
        return make_iri(value)
    except Exception as e:
        raise MappingLoadError(f"{path}: invalid IRI {value!r}: {e}") from None


_TERM_MAP_KEYS = {
    "constant", "reference", "template", "function", "parentMap",
    "termType", "datatype", "language", "classes",
}


def _load_term_map(
    obj: dict,
    prefixes: dict[str, str],
    path: str,
    position: str,
    registry: FunctionRegistry | None,
) -> TermMap:
    if not isinstance(obj, dict):
        raise MappingLoadError(f"{path}: term map must be an object")
    unknown = set(obj) - _TERM_MAP_KEYS
    if unknown:
        raise MappingLoadError(f"{path}: unknown key {sorted(unknown)[0]!r}")
    kinds = [k for k in ("constant", "reference", "template", "function", "parentMap") if k in obj]
    if len(kinds) != 1:
        raise MappingLoadError(
            f"{path}: exactly one of constant/reference/template/function/parentMap required"
        )
    kind = {"parentMap": "parent"}.get(kinds[0], kinds[0])
    default_type = "iri" if kind in ("template", "parent") or position == "subject" else "literal"
    term_type = obj.get("termType", default_type)
    if term_type not in ("iri", "literal", "blank"):
        raise MappingLoadError(f"{path}: invalid termType {term_type!r}")
    if position == "subject" and term_type == "literal":
        raise MappingLoadError(f"{path}: literal term not allowed in subject position")
    datatype = None
    language = obj.get("language")
    if "datatype" in obj:
        datatype = _expand_curie(obj["datatype"], prefixes, f"{path}.datatype")
    if (datatype or language) and term_type != "literal":
        raise MappingLoadError(f"{path}: datatype/language only allowed on literals")

    constant: Term | None = None
    function = None
    args: tuple[TermMap, ...] = ()
    if kind == "constant":
        raw = obj["constant"]
        if term_type == "iri":
            constant = _expand_curie(raw, prefixes, f"{path}.constant")
        else:
            constant = Literal(raw, datatype or Iri(XSD_STRING), language)
    elif kind == "function":
        fn = obj["function"]
        if not isinstance(fn, dict) or "name" not in fn:
            raise MappingLoadError(f"{path}.function: expected {{name, args}}")
        function = fn["name"]
        if registry is not None and function not in registry:
            raise MappingLoadError(f"{path}.function: unregistered function {function!r}")
        args = tuple(
            _load_term_map(a, prefixes, f"{path}.function.args[{i}]", "object", registry)
            for i, a in enumerate(fn.get("args", []))
        )
    return TermMap(
        kind=kind,
        term_type=term_type,
        constant=constant,
        reference=obj.get("reference"),
        template=obj.get("template"),
        function=function,
        args=args,
        parent_map=obj.get("parentMap"),
        datatype=datatype,
        language=language,
    )


def load_mapping(
    text: str,
    registry: FunctionRegistry | None = None,
    known_columns: dict[str, set[str]] | None = None,
) -> MappingDocument:
    """Parse and fully validate a JSON mapping document.

    known_columns optionally maps table kind -> column names, enabling
    load-time rejection of templates/references naming unknown columns.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MappingLoadError(f"invalid JSON: {e}") from None
    if not isinstance(data, dict):
        raise MappingLoadError("document root must be an object")
    unknown = set(data) - {"prefixes", "sources", "triplesMaps"}
    if unknown:
        raise MappingLoadError(f"unknown key {sorted(unknown)[0]!r} at document root")

    prefixes = data.get("prefixes", {})
    if not isinstance(prefixes, dict):
        raise MappingLoadError("prefixes: must be an object")

    sources = []
    seen_sources = set()
    for i, s in enumerate(data.get("sources", [])):
        path = f"sources[{i}]"
        if set(s) - {"id", "table"}:
            raise MappingLoadError(f"{path}: unknown key")
        if s.get("table") not in ("object", "process"):
            raise MappingLoadError(f"{path}.table: must be 'object' or 'process'")
        if s["id"] in seen_sources:
            raise MappingLoadError(f"{path}.id: duplicate source id {s['id']!r}")
        seen_sources.add(s["id"])
        sources.append(LogicalSource(s["id"], s["table"]))

    maps = []
    seen_maps = set()
    raw_maps = data.get("triplesMaps", [])
    for i, tm in enumerate(raw_maps):
        path = f"triplesMaps[{i}]"
        unknown = set(tm) - {"id", "source", "subject", "predicateObjects"}
        if unknown:
            raise MappingLoadError(f"{path}: unknown key {sorted(unknown)[0]!r}")
        if tm.get("id") in seen_maps:
            raise MappingLoadError(f"{path}.id: duplicate triples map id")
        seen_maps.add(tm.get("id"))
        if tm.get("source") not in seen_sources:
            raise MappingLoadError(f"{path}.source: dangling source reference {tm.get('source')!r}")
        subj_obj = tm.get("subject")
        if subj_obj is None:
            raise MappingLoadError(f"{path}.subject: required")
        classes = tuple(
            _expand_curie(c, prefixes, f"{path}.subject.classes[{j}]")
            for j, c in enumerate(subj_obj.get("classes", []))
        )
        subj_tm = _load_term_map(
            {k: v for k, v in subj_obj.items() if k != "classes"},
            prefixes, f"{path}.subject", "subject", registry,
        )
        poms = []
        for j, pom in enumerate(tm.get("predicateObjects", [])):
            ppath = f"{path}.predicateObjects[{j}]"
            unknown = set(pom) - {"predicate", "object", "join"}
            if unknown:
                raise MappingLoadError(f"{ppath}: unknown key {sorted(unknown)[0]!r}")
            predicate = _expand_curie(pom.get("predicate", ""), prefixes, f"{ppath}.predicate")
            obj_tm = _load_term_map(pom.get("object", {}), prefixes, f"{ppath}.object", "object", registry)
            join = None
            if "join" in pom:
                if obj_tm.kind != "parent":
                    raise MappingLoadError(f"{ppath}.join: join requires object.parentMap")
                jc = pom["join"]
                if set(jc) - {"child", "parent"} or "child" not in jc or "parent" not in jc:
                    raise MappingLoadError(f"{ppath}.join: expected {{child, parent}}")
                join = JoinCondition(obj_tm.parent_map, jc["child"], jc["parent"])
            elif obj_tm.kind == "parent":
                raise MappingLoadError(f"{ppath}.object: parentMap requires a join condition")
            poms.append(PredicateObjectMap(predicate, obj_tm, join))
        maps.append(TriplesMap(tm.get("id", f"tm{i}"), tm["source"], SubjectMap(subj_tm, classes), tuple(poms)))

    doc = MappingDocument(dict(prefixes), tuple(sources), tuple(maps))
    _check_references(doc, known_columns)
    return doc


def _term_map_columns(tm: TermMap) -> list[str]:
    cols = []
    if tm.kind == "reference":
        cols.append(tm.reference)
    elif tm.kind == "template":
        cols.extend(template_columns(tm.template))
    elif tm.kind == "function":
        for a in tm.args:
            cols.extend(_term_map_columns(a))
    return cols


def _check_references(doc: MappingDocument, known_columns: dict[str, set[str]] | None) -> None:
    map_ids = {tm.id for tm in doc.triples_maps}
    # dangling parent references and cyclic joins
    edges: dict[str, set[str]] = {tm.id: set() for tm in doc.triples_maps}
    for i, tm in enumerate(doc.triples_maps):
        for j, pom in enumerate(tm.predicate_objects):
            if pom.join:
                path = f"triplesMaps[{i}].predicateObjects[{j}].join"
                if pom.join.parent_map not in map_ids:
                    raise MappingLoadError(
                        f"{path}: dangling reference to triples map {pom.join.parent_map!r}"
                    )
                edges[tm.id].add(pom.join.parent_map)
    # cycle check over join edges
    state: dict[str, int] = {}

    def visit(node: str, trail: list[str]):
        state[node] = 1
        for nxt in edges[node]:
            if state.get(nxt) == 1:
                raise MappingLoadError(f"cyclic join involving {' -> '.join(trail + [nxt])}")
            if state.get(nxt, 0) == 0:
                visit(nxt, trail + [nxt])
        state[node] = 2

    for tm_id in edges:
        if state.get(tm_id, 0) == 0:
            visit(tm_id, [tm_id])

    if known_columns is not None:
        for i, tm in enumerate(doc.triples_maps):
            table = doc.source(tm.source).table
            cols = known_columns.get(table, set())
            for col in _term_map_columns(tm.subject.term):
                if col not in cols:
                    raise MappingLoadError(
                        f"triplesMaps[{i}].subject: unknown column {col!r}"
                    )
            for j, pom in enumerate(tm.predicate_objects):
                for col in _term_map_columns(pom.object):
                    if col not in cols:
                        raise MappingLoadError(
                            f"triplesMaps[{i}].predicateObjects[{j}]: unknown column {col!r}"
                        )


@dataclass
class MaterializationReport:
    skipped: list[dict] = field(default_factory=list)

    def record_skip(self, map_id: str, row: int, reason: str) -> None:
        self.skipped.append({"triplesMap": map_id, "row": row, "reason": reason})

    def to_json(self) -> dict:
        return {"skipped": sorted(self.skipped, key=lambda s: (s["triplesMap"], s["row"], s["reason"]))}


def _string_values(
    tm: TermMap, record: Record, registry: FunctionRegistry
) -> list[str] | None:
    """Raw string values a term map yields for a record; None = absent."""
    if tm.kind == "reference":
        values = record.get(tm.reference)
        return values if values else None
    if tm.kind == "template":
        expanded = expand_template(tm.template, record, encode=tm.term_type == "iri")
        return None if expanded is None else [expanded]
    if tm.kind == "function":
        collected: list[str] = []
        for arg in tm.args:
            vals = _string_values(arg, record, registry) if arg.kind != "constant" else (
                [arg.constant.value if isinstance(arg.constant, Iri) else arg.constant.lexical]
            )
            if vals is None:
                return None
            collected.extend(vals)
        result = registry.resolve(tm.function)(collected)
        return result if result else None
    raise ValueError(f"no string values for term map kind {tm.kind!r}")


def eval_term_map(
    tm: TermMap,
    record: Record,
    registry: FunctionRegistry,
    bnode_label: str | None = None,
) -> list[Term] | None:
    """Evaluate a term map to concrete terms (fan-out for multivalued refs).

    Returns None when any referenced value is absent: the corresponding
    triple is simply not generated.
    """
    if tm.kind == "constant":
        return [tm.constant]
    if tm.kind == "parent":
        raise ValueError("parent term maps are evaluated via their join")
    if tm.term_type == "blank":
        return [BlankNode(bnode_label)]
    values = _string_values(tm, record, registry)
    if values is None:
        return None
    terms: list[Term] = []
    for v in values:
        if tm.term_type == "iri":
            terms.append(make_iri(v))
        else:
            terms.append(Literal(v, tm.datatype or Iri(XSD_STRING), tm.language))
    return terms


def _subject_for_row(
    tm: TriplesMap, map_index: int, row_index: int, record: Record, registry: FunctionRegistry
) -> Term | None:
    label = f"b{map_index}_{row_index}"
    terms = eval_term_map(tm.subject.term, record, registry, bnode_label=label)
    if not terms:
        return None
    return terms[0]


def _materialize_map(
    doc: MappingDocument,
    tm: TriplesMap,
    map_index: int,
    datasets: dict[str, list[Record]],
    registry: FunctionRegistry,
    report: MaterializationReport,
) -> set[Triple]:
    triples: set[Triple] = set()
    records = datasets.get(doc.source(tm.source).table, [])

    # pre-compute join indexes: parent column value -> parent subject terms
    join_indexes: dict[tuple[str, str], dict[str, list[Term]]] = {}
    for pom in tm.predicate_objects:
        if not pom.join:
            continue
        key = (pom.join.parent_map, pom.join.parent)
        if key in join_indexes:
            continue
        parent_tm = doc.triples_map(pom.join.parent_map)
        parent_index = next(
            i for i, m in enumerate(doc.triples_maps) if m.id == parent_tm.id
        )
        parent_records = datasets.get(doc.source(parent_tm.source).table, [])
        index: dict[str, list[Term]] = {}
        for pi, prec in enumerate(parent_records):
            subj = _subject_for_row(parent_tm, parent_index, pi, prec, registry)
            if subj is None:
                continue
            for v in prec.get(pom.join.parent):
                index.setdefault(v, []).append(subj)
        join_indexes[key] = index

    for ri, record in enumerate(records):
        subject = _subject_for_row(tm, map_index, ri, record, registry)
        if subject is None:
            report.record_skip(tm.id, ri, "subject not generated")
            continue
        for cls in tm.subject.classes:
            triples.add(Triple(subject, Iri(RDF_TYPE), cls))
        for pi, pom in enumerate(tm.predicate_objects):
            if pom.join:
                index = join_indexes[(pom.join.parent_map, pom.join.parent)]
                for v in record.get(pom.join.child):
                    for parent_subject in index.get(v, []):
                        triples.add(Triple(subject, pom.predicate, parent_subject))
                continue
            try:
                objects = eval_term_map(
                    pom.object, record, registry, bnode_label=f"b{map_index}_{ri}_o{pi}"
                )
            except FunctionRegistryError:
                raise
            except Exception as e:
                report.record_skip(tm.id, ri, f"{pom.predicate.value}: {e}")
                continue
            if objects is None:
                continue
            for obj in objects:
                triples.add(Triple(subject, pom.predicate, obj))
    return triples


def _check_functions_registered(doc: MappingDocument, registry: FunctionRegistry) -> None:
    def walk(tm: TermMap, path: str):
        if tm.kind == "function":
            if tm.function not in registry:
                raise FunctionRegistryError(
                    f"{path}: function {tm.function!r} not registered"
                )
            for i, a in enumerate(tm.args):
                walk(a, f"{path}.args[{i}]")

    for i, tm in enumerate(doc.triples_maps):
        walk(tm.subject.term, f"triplesMaps[{i}].subject")
        for j, pom in enumerate(tm.predicate_objects):
            walk(pom.object, f"triplesMaps[{i}].predicateObjects[{j}]")


def materialize(
    doc: MappingDocument,
    datasets: dict[str, list[Record]],
    registry: FunctionRegistry | None = None,
    parallel: bool = False,
    report: MaterializationReport | None = None,
) -> Graph:
    """Run every triples map over its records and merge into one graph.

    Triples maps are independent units of work; with parallel=True they
    run on a thread pool and the merged result is identical to the
    sequential run (set semantics deduplicate).
    """
    registry = registry if registry is not None else default_registry()
    report = report if report is not None else MaterializationReport()
    _check_functions_registered(doc, registry)

    graph = Graph(prefixes=dict(doc.prefixes))
    if parallel and len(doc.triples_maps) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(doc.triples_maps))) as pool:
            futures = [
                pool.submit(_materialize_map, doc, tm, i, datasets, registry, report)
                for i, tm in enumerate(doc.triples_maps)
            ]
            for fut in futures:
                graph.triples |= fut.result()
    else:
        for i, tm in enumerate(doc.triples_maps):
            graph.triples |= _materialize_map(doc, tm, i, datasets, registry, report)
    return graph
