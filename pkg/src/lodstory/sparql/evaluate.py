"""Evaluation of parsed SELECT queries over an in-memory graph.

Semantics follow the standard restricted to the supported subset:
compatible-mapping joins for basic graph patterns, OPTIONAL as left
outer join, filter errors eliminating the candidate solution, stable
ORDER BY (unbound first), DISTINCT on whole rows, LIMIT/OFFSET last.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..rdf import XSD, BlankNode, Graph, Iri, Literal, Term, Triple, triple_line
from .parser import (
    Aggregate,
    Expression,
    GroupPattern,
    Query,
    TriplePattern,
    Variable,
)

Solution = dict[Variable, Term]

_NUMERIC_DATATYPES = {
    XSD + "integer", XSD + "decimal", XSD + "double", XSD + "float",
    XSD + "int", XSD + "long", XSD + "short", XSD + "byte",
    XSD + "nonNegativeInteger", XSD + "positiveInteger",
    XSD + "negativeInteger", XSD + "nonPositiveInteger",
    XSD + "unsignedInt", XSD + "unsignedLong",
}


@dataclass
class ResultSet:
    variables: list[Variable]
    rows: list[Solution] = field(default_factory=list)


class _FilterError(Exception):
    """SPARQL expression error; eliminates the candidate solution."""


def _numeric_value(term: Term) -> float | None:
    if not isinstance(term, Literal) or term.language is not None:
        return None
    if term.datatype.value not in _NUMERIC_DATATYPES:
        return None
    try:
        return float(term.lexical)
    except ValueError:
        return None


def _lexical(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return term.label
    return term.lexical


def _match_pattern(
    pattern: TriplePattern, triple: Triple, binding: Solution
) -> Solution | None:
    out = dict(binding)
    for slot, value in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(slot, Variable):
            bound = out.get(slot)
            if bound is None:
                out[slot] = value
            elif bound != value:
                return None
        elif slot != value:
            return None
    return out


class _GraphIndex:
    """Predicate index over the immutable graph snapshot."""

    def __init__(self, graph: Graph):
        # canonical line order keeps evaluation deterministic across runs
        self.triples = sorted(graph.triples, key=triple_line)
        self.by_predicate: dict[Iri, list[Triple]] = {}
        for t in self.triples:
            self.by_predicate.setdefault(t.predicate, []).append(t)

    def candidates(self, pattern: TriplePattern, binding: Solution) -> list[Triple]:
        p = pattern.predicate
        if isinstance(p, Variable):
            p = binding.get(p, p)
        if isinstance(p, Iri):
            return self.by_predicate.get(p, [])
        return self.triples


def _eval_bgp(
    patterns: list[TriplePattern], index: _GraphIndex, seeds: list[Solution]
) -> list[Solution]:
    solutions = seeds
    for pattern in patterns:
        extended: list[Solution] = []
        for binding in solutions:
            for triple in index.candidates(pattern, binding):
                merged = _match_pattern(pattern, triple, binding)
                if merged is not None:
                    extended.append(merged)
        solutions = extended
    return solutions


def _eval_expression(expr: Expression, binding: Solution):
    """Returns a Term or a Python bool; raises _FilterError on SPARQL error."""
    if expr.op == "var":
        term = binding.get(expr.value)
        if term is None:
            raise _FilterError("unbound variable")
        return term
    if expr.op == "term":
        return expr.value
    if expr.op == "bound":
        return expr.args[0].value in binding
    if expr.op == "not":
        return not _ebv(_eval_expression(expr.args[0], binding))
    if expr.op == "and":
        # error-tolerant per SPARQL: false && error = false
        values = []
        for a in expr.args:
            try:
                values.append(_ebv(_eval_expression(a, binding)))
            except _FilterError:
                values.append(None)
        if False in values:
            return False
        if None in values:
            raise _FilterError("error in &&")
        return True
    if expr.op == "or":
        values = []
        for a in expr.args:
            try:
                values.append(_ebv(_eval_expression(a, binding)))
            except _FilterError:
                values.append(None)
        if True in values:
            return True
        if None in values:
            raise _FilterError("error in ||")
        return False
    if expr.op == "str":
        value = _eval_expression(expr.args[0], binding)
        if isinstance(value, bool):
            value = Literal("true" if value else "false", Iri(XSD + "boolean"))
        return Literal(_lexical(value))
    if expr.op == "lang":
        value = _eval_expression(expr.args[0], binding)
        if not isinstance(value, Literal):
            raise _FilterError("lang() of non-literal")
        return Literal(value.language or "")
    if expr.op == "regex":
        import re as _re

        text = _eval_expression(expr.args[0], binding)
        pattern = _eval_expression(expr.args[1], binding)
        if not isinstance(text, Literal) or not isinstance(pattern, Literal):
            raise _FilterError("regex() needs string arguments")
        flags = 0
        if len(expr.args) == 3:
            flag_lit = _eval_expression(expr.args[2], binding)
            if isinstance(flag_lit, Literal) and "i" in flag_lit.lexical:
                flags |= _re.IGNORECASE
        try:
            return _re.search(pattern.lexical, text.lexical, flags) is not None
        except _re.error:
            raise _FilterError("invalid regex") from None
    if expr.op.startswith("cmp:"):
        op = expr.op[4:]
        left = _eval_expression(expr.args[0], binding)
        right = _eval_expression(expr.args[1], binding)
        return _compare(op, left, right)
    raise _FilterError(f"unknown expression {expr.op}")


def _ebv(value) -> bool:
    """Effective boolean value."""
    if isinstance(value, bool):
        return value
    if isinstance(value, Literal):
        if value.datatype.value == XSD + "boolean":
            return value.lexical == "true"
        num = _numeric_value(value)
        if num is not None:
            return num != 0
        return len(value.lexical) > 0
    raise _FilterError("no effective boolean value")


def _compare(op: str, left, right) -> bool:
    if isinstance(left, bool):
        left = Literal("true" if left else "false", Iri(XSD + "boolean"))
    if isinstance(right, bool):
        right = Literal("true" if right else "false", Iri(XSD + "boolean"))
    ln, rn = _numeric_value(left), _numeric_value(right)
    if ln is not None and rn is not None:
        a, b = ln, rn
    elif op in ("=", "!="):
        # term equality for non-numeric operands
        equal = left == right
        return equal if op == "=" else not equal
    else:
        if type(left) is not type(right):
            raise _FilterError("incomparable terms")
        a, b = _lexical(left), _lexical(right)
    return {
        "=": a == b,
        "!=": a != b,
        "<": a < b,
        ">": a > b,
        "<=": a <= b,
        ">=": a >= b,
    }[op]


def _apply_filters(solutions: list[Solution], filters: list[Expression]) -> list[Solution]:
    out = []
    for binding in solutions:
        keep = True
        for f in filters:
            try:
                if not _ebv(_eval_expression(f, binding)):
                    keep = False
                    break
            except _FilterError:
                keep = False
                break
        if keep:
            out.append(binding)
    return out


def _compatible(a: Solution, b: Solution) -> bool:
    return all(a[v] == b[v] for v in a.keys() & b.keys())


def _eval_group(
    group: GroupPattern, index: _GraphIndex, seeds: list[Solution]
) -> list[Solution]:
    solutions = _eval_bgp(group.patterns, index, seeds)
    for optional in group.optionals:
        extended: list[Solution] = []
        for binding in solutions:
            matches = _eval_group(optional, index, [binding])
            matches = [m for m in matches if _compatible(binding, m)]
            if matches:
                extended.extend(matches)
            else:
                extended.append(binding)
        solutions = extended
    return _apply_filters(solutions, group.filters)


def _group_solutions(
    solutions: list[Solution], query: Query
) -> list[Solution]:
    groups: dict[tuple, list[Solution]] = {}
    order: list[tuple] = []
    for binding in solutions:
        key = tuple(binding.get(v) for v in query.group_by)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(binding)
    out: list[Solution] = []
    for key in order:
        members = groups[key]
        row: Solution = {}
        for v, term in zip(query.group_by, key):
            if term is not None:
                row[v] = term
        for agg in query.aggregates:
            row[agg.alias] = _eval_aggregate(agg, members)
        out.append(row)
    return out


def _eval_aggregate(agg: Aggregate, members: list[Solution]) -> Literal:
    if agg.variable is None:
        values = members
        count = len(values)
        if agg.distinct:
            count = len({tuple(sorted(m.items())) for m in members})
    else:
        bound = [m[agg.variable] for m in members if agg.variable in m]
        count = len(set(bound)) if agg.distinct else len(bound)
    return Literal(str(count), Iri(XSD + "integer"))


class _Descending:
    """Inverts comparison for DESC sort keys while keeping the sort stable."""

    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key

    def __lt__(self, other: "_Descending") -> bool:
        return other.key < self.key

    def __eq__(self, other) -> bool:
        return self.key == other.key


def _sort_key_for(term: Term | None):
    # unbound first, then by kind, then numeric-aware value
    if term is None:
        return (0, 0, 0.0, "")
    num = _numeric_value(term)
    kind = {BlankNode: 1, Iri: 2, Literal: 3}[type(term)]
    if num is not None:
        return (1, kind, 0, (0, num, _lexical(term)))
    return (1, kind, 1, (1, 0.0, _lexical(term)))


def evaluate(query: Query, graph: Graph) -> ResultSet:
    index = _GraphIndex(graph)
    solutions = _eval_group(query.where, index, [{}])

    if query.aggregates or query.group_by:
        solutions = _group_solutions(solutions, query)

    if query.star:
        seen: list[Variable] = []
        for binding in solutions:
            for v in sorted(binding, key=lambda v: v.name):
                if v not in seen:
                    seen.append(v)
        variables = seen
    else:
        variables = list(query.variables)

    projected = [
        {v: binding[v] for v in variables if v in binding} for binding in solutions
    ]

    if query.order_by:
        def one_key(row: Solution, expr: Expression):
            try:
                value = _eval_expression(expr, row)
            except _FilterError:
                value = None
            if isinstance(value, bool):
                value = Literal("true" if value else "false", Iri(XSD + "boolean"))
            return _sort_key_for(value)

        def composite(row: Solution):
            parts = []
            for expr, asc in query.order_by:
                k = one_key(row, expr)
                parts.append(k if asc else _Descending(k))
            return parts

        projected.sort(key=composite)

    if query.distinct:
        seen_rows = set()
        deduped = []
        for row in projected:
            key_row = tuple(sorted(((v.name, row[v]) for v in row)))
            if key_row not in seen_rows:
                seen_rows.add(key_row)
                deduped.append(row)
        projected = deduped

    offset = query.offset or 0
    if offset:
        projected = projected[offset:]
    if query.limit is not None:
        projected = projected[: query.limit]

    return ResultSet(variables=variables, rows=projected)
