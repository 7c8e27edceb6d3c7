"""Brute-force SPARQL oracle, independent of the engine's evaluator.

Enumerates every assignment of query variables over the graph's terms and
checks pattern satisfaction directly.  Deliberately naive: correctness by
exhaustion, used to cross-check the production evaluator.
"""

from __future__ import annotations

import itertools
import re

from lodstory.rdf import BlankNode, Graph, Iri, Literal, XSD
from lodstory.sparql.parser import Expression, GroupPattern, Query, TriplePattern, Variable

_NUMERIC = {
    XSD + "integer", XSD + "decimal", XSD + "double", XSD + "float",
    XSD + "int", XSD + "long", XSD + "short", XSD + "byte",
    XSD + "nonNegativeInteger", XSD + "positiveInteger",
    XSD + "negativeInteger", XSD + "nonPositiveInteger",
    XSD + "unsignedInt", XSD + "unsignedLong",
}


def _graph_terms(graph: Graph):
    terms = set()
    for t in graph.triples:
        terms.update((t.subject, t.predicate, t.object))
    return sorted(terms, key=repr)


def _vars_of(group: GroupPattern):
    out = set()
    for p in group.patterns:
        for slot in (p.subject, p.predicate, p.object):
            if isinstance(slot, Variable):
                out.add(slot)
    return out


def _resolve(slot, assignment):
    return assignment.get(slot, slot) if isinstance(slot, Variable) else slot


def _bgp_satisfied(patterns, assignment, graph):
    for p in patterns:
        s = _resolve(p.subject, assignment)
        pr = _resolve(p.predicate, assignment)
        o = _resolve(p.object, assignment)
        if not any(t.subject == s and t.predicate == pr and t.object == o for t in graph.triples):
            return False
    return True


class _Err(Exception):
    pass


def _num(term):
    if isinstance(term, Literal) and term.language is None and term.datatype.value in _NUMERIC:
        try:
            return float(term.lexical)
        except ValueError:
            return None
    return None


def _lex(term):
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return term.label
    return term.lexical


def _expr(e: Expression, binding):
    if e.op == "var":
        if e.value not in binding:
            raise _Err()
        return binding[e.value]
    if e.op == "term":
        return e.value
    if e.op == "bound":
        return e.args[0].value in binding
    if e.op == "not":
        return not _ebv(_expr(e.args[0], binding))
    if e.op in ("and", "or"):
        vals = []
        for a in e.args:
            try:
                vals.append(_ebv(_expr(a, binding)))
            except _Err:
                vals.append(None)
        if e.op == "and":
            if False in vals:
                return False
            if None in vals:
                raise _Err()
            return True
        if True in vals:
            return True
        if None in vals:
            raise _Err()
        return False
    if e.op == "str":
        v = _expr(e.args[0], binding)
        if isinstance(v, bool):
            return Literal("true" if v else "false")
        return Literal(_lex(v))
    if e.op == "lang":
        v = _expr(e.args[0], binding)
        if not isinstance(v, Literal):
            raise _Err()
        return Literal(v.language or "")
    if e.op == "regex":
        text = _expr(e.args[0], binding)
        pat = _expr(e.args[1], binding)
        if not isinstance(text, Literal) or not isinstance(pat, Literal):
            raise _Err()
        flags = 0
        if len(e.args) == 3:
            f = _expr(e.args[2], binding)
            if isinstance(f, Literal) and "i" in f.lexical:
                flags = re.IGNORECASE
        try:
            return re.search(pat.lexical, text.lexical, flags) is not None
        except re.error:
            raise _Err() from None
    if e.op.startswith("cmp:"):
        op = e.op[4:]
        a, b = _expr(e.args[0], binding), _expr(e.args[1], binding)
        if isinstance(a, bool):
            a = Literal("true" if a else "false", Iri(XSD + "boolean"))
        if isinstance(b, bool):
            b = Literal("true" if b else "false", Iri(XSD + "boolean"))
        na, nb = _num(a), _num(b)
        if na is not None and nb is not None:
            x, y = na, nb
        elif op in ("=", "!="):
            return (a == b) if op == "=" else (a != b)
        else:
            if type(a) is not type(b):
                raise _Err()
            x, y = _lex(a), _lex(b)
        return {"=": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]
    raise _Err()


def _ebv(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, Literal):
        if v.datatype.value == XSD + "boolean":
            return v.lexical == "true"
        n = _num(v)
        if n is not None:
            return n != 0
        return len(v.lexical) > 0
    raise _Err()


def _passes_filters(filters, binding):
    for f in filters:
        try:
            if not _ebv(_expr(f, binding)):
                return False
        except _Err:
            return False
    return True


def _enumerate_group(group: GroupPattern, graph: Graph, base: dict):
    """All solutions of a group given fixed outer bindings, by enumeration."""
    terms = _graph_terms(graph)
    free = sorted(_vars_of(GroupPattern(patterns=group.patterns)) - set(base), key=lambda v: v.name)
    bgp_solutions = []
    if group.patterns:
        for combo in itertools.product(terms, repeat=len(free)):
            assignment = dict(base)
            assignment.update(zip(free, combo))
            if _bgp_satisfied(group.patterns, assignment, graph):
                bgp_solutions.append(assignment)
    else:
        bgp_solutions = [dict(base)]

    for optional in group.optionals:
        extended = []
        for sol in bgp_solutions:
            matches = _enumerate_group(optional, graph, sol)
            if matches:
                extended.extend(matches)
            else:
                extended.append(sol)
        bgp_solutions = extended

    return [s for s in bgp_solutions if _passes_filters(group.filters, s)]


def oracle_evaluate(query: Query, graph: Graph):
    """Solution multiset (before DISTINCT/ORDER/slice) as projected rows."""
    solutions = _enumerate_group(query.where, graph, {})
    if query.aggregates or query.group_by:
        grouped = {}
        for sol in solutions:
            key = tuple(sol.get(v) for v in query.group_by)
            grouped.setdefault(key, []).append(sol)
        out = []
        for key, members in grouped.items():
            row = {v: t for v, t in zip(query.group_by, key) if t is not None}
            for agg in query.aggregates:
                if agg.variable is None:
                    values = [tuple(sorted(m.items(), key=repr)) for m in members]
                else:
                    values = [m[agg.variable] for m in members if agg.variable in m]
                count = len(set(values)) if agg.distinct else len(values)
                row[agg.alias] = Literal(str(count), Iri(XSD + "integer"))
            out.append(row)
        solutions = out
    if query.star:
        variables = sorted({v for s in solutions for v in s}, key=lambda v: v.name)
    else:
        variables = query.variables
    return [{v: s[v] for v in variables if v in s} for s in solutions]


def as_multiset(rows):
    return sorted(
        (tuple(sorted(((v.name, r[v]) for v in r), key=lambda kv: kv[0])) for r in rows),
        key=repr,
    )
