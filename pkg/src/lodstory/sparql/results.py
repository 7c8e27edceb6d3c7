"""SPARQL 1.1 Query Results JSON serialization."""

from __future__ import annotations

import json

from ..rdf import BlankNode, Iri, Literal, Term, XSD_STRING, RDF_LANGSTRING
from .evaluate import ResultSet


def term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    obj: dict = {"type": "literal", "value": term.lexical}
    if term.language is not None:
        obj["xml:lang"] = term.language
    elif term.datatype.value not in (XSD_STRING,):
        obj["datatype"] = term.datatype.value
    return obj


def results_to_dict(rs: ResultSet) -> dict:
    bindings = []
    for row in rs.rows:
        # variable order preserved; unbound variables omitted from the object
        binding = {
            v.name: term_to_json(row[v]) for v in rs.variables if v in row
        }
        bindings.append(binding)
    return {
        "head": {"vars": [v.name for v in rs.variables]},
        "results": {"bindings": bindings},
    }


def serialize_results_json(rs: ResultSet) -> str:
    return json.dumps(results_to_dict(rs), ensure_ascii=False)
