"""SPARQL SELECT subset: parser, evaluator, and JSON results serializer."""

from .parser import (
    Query,
    SparqlSyntaxError,
    UnsupportedFeatureError,
    Variable,
    parse_query,
)
from .evaluate import ResultSet, evaluate
from .results import serialize_results_json

__all__ = [
    "Query",
    "ResultSet",
    "SparqlSyntaxError",
    "UnsupportedFeatureError",
    "Variable",
    "evaluate",
    "parse_query",
    "serialize_results_json",
]
