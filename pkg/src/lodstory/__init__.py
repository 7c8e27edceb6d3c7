"""Catalog tables to RDF knowledge graph, SPARQL serving, and data stories."""

__version__ = "0.1.0"
