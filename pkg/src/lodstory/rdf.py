"""RDF terms, triples, and graphs, with N-Triples round-trip and Turtle output.

The canonical serialization is sorted N-Triples: one line per triple,
lines ordered lexicographically, so equal graphs always serialize to
byte-identical text regardless of insertion order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_STRING = XSD + "string"
RDF_LANGSTRING = RDF_NS + "langString"
RDF_TYPE = RDF_NS + "type"


class RdfError(Exception):
    pass


class InvalidIriError(RdfError):
    pass


class NTriplesParseError(RdfError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI_FORBIDDEN = set(' \t\n\r<>"{}|^`\\')
_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_BNODE_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")
_LANG_RE = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")


@dataclass(frozen=True, order=True)
class Iri:
    value: str


@dataclass(frozen=True, order=True)
class BlankNode:
    label: str


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: Iri = Iri(XSD_STRING)
    language: str | None = None


Term = Iri | BlankNode | Literal


@dataclass(frozen=True, order=True)
class Triple:
    subject: Iri | BlankNode
    predicate: Iri
    object: Term


def make_iri(s: str) -> Iri:
    """Validate and build an absolute IRI.

    Validation is syntactic (character classes plus a scheme check), not
    the full RFC 3987 grammar; that is enough for catalog identifiers.
    """
    if not s:
        raise InvalidIriError("empty IRI")
    for pos, ch in enumerate(s):
        if ch in _IRI_FORBIDDEN or ord(ch) < 0x20:
            raise InvalidIriError(f"forbidden character {ch!r} at position {pos}")
    if not _SCHEME_RE.match(s):
        raise InvalidIriError(f"missing scheme in {s!r}")
    return Iri(s)


def make_bnode(label: str) -> BlankNode:
    if not _BNODE_LABEL_RE.match(label):
        raise RdfError(f"invalid blank node label {label!r}")
    return BlankNode(label)


def make_literal(
    lexical: str, datatype: Iri | None = None, language: str | None = None
) -> Literal:
    if language is not None:
        if not _LANG_RE.match(language):
            raise RdfError(f"invalid language tag {language!r}")
        if datatype is not None and datatype.value != RDF_LANGSTRING:
            raise RdfError("language-tagged literal must have rdf:langString datatype")
        return Literal(lexical, Iri(RDF_LANGSTRING), language)
    if datatype is None:
        return Literal(lexical)
    if datatype.value == RDF_LANGSTRING:
        raise RdfError("rdf:langString literal requires a language tag")
    return Literal(lexical, datatype)


def make_triple(subject: Iri | BlankNode, predicate: Iri, object: Term) -> Triple:
    if isinstance(subject, Literal):
        raise RdfError("literal not allowed as subject")
    if not isinstance(predicate, Iri):
        raise RdfError("predicate must be an IRI")
    return Triple(subject, predicate, object)


@dataclass
class Graph:
    triples: set[Triple] = field(default_factory=set)
    prefixes: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self.triples

    def __iter__(self):
        return iter(self.triples)

    def insert(self, t: Triple) -> bool:
        """Add a triple; True iff it was not already present."""
        if t in self.triples:
            return False
        self.triples.add(t)
        return True

    def bind(self, prefix: str, namespace: str) -> None:
        self.prefixes[prefix] = namespace


def graph_insert(graph: Graph, t: Triple) -> bool:
    return graph.insert(t)


def _escape_literal(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _term_nt(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    lex = _escape_literal(term.lexical)
    if term.language is not None:
        return f'"{lex}"@{term.language}'
    if term.datatype.value == XSD_STRING:
        return f'"{lex}"'
    return f'"{lex}"^^<{term.datatype.value}>'


def triple_line(t: Triple) -> str:
    return f"{_term_nt(t.subject)} {_term_nt(t.predicate)} {_term_nt(t.object)} ."


def serialize_ntriples(graph: Graph) -> str:
    """Canonical N-Triples: sorted lines, trailing newline, empty graph -> ''."""
    lines = sorted(triple_line(t) for t in graph.triples)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


class _LineCursor:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, msg: str):
        raise NTriplesParseError(msg, self.lineno)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def expect(self, ch: str):
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.error(f"expected {ch!r} at column {self.pos}")
        self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""


def _unescape(s: str, cur: _LineCursor) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(s):
            cur.error("dangling backslash in literal")
        esc = s[i + 1]
        simple = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\",
                  "b": "\b", "f": "\f", "'": "'"}
        if esc in simple:
            out.append(simple[esc])
            i += 2
        elif esc == "u":
            if i + 6 > len(s):
                cur.error("truncated \\u escape")
            out.append(chr(int(s[i + 2 : i + 6], 16)))
            i += 6
        elif esc == "U":
            if i + 10 > len(s):
                cur.error("truncated \\U escape")
            out.append(chr(int(s[i + 2 : i + 10], 16)))
            i += 10
        else:
            cur.error(f"unknown escape \\{esc}")
    return "".join(out)


def _parse_iri(cur: _LineCursor) -> Iri:
    cur.expect("<")
    end = cur.text.find(">", cur.pos)
    if end < 0:
        cur.error("unterminated IRI")
    raw = cur.text[cur.pos : end]
    cur.pos = end + 1
    try:
        return make_iri(raw)
    except InvalidIriError as e:
        cur.error(str(e))


def _parse_term(cur: _LineCursor) -> Term:
    ch = cur.peek()
    if ch == "<":
        return _parse_iri(cur)
    if ch == "_":
        cur.pos += 1
        cur.expect(":")
        m = re.match(r"[A-Za-z0-9_]+", cur.text[cur.pos :])
        if not m:
            cur.error("invalid blank node label")
        cur.pos += m.end()
        return BlankNode(m.group())
    if ch == '"':
        cur.pos += 1
        # scan to the closing unescaped quote
        i = cur.pos
        while True:
            if i >= len(cur.text):
                cur.error("unterminated literal")
            if cur.text[i] == "\\":
                i += 2
                continue
            if cur.text[i] == '"':
                break
            i += 1
        lex = _unescape(cur.text[cur.pos : i], cur)
        cur.pos = i + 1
        if cur.peek() == "@":
            cur.pos += 1
            m = re.match(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*", cur.text[cur.pos :])
            if not m:
                cur.error("invalid language tag")
            cur.pos += m.end()
            return Literal(lex, Iri(RDF_LANGSTRING), m.group())
        if cur.text.startswith("^^", cur.pos):
            cur.pos += 2
            dt = _parse_iri(cur)
            return Literal(lex, dt)
        return Literal(lex)
    cur.error(f"unexpected character {ch!r}")


def parse_ntriples(text: str) -> Graph:
    """Parse N-Triples text; inverse of serialize_ntriples on its output."""
    graph = Graph()
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cur = _LineCursor(line, lineno)
        cur.skip_ws()
        subject = _parse_term(cur)
        if isinstance(subject, Literal):
            cur.error("literal not allowed as subject")
        cur.skip_ws()
        predicate = _parse_term(cur)
        if not isinstance(predicate, Iri):
            cur.error("predicate must be an IRI")
        cur.skip_ws()
        obj = _parse_term(cur)
        cur.skip_ws()
        cur.expect(".")
        cur.skip_ws()
        if not cur.at_end() and cur.peek() != "#":
            cur.error("trailing content after '.'")
        graph.insert(Triple(subject, predicate, obj))
    return graph


_PN_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$")


def _term_turtle(term: Term, prefixes: dict[str, str]) -> str:
    if isinstance(term, Iri):
        for prefix, ns in sorted(prefixes.items(), key=lambda kv: -len(kv[1])):
            if term.value.startswith(ns):
                local = term.value[len(ns) :]
                if _PN_LOCAL_RE.match(local):
                    return f"{prefix}:{local}"
        return f"<{term.value}>"
    return _term_nt(term)


def serialize_turtle(graph: Graph) -> str:
    """Turtle output using the graph's declared prefixes; one triple per line."""
    out = []
    for prefix in sorted(graph.prefixes):
        out.append(f"@prefix {prefix}: <{graph.prefixes[prefix]}> .")
    if out:
        out.append("")
    lines = sorted(
        f"{_term_turtle(t.subject, graph.prefixes)} "
        f"{_term_turtle(t.predicate, graph.prefixes)} "
        f"{_term_turtle(t.object, graph.prefixes)} ."
        for t in graph.triples
    )
    out.extend(lines)
    return "\n".join(out) + "\n"
