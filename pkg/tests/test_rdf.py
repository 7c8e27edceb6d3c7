import pytest
from hypothesis import given, settings, strategies as st

from lodstory.rdf import (
    Graph,
    InvalidIriError,
    Iri,
    Literal,
    BlankNode,
    NTriplesParseError,
    RdfError,
    Triple,
    XSD_STRING,
    RDF_LANGSTRING,
    graph_insert,
    make_iri,
    make_literal,
    parse_ntriples,
    serialize_ntriples,
    serialize_turtle,
)


class TestMakeIri:
    def test_chad_ap_base(self):
        iri = make_iri("https://w3id.org/dharc/ontology/chad-ap")
        assert iri.value == "https://w3id.org/dharc/ontology/chad-ap"

    def test_empty(self):
        with pytest.raises(InvalidIriError):
            make_iri("")

    def test_space(self):
        with pytest.raises(InvalidIriError, match="position 18"):
            make_iri("http://example.o/a b")

    def test_relative(self):
        with pytest.raises(InvalidIriError, match="scheme"):
            make_iri("/objects/OBJ001")

    @pytest.mark.parametrize("bad", ["<", ">", '"', "{", "}", "|", "^", "\\", "`"])
    def test_forbidden_characters(self, bad):
        with pytest.raises(InvalidIriError):
            make_iri(f"http://e.o/{bad}")


class TestMakeLiteral:
    def test_default_datatype(self):
        lit = make_literal("wood")
        assert lit.datatype.value == XSD_STRING
        assert lit.language is None

    def test_typed(self):
        lit = make_literal("1580", Iri("http://www.w3.org/2001/XMLSchema#gYear"))
        assert lit.datatype.value.endswith("gYear")

    def test_language_tagged(self):
        lit = make_literal("statua", language="it")
        assert lit.datatype.value == RDF_LANGSTRING
        assert lit.language == "it"

    def test_language_with_wrong_datatype(self):
        with pytest.raises(RdfError):
            make_literal("x", Iri(XSD_STRING), "it")

    def test_langstring_without_language(self):
        with pytest.raises(RdfError):
            make_literal("x", Iri(RDF_LANGSTRING))


def triple(s="http://e.o/s", p="http://e.o/p", o="wood"):
    obj = Literal(o) if not o.startswith("http") else Iri(o)
    return Triple(Iri(s), Iri(p), obj)


class TestGraphInsert:
    def test_insert_new(self):
        g = Graph()
        assert graph_insert(g, triple()) is True
        assert len(g) == 1

    def test_insert_duplicate(self):
        g = Graph()
        t = triple()
        graph_insert(g, t)
        assert graph_insert(g, t) is False
        assert len(g) == 1

    def test_insert_distinct(self):
        g = Graph()
        graph_insert(g, triple())
        assert graph_insert(g, triple(o="paper")) is True
        assert len(g) == 2

    @given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("pq"), st.sampled_from("xyz"))))
    def test_set_semantics(self, specs):
        g = Graph()
        triples = [
            Triple(Iri(f"http://e.o/{s}"), Iri(f"http://e.o/{p}"), Literal(o))
            for s, p, o in specs
        ]
        for t in triples:
            graph_insert(g, t)
        assert len(g) == len(set(triples))


class TestSerializeNTriples:
    def test_single_triple(self):
        g = Graph()
        g.insert(triple())
        assert serialize_ntriples(g) == '<http://e.o/s> <http://e.o/p> "wood" .\n'

    def test_empty_graph(self):
        assert serialize_ntriples(Graph()) == ""

    def test_newline_escaped(self):
        # escape table of the N-Triples grammar: LF -> \n, and friends
        g = Graph()
        g.insert(triple(o="a\nb"))
        assert '"a\\nb"' in serialize_ntriples(g)

    @pytest.mark.parametrize(
        "raw,escaped",
        [("a\\b", "a\\\\b"), ('say "hi"', 'say \\"hi\\"'), ("a\rb", "a\\rb"), ("a\tb", "a\\tb")],
    )
    def test_escape_table(self, raw, escaped):
        g = Graph()
        g.insert(triple(o=raw))
        assert f'"{escaped}"' in serialize_ntriples(g)

    def test_canonical_across_insertion_orders(self):
        t1, t2, t3 = triple(o="a"), triple(o="b"), triple(o="c")
        g1, g2 = Graph(), Graph()
        for t in (t1, t2, t3):
            g1.insert(t)
        for t in (t3, t1, t2):
            g2.insert(t)
        assert serialize_ntriples(g1) == serialize_ntriples(g2)
        lines = serialize_ntriples(g1).splitlines()
        assert lines == sorted(lines)


class TestParseNTriples:
    def test_bad_line(self):
        with pytest.raises(NTriplesParseError, match="line 1"):
            parse_ntriples("bad line")

    def test_empty(self):
        assert len(parse_ntriples("")) == 0

    def test_line_number_in_error(self):
        text = '<http://e.o/s> <http://e.o/p> "ok" .\nnonsense\n'
        with pytest.raises(NTriplesParseError, match="line 2"):
            parse_ntriples(text)

    def test_literal_subject_rejected(self):
        with pytest.raises(NTriplesParseError):
            parse_ntriples('"lit" <http://e.o/p> "o" .')

    def test_typed_and_tagged_literals(self):
        text = (
            '<http://e.o/s> <http://e.o/p> "1580"^^<http://www.w3.org/2001/XMLSchema#gYear> .\n'
            '<http://e.o/s> <http://e.o/p> "statua"@it .\n'
            "<http://e.o/s> <http://e.o/p> _:b0 .\n"
        )
        g = parse_ntriples(text)
        assert len(g) == 3
        assert any(isinstance(t.object, BlankNode) for t in g)

    def test_eight_triple_fixture_round_trip(self):
        g = Graph()
        for i in range(4):
            g.insert(triple(s=f"http://e.o/s{i}", o=f"v{i}"))
            g.insert(triple(s=f"http://e.o/s{i}", o=f"http://e.o/o{i}"))
        assert len(g) == 8
        reparsed = parse_ntriples(serialize_ntriples(g))
        assert reparsed.triples == g.triples


_literal_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=20
)
_iri_suffix = st.text(alphabet="abcxyz0123456789", min_size=1, max_size=6)


def _terms():
    iri = _iri_suffix.map(lambda s: Iri("http://e.o/" + s))
    bnode = st.from_regex(r"[A-Za-z0-9_]{1,6}", fullmatch=True).map(BlankNode)
    plain = _literal_text.map(Literal)
    tagged = _literal_text.map(lambda s: Literal(s, Iri(RDF_LANGSTRING), "en"))
    typed = _literal_text.map(
        lambda s: Literal(s, Iri("http://www.w3.org/2001/XMLSchema#token"))
    )
    return iri, bnode, plain, tagged, typed


def _triples():
    iri, bnode, plain, tagged, typed = _terms()
    subject = st.one_of(iri, bnode)
    obj = st.one_of(iri, bnode, plain, tagged, typed)
    return st.builds(Triple, subject, iri, obj)


@settings(max_examples=300, deadline=None)
@given(st.lists(_triples(), max_size=50))
def test_round_trip_property(triples):
    g = Graph()
    for t in triples:
        g.insert(t)
    reparsed = parse_ntriples(serialize_ntriples(g))
    assert reparsed.triples == g.triples


class TestSerializeTurtle:
    def test_prefix_substitution(self):
        g = Graph()
        g.bind("ex", "http://e.o/")
        g.insert(triple())
        out = serialize_turtle(g)
        assert "@prefix ex: <http://e.o/> ." in out
        assert 'ex:s ex:p "wood" .' in out

    def test_empty_graph_header_only(self):
        g = Graph()
        g.bind("ex", "http://e.o/")
        assert serialize_turtle(g).strip() == "@prefix ex: <http://e.o/> ."

    def test_unprefixed_iri_in_angle_brackets(self):
        g = Graph()
        g.bind("ex", "http://e.o/")
        g.insert(triple(s="http://other.org/s"))
        assert "<http://other.org/s>" in serialize_turtle(g)
