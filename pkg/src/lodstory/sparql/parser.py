"""Recursive-descent parser for the supported SPARQL SELECT subset.

Supported: PREFIX declarations; SELECT [DISTINCT] with variables, * and
COUNT aggregates; basic graph patterns with ';' and ',' shorthand;
nested OPTIONAL groups (depth <= 3); FILTER with comparison and boolean
operators plus bound/regex/str/lang; GROUP BY; ORDER BY; LIMIT; OFFSET.

Anything outside the subset raises UnsupportedFeatureError naming the
construct, distinct from plain syntax errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..rdf import RDF_LANGSTRING, RDF_TYPE, XSD, Iri, Literal, Term


class SparqlSyntaxError(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class UnsupportedFeatureError(Exception):
    def __init__(self, feature: str):
        super().__init__(f"unsupported SPARQL feature: {feature}")
        self.feature = feature


MAX_OPTIONAL_DEPTH = 3

_UNSUPPORTED_QUERY_FORMS = {"CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR"}
_UNSUPPORTED_IN_GROUP = {"UNION", "BIND", "VALUES", "SERVICE", "MINUS", "GRAPH", "EXISTS"}
_UNSUPPORTED_AGGREGATES = {"SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT"}
_UNSUPPORTED_SOLUTION_MODS = {"HAVING", "FROM", "REDUCED"}


@dataclass(frozen=True, order=True)
class Variable:
    name: str


@dataclass(frozen=True)
class TriplePattern:
    subject: Term | Variable
    predicate: Term | Variable
    object: Term | Variable


@dataclass(frozen=True)
class Expression:
    """Filter expression node.

    op is one of: 'var', 'term', 'cmp:<op>', 'and', 'or', 'not',
    'bound', 'regex', 'str', 'lang'.
    """

    op: str
    args: tuple = ()
    value: object = None


@dataclass
class GroupPattern:
    patterns: list[TriplePattern] = field(default_factory=list)
    optionals: list["GroupPattern"] = field(default_factory=list)
    filters: list[Expression] = field(default_factory=list)


@dataclass(frozen=True)
class Aggregate:
    kind: str  # "count"
    variable: Variable | None  # None = COUNT(*)
    alias: Variable
    distinct: bool = False


@dataclass
class Query:
    variables: list[Variable]  # projection order; empty + star=True means SELECT *
    star: bool
    distinct: bool
    aggregates: list[Aggregate]
    where: GroupPattern
    group_by: list[Variable]
    order_by: list[tuple[Expression, bool]]  # (expr, ascending)
    limit: int | None
    offset: int | None
    prefixes: dict[str, str]


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<langtag>@[A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>[A-Za-z_][A-Za-z0-9_.-]*?:[A-Za-z0-9_][A-Za-z0-9_.-]*|[A-Za-z_][A-Za-z0-9_.-]*?:)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>\^\^|&&|\|\||!=|<=|>=|[{}().;,*=<>!\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, message: str):
        raise SparqlSyntaxError(message, self.tok.pos)

    def is_word(self, *words: str) -> bool:
        return self.tok.kind == "word" and self.tok.text.upper() in words

    def expect_word(self, word: str):
        if not self.is_word(word):
            self.error(f"expected {word}")
        self.advance()

    def expect_punct(self, text: str):
        if self.tok.kind != "punct" or self.tok.text != text:
            self.error(f"expected {text!r}")
        self.advance()

    def accept_punct(self, text: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == text:
            self.advance()
            return True
        return False

    def check_unsupported_word(self):
        if self.tok.kind == "word":
            up = self.tok.text.upper()
            if up in _UNSUPPORTED_IN_GROUP | _UNSUPPORTED_AGGREGATES | _UNSUPPORTED_SOLUTION_MODS:
                raise UnsupportedFeatureError(up)

    # -- terms ---------------------------------------------------------

    def parse_iri_or_pname(self) -> Iri:
        t = self.tok
        if t.kind == "iri":
            self.advance()
            return Iri(t.text[1:-1])
        if t.kind == "pname":
            self.advance()
            prefix, _, local = t.text.partition(":")
            if prefix not in self.prefixes:
                raise SparqlSyntaxError(f"undeclared prefix {prefix!r}", t.pos)
            return Iri(self.prefixes[prefix] + local)
        self.error("expected IRI")

    def parse_literal(self) -> Literal:
        t = self.advance()
        lex = _unescape_string(t.text[1:-1], t.pos)
        if self.tok.kind == "langtag":
            tag = self.advance().text[1:]
            return Literal(lex, Iri(RDF_LANGSTRING), tag)
        if self.tok.kind == "punct" and self.tok.text == "^^":
            self.advance()
            return Literal(lex, self.parse_iri_or_pname())
        return Literal(lex)

    def parse_number(self) -> Literal:
        text = self.advance().text
        if re.search(r"[eE]", text):
            dt = XSD + "double"
        elif "." in text:
            dt = XSD + "decimal"
        else:
            dt = XSD + "integer"
        return Literal(text, Iri(dt))

    def parse_term_or_var(self, position: str) -> Term | Variable:
        t = self.tok
        if t.kind == "var":
            self.advance()
            return Variable(t.text[1:])
        if t.kind in ("iri", "pname"):
            return self.parse_iri_or_pname()
        if t.kind == "word" and t.text == "a" and position == "predicate":
            self.advance()
            return Iri(RDF_TYPE)
        if t.kind == "string":
            if position in ("subject", "predicate"):
                self.error(f"literal not allowed as {position}")
            return self.parse_literal()
        if t.kind == "number":
            if position in ("subject", "predicate"):
                self.error(f"literal not allowed as {position}")
            return self.parse_number()
        if t.kind == "word" and t.text.lower() in ("true", "false"):
            if position in ("subject", "predicate"):
                self.error(f"literal not allowed as {position}")
            self.advance()
            return Literal(t.text.lower(), Iri(XSD + "boolean"))
        if t.kind == "punct" and t.text == "[":
            raise UnsupportedFeatureError("blank node property list")
        self.check_unsupported_word()
        self.error(f"expected term or variable in {position} position")

    # -- query ---------------------------------------------------------

    def parse_query(self) -> Query:
        while self.is_word("PREFIX", "BASE"):
            if self.is_word("BASE"):
                raise UnsupportedFeatureError("BASE")
            self.advance()
            t = self.tok
            if t.kind != "pname":
                self.error("expected prefix name")
            self.advance()
            prefix = t.text[:-1] if t.text.endswith(":") else t.text.partition(":")[0]
            iri_tok = self.tok
            if iri_tok.kind != "iri":
                self.error("expected namespace IRI")
            self.advance()
            self.prefixes[prefix] = iri_tok.text[1:-1]

        if self.tok.kind == "word" and self.tok.text.upper() in _UNSUPPORTED_QUERY_FORMS:
            raise UnsupportedFeatureError(self.tok.text.upper())
        self.expect_word("SELECT")

        distinct = False
        if self.is_word("DISTINCT"):
            distinct = True
            self.advance()
        if self.is_word("REDUCED"):
            raise UnsupportedFeatureError("REDUCED")

        variables: list[Variable] = []
        aggregates: list[Aggregate] = []
        projection: list[Variable] = []
        star = False
        if self.accept_punct("*"):
            star = True
        else:
            while True:
                if self.tok.kind == "var":
                    v = Variable(self.advance().text[1:])
                    variables.append(v)
                    projection.append(v)
                elif self.accept_punct("("):
                    agg = self.parse_aggregate()
                    aggregates.append(agg)
                    projection.append(agg.alias)
                elif self.is_word(*(_UNSUPPORTED_AGGREGATES)):
                    raise UnsupportedFeatureError(self.tok.text.upper())
                else:
                    break
            if not projection:
                self.error("SELECT needs at least one variable or aggregate")

        if self.is_word("FROM"):
            raise UnsupportedFeatureError("FROM")
        self.expect_word("WHERE")
        where = self.parse_group(depth=0)

        group_by: list[Variable] = []
        if self.is_word("GROUP"):
            self.advance()
            self.expect_word("BY")
            while self.tok.kind == "var":
                group_by.append(Variable(self.advance().text[1:]))
            if not group_by:
                self.error("GROUP BY needs at least one variable")
        if self.is_word("HAVING"):
            raise UnsupportedFeatureError("HAVING")

        order_by: list[tuple[Expression, bool]] = []
        if self.is_word("ORDER"):
            self.advance()
            self.expect_word("BY")
            while True:
                asc = True
                if self.is_word("ASC", "DESC"):
                    asc = self.advance().text.upper() == "ASC"
                    self.expect_punct("(")
                    expr = self.parse_expression()
                    self.expect_punct(")")
                elif self.tok.kind == "var":
                    expr = Expression("var", value=Variable(self.advance().text[1:]))
                elif self.accept_punct("("):
                    expr = self.parse_expression()
                    self.expect_punct(")")
                else:
                    break
                order_by.append((expr, asc))
            if not order_by:
                self.error("ORDER BY needs at least one sort key")

        limit = offset = None
        # LIMIT and OFFSET accepted in either order
        for _ in range(2):
            if self.is_word("LIMIT"):
                self.advance()
                limit = self.parse_nonneg_int()
            elif self.is_word("OFFSET"):
                self.advance()
                offset = self.parse_nonneg_int()

        if self.tok.kind != "eof":
            self.check_unsupported_word()
            self.error(f"unexpected trailing {self.tok.text!r}")

        q = Query(
            variables=projection,
            star=star,
            distinct=distinct,
            aggregates=aggregates,
            where=where,
            group_by=group_by,
            order_by=order_by,
            limit=limit,
            offset=offset,
            prefixes=dict(self.prefixes),
        )
        _check_projection(q)
        return q

    def parse_nonneg_int(self) -> int:
        t = self.tok
        if t.kind != "number" or not re.fullmatch(r"\d+", t.text):
            self.error("expected non-negative integer")
        self.advance()
        return int(t.text)

    def parse_aggregate(self) -> Aggregate:
        if self.is_word(*(_UNSUPPORTED_AGGREGATES)):
            raise UnsupportedFeatureError(self.tok.text.upper())
        if not self.is_word("COUNT"):
            self.error("expected COUNT aggregate")
        self.advance()
        self.expect_punct("(")
        distinct = False
        if self.is_word("DISTINCT"):
            distinct = True
            self.advance()
        var = None
        if self.accept_punct("*"):
            pass
        elif self.tok.kind == "var":
            var = Variable(self.advance().text[1:])
        else:
            self.error("expected ?var or * in COUNT")
        self.expect_punct(")")
        self.expect_word("AS")
        if self.tok.kind != "var":
            self.error("expected alias variable after AS")
        alias = Variable(self.advance().text[1:])
        self.expect_punct(")")
        return Aggregate("count", var, alias, distinct)

    def parse_group(self, depth: int) -> GroupPattern:
        self.expect_punct("{")
        group = GroupPattern()
        while True:
            if self.accept_punct("}"):
                return group
            if self.tok.kind == "eof":
                self.error("unterminated group pattern")
            if self.is_word("OPTIONAL"):
                if depth + 1 > MAX_OPTIONAL_DEPTH:
                    self.error(f"OPTIONAL nesting exceeds depth {MAX_OPTIONAL_DEPTH}")
                self.advance()
                group.optionals.append(self.parse_group(depth + 1))
                self.accept_punct(".")
                continue
            if self.is_word("FILTER"):
                self.advance()
                self.expect_punct("(")
                group.filters.append(self.parse_expression())
                self.expect_punct(")")
                self.accept_punct(".")
                continue
            self.check_unsupported_word()
            if self.tok.kind == "punct" and self.tok.text == "{":
                # distinguish UNION (the common case) from bare nesting
                depth_scan = 0
                idx = self.i
                while idx < len(self.tokens) - 1:
                    t = self.tokens[idx]
                    if t.kind == "punct" and t.text == "{":
                        depth_scan += 1
                    elif t.kind == "punct" and t.text == "}":
                        depth_scan -= 1
                        if depth_scan == 0:
                            break
                    idx += 1
                nxt = self.tokens[min(idx + 1, len(self.tokens) - 1)]
                if nxt.kind == "word" and nxt.text.upper() == "UNION":
                    raise UnsupportedFeatureError("UNION")
                raise UnsupportedFeatureError("group graph pattern nesting without OPTIONAL")
            self.parse_triples_block(group)

    def parse_triples_block(self, group: GroupPattern) -> None:
        subject = self.parse_term_or_var("subject")
        while True:
            predicate = self.parse_term_or_var("predicate")
            while True:
                obj = self.parse_term_or_var("object")
                group.patterns.append(TriplePattern(subject, predicate, obj))
                if not self.accept_punct(","):
                    break
            if not self.accept_punct(";"):
                break
            # allow trailing ';' before '}' or '.'
            if self.tok.kind == "punct" and self.tok.text in ("}", "."):
                break
        self.accept_punct(".")

    # -- expressions ---------------------------------------------------

    def parse_expression(self) -> Expression:
        left = self.parse_and()
        while self.tok.kind == "punct" and self.tok.text == "||":
            self.advance()
            left = Expression("or", (left, self.parse_and()))
        return left

    def parse_and(self) -> Expression:
        left = self.parse_relational()
        while self.tok.kind == "punct" and self.tok.text == "&&":
            self.advance()
            left = Expression("and", (left, self.parse_relational()))
        return left

    def parse_relational(self) -> Expression:
        left = self.parse_unary()
        if self.tok.kind == "punct" and self.tok.text in ("=", "!=", "<", ">", "<=", ">="):
            op = self.advance().text
            right = self.parse_unary()
            return Expression(f"cmp:{op}", (left, right))
        return left

    def parse_unary(self) -> Expression:
        if self.tok.kind == "punct" and self.tok.text == "!":
            self.advance()
            return Expression("not", (self.parse_unary(),))
        return self.parse_primary()

    def parse_primary(self) -> Expression:
        t = self.tok
        if t.kind == "punct" and t.text == "(":
            self.advance()
            expr = self.parse_expression()
            self.expect_punct(")")
            return expr
        if t.kind == "var":
            self.advance()
            return Expression("var", value=Variable(t.text[1:]))
        if t.kind == "string":
            return Expression("term", value=self.parse_literal())
        if t.kind == "number":
            return Expression("term", value=self.parse_number())
        if t.kind in ("iri", "pname"):
            return Expression("term", value=self.parse_iri_or_pname())
        if t.kind == "word":
            word = t.text.lower()
            if word in ("true", "false"):
                self.advance()
                return Expression("term", value=Literal(word, Iri(XSD + "boolean")))
            if word in ("bound", "regex", "str", "lang"):
                self.advance()
                self.expect_punct("(")
                args = [self.parse_expression()]
                while self.accept_punct(","):
                    args.append(self.parse_expression())
                self.expect_punct(")")
                arity = {"bound": (1, 1), "str": (1, 1), "lang": (1, 1), "regex": (2, 3)}[word]
                if not (arity[0] <= len(args) <= arity[1]):
                    self.error(f"{word}() takes {arity[0]}..{arity[1]} arguments")
                if word == "bound" and args[0].op != "var":
                    self.error("bound() takes a variable")
                return Expression(word, tuple(args))
            raise UnsupportedFeatureError(f"function {t.text}()")
        self.error("expected expression")


def _unescape_string(s: str, pos: int) -> str:
    out = []
    i = 0
    simple = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "'": "'", "\\": "\\", "b": "\b", "f": "\f"}
    while i < len(s):
        ch = s[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(s):
            raise SparqlSyntaxError("dangling backslash", pos)
        esc = s[i + 1]
        if esc in simple:
            out.append(simple[esc])
            i += 2
        elif esc == "u" and i + 6 <= len(s):
            out.append(chr(int(s[i + 2 : i + 6], 16)))
            i += 6
        elif esc == "U" and i + 10 <= len(s):
            out.append(chr(int(s[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise SparqlSyntaxError(f"unknown escape \\{esc}", pos)
    return "".join(out)


def _pattern_variables(group: GroupPattern) -> set[Variable]:
    out: set[Variable] = set()
    for p in group.patterns:
        for t in (p.subject, p.predicate, p.object):
            if isinstance(t, Variable):
                out.add(t)
    for opt in group.optionals:
        out |= _pattern_variables(opt)
    return out


def _check_projection(q: Query) -> None:
    in_pattern = _pattern_variables(q.where)
    aliases = {a.alias for a in q.aggregates}
    grouped = q.aggregates or q.group_by
    for v in q.variables:
        if v in aliases:
            continue
        if v not in in_pattern:
            raise SparqlSyntaxError(f"projected variable ?{v.name} not in pattern", 0)
        if grouped and v not in q.group_by:
            raise SparqlSyntaxError(
                f"projected variable ?{v.name} is neither grouped nor an aggregate", 0
            )
    for a in q.aggregates:
        if a.variable is not None and a.variable not in in_pattern:
            raise SparqlSyntaxError(f"aggregated variable ?{a.variable.name} not in pattern", 0)


def parse_query(text: str) -> Query:
    return _Parser(text).parse_query()
