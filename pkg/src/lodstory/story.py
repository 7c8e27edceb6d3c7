"""Config-driven data stories composed from SPARQL query results.

A story configuration describes, per object typology, an ordered list of
sections; each section carries a parameterized query (the literal token
``{OBJECT}`` stands for the object's IRI) and a view kind.  Composition
executes the queries against a local graph or a remote endpoint, yielding
a deterministic StoryDocument renderable as JSON or as a self-contained
HTML page with server-side fallbacks for script-free reading.
"""

from __future__ import annotations

import html
import json
import urllib.parse
from dataclasses import dataclass, field

from .rdf import Graph, Iri, make_iri
from .sparql import evaluate, parse_query
from .sparql.evaluate import ResultSet
from .sparql.parser import Variable

OBJECT_TOKEN = "{OBJECT}"

VIEW_KINDS = {"facts", "table", "bar_chart", "timeline", "text", "image", "related_links", "map"}
_QUERY_VIEWS = VIEW_KINDS - {"text"}
_REQUIRED_ROLES = {
    "bar_chart": {"label", "value"},
    "timeline": {"label", "date"},
    "image": {"src"},
    "related_links": {"link"},
}


class StoryConfigError(Exception):
    """Invalid story configuration; message names the offending section."""


class ConfigMismatchError(Exception):
    """Object-dependent query template without the {OBJECT} token."""


class UpstreamError(Exception):
    """Remote endpoint failure (transport, timeout, or non-200)."""

    def __init__(self, message: str, endpoint: str, status: int | None = None):
        super().__init__(message)
        self.endpoint = endpoint
        self.status = status


class ComposeError(Exception):
    """Raised in strict mode when a section fails."""

    def __init__(self, section_id: str, cause: Exception):
        super().__init__(f"section {section_id!r} failed: {cause}")
        self.section_id = section_id
        self.cause = cause


@dataclass(frozen=True)
class SectionSpec:
    id: str
    heading: str
    view: str
    query: str | None = None
    static_text: str | None = None
    roles: dict[str, str] = field(default_factory=dict)
    object_independent: bool = False


@dataclass(frozen=True)
class StoryConfig:
    typology: str
    title_template: str
    sections: tuple[SectionSpec, ...]
    endpoint: str = "local"  # "local" or a remote URL
    label_query: str | None = None
    strict: bool = False


def load_story_config(text: str) -> StoryConfig:
    """Parse and validate a story configuration from JSON.

    Every section query must parse under the engine's SELECT subset
    (checked with a placeholder IRI substituted for {OBJECT}).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise StoryConfigError(f"invalid JSON: {e}") from None
    if not isinstance(data, dict):
        raise StoryConfigError("config root must be an object")
    unknown = set(data) - {"typology", "title", "sections", "endpoint", "labelQuery", "strict"}
    if unknown:
        raise StoryConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    sections_raw = data.get("sections", [])
    if not sections_raw:
        raise StoryConfigError("config needs at least one section")

    sections = []
    seen_ids = set()
    for i, s in enumerate(sections_raw):
        sid = s.get("id") or f"section{i}"
        where = f"section {sid!r}"
        unknown = set(s) - {"id", "heading", "view", "query", "text", "roles", "objectIndependent"}
        if unknown:
            raise StoryConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")
        if sid in seen_ids:
            raise StoryConfigError(f"{where}: duplicate section id")
        seen_ids.add(sid)
        view = s.get("view")
        if view not in VIEW_KINDS:
            raise StoryConfigError(f"{where}: unknown view kind {view!r}")
        query = s.get("query")
        static_text = s.get("text")
        roles = s.get("roles", {})
        object_independent = bool(s.get("objectIndependent", False))
        if view in _QUERY_VIEWS and not query:
            raise StoryConfigError(f"{where}: view {view!r} requires a query")
        if view == "text" and static_text is None:
            raise StoryConfigError(f"{where}: text view requires static text")
        missing = _REQUIRED_ROLES.get(view, set()) - set(roles)
        if missing:
            raise StoryConfigError(f"{where}: missing role {sorted(missing)[0]!r} for view {view!r}")
        if query:
            if OBJECT_TOKEN not in query and not object_independent:
                raise StoryConfigError(
                    f"{where}: query lacks {OBJECT_TOKEN} and is not marked objectIndependent"
                )
            try:
                parse_query(query.replace(OBJECT_TOKEN, "<http://example.invalid/check>"))
            except Exception as e:
                raise StoryConfigError(f"{where}: query does not parse: {e}") from None
        sections.append(
            SectionSpec(sid, s.get("heading", sid), view, query, static_text, dict(roles), object_independent)
        )

    label_query = data.get("labelQuery")
    if label_query is not None:
        try:
            parse_query(label_query.replace(OBJECT_TOKEN, "<http://example.invalid/check>"))
        except Exception as e:
            raise StoryConfigError(f"labelQuery does not parse: {e}") from None

    return StoryConfig(
        typology=data.get("typology", ""),
        title_template=data.get("title", "{OBJECT}"),
        sections=tuple(sections),
        endpoint=data.get("endpoint", "local"),
        label_query=label_query,
        strict=bool(data.get("strict", False)),
    )


def bind_object(query_template: str, obj: Iri, object_independent: bool = False) -> str:
    """Substitute the {OBJECT} token with the object's IRI in angle brackets."""
    if OBJECT_TOKEN not in query_template:
        if object_independent:
            return query_template
        raise ConfigMismatchError(f"query template lacks the {OBJECT_TOKEN} token")
    return query_template.replace(OBJECT_TOKEN, f"<{obj.value}>")


class LocalExecutor:
    """Runs queries against an in-memory graph snapshot."""

    def __init__(self, graph: Graph):
        self.graph = graph

    def execute(self, query_text: str) -> ResultSet:
        return evaluate(parse_query(query_text), self.graph)


# Queries longer than this go over form-encoded POST (URL-length safety).
_GET_QUERY_LIMIT = 2000


class EndpointClient:
    """SPARQL protocol client for a remote endpoint."""

    def __init__(self, base_url: str, timeout: float = 10.0):
        parsed = urllib.parse.urlparse(base_url)
        if not parsed.scheme or not parsed.netloc:
            raise ValueError(f"invalid endpoint URL {base_url!r}")
        self.base_url = base_url
        self.timeout = timeout

    def execute(self, query_text: str) -> ResultSet:
        import requests

        headers = {"Accept": "application/sparql-results+json"}
        try:
            if len(query_text) > _GET_QUERY_LIMIT:
                resp = requests.post(
                    self.base_url, data={"query": query_text}, headers=headers,
                    timeout=self.timeout,
                )
            else:
                resp = requests.get(
                    self.base_url, params={"query": query_text}, headers=headers,
                    timeout=self.timeout,
                )
        except requests.RequestException as e:
            raise UpstreamError(str(e), self.base_url) from None
        if resp.status_code != 200:
            raise UpstreamError(
                f"endpoint returned {resp.status_code}", self.base_url, resp.status_code
            )
        return _result_set_from_json(resp.json())


def _result_set_from_json(data: dict) -> ResultSet:
    from .rdf import BlankNode, Literal
    from .rdf import RDF_LANGSTRING, XSD_STRING

    variables = [Variable(v) for v in data.get("head", {}).get("vars", [])]
    rows = []
    for binding in data.get("results", {}).get("bindings", []):
        row = {}
        for name, obj in binding.items():
            kind = obj.get("type")
            if kind == "uri":
                term = Iri(obj["value"])
            elif kind == "bnode":
                term = BlankNode(obj["value"])
            else:
                lang = obj.get("xml:lang")
                if lang:
                    term = Literal(obj["value"], Iri(RDF_LANGSTRING), lang)
                else:
                    term = Literal(obj["value"], Iri(obj.get("datatype", XSD_STRING)))
            row[Variable(name)] = term
        rows.append(row)
    return ResultSet(variables=variables, rows=rows)


def _term_string(term) -> str:
    from .rdf import BlankNode, Literal

    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    return term.lexical


def execute_section(spec: SectionSpec, obj: Iri, executor) -> dict:
    """Run one section's query and shape its rows through the binding roles.

    Empty results yield an explicitly empty payload; the section is never
    dropped, so story shape is stable across objects of one typology.
    """
    if spec.view == "text":
        return {"kind": "text", "text": spec.static_text or "", "rows": []}
    query = bind_object(spec.query, obj, spec.object_independent)
    rs = executor.execute(query)
    var_by_name = {v.name: v for v in rs.variables}
    rows = []
    for solution in rs.rows:
        if spec.roles:
            row = {}
            for role, var_name in spec.roles.items():
                var = var_by_name.get(var_name.lstrip("?"))
                if var is not None and var in solution:
                    row[role] = _term_string(solution[var])
            rows.append(row)
        else:
            rows.append({
                v.name: _term_string(solution[v]) for v in rs.variables if v in solution
            })
    return {"kind": spec.view, "rows": rows}


def _iri_tail(obj: Iri) -> str:
    value = obj.value.rstrip("/#")
    for sep in ("#", "/"):
        if sep in value:
            return value.rsplit(sep, 1)[1]
    return value


def _object_label(config: StoryConfig, obj: Iri, executor) -> str:
    if config.label_query:
        try:
            rs = executor.execute(bind_object(config.label_query, obj))
            if rs.rows and rs.variables:
                first = rs.variables[0]
                if first in rs.rows[0]:
                    return _term_string(rs.rows[0][first])
        except Exception:
            pass  # fall back to the IRI tail
    return _iri_tail(obj)


@dataclass
class StoryDocument:
    object: str
    title: str
    sections: list[dict]
    provenance: list[dict]


def compose_story(config: StoryConfig, obj: Iri, executor, strict: bool | None = None) -> StoryDocument:
    """Execute every section in order and assemble the story document.

    With strict=False a failing section is marked errored but the
    document is still produced; with strict=True the failure aborts.
    """
    strict = config.strict if strict is None else strict
    label = _object_label(config, obj, executor)
    title = config.title_template.replace(OBJECT_TOKEN, label)
    sections = []
    provenance = []
    for spec in config.sections:
        entry = {"id": spec.id, "heading": spec.heading, "view": spec.view}
        if spec.view == "text":
            entry["payload"] = {"kind": "text", "text": spec.static_text or "", "rows": []}
            sections.append(entry)
            continue
        query = bind_object(spec.query, obj, spec.object_independent)
        provenance.append({"section": spec.id, "query": query})
        try:
            entry["payload"] = execute_section(spec, obj, executor)
        except UpstreamError as e:
            if strict:
                raise ComposeError(spec.id, e)
            entry["payload"] = {"kind": spec.view, "rows": [], "error": str(e)}
            entry["error"] = True
        sections.append(entry)
    return StoryDocument(object=obj.value, title=title, sections=sections, provenance=provenance)


def document_to_dict(doc: StoryDocument) -> dict:
    return {
        "object": doc.object,
        "title": doc.title,
        "sections": doc.sections,
        "provenance": doc.provenance,
    }


def render_json(doc: StoryDocument) -> str:
    """Canonical, byte-stable JSON rendering of a story document.

    '<' is escaped so the exact same bytes can be embedded verbatim in an
    HTML script element.
    """
    text = json.dumps(document_to_dict(doc), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))
    return text.replace("<", "\\u003c")


# Default theme: near-black on white; contrast 16.7:1, well past WCAG AA.
THEME_TEXT = "#1A1A1A"
THEME_BACKGROUND = "#FFFFFF"
THEME_ACCENT = "#00509E"


def contrast_ratio(fg: str, bg: str) -> float:
    """WCAG 2.x contrast ratio between two #RRGGBB colors."""

    def luminance(color: str) -> float:
        color = color.lstrip("#")
        channels = []
        for i in (0, 2, 4):
            c = int(color[i : i + 2], 16) / 255.0
            channels.append(c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4)
        r, g, b = channels
        return 0.2126 * r + 0.7152 * g + 0.0722 * b

    l1, l2 = luminance(fg), luminance(bg)
    if l1 < l2:
        l1, l2 = l2, l1
    return (l1 + 0.05) / (l2 + 0.05)


_STYLESHEET = f"""
body {{ font-family: Georgia, serif; color: {THEME_TEXT}; background: {THEME_BACKGROUND};
       max-width: 50rem; margin: 2rem auto; padding: 0 1rem; line-height: 1.5; }}
h1, h2 {{ color: {THEME_TEXT}; }}
a {{ color: {THEME_ACCENT}; }}
table {{ border-collapse: collapse; }}
th, td {{ border: 1px solid {THEME_TEXT}; padding: 0.3rem 0.6rem; text-align: left; }}
dt {{ font-weight: bold; }}
.story-empty {{ font-style: italic; }}
""".strip()


def _render_fallback(section: dict) -> str:
    payload = section.get("payload", {})
    rows = payload.get("rows", [])
    view = section["view"]
    if section.get("error"):
        return '<p class="story-error">This section could not be loaded.</p>'
    if view == "text":
        return f"<p>{html.escape(payload.get('text', ''))}</p>"
    if not rows:
        return '<p class="story-empty">No data available for this section.</p>'
    if view == "facts":
        items = []
        for row in rows:
            prop = row.get("property", "")
            value = row.get("value", "")
            items.append(f"<dt>{html.escape(prop)}</dt><dd>{html.escape(value)}</dd>")
        return "<dl>" + "".join(items) + "</dl>"
    if view in ("table", "map"):
        keys = list(rows[0].keys())
        head = "".join(f"<th>{html.escape(k)}</th>" for k in keys)
        body = "".join(
            "<tr>" + "".join(f"<td>{html.escape(r.get(k, ''))}</td>" for k in keys) + "</tr>"
            for r in rows
        )
        notice = ""
        if view == "map":
            notice = "<p>Map rendering is not yet supported; showing the data as a table.</p>"
        return f"{notice}<table><thead><tr>{head}</tr></thead><tbody>{body}</tbody></table>"
    # other views are hydrated by the viewer script; placeholder keeps the slot
    return '<p class="story-pending">Interactive content.</p>'


def render_html(doc: StoryDocument) -> str:
    """Self-contained HTML5 story page.

    The full document JSON is embedded in a script element (id
    ``story-data``) byte-equal to render_json output; facts/table/text
    sections get server-side fallbacks readable without scripts.
    """
    payload = render_json(doc)
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        '<meta name="viewport" content="width=device-width, initial-scale=1">',
        f"<title>{html.escape(doc.title)}</title>",
        f"<style>{_STYLESHEET}</style>",
        '<link rel="stylesheet" href="/assets/viewer.css">',
        "</head>",
        "<body>",
        f"<h1>{html.escape(doc.title)}</h1>",
    ]
    for section in doc.sections:
        parts.append(f'<section id="section-{html.escape(section["id"])}" data-view="{html.escape(section["view"])}">')
        parts.append(f"<h2>{html.escape(section['heading'])}</h2>")
        parts.append(f'<div class="story-fallback">{_render_fallback(section)}</div>')
        parts.append("</section>")
    parts.append(f'<script id="story-data" type="application/json">{payload}</script>')
    parts.append('<script src="/assets/viewer.js" defer></script>')
    parts.append("</body>")
    parts.append("</html>")
    return "\n".join(parts) + "\n"
