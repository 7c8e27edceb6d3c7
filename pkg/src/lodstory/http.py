"""HTTP surface: SPARQL endpoint, story API, and static assets."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse

from .rdf import Graph, InvalidIriError, make_iri
from .sparql import (
    SparqlSyntaxError,
    UnsupportedFeatureError,
    evaluate,
    parse_query,
    serialize_results_json,
)
from .story import (
    ComposeError,
    LocalExecutor,
    StoryConfig,
    compose_story,
    render_html,
    render_json,
)

logger = logging.getLogger("lodstory.http")

SPARQL_RESULTS_JSON = "application/sparql-results+json"


def create_app(
    graph: Graph,
    story_configs: dict[str, StoryConfig],
    asset_dir: Path | None = None,
    executor=None,
) -> FastAPI:
    """Build the service over an immutable graph snapshot.

    executor defaults to a LocalExecutor over the graph; tests inject
    faulty executors to exercise degradation.
    """
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)
    executor = executor if executor is not None else LocalExecutor(graph)

    def run_sparql(query_text: str) -> Response:
        try:
            query = parse_query(query_text)
        except (SparqlSyntaxError, UnsupportedFeatureError) as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        rs = evaluate(query, graph)
        return Response(serialize_results_json(rs), media_type=SPARQL_RESULTS_JSON)

    @app.get("/sparql")
    def sparql_get(request: Request):
        query_text = request.query_params.get("query")
        if query_text is None:
            return JSONResponse({"error": "missing 'query' parameter"}, status_code=400)
        logger.info(json.dumps({"route": "/sparql", "method": "GET"}))
        return run_sparql(query_text)

    @app.post("/sparql")
    async def sparql_post(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/x-www-form-urlencoded"):
            form = await request.form()
            query_text = form.get("query")
        elif content_type.startswith("application/sparql-query"):
            query_text = (await request.body()).decode("utf-8")
        else:
            query_text = None
        if not query_text:
            return JSONResponse({"error": "missing 'query' parameter"}, status_code=400)
        logger.info(json.dumps({"route": "/sparql", "method": "POST"}))
        return run_sparql(query_text)

    @app.get("/story")
    def story(request: Request):
        object_raw = request.query_params.get("object")
        config_id = request.query_params.get("config")
        if not object_raw or not config_id:
            return JSONResponse(
                {"error": "missing 'object' or 'config' parameter"}, status_code=400
            )
        try:
            obj = make_iri(object_raw)
        except InvalidIriError as e:
            return JSONResponse({"error": f"invalid object IRI: {e}"}, status_code=400)
        config = story_configs.get(config_id)
        if config is None:
            return JSONResponse({"error": f"unknown config id {config_id!r}"}, status_code=404)
        strict = request.query_params.get("strict")
        strict_flag = config.strict if strict is None else strict == "true"
        try:
            doc = compose_story(config, obj, executor, strict=strict_flag)
        except ComposeError as e:
            return JSONResponse({"error": str(e)}, status_code=502)
        logger.info(json.dumps({"route": "/story", "object": obj.value, "config": config_id}))
        accept = request.headers.get("accept", "")
        if "application/json" in accept:
            return Response(render_json(doc), media_type="application/json")
        return HTMLResponse(render_html(doc))

    @app.get("/assets/{name:path}")
    def assets(name: str):
        if asset_dir is None:
            return PlainTextResponse("no asset directory configured", status_code=404)
        target = (asset_dir / name).resolve()
        if not str(target).startswith(str(asset_dir.resolve())) or not target.is_file():
            return PlainTextResponse("not found", status_code=404)
        media = "application/javascript" if name.endswith(".js") else (
            "text/css" if name.endswith(".css") else "application/octet-stream"
        )
        return Response(target.read_bytes(), media_type=media)

    return app
