"""Command-line entry point: build, serve, and story subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import PipelineConfig, PipelineConfigError, load_pipeline_config
from .mapping import (
    MappingLoadError,
    MaterializationReport,
    default_registry,
    load_mapping,
    materialize,
)
from .rdf import Graph, InvalidIriError, make_iri, parse_ntriples, serialize_ntriples, serialize_turtle
from .story import (
    ComposeError,
    LocalExecutor,
    StoryConfig,
    StoryConfigError,
    compose_story,
    load_story_config,
    render_html,
    render_json,
)
from .tabular import TableParseError, build_records, parse_csv, validate_table


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return 1


def run_build(config: PipelineConfig) -> int:
    """parse -> validate -> normalize -> materialize; write .nt/.ttl/report."""
    reports = {}
    datasets = {}
    for kind, path in (("object", config.object_csv), ("process", config.process_csv)):
        try:
            raw = Path(path).read_bytes()
        except FileNotFoundError:
            return _fail(f"{kind} table not found: {path}")
        try:
            table = parse_csv(raw)
        except TableParseError as e:
            return _fail(f"{kind} table: {e}")
        profile = config.profiles[kind]
        report = validate_table(table, profile, config.separator)
        reports[kind] = report
        datasets[kind] = build_records(table, profile, config.separator)

    try:
        mapping_text = Path(config.mapping_path).read_text(encoding="utf-8")
    except FileNotFoundError:
        return _fail(f"mapping file not found: {config.mapping_path}")
    known_columns = {
        kind: {c.name for c in profile.columns}
        for kind, profile in config.profiles.items()
    }
    registry = default_registry()
    try:
        doc = load_mapping(mapping_text, registry, known_columns)
    except MappingLoadError as e:
        return _fail(f"mapping load error: {e}")

    mat_report = MaterializationReport()
    graph = materialize(doc, datasets, registry, report=mat_report)

    for out in (config.output_nt, config.output_ttl, config.output_report):
        out.parent.mkdir(parents=True, exist_ok=True)
    config.output_nt.write_text(serialize_ntriples(graph), encoding="utf-8")
    config.output_ttl.write_text(serialize_turtle(graph), encoding="utf-8")

    report_json = {
        "validation": {
            kind: {
                "ok": reports[kind].ok,
                "issues": [
                    {"row": i.row, "column": i.column, "kind": i.kind, "message": i.message}
                    for i in reports[kind].issues
                ],
            }
            for kind in reports
        },
        "materialization": mat_report.to_json(),
        "triples": len(graph),
    }
    config.output_report.write_text(
        json.dumps(report_json, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    errors = [i for kind in reports for i in reports[kind].errors()]
    if errors:
        for issue in errors:
            print(
                f"validation: row {issue.row} column {issue.column!r}: "
                f"{issue.kind}: {issue.message}",
                file=sys.stderr,
            )
        return 1
    return 0


def load_story_configs(config: PipelineConfig) -> dict[str, StoryConfig]:
    """Story configs addressed by id = filename stem."""
    configs: dict[str, StoryConfig] = {}
    if config.stories_dir and config.stories_dir.is_dir():
        for path in sorted(config.stories_dir.glob("*.json")):
            configs[path.stem] = load_story_config(path.read_text(encoding="utf-8"))
    return configs


def _load_graph(config: PipelineConfig, build: bool) -> Graph | None:
    if build or not config.output_nt.exists():
        if not build and not config.output_nt.exists():
            print(f"store not built ({config.output_nt} missing); run build or pass --build",
                  file=sys.stderr)
            return None
        status = run_build(config)
        if status != 0:
            return None
    return parse_ntriples(config.output_nt.read_text(encoding="utf-8"))


def run_serve(config: PipelineConfig, build: bool) -> int:
    import uvicorn

    from .http import create_app

    graph = _load_graph(config, build)
    if graph is None:
        return 1
    try:
        story_configs = load_story_configs(config)
    except StoryConfigError as e:
        return _fail(f"story config error: {e}")
    app = create_app(graph, story_configs, asset_dir=config.serve.assets)
    host = os.environ.get("LODSTORY_HOST", config.serve.host)
    port = int(os.environ.get("LODSTORY_PORT", config.serve.port))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def run_story(
    config: PipelineConfig,
    object_iri: str,
    config_id: str,
    out_path: str,
    as_json: bool,
    strict: bool,
    build: bool,
) -> int:
    """One-shot composition; output bytes equal the served response body."""
    try:
        obj = make_iri(object_iri)
    except InvalidIriError as e:
        return _fail(f"invalid object IRI: {e}")
    graph = _load_graph(config, build)
    if graph is None:
        return 1
    try:
        story_configs = load_story_configs(config)
    except StoryConfigError as e:
        return _fail(f"story config error: {e}")
    story_config = story_configs.get(config_id)
    if story_config is None:
        return _fail(f"unknown story config id {config_id!r}")
    executor = LocalExecutor(graph)
    try:
        doc = compose_story(story_config, obj, executor, strict=True if strict else None)
    except ComposeError as e:
        return _fail(f"story composition failed: {e}")
    body = render_json(doc) if as_json else render_html(doc)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    Path(out_path).write_text(body, encoding="utf-8")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lodstory",
        description="Catalog tables to RDF knowledge graph, SPARQL serving, and data stories",
    )
    parser.add_argument("--verbose", action="store_true", help="log pipeline stages")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="ingest tables and materialize the graph")
    p_build.add_argument("--config", required=True)

    p_serve = sub.add_parser("serve", help="serve the SPARQL endpoint and story API")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--build", action="store_true", help="build before serving")

    p_story = sub.add_parser("story", help="compose one story page")
    p_story.add_argument("--config", required=True)
    p_story.add_argument("--object", required=True, help="object IRI")
    p_story.add_argument("--story-config", required=True, help="story config id")
    p_story.add_argument("--out", required=True, help="output file path")
    p_story.add_argument("--json", action="store_true", help="write JSON instead of HTML")
    p_story.add_argument("--strict", action="store_true", help="fail on any section error")
    p_story.add_argument("--build", action="store_true", help="build before composing")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")

    try:
        config = load_pipeline_config(args.config)
    except PipelineConfigError as e:
        return _fail(str(e))

    if args.command == "build":
        return run_build(config)
    if args.command == "serve":
        return run_serve(config, args.build)
    if args.command == "story":
        return run_story(
            config, args.object, args.story_config, args.out,
            as_json=args.json, strict=args.strict, build=args.build,
        )
    return 2


if __name__ == "__main__":
    sys.exit(main())
