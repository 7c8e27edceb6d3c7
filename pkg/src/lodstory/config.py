"""Pipeline configuration: one JSON file driving ingest, build, and serve."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .tabular import ColumnSpec, Normalizer, TableProfile


class PipelineConfigError(Exception):
    pass


@dataclass
class ServeSettings:
    host: str = "127.0.0.1"
    port: int = 8000
    assets: Path | None = None


@dataclass
class PipelineConfig:
    base_dir: Path
    object_csv: Path
    process_csv: Path
    profiles: dict[str, TableProfile]
    mapping_path: Path
    separator: str = ";"
    output_nt: Path = Path("out/graph.nt")
    output_ttl: Path = Path("out/graph.ttl")
    output_report: Path = Path("out/report.json")
    serve: ServeSettings = field(default_factory=ServeSettings)
    stories_dir: Path | None = None


def _profile_from_json(kind: str, data: dict) -> TableProfile:
    columns = []
    for c in data.get("columns", []):
        columns.append(
            ColumnSpec(
                name=c["name"],
                required=bool(c.get("required", False)),
                multivalued=bool(c.get("multivalued", False)),
                normalizer=Normalizer(c.get("normalizer", "none")),
            )
        )
    try:
        return TableProfile(kind=kind, columns=tuple(columns), key_column=data["key"])
    except (KeyError, ValueError) as e:
        raise PipelineConfigError(f"invalid {kind} profile: {e}") from None


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PipelineConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise PipelineConfigError(f"invalid JSON in {path}: {e}") from None

    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    tables = data.get("tables", {})
    for kind in ("object", "process"):
        if kind not in tables:
            raise PipelineConfigError(f"tables.{kind}: required")
    profiles = {
        kind: _profile_from_json(kind, tables[kind]) for kind in ("object", "process")
    }

    output = data.get("output", {})
    serve_raw = data.get("serve", {})
    port = int(serve_raw.get("port", 8000))
    if not 1 <= port <= 65535:
        raise PipelineConfigError(f"serve.port out of range: {port}")
    serve = ServeSettings(
        host=serve_raw.get("host", "127.0.0.1"),
        port=port,
        assets=resolve(serve_raw["assets"]) if "assets" in serve_raw else None,
    )
    return PipelineConfig(
        base_dir=base,
        object_csv=resolve(tables["object"]["path"]),
        process_csv=resolve(tables["process"]["path"]),
        profiles=profiles,
        mapping_path=resolve(data["mapping"]),
        separator=data.get("separator", ";"),
        output_nt=resolve(output.get("ntriples", "out/graph.nt")),
        output_ttl=resolve(output.get("turtle", "out/graph.ttl")),
        output_report=resolve(output.get("report", "out/report.json")),
        serve=serve,
        stories_dir=resolve(data["stories"]) if "stories" in data else None,
    )
