"""Parsing and validation of the two catalog CSV tables.

The catalog is collected as two tables: one describing the exhibition
objects (one row per object) and one recording the digitization process
(one row per object/stage pair).  Cells are normalized into typed records
ready for the mapping engine.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from enum import Enum


class TableParseError(Exception):
    """Malformed CSV input (quoting, arity, encoding)."""


class Normalizer(str, Enum):
    NONE = "none"
    DATE = "date"
    TRIMMED_TEXT = "trimmed-text"


class DigitizationStage(str, Enum):
    """Stages of the 3D digitization workflow, with their catalog labels."""

    RAW = "raw"
    RAW_PROCESSED = "raw-processed"
    DCHO = "dcho"
    DCHO_OPTIMIZED = "dcho-optimized"
    EXPORT = "export"


# Catalog label aliases; the four model-version labels map bijectively
# onto the first four stages.
STAGE_ALIASES = {
    "RAW": DigitizationStage.RAW,
    "RAWp": DigitizationStage.RAW_PROCESSED,
    "DCHO": DigitizationStage.DCHO,
    "DCHOo": DigitizationStage.DCHO_OPTIMIZED,
    "export": DigitizationStage.EXPORT,
}


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    required: bool = False
    multivalued: bool = False
    normalizer: Normalizer = Normalizer.NONE

    def __post_init__(self):
        if not self.name:
            raise ValueError("column name must be non-empty")


@dataclass(frozen=True)
class TableProfile:
    kind: str  # "object" | "process"
    columns: tuple[ColumnSpec, ...]
    key_column: str

    def __post_init__(self):
        if self.kind not in ("object", "process"):
            raise ValueError(f"unknown table kind {self.kind!r}")
        names = [c.name for c in self.columns]
        if len(names) != len(set(names)):
            raise ValueError("duplicate column names in profile")
        key = self.column(self.key_column)
        if key is None:
            raise ValueError(f"key column {self.key_column!r} not in profile")
        if not key.required:
            raise ValueError(f"key column {self.key_column!r} must be required")

    def column(self, name: str) -> ColumnSpec | None:
        for c in self.columns:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Record:
    key: str
    values: dict[str, list[str]]

    def get(self, column: str) -> list[str]:
        return self.values.get(column, [])


@dataclass(frozen=True)
class Issue:
    row: int  # 1-based data row index
    column: str
    kind: str  # missing-required | unknown-column | duplicate-key | normalizer-failure | empty-key
    message: str


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def errors(self) -> list[Issue]:
        """Issues that should fail a build; normalizer failures only drop the value."""
        return [i for i in self.issues if i.kind != "normalizer-failure"]


@dataclass
class Table:
    header: list[str]
    rows: list[list[str]]


def parse_csv(data: bytes | str) -> Table:
    """Parse RFC 4180 CSV with a mandatory header row.

    Every data row must have exactly as many cells as the header.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise TableParseError(f"input is not valid UTF-8: {e}") from None
    else:
        text = data
    reader = csv.reader(io.StringIO(text), strict=True)
    try:
        rows = list(reader)
    except csv.Error as e:
        raise TableParseError(f"malformed CSV at row {reader.line_num}: {e}") from None
    if not rows:
        raise TableParseError("missing header row")
    header, data_rows = rows[0], rows[1:]
    # A single trailing empty line yields no row; interior blank lines are errors.
    data_rows = [r for r in data_rows if r != []]
    for i, row in enumerate(data_rows, start=1):
        if len(row) != len(header):
            raise TableParseError(
                f"row {i} has {len(row)} cells, expected {len(header)}"
            )
    return Table(header=header, rows=data_rows)


def serialize_csv(table: Table) -> str:
    """Write a table back per RFC 4180 (round-trip partner of parse_csv)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header)
    writer.writerows(table.rows)
    return buf.getvalue()


_DMY_RE = re.compile(r"^(\d{1,2})[/-](\d{1,2})[/-](\d{4})$")
_ISO_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_YEAR_RE = re.compile(r"^\d{4}$")


def normalize_date(raw: str) -> str | None:
    """Normalize a date cell to ISO-8601 (YYYY-MM-DD) or a bare year.

    Accepts day/month/year with / or - separators, ISO dates, and 4-digit
    years.  Returns None when the string is not a valid date.
    """
    import datetime

    s = raw.strip()
    if _YEAR_RE.match(s):
        return s
    m = _ISO_RE.match(s)
    if m:
        y, mo, d = (int(g) for g in m.groups())
    else:
        m = _DMY_RE.match(s)
        if not m:
            return None
        d, mo, y = (int(g) for g in m.groups())
    try:
        datetime.date(y, mo, d)
    except ValueError:
        return None
    return f"{y:04d}-{mo:02d}-{d:02d}"


def normalize_cell_report(
    raw: str, spec: ColumnSpec, separator: str = ";"
) -> tuple[list[str], list[str]]:
    """Normalize one cell; returns (values, failed segments)."""
    if not separator:
        raise ValueError("separator must be non-empty")
    if spec.multivalued:
        segments = [s.strip() for s in raw.split(separator)]
    else:
        segments = [raw.strip()]
    segments = [s for s in segments if s]
    values: list[str] = []
    failures: list[str] = []
    for seg in segments:
        if spec.normalizer == Normalizer.DATE:
            norm = normalize_date(seg)
            if norm is None:
                failures.append(seg)
            else:
                values.append(norm)
        elif spec.normalizer == Normalizer.TRIMMED_TEXT:
            values.append(" ".join(seg.split()))
        else:
            values.append(seg)
    return values, failures


def normalize_cell(raw: str, spec: ColumnSpec, separator: str = ";") -> list[str]:
    return normalize_cell_report(raw, spec, separator)[0]


def validate_table(
    table: Table, profile: TableProfile, separator: str = ";"
) -> ValidationReport:
    """Check a parsed table against its profile.

    Validation is total: every issue in the table is reported, nothing
    aborts on first failure.  Duplicate keys are an issue only for the
    object table; the process table has one row per object/stage pair.
    """
    report = ValidationReport()
    known = {c.name for c in profile.columns}
    for name in table.header:
        if name not in known:
            report.issues.append(
                Issue(0, name, "unknown-column", f"column {name!r} not in profile")
            )
    col_index = {name: i for i, name in enumerate(table.header)}
    seen_keys: set[str] = set()
    for rownum, row in enumerate(table.rows, start=1):
        for spec in profile.columns:
            idx = col_index.get(spec.name)
            raw = row[idx] if idx is not None else ""
            values, failures = normalize_cell_report(raw, spec, separator)
            for seg in failures:
                report.issues.append(
                    Issue(
                        rownum,
                        spec.name,
                        "normalizer-failure",
                        f"cannot normalize {seg!r} as {spec.normalizer.value}",
                    )
                )
            if spec.required and not values:
                report.issues.append(
                    Issue(rownum, spec.name, "missing-required", "required value missing")
                )
            if spec.name == profile.key_column:
                if not values:
                    report.issues.append(
                        Issue(rownum, spec.name, "empty-key", "empty key")
                    )
                elif profile.kind == "object":
                    key = values[0]
                    if key in seen_keys:
                        report.issues.append(
                            Issue(rownum, spec.name, "duplicate-key", f"duplicate key {key!r}")
                        )
                    seen_keys.add(key)
    return report


def build_records(
    table: Table, profile: TableProfile, separator: str = ";"
) -> list[Record]:
    """Build normalized records, skipping rows with an empty key.

    Unknown columns are dropped (they are reported by validate_table);
    normalizer failures drop the affected value.
    """
    col_index = {name: i for i, name in enumerate(table.header)}
    records: list[Record] = []
    for row in table.rows:
        values: dict[str, list[str]] = {}
        for spec in profile.columns:
            idx = col_index.get(spec.name)
            raw = row[idx] if idx is not None else ""
            values[spec.name] = normalize_cell(raw, spec, separator)
        key_values = values.get(profile.key_column, [])
        if not key_values:
            continue
        records.append(Record(key=key_values[0], values=values))
    return records
