"""Typed data model for criteria schemas, study records, and corpus snapshots.

A corpus is described by a schema (an ordered list of typed criteria) and a
set of study records whose values are validated against that schema. All
types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from importlib import resources

import yaml

KINDS = ("binary", "ordinal", "categorical", "numeric", "text")

# Literal used on the wire (CSV cells, manifest option lists) for values
# that are not applicable. Internally N/A is a FieldValue variant, never a
# label, so the similarity N/A rule stays type-driven.
NA_LITERAL = "N/A"

MULTI_VALUE_SEPARATOR = ";"


class SchemaError(ValueError):
    """Raised when a schema or manifest violates its structural invariants."""


class ModelError(ValueError):
    """Raised for malformed field values or records outside validation reports."""


@dataclass(frozen=True)
class FieldValue:
    """One typed cell value: a tagged variant plus its payload.

    kind is one of "binary", "ordinal", "categories", "number", "text",
    "na"; the payload type follows the tag (bool, label str, frozenset of
    labels, float, str, None).
    """

    kind: str
    value: bool | str | frozenset[str] | float | None

    @staticmethod
    def binary(flag: bool) -> "FieldValue":
        return FieldValue("binary", bool(flag))

    @staticmethod
    def ordinal(label: str) -> "FieldValue":
        return FieldValue("ordinal", label)

    @staticmethod
    def categories(labels) -> "FieldValue":
        return FieldValue("categories", frozenset(str(x) for x in labels))

    @staticmethod
    def number(value: float) -> "FieldValue":
        return FieldValue("number", float(value))

    @staticmethod
    def text(value: str) -> "FieldValue":
        return FieldValue("text", str(value))

    @property
    def is_na(self) -> bool:
        return self.kind == "na"

    def as_set(self) -> frozenset[str]:
        """Label set of this value, used by filters and distributions."""
        if self.kind == "categories":
            return self.value
        if self.kind in ("ordinal", "text"):
            return frozenset((self.value,))
        if self.kind == "number":
            return frozenset((format_number(self.value),))
        if self.kind == "na":
            return frozenset()
        raise ModelError(f"binary values take labels from their criterion, got {self.kind}")


NA = FieldValue("na", None)


def format_number(value: float) -> str:
    """Canonical text form of a numeric value (integers without a decimal point)."""
    f = float(value)
    if f.is_integer():
        return str(int(f))
    return repr(f)


@dataclass(frozen=True)
class Criterion:
    """Schema entry for one corpus column.

    answer_options excludes the N/A literal; na_allowed records whether the
    column may hold not-applicable cells. For ordinal criteria
    ordinal_values maps every answer option into [0, 1] with min 0 and
    max 1. binary_labels gives the (true, false) wire labels.
    """

    name: str
    kind: str
    multi_valued: bool = False
    answer_options: tuple[str, ...] = ()
    ordinal_values: tuple[tuple[str, float], ...] = ()
    na_allowed: bool = True
    similarity_participates: bool = True
    log_transform: bool = False
    display_default: bool = False
    binary_labels: tuple[str, str] = ("Yes", "No")

    def __post_init__(self):
        if not self.name:
            raise SchemaError("criterion name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        if self.multi_valued and self.kind in ("numeric", "binary", "text"):
            raise SchemaError(f"{self.name}: {self.kind} criteria are single-valued")
        if self.log_transform and self.kind != "numeric":
            raise SchemaError(f"{self.name}: log_transform only applies to numeric criteria")
        if NA_LITERAL in self.answer_options:
            raise SchemaError(f"{self.name}: {NA_LITERAL} is a flag, not an answer option")
        if any(MULTI_VALUE_SEPARATOR in option for option in self.answer_options):
            raise SchemaError(f"{self.name}: answer options must not contain {MULTI_VALUE_SEPARATOR!r}")
        if self.kind == "ordinal":
            if not self.answer_options:
                raise SchemaError(f"{self.name}: ordinal criteria need answer options")
            levels = dict(self.ordinal_values)
            if set(levels) != set(self.answer_options):
                raise SchemaError(f"{self.name}: ordinal_values must cover exactly the answer options")
            if min(levels.values()) != 0.0 or max(levels.values()) != 1.0:
                raise SchemaError(f"{self.name}: ordinal values must span [0, 1]")

    @property
    def ordinal_map(self) -> dict[str, float]:
        return dict(self.ordinal_values)

    @property
    def closed_vocabulary(self) -> bool:
        return self.kind in ("binary", "ordinal") or bool(self.answer_options)

    def display_options(self) -> tuple[str, ...]:
        """Answer options as shown to users, with the N/A literal when allowed."""
        if self.kind == "binary":
            options = self.binary_labels
        else:
            options = self.answer_options
        if self.na_allowed:
            return options + (NA_LITERAL,)
        return options

    def binary_label(self, flag: bool) -> str:
        return self.binary_labels[0] if flag else self.binary_labels[1]

    def value_labels(self, value: FieldValue) -> frozenset[str]:
        """Label set of a value under this criterion (binary uses wire labels)."""
        if value.kind == "binary":
            return frozenset((self.binary_label(value.value),))
        return value.as_set()


class Schema:
    """Ordered, name-indexed collection of criteria.

    Enforces name uniqueness at construction; per-criterion invariants are
    enforced by Criterion itself.
    """

    def __init__(self, criteria):
        self.criteria: tuple[Criterion, ...] = tuple(criteria)
        self.by_name: dict[str, Criterion] = {}
        for criterion in self.criteria:
            if criterion.name in self.by_name:
                raise SchemaError(f"duplicate criterion name {criterion.name!r}")
            self.by_name[criterion.name] = criterion

    def __iter__(self):
        return iter(self.criteria)

    def __len__(self):
        return len(self.criteria)

    def __contains__(self, name: str):
        return name in self.by_name

    def __eq__(self, other):
        return isinstance(other, Schema) and self.criteria == other.criteria

    def __getitem__(self, name: str) -> Criterion:
        try:
            return self.by_name[name]
        except KeyError:
            raise SchemaError(f"unknown criterion {name!r}") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.criteria)

    def participating(self) -> tuple[Criterion, ...]:
        """Criteria that enter database similarity (text never does)."""
        return tuple(c for c in self.criteria if c.similarity_participates and c.kind != "text")

    def display_defaults(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.criteria if c.display_default)


@dataclass(frozen=True)
class BibEntry:
    """One parsed bibliographic entry (study or referenced work)."""

    key: str
    entry_type: str
    fields: tuple[tuple[str, str], ...]

    def get(self, name: str, default: str = "") -> str:
        for k, v in self.fields:
            if k == name:
                return v
        return default

    @property
    def title(self) -> str:
        return self.get("title")

    @property
    def year(self) -> int | None:
        raw = self.get("year").strip()
        if len(raw) >= 4 and raw[:4].isdigit():
            return int(raw[:4])
        return None

    @property
    def authors(self) -> tuple[str, ...]:
        from .bibtex import split_authors  # local import avoids a cycle

        return split_authors(self.get("author"))

    @property
    def link(self) -> str:
        url = self.get("url")
        if url:
            return url
        doi = self.get("doi")
        if doi:
            return f"https://doi.org/{doi}"
        return ""


@dataclass(frozen=True)
class StudyRecord:
    """One study: stable id, per-criterion values, authors, abstract, bib entry."""

    study_id: str
    year: int
    values: tuple[tuple[str, FieldValue], ...]
    authors: tuple[str, ...] = ()
    abstract: str = ""
    bib: BibEntry | None = None

    @staticmethod
    def build(study_id, year, values: dict, authors=(), abstract="", bib=None) -> "StudyRecord":
        return StudyRecord(
            study_id=str(study_id),
            year=int(year),
            values=tuple(sorted(values.items())),
            authors=tuple(authors),
            abstract=abstract,
            bib=bib,
        )

    @property
    def value_map(self) -> dict[str, FieldValue]:
        return dict(self.values)

    def value(self, criterion_name: str) -> FieldValue:
        for name, v in self.values:
            if name == criterion_name:
                return v
        raise ModelError(f"{self.study_id}: no value for criterion {criterion_name!r}")

    def with_values(self, values: dict) -> "StudyRecord":
        return replace(self, values=tuple(sorted(values.items())))


@dataclass(frozen=True)
class Violation:
    """One validation finding: which record, which criterion, which rule."""

    study_id: str
    criterion: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.study_id} / {self.criterion}: {self.rule} ({self.message})"


def check_value(criterion: Criterion, value: FieldValue, study_id: str = "") -> list[Violation]:
    """Type- and vocabulary-check one value against its criterion."""
    bad = []

    def hit(rule, message):
        bad.append(Violation(study_id, criterion.name, rule, message))

    if value.is_na:
        if not criterion.na_allowed:
            hit("na not allowed", f"{NA_LITERAL} where na_allowed is false")
        return bad

    expected = {
        "binary": "binary",
        "ordinal": "ordinal",
        "categorical": "categories",
        "numeric": "number",
        "text": "text",
    }[criterion.kind]
    if value.kind != expected:
        hit("kind mismatch", f"expected {expected} value, got {value.kind}")
        return bad

    if criterion.kind == "ordinal" and value.value not in criterion.ordinal_map:
        hit("unknown option", f"{value.value!r} not in {list(criterion.answer_options)}")
    elif criterion.kind == "categorical":
        if not criterion.multi_valued and len(value.value) > 1:
            hit("kind mismatch", "multiple labels on a single-valued criterion")
        if criterion.answer_options:
            unknown = sorted(value.value - set(criterion.answer_options))
            if unknown:
                hit("unknown option", f"{unknown} not in {list(criterion.answer_options)}")
    return bad


def validate_record(record: StudyRecord, schema: Schema) -> list[Violation]:
    """Validate a record against a schema.

    Returns an empty list iff the record is total over the schema, every
    value type-checks, and the record's year matches its Year criterion.
    Violations are data, not exceptions.
    """
    report: list[Violation] = []
    values = record.value_map
    for criterion in schema:
        if criterion.name not in values:
            report.append(Violation(record.study_id, criterion.name, "missing criterion", "no value present"))
            continue
        report.extend(check_value(criterion, values[criterion.name], record.study_id))
    for name in values:
        if name not in schema:
            report.append(Violation(record.study_id, name, "unexpected criterion", "value has no schema entry"))
    if "Year" in schema and "Year" in values:
        year_value = values["Year"]
        if year_value.kind == "number" and int(year_value.value) != record.year:
            report.append(
                Violation(
                    record.study_id,
                    "Year",
                    "year mismatch",
                    f"record year {record.year} != Year value {format_number(year_value.value)}",
                )
            )
    return report


# ---------------------------------------------------------------------------
# Schema manifest (declarative YAML document, one entry per criterion)
# ---------------------------------------------------------------------------

def _criterion_to_manifest(criterion: Criterion) -> dict:
    entry: dict = {"name": criterion.name, "kind": criterion.kind}
    options = list(criterion.answer_options)
    if criterion.kind == "binary":
        options = list(criterion.binary_labels)
    if criterion.na_allowed:
        options = options + [NA_LITERAL]
    if options:
        entry["options"] = options
    if criterion.kind == "ordinal":
        entry["ordinal_values"] = {k: v for k, v in criterion.ordinal_values}
    if criterion.multi_valued:
        entry["multi"] = True
    if not criterion.similarity_participates:
        entry["similarity"] = False
    if criterion.log_transform:
        entry["log_transform"] = True
    if criterion.display_default:
        entry["display"] = True
    if not criterion.na_allowed:
        entry["na"] = False
    return entry


def _criterion_from_manifest(entry: dict) -> Criterion:
    if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
        raise SchemaError(f"manifest entry needs name and kind: {entry!r}")
    options = list(entry.get("options", []))
    if any(not isinstance(o, str) for o in options):
        # Unquoted Yes/No parse as YAML booleans; that is a manifest bug.
        raise SchemaError(f"{entry['name']}: answer options must be quoted strings, got {options!r}")
    na_allowed = bool(entry.get("na", NA_LITERAL in options))
    options = [o for o in options if o != NA_LITERAL]
    kind = entry["kind"]
    binary_labels = ("Yes", "No")
    if kind == "binary" and options:
        if len(options) != 2:
            raise SchemaError(f"{entry['name']}: binary criteria take exactly two labels")
        binary_labels = (options[0], options[1])
        options = []
    raw_levels = entry.get("ordinal_values", {})
    if any(not isinstance(k, str) for k in raw_levels):
        raise SchemaError(f"{entry['name']}: ordinal level labels must be quoted strings, got {list(raw_levels)!r}")
    ordinal_values = tuple((k, float(v)) for k, v in raw_levels.items())
    if kind == "ordinal" and not options:
        options = [k for k, _ in ordinal_values]
    return Criterion(
        name=str(entry["name"]),
        kind=kind,
        multi_valued=bool(entry.get("multi", False)),
        answer_options=tuple(options),
        ordinal_values=ordinal_values,
        na_allowed=na_allowed,
        similarity_participates=bool(entry.get("similarity", True)),
        log_transform=bool(entry.get("log_transform", False)),
        display_default=bool(entry.get("display", False)),
        binary_labels=binary_labels,
    )


def schema_to_manifest(schema: Schema) -> str:
    """Serialize a schema to its YAML manifest text."""
    entries = [_criterion_to_manifest(c) for c in schema]
    return yaml.safe_dump(entries, sort_keys=False, allow_unicode=True)


def schema_from_manifest(text: str) -> Schema:
    """Parse a YAML manifest into a schema, enforcing all invariants."""
    entries = yaml.safe_load(text)
    if not isinstance(entries, list):
        raise SchemaError("manifest must be a list of criterion entries")
    return Schema(_criterion_from_manifest(e) for e in entries)


def default_schema() -> Schema:
    """The bundled 34-criterion manifest."""
    text = resources.files("studyatlas.data").joinpath("default_schema.yaml").read_text("utf-8")
    return schema_from_manifest(text)


# ---------------------------------------------------------------------------
# Canonical serialization and content hashing
# ---------------------------------------------------------------------------

def field_value_to_json(value: FieldValue):
    if value.kind == "categories":
        return {"kind": value.kind, "value": sorted(value.value)}
    return {"kind": value.kind, "value": value.value}


def field_value_from_json(obj) -> FieldValue:
    kind = obj["kind"]
    if kind == "na":
        return NA
    if kind == "categories":
        return FieldValue.categories(obj["value"])
    if kind == "binary":
        return FieldValue.binary(obj["value"])
    if kind == "number":
        return FieldValue.number(obj["value"])
    return FieldValue(kind, obj["value"])


def bib_entry_to_json(entry: BibEntry) -> dict:
    return {"key": entry.key, "type": entry.entry_type, "fields": [list(f) for f in entry.fields]}


def bib_entry_from_json(obj) -> BibEntry:
    return BibEntry(obj["key"], obj["type"], tuple((k, v) for k, v in obj["fields"]))


def record_to_json(record: StudyRecord) -> dict:
    return {
        "study_id": record.study_id,
        "year": record.year,
        "values": {name: field_value_to_json(v) for name, v in record.values},
        "authors": list(record.authors),
        "abstract": record.abstract,
        "bib": bib_entry_to_json(record.bib) if record.bib else None,
    }


def record_from_json(obj) -> StudyRecord:
    return StudyRecord.build(
        obj["study_id"],
        obj["year"],
        {name: field_value_from_json(v) for name, v in obj["values"].items()},
        authors=obj.get("authors", ()),
        abstract=obj.get("abstract", ""),
        bib=bib_entry_from_json(obj["bib"]) if obj.get("bib") else None,
    )


def content_hash(*parts) -> str:
    """SHA-256 over canonical JSON of the given parts."""
    digest = hashlib.sha256()
    for part in parts:
        digest.update(json.dumps(part, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()
