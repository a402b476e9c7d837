"""Corpus ingestion: CSV table, abstracts, bibliography, snapshot build.

The corpus table is UTF-8 CSV with a header of study_id, authors, and one
column per schema criterion. Multi-valued cells split on ";", the literal
"N/A" cell is a not-applicable value, and an empty multi-valued cell is an
empty set. Rows that violate the schema are rejected individually and
reported; only header-level problems abort the batch.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bibtex import parse_bibtex
from .graph import DecisionStore, MatcherConfig, extract_graph
from .model import (
    NA,
    NA_LITERAL,
    MULTI_VALUE_SEPARATOR,
    BibEntry,
    Criterion,
    FieldValue,
    Schema,
    StudyRecord,
    Violation,
    validate_record,
)
from .similarity import EmbeddingCache, abstract_similarity, database_similarity, fallback_embedder
from .snapshot import CorpusSnapshot

ID_COLUMN = "study_id"
AUTHORS_COLUMN = "authors"


class IngestError(ValueError):
    """Hard ingestion failure (malformed header, bad encoding, unknown ids)."""


@dataclass
class AliasMap:
    """Per-criterion raw-label → canonical-label consolidation map."""

    mapping: dict[str, dict[str, str]] = field(default_factory=dict)

    def resolve(self, criterion_name: str, label: str) -> str:
        return self.mapping.get(criterion_name, {}).get(label, label)

    def check(self, schema: Schema) -> list[str]:
        """Idempotence and closed-vocabulary problems, as messages."""
        problems = []
        for name, table in self.mapping.items():
            if name not in schema:
                problems.append(f"alias map references unknown criterion {name!r}")
                continue
            criterion = schema[name]
            for raw, canonical in table.items():
                if table.get(canonical, canonical) != canonical:
                    problems.append(f"{name}: alias chain {raw!r} -> {canonical!r} is not idempotent")
                if criterion.answer_options and canonical not in criterion.answer_options:
                    problems.append(f"{name}: canonical label {canonical!r} not in the closed vocabulary")
        return problems


def load_alias_dir(directory) -> AliasMap:
    """Read <criterion>.csv files of (raw, canonical) rows from a directory."""
    mapping: dict[str, dict[str, str]] = {}
    directory = Path(directory)
    for path in sorted(directory.glob("*.csv")):
        table: dict[str, str] = {}
        for row in csv.reader(io.StringIO(path.read_text("utf-8-sig"))):
            if not row or not row[0].strip():
                continue
            if len(row) < 2:
                raise IngestError(f"{path.name}: alias rows need two columns (raw, canonical)")
            table[row[0].strip()] = row[1].strip()
        mapping[path.stem] = table
    return AliasMap(mapping=mapping)


@dataclass
class IngestReport:
    record_count: int = 0
    violations: list[Violation] = field(default_factory=list)
    unknown_labels: list[str] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def rejected_count(self) -> int:
        return len({v.study_id for v in self.violations}) + len(self.duplicate_ids)

    def summary(self) -> str:
        return (
            f"{self.record_count} records, {len(self.violations)} violations, "
            f"{len(self.unknown_labels)} unknown labels, {len(self.duplicate_ids)} duplicate ids"
        )


def _decode(data: bytes, what: str) -> str:
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IngestError(f"{what} is not valid UTF-8: {exc.reason} at byte {exc.start}") from None


def _parse_cell(cell: str, criterion: Criterion, aliases: AliasMap):
    """Parse one cell into a FieldValue; returns (value, problems, unknown_labels)."""
    text = cell.strip()
    problems: list[tuple[str, str]] = []
    unknown: list[str] = []

    if text == NA_LITERAL:
        if not criterion.na_allowed:
            problems.append(("na not allowed", f"{NA_LITERAL} where na_allowed is false"))
        return NA, problems, unknown

    if text == "":
        if criterion.kind == "categorical" and criterion.multi_valued:
            return FieldValue.categories(()), problems, unknown
        if criterion.na_allowed:
            return NA, problems, unknown
        problems.append(("empty value", "empty cell on a required column"))
        return NA, problems, unknown

    if criterion.kind == "binary":
        label = aliases.resolve(criterion.name, text)
        true_label, false_label = criterion.binary_labels
        if label == true_label:
            return FieldValue.binary(True), problems, unknown
        if label == false_label:
            return FieldValue.binary(False), problems, unknown
        problems.append(("unknown option", f"{label!r} not in {list(criterion.binary_labels)}"))
        unknown.append(label)
        return NA, problems, unknown

    if criterion.kind == "ordinal":
        label = aliases.resolve(criterion.name, text)
        if label not in criterion.ordinal_map:
            problems.append(("unknown option", f"{label!r} not in {list(criterion.answer_options)}"))
            unknown.append(label)
            return NA, problems, unknown
        return FieldValue.ordinal(label), problems, unknown

    if criterion.kind == "categorical":
        if criterion.multi_valued:
            parts = [p.strip() for p in text.split(MULTI_VALUE_SEPARATOR)]
            labels = [aliases.resolve(criterion.name, p) for p in parts if p]
        else:
            labels = [aliases.resolve(criterion.name, text)]
        if criterion.answer_options:
            bad = sorted(set(labels) - set(criterion.answer_options))
            if bad:
                problems.append(("unknown option", f"{bad} not in {list(criterion.answer_options)}"))
                unknown.extend(bad)
                return NA, problems, unknown
        return FieldValue.categories(labels), problems, unknown

    if criterion.kind == "numeric":
        try:
            return FieldValue.number(float(text)), problems, unknown
        except ValueError:
            problems.append(("not numeric", f"cannot parse {text!r} as a number"))
            return NA, problems, unknown

    return FieldValue.text(text), problems, unknown


def parse_corpus_table(data: bytes, schema: Schema, aliases: AliasMap | None = None):
    """Parse the corpus CSV into records plus an anomaly report.

    The header must contain exactly study_id, authors, and every schema
    criterion; anything missing or unexpected is a hard error. Rows with
    violations are rejected individually and reported, never fatal.
    """
    aliases = aliases or AliasMap()
    text = _decode(data, "corpus table")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise IngestError("corpus table has no header row")

    header = [cell.strip() for cell in rows[0]]
    expected = [ID_COLUMN, AUTHORS_COLUMN, *schema.names]
    missing = [name for name in expected if name not in header]
    unexpected = [name for name in header if name not in expected]
    duplicated = sorted({name for name in header if header.count(name) > 1})
    if missing or unexpected or duplicated:
        parts = []
        if missing:
            parts.append(f"missing columns: {missing}")
        if unexpected:
            parts.append(f"unexpected columns: {unexpected}")
        if duplicated:
            parts.append(f"duplicated columns: {duplicated}")
        raise IngestError("malformed corpus header: " + "; ".join(parts))
    column = {name: header.index(name) for name in header}

    report = IngestReport()
    records: list[StudyRecord] = []
    seen_ids: set[str] = set()
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            report.violations.append(Violation(f"line {line}", "", "row shape", f"{len(row)} cells, expected {len(header)}"))
            continue
        study_id = row[column[ID_COLUMN]].strip()
        if not study_id:
            report.violations.append(Violation(f"line {line}", ID_COLUMN, "missing id", "empty study_id"))
            continue
        if study_id in seen_ids:
            report.duplicate_ids.append(study_id)
            report.warnings.append(f"duplicate study_id {study_id!r} at line {line}; keeping the first row")
            continue

        row_problems: list[Violation] = []
        values: dict[str, FieldValue] = {}
        for criterion in schema:
            value, problems, unknown = _parse_cell(row[column[criterion.name]], criterion, aliases)
            values[criterion.name] = value
            report.unknown_labels.extend(f"{criterion.name}: {label}" for label in unknown)
            row_problems.extend(Violation(study_id, criterion.name, rule, msg) for rule, msg in problems)

        year = 0
        if "Year" in schema:
            year_value = values["Year"]
            if year_value.kind == "number" and float(year_value.value).is_integer():
                year = int(year_value.value)
            else:
                row_problems.append(Violation(study_id, "Year", "bad year", "Year must be an integer"))

        if row_problems:
            report.violations.extend(row_problems)
            continue

        authors = tuple(p.strip() for p in row[column[AUTHORS_COLUMN]].split(MULTI_VALUE_SEPARATOR) if p.strip())
        record = StudyRecord.build(study_id, year, values, authors=authors)
        leftover = validate_record(record, schema)
        if leftover:
            report.violations.extend(leftover)
            continue
        seen_ids.add(study_id)
        records.append(record)

    report.record_count = len(records)
    return records, report


def load_abstracts(data: bytes, corpus_ids) -> tuple[dict[str, str], list[str]]:
    """Read the (study_id, abstract) CSV into a mapping total over the corpus.

    Ids outside the corpus are a hard error; corpus studies absent from the
    file get an empty abstract plus a warning note.
    """
    corpus_ids = list(corpus_ids)
    known = set(corpus_ids)
    text = _decode(data, "abstracts file")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0][:2]] != [ID_COLUMN, "abstract"]:
        raise IngestError(f"abstracts file must have a header of ({ID_COLUMN}, abstract)")
    mapping: dict[str, str] = {}
    for row in rows[1:]:
        if not row or not row[0].strip():
            continue
        study_id = row[0].strip()
        if study_id not in known:
            raise IngestError(f"abstract for unknown study id {study_id!r}")
        mapping[study_id] = row[1] if len(row) > 1 else ""
    notes = []
    for study_id in corpus_ids:
        if study_id not in mapping or not mapping.get(study_id, "").strip():
            mapping.setdefault(study_id, "")
            notes.append(f"no abstract for {study_id}")
    return mapping, notes


def load_bibliography(corpus_bib: bytes, reference_docs: dict[str, bytes] | None = None):
    """Parse the corpus BibTeX plus per-study reference-list documents.

    Returns (bib entries keyed by citation key, per-study reference entry
    tuples, warning strings). Entry-level parse failures are warnings;
    structural collapse raises with a byte offset.
    """
    warnings: list[str] = []
    entries, bib_warnings = parse_bibtex(corpus_bib)
    warnings.extend(f"bibliography: {w}" for w in bib_warnings)
    references: dict[str, tuple[BibEntry, ...]] = {}
    for study_id, payload in (reference_docs or {}).items():
        ref_entries, ref_warnings = parse_bibtex(payload)
        warnings.extend(f"references[{study_id}]: {w}" for w in ref_warnings)
        refs = tuple(ref_entries.values())
        references[study_id] = refs
        for entry in refs:
            if entry.year is None:
                warnings.append(f"references[{study_id}]: entry {entry.key!r} has no usable year")
    return entries, references, warnings


@dataclass
class BuildConfig:
    """Knobs for snapshot building; defaults build everything offline."""

    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    embedding_provider: str = "fallback"  # "fallback" | "none"
    embedding_cache_dir: str | None = None
    decisions_path: str | None = None
    similarity_participates: dict[str, bool] = field(default_factory=dict)


def build_snapshot(records, abstracts, bib, references, schema: Schema,
                   config: BuildConfig | None = None) -> CorpusSnapshot:
    """Assemble the immutable snapshot: validate, extract graph, compute matrices.

    Validation failures propagate as IngestError; the snapshot id is a
    deterministic content hash of schema, records, abstracts, and
    bibliography.
    """
    config = config or BuildConfig()
    records = sorted(records, key=lambda r: r.study_id)
    problems = [v for record in records for v in validate_record(record, schema)]
    if problems:
        raise IngestError(
            f"{len(problems)} validation violations; first: {problems[0]}"
        )

    abstracts = {r.study_id: abstracts.get(r.study_id, "") for r in records}
    records = tuple(_attach(r, abstracts[r.study_id], bib.get(r.study_id)) for r in records)

    record_ids = {r.study_id for r in records}
    corpus_bib = {sid: entry for sid, entry in bib.items() if sid in record_ids}
    store = DecisionStore(config.decisions_path) if config.decisions_path else DecisionStore()
    graph = extract_graph(records, references, corpus_bib, config.matcher, store)

    participating = tuple(
        c for c in schema.participating()
        if config.similarity_participates.get(c.name, True)
    )
    matrices = {"database": database_similarity(records, schema, participating)}
    if config.embedding_provider == "fallback":
        provider = fallback_embedder([abstracts[r.study_id] for r in records])
        cache = EmbeddingCache(config.embedding_cache_dir) if config.embedding_cache_dir else None
        matrices["abstract"] = abstract_similarity(
            [r.study_id for r in records], abstracts, provider, cache)
    elif config.embedding_provider != "none":
        raise IngestError(f"unknown embedding provider {config.embedding_provider!r}")

    return CorpusSnapshot(
        schema=schema,
        records=records,
        abstracts=abstracts,
        bib=corpus_bib,
        references={k: tuple(v) for k, v in references.items()},
        graph=graph,
        matrices=matrices,
    )


def _attach(record: StudyRecord, abstract: str, entry) -> StudyRecord:
    return replace(record, abstract=abstract, bib=entry)
