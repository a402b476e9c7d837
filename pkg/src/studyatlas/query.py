"""Shared filter semantics, per-criterion distributions, and CSV export.

One FilterSpec drives every view: constraints combine conjunctively across
criteria, include sets match ANY-of, exclude sets match NONE-of, and
not-applicable values match exactly when include_na is set. All operations
are pure reads over an immutable snapshot and fully deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .model import NA_LITERAL, MULTI_VALUE_SEPARATOR, Schema, StudyRecord, format_number
from .snapshot import CorpusSnapshot


class QueryError(ValueError):
    """Invalid filter spec, unknown criterion, or unknown column."""


@dataclass(frozen=True)
class CriterionFilter:
    """Constraints for one criterion; absent pieces do not constrain."""

    include: frozenset[str] | None = None
    exclude: frozenset[str] = frozenset()
    numeric_range: tuple[float, float] | None = None
    ordinal_levels: frozenset[str] | None = None
    include_na: bool = True

    def __post_init__(self):
        if self.include is not None and self.include & self.exclude:
            raise QueryError(f"include and exclude overlap: {sorted(self.include & self.exclude)}")
        if self.numeric_range is not None and self.numeric_range[0] > self.numeric_range[1]:
            raise QueryError(f"numeric range lo > hi: {self.numeric_range}")


@dataclass(frozen=True)
class FilterSpec:
    criteria: tuple[tuple[str, CriterionFilter], ...] = ()

    @staticmethod
    def build(constraints: dict[str, CriterionFilter]) -> "FilterSpec":
        return FilterSpec(criteria=tuple(sorted(constraints.items())))

    @property
    def criteria_map(self) -> dict[str, CriterionFilter]:
        return dict(self.criteria)

    def check(self, schema: Schema) -> None:
        for name, _ in self.criteria:
            if name not in schema:
                raise QueryError(f"filter references unknown criterion {name!r}")

    def to_json(self) -> str:
        """Canonical JSON encoding (sorted keys, no insignificant whitespace)."""
        payload = {}
        for name, constraint in sorted(self.criteria):
            entry: dict = {}
            if constraint.include is not None:
                entry["include"] = sorted(constraint.include)
            if constraint.exclude:
                entry["exclude"] = sorted(constraint.exclude)
            if constraint.numeric_range is not None:
                entry["range"] = list(constraint.numeric_range)
            if constraint.ordinal_levels is not None:
                entry["levels"] = sorted(constraint.ordinal_levels)
            if not constraint.include_na:
                entry["include_na"] = False
            payload[name] = entry
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "FilterSpec":
        try:
            payload = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise QueryError(f"filter is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise QueryError("filter JSON must be an object of criterion constraints")
        constraints = {}
        for name, entry in payload.items():
            if not isinstance(entry, dict):
                raise QueryError(f"constraint for {name!r} must be an object")
            unknown = set(entry) - {"include", "exclude", "range", "levels", "include_na"}
            if unknown:
                raise QueryError(f"constraint for {name!r} has unknown keys {sorted(unknown)}")
            for field_name in ("include", "exclude", "levels"):
                if field_name in entry:
                    values = entry[field_name]
                    if not isinstance(values, list) or any(not isinstance(v, str) for v in values):
                        raise QueryError(f"{name!r}.{field_name} must be a list of strings")
            numeric_range = entry.get("range")
            if numeric_range is not None:
                ok = (
                    isinstance(numeric_range, list)
                    and len(numeric_range) == 2
                    and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in numeric_range)
                )
                if not ok:
                    raise QueryError(f"{name!r}.range must be a [lo, hi] pair of numbers")
            constraints[name] = CriterionFilter(
                include=frozenset(entry["include"]) if "include" in entry else None,
                exclude=frozenset(entry.get("exclude", ())),
                numeric_range=tuple(float(x) for x in numeric_range) if numeric_range else None,
                ordinal_levels=frozenset(entry["levels"]) if "levels" in entry else None,
                include_na=bool(entry.get("include_na", True)),
            )
        return FilterSpec.build(constraints)


def _matches(record: StudyRecord, name: str, constraint: CriterionFilter, schema: Schema) -> bool:
    criterion = schema[name]
    value = record.value(name)
    if value.is_na:
        return constraint.include_na
    labels = criterion.value_labels(value)
    if constraint.include is not None and not (labels & constraint.include):
        return False
    if labels & constraint.exclude:
        return False
    if constraint.ordinal_levels is not None:
        if value.kind != "ordinal" or value.value not in constraint.ordinal_levels:
            return False
    if constraint.numeric_range is not None:
        lo, hi = constraint.numeric_range
        if value.kind != "number" or not (lo <= value.value <= hi):
            return False
    return True


def apply_filter(snapshot: CorpusSnapshot, spec: FilterSpec) -> list[str]:
    """Ids of records matching every criterion constraint, in (year, id) order."""
    spec.check(snapshot.schema)
    hits = [
        record for record in snapshot.records
        if all(_matches(record, name, constraint, snapshot.schema) for name, constraint in spec.criteria)
    ]
    hits.sort(key=lambda r: (r.year, r.study_id))
    return [r.study_id for r in hits]


@dataclass(frozen=True)
class Distribution:
    criterion: str
    bars: tuple[tuple[str, int], ...]
    truncated: bool
    total_records: int


def distribution(snapshot: CorpusSnapshot, ids, criterion_name: str, max_bars: int = 0) -> Distribution:
    """Answer-option counts over the given records.

    Multi-valued records count once per distinct owned label; N/A is its
    own bar. Bars sort by count descending then label ascending, cut to
    max_bars when positive.
    """
    if criterion_name not in snapshot.schema:
        raise QueryError(f"unknown criterion {criterion_name!r}")
    criterion = snapshot.schema[criterion_name]
    counts: dict[str, int] = {}
    ids = list(ids)
    for study_id in ids:
        value = snapshot.record(study_id).value(criterion_name)
        if value.is_na:
            counts[NA_LITERAL] = counts.get(NA_LITERAL, 0) + 1
            continue
        for label in criterion.value_labels(value):
            counts[label] = counts.get(label, 0) + 1
    bars = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    truncated = 0 < max_bars < len(bars)
    if truncated:
        bars = bars[:max_bars]
    return Distribution(
        criterion=criterion_name,
        bars=tuple(bars),
        truncated=truncated,
        total_records=len(ids),
    )


def _cell_text(record: StudyRecord, column: str, schema: Schema) -> str:
    if column == "study_id":
        return record.study_id
    if column == "authors":
        return MULTI_VALUE_SEPARATOR.join(record.authors)
    criterion = schema[column]
    value = record.value(column)
    if value.is_na:
        return NA_LITERAL
    if value.kind == "binary":
        return criterion.binary_label(value.value)
    if value.kind == "categories":
        return MULTI_VALUE_SEPARATOR.join(sorted(value.value))
    if value.kind == "number":
        return format_number(value.value)
    return str(value.value)


def export_csv(snapshot: CorpusSnapshot, ids, columns=None) -> bytes:
    """UTF-8 CSV of the given records; byte-stable for identical inputs.

    The header equals the requested columns in order (default: study_id,
    authors, then every schema criterion, which round-trips through
    ingestion). Rows follow the ids order exactly.
    """
    if columns is None:
        columns = ["study_id", "authors", *snapshot.schema.names]
    else:
        columns = list(columns)
        for column in columns:
            if column not in ("study_id", "authors") and column not in snapshot.schema:
                raise QueryError(f"unknown export column {column!r}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for study_id in ids:
        record = snapshot.record(study_id)
        writer.writerow([_cell_text(record, column, snapshot.schema) for column in columns])
    return buffer.getvalue().encode("utf-8")
