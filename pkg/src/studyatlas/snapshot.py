"""Immutable corpus snapshots: schema + records + derived artifacts.

A snapshot is the unit every query reads. Its id is a content hash over
schema, records, abstracts, and bibliography; derived artifacts (similarity
matrices, the scholarly graph) are functions of those inputs and do not
enter the hash.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import ScholarlyGraph
from .model import (
    BibEntry,
    Schema,
    StudyRecord,
    bib_entry_to_json,
    content_hash,
    record_to_json,
    schema_to_manifest,
)
from .similarity import SimilarityMatrix


@dataclass(frozen=True, eq=False)
class CorpusSnapshot:
    schema: Schema
    records: tuple[StudyRecord, ...]  # sorted by study_id
    abstracts: dict[str, str]
    bib: dict[str, BibEntry]
    references: dict[str, tuple[BibEntry, ...]]
    graph: ScholarlyGraph = ScholarlyGraph()
    matrices: dict[str, SimilarityMatrix] = field(default_factory=dict)
    snapshot_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.study_id: r for r in self.records})
        if not self.snapshot_id:
            object.__setattr__(self, "snapshot_id", compute_snapshot_id(
                self.schema, self.records, self.abstracts, self.bib, self.references))
        for mode, matrix in self.matrices.items():
            if set(matrix.ids) != set(self.ids):
                raise ValueError(f"{mode} matrix ids do not match the snapshot record set")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.study_id for r in self.records)

    def record(self, study_id: str) -> StudyRecord:
        try:
            return self._by_id[study_id]
        except KeyError:
            raise KeyError(f"unknown study id {study_id!r}") from None

    def __contains__(self, study_id: str) -> bool:
        return study_id in self._by_id

    def __len__(self) -> int:
        return len(self.records)


def compute_snapshot_id(schema, records, abstracts, bib, references) -> str:
    """Deterministic content hash; identical inputs give identical ids."""
    return content_hash(
        schema_to_manifest(schema),
        [record_to_json(r) for r in sorted(records, key=lambda r: r.study_id)],
        {k: abstracts[k] for k in sorted(abstracts)},
        {k: bib_entry_to_json(bib[k]) for k in sorted(bib)},
        {k: [bib_entry_to_json(e) for e in references[k]] for k in sorted(references)},
    )
