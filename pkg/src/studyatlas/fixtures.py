"""Loader for the bundled 10-study synthetic fixture corpus.

The fixture exercises every criterion kind, N/A cells, an empty category
set, a duplicated record pair, shared and near-miss author names, and
reference lists with exact, perturbed, and decoy titles.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .ingest import BuildConfig, build_snapshot, load_abstracts, load_bibliography, parse_corpus_table
from .model import Schema, schema_from_manifest
from .snapshot import CorpusSnapshot


def fixture_dir() -> Path:
    return Path(str(resources.files("studyatlas.data").joinpath("fixture")))


def fixture_schema() -> Schema:
    return schema_from_manifest((fixture_dir() / "schema.yaml").read_text("utf-8"))


def load_fixture_inputs():
    """Parse the fixture corpus; returns (schema, records, report, abstracts, notes, bib, references, warnings)."""
    base = fixture_dir()
    schema = fixture_schema()
    records, report = parse_corpus_table((base / "corpus.csv").read_bytes(), schema)
    abstracts, notes = load_abstracts((base / "abstracts.csv").read_bytes(), [r.study_id for r in records])
    ref_docs = {path.stem: path.read_bytes() for path in sorted((base / "refs").glob("*.bib"))}
    bib, references, warnings = load_bibliography((base / "corpus.bib").read_bytes(), ref_docs)
    return schema, records, report, abstracts, notes, bib, references, warnings


def fixture_snapshot(config: BuildConfig | None = None) -> CorpusSnapshot:
    """Build the full fixture snapshot (database + abstract matrices, graph)."""
    schema, records, _, abstracts, _, bib, references, _ = load_fixture_inputs()
    return build_snapshot(records, abstracts, bib, references, schema, config)
