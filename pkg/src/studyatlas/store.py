"""Snapshot persistence: one directory per snapshot.

snapshot.json holds schema, records, abstracts, bibliography, graph, and
the snapshot id; matrices.npz holds the similarity matrices. Loading
verifies the stored id against a recomputation of the content hash.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import graph_from_json, graph_to_json
from .model import (
    bib_entry_from_json,
    bib_entry_to_json,
    record_from_json,
    record_to_json,
    schema_from_manifest,
    schema_to_manifest,
)
from .similarity import SimilarityMatrix
from .snapshot import CorpusSnapshot, compute_snapshot_id

SNAPSHOT_FILE = "snapshot.json"
MATRICES_FILE = "matrices.npz"


class StoreError(ValueError):
    pass


def save_snapshot(snapshot: CorpusSnapshot, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {
        "snapshot_id": snapshot.snapshot_id,
        "schema_manifest": schema_to_manifest(snapshot.schema),
        "records": [record_to_json(r) for r in snapshot.records],
        "abstracts": snapshot.abstracts,
        "bib": {k: bib_entry_to_json(v) for k, v in snapshot.bib.items()},
        "references": {k: [bib_entry_to_json(e) for e in v] for k, v in snapshot.references.items()},
        "graph": graph_to_json(snapshot.graph),
        "matrices": {
            mode: {
                "ids": list(m.ids),
                "mode": m.mode,
                "population_mean": m.population_mean,
                "population_sd": m.population_sd,
                "degenerate": m.degenerate,
                "excluded": list(m.excluded),
            }
            for mode, m in snapshot.matrices.items()
        },
    }
    tmp = directory / (SNAPSHOT_FILE + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1), "utf-8")
    tmp.replace(directory / SNAPSHOT_FILE)

    arrays = {}
    for mode, matrix in snapshot.matrices.items():
        arrays[f"{mode}_raw"] = matrix.raw
        arrays[f"{mode}_z"] = matrix.z
    if arrays:
        with open(directory / MATRICES_FILE, "wb") as handle:
            np.savez(handle, **arrays)
    return directory


def load_snapshot(directory) -> CorpusSnapshot:
    directory = Path(directory)
    path = directory / SNAPSHOT_FILE
    if not path.exists():
        raise StoreError(f"no {SNAPSHOT_FILE} in {directory}")
    payload = json.loads(path.read_text("utf-8"))

    schema = schema_from_manifest(payload["schema_manifest"])
    records = tuple(record_from_json(r) for r in payload["records"])
    abstracts = dict(payload["abstracts"])
    bib = {k: bib_entry_from_json(v) for k, v in payload["bib"].items()}
    references = {k: tuple(bib_entry_from_json(e) for e in v) for k, v in payload["references"].items()}

    matrices = {}
    meta = payload.get("matrices", {})
    if meta:
        matrix_path = directory / MATRICES_FILE
        if not matrix_path.exists():
            raise StoreError(f"snapshot lists matrices but {MATRICES_FILE} is missing")
        with np.load(matrix_path) as arrays:
            for mode, info in meta.items():
                matrices[mode] = SimilarityMatrix(
                    ids=tuple(info["ids"]),
                    raw=arrays[f"{mode}_raw"].copy(),
                    z=arrays[f"{mode}_z"].copy(),
                    mode=info["mode"],
                    population_mean=info["population_mean"],
                    population_sd=info["population_sd"],
                    degenerate=info["degenerate"],
                    excluded=tuple(info.get("excluded", ())),
                )

    snapshot = CorpusSnapshot(
        schema=schema,
        records=records,
        abstracts=abstracts,
        bib=bib,
        references=references,
        graph=graph_from_json(payload.get("graph", {})),
        matrices=matrices,
        snapshot_id=payload["snapshot_id"],
    )
    expected = compute_snapshot_id(schema, records, abstracts, bib, references)
    if expected != snapshot.snapshot_id:
        raise StoreError(
            f"snapshot id mismatch: stored {snapshot.snapshot_id[:12]}..., content hashes to {expected[:12]}..."
        )
    return snapshot
