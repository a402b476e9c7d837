"""Command-line interface.

Verbs: validate (schema-check a corpus table), ingest (build and persist a
snapshot), snapshot (inspect a persisted snapshot), similarity (export a
matrix), neighbors (rank partners of one study), graph (extract / review),
and serve (run the HTTP API).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .graph import DecisionStore, extract_graph, resolve_review
from .ingest import (
    BuildConfig,
    IngestError,
    build_snapshot,
    load_abstracts,
    load_alias_dir,
    load_bibliography,
    parse_corpus_table,
)
from .model import default_schema, schema_from_manifest
from .query import FilterSpec, apply_filter, export_csv
from .similarity import neighbors as rank_neighbors
from .store import load_snapshot, save_snapshot

MODE_ALIASES = {"db": "database", "database": "database", "abstract": "abstract"}


def _load_schema(path: str | None):
    if path is None:
        return default_schema()
    return schema_from_manifest(Path(path).read_text("utf-8"))


def _load_inputs(args):
    schema = _load_schema(args.schema)
    aliases = load_alias_dir(args.aliases) if args.aliases else None
    corpus_bytes = Path(args.corpus).read_bytes()
    records, report = parse_corpus_table(corpus_bytes, schema, aliases)

    abstracts: dict[str, str] = {r.study_id: "" for r in records}
    if args.abstracts:
        abstracts, notes = load_abstracts(Path(args.abstracts).read_bytes(), [r.study_id for r in records])
        report.warnings.extend(notes)

    bib, references = {}, {}
    if args.bib:
        ref_docs = {}
        if args.refs:
            for path in sorted(Path(args.refs).glob("*.bib")):
                ref_docs[path.stem] = path.read_bytes()
        bib, references, warnings = load_bibliography(Path(args.bib).read_bytes(), ref_docs)
        report.warnings.extend(warnings)
    return schema, records, report, abstracts, bib, references


def _add_input_arguments(parser):
    parser.add_argument("--corpus", required=True, help="corpus table CSV")
    parser.add_argument("--schema", help="schema manifest YAML (default: bundled 34-criterion schema)")
    parser.add_argument("--aliases", help="directory of per-criterion alias CSVs")
    parser.add_argument("--abstracts", help="(study_id, abstract) CSV")
    parser.add_argument("--bib", help="corpus bibliography BibTeX file")
    parser.add_argument("--refs", help="directory of per-study reference-list .bib files")


def cmd_validate(args) -> int:
    _, _, report, _, _, _ = _load_inputs(args)
    print(report.summary())
    for violation in report.violations:
        print(f"  violation: {violation}")
    for label in report.unknown_labels:
        print(f"  unknown label: {label}")
    for study_id in report.duplicate_ids:
        print(f"  duplicate id: {study_id}")
    return 1 if (report.violations or report.duplicate_ids) else 0


def cmd_ingest(args) -> int:
    schema, records, report, abstracts, bib, references = _load_inputs(args)
    if report.violations:
        print(report.summary(), file=sys.stderr)
        for violation in report.violations:
            print(f"  rejected: {violation}", file=sys.stderr)
    config = BuildConfig(
        embedding_provider=args.embedding,
        embedding_cache_dir=args.embedding_cache,
        decisions_path=args.decisions,
    )
    snapshot = build_snapshot(records, abstracts, bib, references, schema, config)
    save_snapshot(snapshot, args.out)
    print(f"snapshot {snapshot.snapshot_id[:12]} with {len(snapshot)} records -> {args.out}")
    for warning in report.warnings:
        print(f"  note: {warning}")
    return 0


def cmd_snapshot(args) -> int:
    snapshot = load_snapshot(args.dir)
    info = {
        "snapshot_id": snapshot.snapshot_id,
        "records": len(snapshot),
        "criteria": len(snapshot.schema),
        "matrices": sorted(snapshot.matrices),
        "author_edges": len(snapshot.graph.author_edges),
        "citation_edges": len(snapshot.graph.citation_edges),
        "review_queue": len(snapshot.graph.review_queue),
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_similarity(args) -> int:
    snapshot = load_snapshot(args.dir)
    mode = MODE_ALIASES.get(args.mode)
    if mode is None:
        print(f"unknown mode {args.mode!r}; use db or abstract", file=sys.stderr)
        return 2
    matrix = snapshot.matrices.get(mode)
    if matrix is None:
        print(f"{mode} matrix is not built in this snapshot", file=sys.stderr)
        return 1
    values = matrix.z if args.z else matrix.raw
    out = sys.stdout
    if args.format == "csv":
        print("," + ",".join(matrix.ids), file=out)
        for i, study_id in enumerate(matrix.ids):
            print(study_id + "," + ",".join(repr(float(v)) for v in values[i]), file=out)
    else:
        print("id_a,id_b,raw,z", file=out)
        for i, id_a in enumerate(matrix.ids):
            for j in range(i + 1, len(matrix.ids)):
                print(f"{id_a},{matrix.ids[j]},{float(matrix.raw[i, j])!r},{float(matrix.z[i, j])!r}", file=out)
    return 0


def cmd_neighbors(args) -> int:
    snapshot = load_snapshot(args.dir)
    mode = MODE_ALIASES.get(args.mode)
    matrix = snapshot.matrices.get(mode or "")
    if matrix is None:
        print(f"{args.mode} matrix is not built in this snapshot", file=sys.stderr)
        return 1
    for hit in rank_neighbors(matrix, args.study_id, args.threshold):
        print(f"{hit.study_id}\tz={hit.z:+.4f}\traw={hit.raw:.4f}")
    return 0


def cmd_graph_extract(args) -> int:
    snapshot = load_snapshot(args.dir)
    store = DecisionStore(args.decisions)
    graph = extract_graph(snapshot.records, snapshot.references, snapshot.bib, store=store)
    save_snapshot(replace(snapshot, graph=graph), args.dir)
    print(f"{len(graph.author_edges)} author edges, {len(graph.citation_edges)} citation edges, "
          f"{len(graph.review_queue)} queued for review")
    return 0


def cmd_graph_review(args) -> int:
    import csv as csv_module
    import io

    snapshot = load_snapshot(args.dir)
    store = DecisionStore(args.decisions)
    graph = snapshot.graph
    if args.action == "list":
        if args.csv:
            buffer = io.StringIO()
            writer = csv_module.writer(buffer, lineterminator="\n")
            writer.writerow(["key", "kind", "id_a", "id_b", "score", "evidence", "verdict"])
            for candidate in graph.review_queue:
                evidence = "; ".join(f"{k}={v}" for k, v in candidate.evidence)
                writer.writerow([candidate.key, candidate.kind, candidate.ids[0], candidate.ids[1],
                                 f"{candidate.score:.4f}", evidence, ""])
            sys.stdout.write(buffer.getvalue())
        else:
            for candidate in graph.review_queue:
                evidence = "; ".join(f"{k}={v}" for k, v in candidate.evidence)
                print(f"{candidate.key[:12]}  {candidate.kind:8s}  {candidate.ids[0]} ~ {candidate.ids[1]}  "
                      f"score={candidate.score:.3f}  {evidence}")
        return 0
    if args.action == "import":
        # Re-import a reviewed CSV: rows with a verdict column get applied.
        rows = list(csv_module.reader(io.StringIO(Path(args.file).read_text("utf-8-sig"))))
        if not rows or "key" not in rows[0] or "verdict" not in rows[0]:
            print("error: review CSV needs key and verdict columns", file=sys.stderr)
            return 2
        key_col = rows[0].index("key")
        verdict_col = rows[0].index("verdict")
        applied = 0
        for row in rows[1:]:
            if len(row) <= max(key_col, verdict_col):
                continue
            verdict = row[verdict_col].strip().lower()
            if verdict in ("accept", "reject"):
                graph = resolve_review(graph, row[key_col].strip(), verdict, store)
                applied += 1
        snapshot = replace(snapshot, graph=graph)
        save_snapshot(snapshot, args.dir)
        print(f"applied {applied} verdicts; decisions stored in {args.decisions}")
        return 0
    graph = resolve_review(graph, args.key, args.action, store)
    snapshot = replace(snapshot, graph=graph)
    save_snapshot(snapshot, args.dir)
    print(f"{args.action}ed {args.key}; decisions stored in {args.decisions}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import ServingState, SubmissionStore, create_app

    config = load_config(args.config) if args.config else load_config()
    snapshot = load_snapshot(args.dir or config.snapshot_dir)
    submissions = SubmissionStore(config.submissions_path or None)
    state = ServingState(snapshot=snapshot, config=config, submissions=submissions)
    app = create_app(state)
    uvicorn.run(app, host=args.host or config.host, port=args.port or config.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="studyatlas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus table against the schema")
    _add_input_arguments(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ingest", help="build a snapshot from corpus inputs")
    _add_input_arguments(p)
    p.add_argument("--out", required=True, help="snapshot output directory")
    p.add_argument("--embedding", default="fallback", choices=["fallback", "none"],
                   help="abstract-similarity embedding provider")
    p.add_argument("--embedding-cache", help="embedding cache directory")
    p.add_argument("--decisions", help="review decisions file to replay")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("snapshot", help="summarize a persisted snapshot")
    p.add_argument("dir", help="snapshot directory")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("similarity", help="print a similarity matrix")
    p.add_argument("--mode", default="db", help="db or abstract")
    p.add_argument("--dir", required=True, help="snapshot directory")
    p.add_argument("--format", default="edges", choices=["csv", "edges"])
    p.add_argument("--z", action="store_true", help="emit z-scores in csv format (default raw)")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("neighbors", help="rank similarity partners of one study")
    p.add_argument("study_id")
    p.add_argument("--threshold", type=float, default=float("-inf"), help="z-score threshold")
    p.add_argument("--mode", default="db", help="db or abstract")
    p.add_argument("--dir", required=True, help="snapshot directory")
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("graph", help="scholarly graph extraction and review")
    graph_sub = p.add_subparsers(dest="graph_command", required=True)

    g = graph_sub.add_parser("extract", help="re-run extraction over a snapshot")
    g.add_argument("--dir", required=True)
    g.add_argument("--decisions", default="decisions.jsonl")
    g.set_defaults(func=cmd_graph_extract)

    r = graph_sub.add_parser("review", help="inspect or resolve the review queue")
    review_sub = r.add_subparsers(dest="review_command", required=True)
    for action in ("list", "accept", "reject", "import"):
        g = review_sub.add_parser(action, help=f"{action} review-queue candidates")
        g.add_argument("--dir", required=True)
        g.add_argument("--decisions", default="decisions.jsonl")
        if action == "list":
            g.add_argument("--csv", action="store_true", help="emit the queue as CSV")
        elif action == "import":
            g.add_argument("file", help="reviewed CSV with key and verdict columns")
        else:
            g.add_argument("key", help="candidate key (prefix accepted)")
        g.set_defaults(func=cmd_graph_review, action=action)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--config", help="service config YAML")
    p.add_argument("--dir", help="snapshot directory (overrides config)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
