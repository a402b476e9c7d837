"""Stateless HTTP API over an atomically swappable snapshot.

Every response is a pure function of (snapshot, request) and echoes the
snapshot id. Readers always see one coherent snapshot: the serving state
holds a single reference that the writer path replaces wholesale.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .config import ServiceConfig
from .ingest import BuildConfig, build_snapshot, parse_corpus_table
from .model import NA_LITERAL, bib_entry_to_json
from .query import Distribution, FilterSpec, QueryError, apply_filter, distribution, export_csv
from .similarity import neighbors
from .snapshot import CorpusSnapshot

MODE_ALIASES = {"db": "database", "database": "database", "abstract": "abstract"}


@dataclass
class Submission:
    submission_id: str
    contact: str
    row: dict[str, str]
    note: str = ""
    status: str = "pending"


class SubmissionStore:
    """Pending contribution rows; persisted as JSON lines when given a path."""

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self._items: dict[str, Submission] = {}
        if self.path is not None and self.path.exists():
            for line in self.path.read_text("utf-8").splitlines():
                if line.strip():
                    obj = json.loads(line)
                    self._items[obj["submission_id"]] = Submission(**obj)

    def add(self, submission: Submission) -> None:
        self._items[submission.submission_id] = submission
        self._persist(submission)

    def set_status(self, submission_id: str, status: str) -> Submission:
        submission = self._items[submission_id]
        submission.status = status
        self._persist(submission)
        return submission

    def get(self, submission_id: str) -> Submission | None:
        return self._items.get(submission_id)

    def all(self) -> list[Submission]:
        return list(self._items.values())

    def _persist(self, submission: Submission) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(submission.__dict__, sort_keys=True) + "\n")


class RateLimiter:
    """Fixed one-minute window per client key."""

    def __init__(self, per_minute: int):
        self.per_minute = per_minute
        self._hits: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def allow(self, key: str) -> bool:
        now = time.monotonic()
        with self._lock:
            window = [t for t in self._hits.get(key, []) if now - t < 60.0]
            if len(window) >= self.per_minute:
                self._hits[key] = window
                return False
            window.append(now)
            self._hits[key] = window
            return True


@dataclass
class ServingState:
    """Mutable server-side holder: swap() publishes a new snapshot atomically."""

    snapshot: CorpusSnapshot
    config: ServiceConfig = dataclass_field(default_factory=ServiceConfig)
    submissions: SubmissionStore = dataclass_field(default_factory=SubmissionStore)

    def __post_init__(self):
        self._lock = threading.Lock()
        self.limiter = RateLimiter(self.config.rate_limit_per_minute)

    def current(self) -> CorpusSnapshot:
        return self.snapshot

    def swap(self, snapshot: CorpusSnapshot) -> None:
        with self._lock:
            self.snapshot = snapshot


def _parse_filter(raw: str | None) -> FilterSpec:
    if not raw:
        return FilterSpec()
    try:
        return FilterSpec.from_json(raw)
    except QueryError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _columns_param(raw: str | None, snapshot: CorpusSnapshot) -> list[str]:
    if not raw:
        return ["study_id", *snapshot.schema.display_defaults()]
    columns = [c.strip() for c in raw.split(",") if c.strip()]
    for column in columns:
        if column not in ("study_id", "authors") and column not in snapshot.schema:
            raise HTTPException(status_code=400, detail=f"unknown column {column!r}")
    return columns


def _record_payload(snapshot: CorpusSnapshot, study_id: str, columns) -> dict:
    record = snapshot.record(study_id)
    row: dict = {}
    for column in columns:
        if column == "study_id":
            row[column] = record.study_id
        elif column == "authors":
            row[column] = list(record.authors)
        else:
            row[column] = _display_value(snapshot, record, column)
    return row


def _display_value(snapshot: CorpusSnapshot, record, column: str):
    criterion = snapshot.schema[column]
    value = record.value(column)
    if value.is_na:
        return NA_LITERAL
    if value.kind == "binary":
        return criterion.binary_label(value.value)
    if value.kind == "categories":
        return sorted(value.value)
    if value.kind == "number":
        return value.value if not float(value.value).is_integer() else int(value.value)
    return value.value


def _schema_echo(snapshot: CorpusSnapshot, columns) -> list[dict]:
    echo = []
    for column in columns:
        if column in ("study_id", "authors"):
            echo.append({"name": column, "kind": "identity", "multi": column == "authors"})
        else:
            criterion = snapshot.schema[column]
            echo.append({
                "name": criterion.name,
                "kind": criterion.kind,
                "multi": criterion.multi_valued,
                "options": list(criterion.display_options()),
            })
    return echo


def _distribution_payload(dist: Distribution) -> dict:
    return {
        "criterion": dist.criterion,
        "bars": [{"label": label, "count": count} for label, count in dist.bars],
        "truncated": dist.truncated,
        "total_records": dist.total_records,
    }


def create_app(state: ServingState) -> FastAPI:
    app = FastAPI(title="studyatlas", docs_url=None, redoc_url=None)
    # The web client is served from its own origin; reads are public anyway.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.get("/schema")
    def get_schema():
        snapshot = state.current()
        return {
            "snapshot_id": snapshot.snapshot_id,
            "criteria": _schema_echo(snapshot, snapshot.schema.names),
            "display_defaults": list(snapshot.schema.display_defaults()),
        }

    @app.get("/studies")
    def get_studies(filter: str | None = None, columns: str | None = None):
        snapshot = state.current()
        spec = _parse_filter(filter)
        try:
            ids = apply_filter(snapshot, spec)
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        cols = _columns_param(columns, snapshot)
        return {
            "snapshot_id": snapshot.snapshot_id,
            "columns": cols,
            "schema": _schema_echo(snapshot, cols),
            "rows": [_record_payload(snapshot, sid, cols) for sid in ids],
            "total": len(ids),
        }

    @app.get("/studies/{study_id}")
    def get_study(study_id: str):
        snapshot = state.current()
        if study_id not in snapshot:
            raise HTTPException(status_code=404, detail=f"unknown study id {study_id!r}")
        record = snapshot.record(study_id)
        values = {name: _display_value(snapshot, record, name) for name in snapshot.schema.names}
        payload = {
            "snapshot_id": snapshot.snapshot_id,
            "study_id": study_id,
            "values": values,
            "authors": list(record.authors),
            "abstract": record.abstract,
            "bib": bib_entry_to_json(record.bib) if record.bib else None,
            "link": record.bib.link if record.bib else "",
            "neighbors": {},
        }
        for mode, matrix in snapshot.matrices.items():
            hits = neighbors(matrix, study_id)[:5]
            payload["neighbors"][mode] = [
                {"study_id": h.study_id, "z": h.z, "raw": h.raw} for h in hits
            ]
        return payload

    @app.get("/distribution")
    def get_distribution(criterion: str, filter: str | None = None, max_bars: int = 0):
        snapshot = state.current()
        if max_bars < 0:
            raise HTTPException(status_code=400, detail="max_bars must be positive")
        spec = _parse_filter(filter)
        try:
            ids = apply_filter(snapshot, spec)
            dist = distribution(snapshot, ids, criterion, max_bars)
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"snapshot_id": snapshot.snapshot_id, **_distribution_payload(dist)}

    @app.get("/similarity")
    def get_similarity(mode: str = "db", focus: str | None = None,
                       threshold: float = 0.0, filter: str | None = None):
        snapshot = state.current()
        mode_name = MODE_ALIASES.get(mode)
        if mode_name is None:
            raise HTTPException(status_code=400, detail=f"unknown similarity mode {mode!r}")
        matrix = snapshot.matrices.get(mode_name)
        if matrix is None:
            raise HTTPException(status_code=409, detail=f"{mode_name} similarity matrix not built for this snapshot")
        spec = _parse_filter(filter)
        try:
            ids = apply_filter(snapshot, spec)
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        id_set = set(ids)
        edges = []
        for i, id_a in enumerate(ids):
            row = matrix.index(id_a)
            for id_b in ids[i + 1 :]:
                col = matrix.index(id_b)
                z = float(matrix.z[row, col])
                if z >= threshold:
                    edges.append({
                        "a": id_a, "b": id_b,
                        "z": z, "raw": float(matrix.raw[row, col]),
                    })
        edges.sort(key=lambda e: (-e["z"], e["a"], e["b"]))
        payload = {
            "snapshot_id": snapshot.snapshot_id,
            "mode": mode_name,
            "threshold": threshold,
            "nodes": [
                {
                    "study_id": sid,
                    "year": snapshot.record(sid).year,
                    "main_author": _node_label(snapshot, sid),
                }
                for sid in ids
            ],
            "edges": edges,
            "degenerate": matrix.degenerate,
        }
        if focus is not None:
            if focus not in id_set:
                raise HTTPException(status_code=404, detail=f"focus id {focus!r} not in the filtered set")
            hits = neighbors(matrix, focus, threshold, id_filter=ids)
            payload["focus"] = {
                "study_id": focus,
                "neighbors": [{"study_id": h.study_id, "z": h.z, "raw": h.raw} for h in hits],
            }
        return payload

    @app.get("/timeline")
    def get_timeline(edges: str = "both", filter: str | None = None, color_by: str | None = None):
        snapshot = state.current()
        if edges not in ("authors", "citations", "both"):
            raise HTTPException(status_code=400, detail=f"edges must be authors|citations|both, got {edges!r}")
        if color_by is not None and color_by not in snapshot.schema:
            raise HTTPException(status_code=400, detail=f"unknown color_by criterion {color_by!r}")
        spec = _parse_filter(filter)
        try:
            ids = apply_filter(snapshot, spec)
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        id_set = set(ids)
        nodes = []
        for sid in ids:
            record = snapshot.record(sid)
            node = {"study_id": sid, "year": record.year, "main_author": _node_label(snapshot, sid)}
            if color_by is not None:
                value = record.value(color_by)
                node["labels"] = sorted(snapshot.schema[color_by].value_labels(value)) if not value.is_na else [NA_LITERAL]
            nodes.append(node)
        author_edges = [
            {"a": e.ids[0], "b": e.ids[1], "kind": "authors", "directed": False, "shared": list(e.shared)}
            for e in snapshot.graph.author_edges
            if e.ids[0] in id_set and e.ids[1] in id_set
        ] if edges in ("authors", "both") else []
        citation_edges = [
            {"a": e.citing, "b": e.cited, "kind": "citations", "directed": True, "confidence": e.confidence}
            for e in snapshot.graph.citation_edges
            if e.citing in id_set and e.cited in id_set
        ] if edges in ("citations", "both") else []
        return {
            "snapshot_id": snapshot.snapshot_id,
            "nodes": nodes,
            "edges": author_edges + citation_edges,
        }

    @app.get("/export.csv")
    def get_export(filter: str | None = None, columns: str | None = None):
        snapshot = state.current()
        spec = _parse_filter(filter)
        try:
            ids = apply_filter(snapshot, spec)
            if columns is None:
                payload = export_csv(snapshot, ids)
            else:
                payload = export_csv(snapshot, ids, [c.strip() for c in columns.split(",") if c.strip()])
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return Response(
            content=payload,
            media_type="text/csv; charset=utf-8",
            headers={
                "Content-Disposition": "attachment; filename=corpus-export.csv",
                "X-Snapshot-Id": snapshot.snapshot_id,
            },
        )

    @app.post("/submissions", status_code=201)
    def post_submission(request: Request, payload: dict = Body(...)):
        client = request.client.host if request.client else "unknown"
        if not state.limiter.allow(client):
            raise HTTPException(status_code=429, detail="submission rate limit exceeded")
        contact = str(payload.get("contact", "")).strip()
        row = payload.get("row")
        note = str(payload.get("note", ""))
        if not contact:
            raise HTTPException(status_code=400, detail="submission needs a contact string")
        if row is not None and not isinstance(row, dict):
            raise HTTPException(status_code=400, detail="row must map column names to cell text")
        if row is None and not note.strip():
            raise HTTPException(status_code=400, detail="submission needs a candidate row or a note")
        if row is not None:
            messages = _check_candidate_row(state.current(), row)
            if messages:
                raise HTTPException(status_code=400, detail={"row_errors": messages})
        submission = Submission(
            submission_id=uuid.uuid4().hex[:12],
            contact=contact,
            row={k: str(v) for k, v in (row or {}).items()},
            note=note,
        )
        state.submissions.add(submission)
        return {"submission_id": submission.submission_id, "status": submission.status}

    @app.get("/submissions")
    def list_submissions(request: Request):
        _require_maintainer(request, state)
        return {
            "snapshot_id": state.current().snapshot_id,
            "submissions": [s.__dict__ for s in state.submissions.all()],
        }

    @app.post("/submissions/{submission_id}/accept")
    def accept_submission(submission_id: str, request: Request):
        _require_maintainer(request, state)
        submission = state.submissions.get(submission_id)
        if submission is None:
            raise HTTPException(status_code=404, detail=f"unknown submission {submission_id!r}")
        if not submission.row:
            raise HTTPException(status_code=400, detail="submission has no candidate row to integrate")
        snapshot = state.current()
        try:
            new_snapshot = _integrate_row(snapshot, submission.row, state.config)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"integration failed: {exc}") from None
        state.swap(new_snapshot)
        state.submissions.set_status(submission_id, "accepted")
        return {"submission_id": submission_id, "status": "accepted", "snapshot_id": new_snapshot.snapshot_id}

    @app.post("/submissions/{submission_id}/reject")
    def reject_submission(submission_id: str, request: Request):
        _require_maintainer(request, state)
        if state.submissions.get(submission_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown submission {submission_id!r}")
        state.submissions.set_status(submission_id, "rejected")
        return {"submission_id": submission_id, "status": "rejected"}

    return app


def _node_label(snapshot: CorpusSnapshot, study_id: str) -> str:
    record = snapshot.record(study_id)
    if "Main Author" in snapshot.schema:
        value = record.value("Main Author")
        if not value.is_na:
            labels = sorted(snapshot.schema["Main Author"].value_labels(value))
            if labels:
                return labels[0]
    return record.authors[0] if record.authors else study_id


def _require_maintainer(request: Request, state: ServingState) -> None:
    token = state.config.maintainer_token
    if not token:
        raise HTTPException(status_code=403, detail="maintainer endpoints are disabled (no token configured)")
    supplied = request.headers.get("X-Maintainer-Token", "")
    if supplied != token:
        raise HTTPException(status_code=403, detail="invalid maintainer token")


def _check_candidate_row(snapshot: CorpusSnapshot, row: dict) -> list[str]:
    """Field-level validation of a submitted row, reusing the ingest parser."""
    from .ingest import AliasMap, _parse_cell

    messages = []
    study_id = str(row.get("study_id", "")).strip()
    if not study_id:
        messages.append("study_id: missing")
    elif study_id in snapshot:
        messages.append(f"study_id: {study_id!r} already exists")
    aliases = AliasMap()
    for criterion in snapshot.schema:
        cell = str(row.get(criterion.name, ""))
        _, problems, _ = _parse_cell(cell, criterion, aliases)
        messages.extend(f"{criterion.name}: {rule} ({msg})" for rule, msg in problems)
    unknown = set(row) - {"study_id", "authors"} - set(snapshot.schema.names)
    messages.extend(f"{name}: unknown column" for name in sorted(unknown))
    return messages


def _integrate_row(snapshot: CorpusSnapshot, row: dict, config: ServiceConfig) -> CorpusSnapshot:
    """Re-run ingestion with the accepted row appended and rebuild the snapshot."""
    base = export_csv(snapshot, snapshot.ids)
    header = next(csv.reader(io.StringIO(base.decode("utf-8"))))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([str(row.get(column, "")) for column in header])
    merged = base + buffer.getvalue().encode("utf-8")

    records, report = parse_corpus_table(merged, snapshot.schema)
    if report.violations or report.duplicate_ids:
        first = report.violations[0] if report.violations else f"duplicate id {report.duplicate_ids[0]}"
        raise ValueError(f"candidate row rejected: {first}")
    abstracts = dict(snapshot.abstracts)
    new_ids = {r.study_id for r in records} - set(snapshot.ids)
    for sid in new_ids:
        abstracts.setdefault(sid, str(row.get("abstract", "")))
    build = BuildConfig(
        matcher=config.matcher(),
        embedding_provider=config.embedding_provider,
        embedding_cache_dir=config.embedding_cache_dir or None,
        decisions_path=config.decisions_path or None,
    )
    return build_snapshot(records, abstracts, snapshot.bib, snapshot.references, snapshot.schema, build)
