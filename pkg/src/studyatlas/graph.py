"""Shared-authorship and citation graph extraction with human review flagging.

Edges appear in two ways only: mechanically (exact author-name equality, or
a citation match scoring at or above the auto threshold) or through an
explicit accepted review decision. Near-misses go to a review queue and
never silently become edges. Decisions are content-addressed by their
evidence so they replay across snapshot rebuilds.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path

from .bibtex import first_author_family
from .model import BibEntry, content_hash


@dataclass(frozen=True)
class MatcherConfig:
    """Tunable matcher knobs; the defaults are declared artifact choices."""

    title_weight: float = 0.7
    year_weight: float = 0.2
    author_weight: float = 0.1
    auto_threshold: float = 0.90
    flag_threshold: float = 0.60
    author_flag_distance: int = 2
    strip_diacritics: bool = False


@dataclass(frozen=True)
class AuthorEdge:
    """Unordered study pair sharing at least one author name."""

    ids: tuple[str, str]  # sorted
    shared: tuple[str, ...]


@dataclass(frozen=True)
class CitationEdge:
    citing: str
    cited: str
    confidence: float


@dataclass(frozen=True)
class ReviewCandidate:
    """A flagged near-match awaiting a human verdict.

    key is the content hash of the evidence, stable across rebuilds.
    """

    key: str
    kind: str  # "author" | "citation"
    ids: tuple[str, str]
    score: float
    evidence: tuple[tuple[str, str], ...]

    @property
    def evidence_map(self) -> dict[str, str]:
        return dict(self.evidence)


@dataclass(frozen=True)
class ScholarlyGraph:
    author_edges: tuple[AuthorEdge, ...] = ()
    citation_edges: tuple[CitationEdge, ...] = ()
    review_queue: tuple[ReviewCandidate, ...] = ()
    warnings: tuple[str, ...] = ()

    def author_pairs(self) -> set[tuple[str, str]]:
        return {e.ids for e in self.author_edges}

    def citation_pairs(self) -> set[tuple[str, str]]:
        return {(e.citing, e.cited) for e in self.citation_edges}


def levenshtein(a: str, b: str, limit: int | None = None) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs).

    With a limit the result is exact up to limit and limit + 1 otherwise,
    with an early exit once every cell of a DP row exceeds the limit.
    """
    if a == b:
        return 0
    if limit is not None and abs(len(a) - len(b)) > limit:
        return limit + 1
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                current[j - 1] + 1,
                previous[j] + 1,
                previous[j - 1] + (0 if ca == cb else 1),
            ))
        if limit is not None and min(current) > limit:
            return limit + 1
        previous = current
    if limit is not None and previous[-1] > limit:
        return limit + 1
    return previous[-1]


def normalize_name(name: str, strip_diacritics: bool = False) -> str:
    """Trim, collapse whitespace, and case-fold; diacritics stay by default.

    Stripping diacritics can collide distinct names at distance 0, so it is
    opt-in.
    """
    text = re.sub(r"\s+", " ", name).strip().casefold()
    if strip_diacritics:
        text = "".join(
            ch for ch in unicodedata.normalize("NFKD", text) if not unicodedata.combining(ch)
        )
    return text


def _candidate_key(kind: str, payload: dict) -> str:
    return content_hash({"kind": kind, **payload})


def shared_author_pairs(records, config: MatcherConfig = MatcherConfig()):
    """Author edges from exact name matches plus flagged near-matches.

    Name pairs at Levenshtein distance 1..author_flag_distance (computed on
    the full normalized name) become review candidates, never edges.
    """
    records = list(records)
    edges: list[AuthorEdge] = []
    queue: list[ReviewCandidate] = []
    normalized = [
        [(name, normalize_name(name, config.strip_diacritics)) for name in record.authors]
        for record in records
    ]
    # Names recur across many study pairs; compute each unique pair once.
    cache: dict[tuple[str, str], int] = {}

    def distance_of(norm_a: str, norm_b: str) -> int:
        key = (norm_a, norm_b) if norm_a <= norm_b else (norm_b, norm_a)
        if key not in cache:
            cache[key] = levenshtein(key[0], key[1], limit=config.author_flag_distance)
        return cache[key]

    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            id_a, id_b = sorted((records[i].study_id, records[j].study_id))
            shared: list[str] = []
            for raw_a, norm_a in normalized[i]:
                for raw_b, norm_b in normalized[j]:
                    if norm_a == norm_b:
                        if raw_a not in shared:
                            shared.append(raw_a)
                        continue
                    distance = distance_of(norm_a, norm_b)
                    if 1 <= distance <= config.author_flag_distance:
                        payload = {"ids": [id_a, id_b], "names": sorted((raw_a, raw_b))}
                        queue.append(ReviewCandidate(
                            key=_candidate_key("author", payload),
                            kind="author",
                            ids=(id_a, id_b),
                            score=1.0 - distance / (config.author_flag_distance + 1),
                            evidence=(
                                ("name_a", raw_a),
                                ("name_b", raw_b),
                                ("distance", str(distance)),
                            ),
                        ))
            if shared:
                edges.append(AuthorEdge(ids=(id_a, id_b), shared=tuple(sorted(shared))))
    return edges, queue


_TITLE_TOKEN_RE = re.compile(r"[a-z0-9]+")


def title_tokens(title: str) -> frozenset[str]:
    return frozenset(_TITLE_TOKEN_RE.findall(title.lower()))


def _match_score(ref: BibEntry, target: BibEntry, config: MatcherConfig) -> float:
    ref_tokens = title_tokens(ref.title)
    target_tokens = title_tokens(target.title)
    union = ref_tokens | target_tokens
    jaccard = len(ref_tokens & target_tokens) / len(union) if union else 0.0
    year_equal = ref.year is not None and ref.year == target.year
    author_equal = (
        first_author_family(ref).casefold() == first_author_family(target).casefold()
        and first_author_family(target) != ""
    )
    return (
        config.title_weight * jaccard
        + config.year_weight * (1.0 if year_equal else 0.0)
        + config.author_weight * (1.0 if author_equal else 0.0)
    )


def match_citations(records, references: dict[str, tuple[BibEntry, ...]],
                    bib: dict[str, BibEntry], config: MatcherConfig = MatcherConfig()):
    """Score every reference against the corpus bibliography.

    Per reference, the best-scoring corpus entry (ties: year match, then
    lexicographic id) either becomes a directed citing→cited edge (score >=
    auto_threshold), a review candidate (>= flag_threshold), or nothing.
    """
    edges: dict[tuple[str, str], float] = {}
    queue: list[ReviewCandidate] = []
    graph_warnings: list[str] = []
    years = {record.study_id: record.year for record in records}
    corpus_ids = sorted(bib)

    for record in records:
        citing = record.study_id
        for ref in references.get(citing, ()):
            best_id, best_score, best_year_eq = None, 0.0, False
            for target_id in corpus_ids:
                if target_id == citing:
                    continue
                score = _match_score(ref, bib[target_id], config)
                year_eq = ref.year is not None and ref.year == bib[target_id].year
                better = score > best_score or (
                    score == best_score and best_id is not None and (
                        (year_eq and not best_year_eq)
                        or (year_eq == best_year_eq and target_id < best_id)
                    )
                )
                if best_id is None or better:
                    best_id, best_score, best_year_eq = target_id, score, year_eq
            if best_id is None:
                continue
            if best_score >= config.auto_threshold:
                pair = (citing, best_id)
                if best_score > edges.get(pair, -1.0):
                    edges[pair] = best_score
                if years.get(citing, 0) < years.get(best_id, 0):
                    graph_warnings.append(
                        f"citation {citing} -> {best_id}: citing year precedes cited year"
                    )
            elif best_score >= config.flag_threshold:
                payload = {"citing": citing, "cited": best_id, "ref_title": ref.title}
                queue.append(ReviewCandidate(
                    key=_candidate_key("citation", payload),
                    kind="citation",
                    ids=(citing, best_id),
                    score=best_score,
                    evidence=(
                        ("ref_title", ref.title),
                        ("matched_title", bib[best_id].title),
                        ("score", f"{best_score:.4f}"),
                    ),
                ))
    edge_list = [CitationEdge(citing=a, cited=b, confidence=s) for (a, b), s in sorted(edges.items())]
    return edge_list, queue, graph_warnings


class DecisionStore:
    """Append-only review verdicts, keyed by evidence content hash.

    Persisted as one JSON object per line; the file is optional (an
    in-memory store results from path=None).
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._verdicts: dict[str, str] = {}
        if self.path is not None and self.path.exists():
            for line in self.path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                self._verdicts[entry["key"]] = entry["verdict"]

    def verdict(self, key: str) -> str | None:
        return self._verdicts.get(key)

    def decide(self, candidate: ReviewCandidate, verdict: str) -> None:
        if verdict not in ("accept", "reject"):
            raise ValueError(f"verdict must be accept or reject, got {verdict!r}")
        self._verdicts[candidate.key] = verdict
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            line = json.dumps({
                "key": candidate.key,
                "kind": candidate.kind,
                "ids": list(candidate.ids),
                "evidence": candidate.evidence_map,
                "verdict": verdict,
            }, sort_keys=True)
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()


def _promote(graph: ScholarlyGraph, candidate: ReviewCandidate) -> ScholarlyGraph:
    if candidate.kind == "author":
        name = candidate.evidence_map.get("name_a", "")
        edges = list(graph.author_edges)
        for idx, edge in enumerate(edges):
            if edge.ids == candidate.ids:
                edges[idx] = replace(edge, shared=tuple(sorted(set(edge.shared) | {name})))
                break
        else:
            edges.append(AuthorEdge(ids=candidate.ids, shared=(name,)))
        return replace(graph, author_edges=tuple(edges))
    citing, cited = candidate.ids
    edges = [e for e in graph.citation_edges if (e.citing, e.cited) != (citing, cited)]
    edges.append(CitationEdge(citing=citing, cited=cited, confidence=candidate.score))
    edges.sort(key=lambda e: (e.citing, e.cited))
    return replace(graph, citation_edges=tuple(edges))


def apply_decisions(graph: ScholarlyGraph, store: DecisionStore) -> ScholarlyGraph:
    """Replay stored verdicts: accepts promote, rejects drop, rest stay queued."""
    queue = []
    for candidate in graph.review_queue:
        verdict = store.verdict(candidate.key)
        if verdict == "accept":
            graph = _promote(graph, candidate)
        elif verdict != "reject":
            queue.append(candidate)
    return replace(graph, review_queue=tuple(queue))


def resolve_review(graph: ScholarlyGraph, key: str, verdict: str, store: DecisionStore) -> ScholarlyGraph:
    """Record a verdict for one queued candidate and return the updated graph."""
    matches = [c for c in graph.review_queue if c.key == key or c.key.startswith(key)]
    if not matches:
        raise KeyError(f"no unresolved review candidate with key {key!r}")
    if len(matches) > 1:
        raise KeyError(f"review key prefix {key!r} is ambiguous")
    candidate = matches[0]
    store.decide(candidate, verdict)
    remaining = tuple(c for c in graph.review_queue if c.key != candidate.key)
    graph = replace(graph, review_queue=remaining)
    if verdict == "accept":
        graph = _promote(graph, candidate)
    return graph


def extract_graph(records, references: dict[str, tuple[BibEntry, ...]],
                  bib: dict[str, BibEntry], config: MatcherConfig = MatcherConfig(),
                  store: DecisionStore | None = None) -> ScholarlyGraph:
    """Full extraction: author edges, citation edges, review queue, decisions replay."""
    author_edges, author_queue = shared_author_pairs(records, config)
    citation_edges, citation_queue, graph_warnings = match_citations(records, references, bib, config)
    graph = ScholarlyGraph(
        author_edges=tuple(author_edges),
        citation_edges=tuple(citation_edges),
        review_queue=tuple(author_queue + citation_queue),
        warnings=tuple(graph_warnings),
    )
    if store is not None:
        graph = apply_decisions(graph, store)
    return graph


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def graph_to_json(graph: ScholarlyGraph) -> dict:
    return {
        "author_edges": [{"ids": list(e.ids), "shared": list(e.shared)} for e in graph.author_edges],
        "citation_edges": [
            {"citing": e.citing, "cited": e.cited, "confidence": e.confidence}
            for e in graph.citation_edges
        ],
        "review_queue": [
            {
                "key": c.key,
                "kind": c.kind,
                "ids": list(c.ids),
                "score": c.score,
                "evidence": [list(pair) for pair in c.evidence],
            }
            for c in graph.review_queue
        ],
        "warnings": list(graph.warnings),
    }


def graph_from_json(obj) -> ScholarlyGraph:
    return ScholarlyGraph(
        author_edges=tuple(
            AuthorEdge(ids=tuple(e["ids"]), shared=tuple(e["shared"])) for e in obj.get("author_edges", [])
        ),
        citation_edges=tuple(
            CitationEdge(citing=e["citing"], cited=e["cited"], confidence=e["confidence"])
            for e in obj.get("citation_edges", [])
        ),
        review_queue=tuple(
            ReviewCandidate(
                key=c["key"],
                kind=c["kind"],
                ids=tuple(c["ids"]),
                score=c["score"],
                evidence=tuple((k, v) for k, v in c["evidence"]),
            )
            for c in obj.get("review_queue", [])
        ),
        warnings=tuple(obj.get("warnings", [])),
    )
