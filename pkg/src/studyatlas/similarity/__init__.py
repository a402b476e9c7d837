"""Pairwise study-similarity computation.

Two modes share one matrix shape: "database" sums per-criterion similarity
scores in [0, 1] across all participating criteria (scalar kinds compare as
1 - |a - b| on values normalized into [0, 1]; category sets use the
size of the intersection over the geometric mean of the cardinalities; any
not-applicable or empty side scores 0), and "abstract" takes the cosine of
embedding vectors of the study abstracts. Both are standardized to z-scores
over the distribution of all unordered off-diagonal pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..model import Criterion, FieldValue, ModelError, Schema, StudyRecord
from .embed import EmbeddingCache, EmbeddingError, EmbeddingProvider, TfidfEmbedder, embed_texts, fallback_embedder
from .kernels import ENV_FLAG, NUMBA_AVAILABLE, active_backend, pairwise_raw

__all__ = [
    "CorpusStats",
    "SimilarityMatrix",
    "Neighbor",
    "corpus_stats",
    "normalize_scalar",
    "criterion_similarity",
    "database_similarity",
    "abstract_similarity",
    "zscore_standardize",
    "neighbors",
    "encode_corpus",
    "fallback_embedder",
    "EmbeddingCache",
    "EmbeddingError",
    "EmbeddingProvider",
    "TfidfEmbedder",
    "active_backend",
    "NUMBA_AVAILABLE",
    "ENV_FLAG",
]

SCALAR_KINDS = ("binary", "ordinal", "numeric")


@dataclass(frozen=True)
class CorpusStats:
    """Per-numeric-criterion (min, max) bounds in transformed space."""

    numeric_bounds: dict[str, tuple[float, float]] = field(default_factory=dict)


def transform_numeric(criterion: Criterion, value: float) -> float:
    """Apply the criterion's transform: log1p for log-scaled columns."""
    return math.log1p(value) if criterion.log_transform else float(value)


def corpus_stats(records, schema: Schema) -> CorpusStats:
    """Observed bounds of every numeric column, after transformation."""
    bounds: dict[str, tuple[float, float]] = {}
    for criterion in schema:
        if criterion.kind != "numeric":
            continue
        seen = [
            transform_numeric(criterion, record.value(criterion.name).value)
            for record in records
            if not record.value(criterion.name).is_na
        ]
        if seen:
            bounds[criterion.name] = (min(seen), max(seen))
    return CorpusStats(numeric_bounds=bounds)


def normalize_scalar(criterion: Criterion, value: FieldValue, stats: CorpusStats) -> float | None:
    """Map a scalar value into [0, 1]; None passes N/A through.

    Ordinal values use their configured level; binary maps to 1/0; numeric
    is min-max normalized over the corpus bounds (after the log transform
    when configured). A constant column normalizes to 0.5. Values outside
    the observed bounds only occur for ad-hoc query-time comparisons and
    are clamped with a warning.
    """
    if value.is_na:
        return None
    if criterion.kind == "ordinal":
        return criterion.ordinal_map[value.value]
    if criterion.kind == "binary":
        return 1.0 if value.value else 0.0
    if criterion.kind != "numeric":
        raise ModelError(f"{criterion.name}: {criterion.kind} values have no scalar normalization")
    transformed = transform_numeric(criterion, value.value)
    if criterion.name not in stats.numeric_bounds:
        warnings.warn(f"{criterion.name}: no observed bounds; normalizing to 0.5")
        return 0.5
    lo, hi = stats.numeric_bounds[criterion.name]
    if hi == lo:
        return 0.5
    x = (transformed - lo) / (hi - lo)
    if x < 0.0 or x > 1.0:
        warnings.warn(f"{criterion.name}: value outside observed bounds, clamped")
        return min(1.0, max(0.0, x))
    return x


def criterion_similarity(a: FieldValue, b: FieldValue, criterion: Criterion, stats: CorpusStats) -> float:
    """Similarity of two values of one criterion, in [0, 1].

    Any not-applicable side (or empty category set) scores 0: such
    comparisons are maximally dissimilar by definition.
    """
    if criterion.kind == "text":
        raise ModelError(f"{criterion.name}: text criteria do not participate in similarity")
    if a.is_na or b.is_na:
        return 0.0
    if criterion.kind == "categorical":
        set_a, set_b = a.value, b.value
        if not set_a or not set_b:
            return 0.0
        inter = len(set_a & set_b)
        return inter / math.sqrt(len(set_a) * len(set_b))
    na_, nb = normalize_scalar(criterion, a, stats), normalize_scalar(criterion, b, stats)
    return 1.0 - abs(na_ - nb)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric pairwise scores for one mode, raw and z-standardized.

    population_mean/population_sd describe the distribution of unordered
    off-diagonal pairs the z-scores were computed against; degenerate means
    that distribution had no variance (z is all zeros then). excluded lists
    ids flagged out of the pair statistics (abstract mode: empty or
    zero-vector abstracts).
    """

    ids: tuple[str, ...]
    raw: np.ndarray
    z: np.ndarray
    mode: str
    population_mean: float
    population_sd: float
    degenerate: bool = False
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_index", {sid: i for i, sid in enumerate(self.ids)})
        self.raw.setflags(write=False)
        self.z.setflags(write=False)

    def index(self, study_id: str) -> int:
        try:
            return self._index[study_id]
        except KeyError:
            raise KeyError(f"unknown study id {study_id!r}") from None


@dataclass(frozen=True)
class Neighbor:
    study_id: str
    z: float
    raw: float


def encode_corpus(records, schema: Schema, participating=None, stats: CorpusStats | None = None):
    """Encode records into the dense arrays the kernels consume.

    Returns (scalars, cat, bounds, cards): scalar criteria as one float
    column each (NaN = N/A), categorical criteria as 0/1 membership blocks
    over their observed-plus-declared vocabularies with per-criterion
    cardinalities. Single-valued categoricals ride the same representation,
    where the set formula reduces to exact match.
    """
    records = list(records)
    criteria = list(participating if participating is not None else schema.participating())
    if stats is None:
        stats = corpus_stats(records, schema)

    scalar_criteria = [c for c in criteria if c.kind in SCALAR_KINDS]
    cat_criteria = [c for c in criteria if c.kind == "categorical"]
    n = len(records)

    scalars = np.full((n, len(scalar_criteria)), np.nan)
    for k, criterion in enumerate(scalar_criteria):
        for i, record in enumerate(records):
            norm = normalize_scalar(criterion, record.value(criterion.name), stats)
            if norm is not None:
                scalars[i, k] = norm

    vocabularies = []
    for criterion in cat_criteria:
        vocab = set(criterion.answer_options)
        for record in records:
            value = record.value(criterion.name)
            if value.kind == "categories":
                vocab |= value.value
        vocabularies.append(sorted(vocab))

    bounds = np.zeros(len(cat_criteria) + 1, dtype=np.int64)
    for c, vocab in enumerate(vocabularies):
        bounds[c + 1] = bounds[c] + len(vocab)
    cat = np.zeros((n, int(bounds[-1])))
    cards = np.zeros((n, len(cat_criteria)))
    for c, (criterion, vocab) in enumerate(zip(cat_criteria, vocabularies)):
        index = {label: int(bounds[c]) + j for j, label in enumerate(vocab)}
        for i, record in enumerate(records):
            value = record.value(criterion.name)
            if value.kind == "categories":
                for label in value.value:
                    cat[i, index[label]] = 1.0
                cards[i, c] = len(value.value)
    return scalars, cat, bounds, cards


def zscore_standardize(raw: np.ndarray, pair_valid: np.ndarray | None = None):
    """Standardize a symmetric matrix over its unordered off-diagonal pairs.

    Each pair counts once and the diagonal never counts; the standard
    deviation is the population form. Returns (z, mean, sd, degenerate);
    with fewer than two pairs or zero variance the result is degenerate and
    z is all zeros.
    """
    n = raw.shape[0]
    iu = np.triu_indices(n, k=1)
    values = raw[iu]
    if pair_valid is not None:
        values = values[pair_valid[iu]]
    if values.size == 0:
        return np.zeros_like(raw), 0.0, 0.0, True
    mean = float(values.mean())
    if values.size < 2:
        return np.zeros_like(raw), mean, 0.0, True
    sd = float(values.std())
    if sd == 0.0:
        return np.zeros_like(raw), mean, 0.0, True
    return (raw - mean) / sd, mean, sd, False


def database_similarity(records, schema: Schema, participating=None, backend: str | None = None) -> SimilarityMatrix:
    """Sum of per-criterion similarities over all participating criteria.

    Raw entries lie in [0, P] for P participating criteria; every criterion
    carries the same weight because each per-criterion score lives in
    [0, 1]. Deterministic for a given record list.
    """
    records = list(records)
    if len(records) < 2:
        raise ValueError("degenerate corpus: database similarity needs at least two records")
    criteria = tuple(participating if participating is not None else schema.participating())
    stats = corpus_stats(records, schema)
    scalars, cat, bounds, cards = encode_corpus(records, schema, criteria, stats)
    raw = pairwise_raw(scalars, cat, bounds, cards, backend=backend)
    z, mean, sd, degenerate = zscore_standardize(raw)
    return SimilarityMatrix(
        ids=tuple(r.study_id for r in records),
        raw=raw,
        z=z,
        mode="database",
        population_mean=mean,
        population_sd=sd,
        degenerate=degenerate,
    )


def abstract_similarity(ids, abstracts: dict[str, str], provider: EmbeddingProvider,
                        cache: EmbeddingCache | None = None) -> SimilarityMatrix:
    """Pairwise cosine similarity between abstract embeddings.

    Studies with empty abstracts (or zero-vector embeddings) are flagged:
    their cosines are defined as 0 and their pairs are excluded from the
    z-score population.
    """
    ids = tuple(ids)
    texts = [abstracts.get(sid, "") for sid in ids]
    vectors = embed_texts(provider, texts, cache)
    norms = np.sqrt((vectors * vectors).sum(axis=1))
    valid = np.array([bool(text.strip()) for text in texts]) & (norms > 0.0)

    unit = np.zeros_like(vectors)
    unit[valid] = vectors[valid] / norms[valid, None]
    raw = unit @ unit.T
    raw = np.clip(raw, -1.0, 1.0)
    raw = np.triu(raw) + np.triu(raw, 1).T
    np.fill_diagonal(raw, np.where(valid, 1.0, 0.0))

    pair_valid = valid[:, None] & valid[None, :]
    z, mean, sd, degenerate = zscore_standardize(raw, pair_valid)
    return SimilarityMatrix(
        ids=ids,
        raw=raw,
        z=z,
        mode="abstract",
        population_mean=mean,
        population_sd=sd,
        degenerate=degenerate,
        excluded=tuple(sid for sid, ok in zip(ids, valid) if not ok),
    )


def neighbors(matrix: SimilarityMatrix, study_id: str, threshold: float = -math.inf,
              id_filter=None) -> list[Neighbor]:
    """Partners of a study with z >= threshold, strongest first.

    id_filter restricts partners to the given ids (all must exist in the
    matrix). Ties in z break by ascending study id; the study itself is
    never its own partner.
    """
    row = matrix.index(study_id)
    if id_filter is None:
        partner_ids = [sid for sid in matrix.ids if sid != study_id]
    else:
        partner_ids = []
        for sid in id_filter:
            matrix.index(sid)  # raises on ids outside the matrix
            if sid != study_id:
                partner_ids.append(sid)
    hits = []
    for sid in partner_ids:
        col = matrix.index(sid)
        z = float(matrix.z[row, col])
        if z >= threshold:
            hits.append(Neighbor(study_id=sid, z=z, raw=float(matrix.raw[row, col])))
    hits.sort(key=lambda h: (-h.z, h.study_id))
    return hits
