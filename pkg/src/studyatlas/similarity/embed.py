"""Abstract-text embedding providers and the on-disk embedding cache.

The external embedding model behind abstract similarity is pluggable; the
built-in fallback is a deterministic tf-idf embedder fitted on the corpus
vocabulary, so snapshots rebuild bit-identically with no network access.
Cache entries are keyed by (provider name, text hash) and survive provider
outages for unchanged text.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from pathlib import Path

import numpy as np

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens."""
    return _TOKEN_RE.findall(text.lower())


class EmbeddingError(RuntimeError):
    """Provider failure; statuses maps each input text hash to ok/failed."""

    def __init__(self, message: str, statuses: dict[str, str] | None = None):
        super().__init__(message)
        self.statuses = statuses or {}


class EmbeddingProvider:
    """Interface: name, fixed output dimension, and batch embed()."""

    name: str = ""
    dimension: int = 0

    def embed(self, texts: list[str]) -> np.ndarray:
        """Return one vector per text, shape (len(texts), dimension)."""
        raise NotImplementedError


class TfidfEmbedder(EmbeddingProvider):
    """Deterministic tf-idf vectors over a corpus-fitted vocabulary.

    idf uses the smoothed form log((1 + N) / (1 + df)) + 1, which keeps
    every in-vocabulary token weighted > 0 so identical texts always embed
    to identical non-zero vectors. Out-of-vocabulary tokens are ignored.
    The provider name carries a vocabulary fingerprint so cached vectors
    from a different corpus fit can never be confused.
    """

    def __init__(self, corpus_texts):
        texts = list(corpus_texts)
        vocabulary = sorted({token for text in texts for token in tokenize(text)})
        if not vocabulary:
            raise EmbeddingError("cannot fit tf-idf embedder: empty corpus vocabulary")
        self._index = {token: i for i, token in enumerate(vocabulary)}
        n_docs = len(texts)
        df = np.zeros(len(vocabulary))
        for text in texts:
            for token in set(tokenize(text)):
                df[self._index[token]] += 1
        self._idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        fingerprint = hashlib.sha256(
            json.dumps([n_docs, vocabulary], separators=(",", ":")).encode("utf-8")
        ).hexdigest()[:12]
        self.name = f"tfidf-{fingerprint}"
        self.dimension = len(vocabulary)

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            for token in tokenize(text):
                col = self._index.get(token)
                if col is not None:
                    out[row, col] += 1.0
        return out * self._idf


def fallback_embedder(corpus_texts) -> TfidfEmbedder:
    """The deterministic built-in provider, fitted on the corpus abstracts."""
    return TfidfEmbedder(corpus_texts)


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingCache:
    """Content-addressed on-disk vector store: <dir>/<provider>/<sha256>.json."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def _path(self, provider_name: str, text: str) -> Path:
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", provider_name)
        return self.directory / safe / f"{text_key(text)}.json"

    def get(self, provider_name: str, text: str) -> np.ndarray | None:
        path = self._path(provider_name, text)
        if not path.exists():
            return None
        return np.asarray(json.loads(path.read_text("utf-8")), dtype=np.float64)

    def put(self, provider_name: str, text: str, vector: np.ndarray) -> None:
        path = self._path(provider_name, text)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps([float(x) for x in vector]), "utf-8")
        tmp.replace(path)


def embed_texts(provider: EmbeddingProvider, texts, cache: EmbeddingCache | None = None) -> np.ndarray:
    """Embed texts through the cache, batching all misses into one provider call."""
    texts = list(texts)
    vectors: list[np.ndarray | None] = [None] * len(texts)
    misses: dict[str, list[int]] = {}
    for i, text in enumerate(texts):
        cached = cache.get(provider.name, text) if cache is not None else None
        if cached is not None:
            vectors[i] = cached
        else:
            misses.setdefault(text, []).append(i)
    if misses:
        unique = list(misses)
        try:
            fresh = np.asarray(provider.embed(unique), dtype=np.float64)
        except EmbeddingError:
            raise
        except Exception as exc:
            statuses = {text_key(t): "failed" for t in unique}
            raise EmbeddingError(f"embedding provider {provider.name!r} failed: {exc}", statuses) from exc
        if fresh.shape != (len(unique), provider.dimension):
            raise EmbeddingError(
                f"provider {provider.name!r} returned shape {fresh.shape}, "
                f"expected {(len(unique), provider.dimension)}"
            )
        for text, vector in zip(unique, fresh):
            if cache is not None:
                cache.put(provider.name, text, vector)
            for i in misses[text]:
                vectors[i] = vector
    if not texts:
        return np.zeros((0, provider.dimension))
    return np.vstack([np.asarray(v, dtype=np.float64) for v in vectors])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero vectors compare as 0."""
    norm = math.sqrt(float(a @ a)) * math.sqrt(float(b @ b))
    if norm == 0.0:
        return 0.0
    return float(a @ b) / norm
