"""Pairwise-similarity kernels.

Two interchangeable backends compute the raw pairwise matrix from the
encoded corpus: a numba @njit kernel (default when numba imports) and a
pure-numpy path. Selection: the STUDYATLAS_BACKEND environment variable
("numba" or "numpy"), or an explicit backend argument. Both fill the upper
triangle and mirror it, so raw[i, j] == raw[j, i] exactly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is an install-time choice
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


ENV_FLAG = "STUDYATLAS_BACKEND"


def active_backend(override: str | None = None) -> str:
    """Resolve the kernel backend: explicit arg > env flag > numba if present."""
    choice = override or os.environ.get(ENV_FLAG, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"unknown backend {choice!r}; use 'numba' or 'numpy'")
    if choice == "numba" and not NUMBA_AVAILABLE:
        raise ValueError("numba backend requested but numba is not importable")
    if choice:
        return choice
    return "numba" if NUMBA_AVAILABLE else "numpy"


@njit(cache=True)
def _pairwise_numba(scalars, cat, bounds, cards):  # pragma: no cover - exercised via dispatch
    n = scalars.shape[0]
    n_scalar = scalars.shape[1]
    n_cat = bounds.shape[0] - 1
    raw = np.zeros((n, n))
    for i in range(n):
        # Diagonal: self-similarity is 1 per applicable criterion.
        self_total = 0.0
        for k in range(n_scalar):
            if not np.isnan(scalars[i, k]):
                self_total += 1.0
        for c in range(n_cat):
            if cards[i, c] > 0.0:
                self_total += 1.0
        raw[i, i] = self_total
        for j in range(i + 1, n):
            total = 0.0
            for k in range(n_scalar):
                a = scalars[i, k]
                b = scalars[j, k]
                if not (np.isnan(a) or np.isnan(b)):
                    total += 1.0 - abs(a - b)
            for c in range(n_cat):
                ci = cards[i, c]
                cj = cards[j, c]
                if ci > 0.0 and cj > 0.0:
                    inter = 0.0
                    for v in range(bounds[c], bounds[c + 1]):
                        inter += cat[i, v] * cat[j, v]
                    total += inter / np.sqrt(ci * cj)
            raw[i, j] = total
            raw[j, i] = total
    return raw


def _pairwise_numpy(scalars, cat, bounds, cards):
    n = scalars.shape[0]
    raw = np.zeros((n, n))
    valid = ~np.isnan(scalars)
    for k in range(scalars.shape[1]):
        col = np.where(valid[:, k], scalars[:, k], 0.0)
        sim = 1.0 - np.abs(col[:, None] - col[None, :])
        both = valid[:, k][:, None] & valid[:, k][None, :]
        raw += np.where(both, sim, 0.0)
    for c in range(bounds.shape[0] - 1):
        block = cat[:, bounds[c] : bounds[c + 1]]
        inter = block @ block.T
        card = cards[:, c]
        both = (card[:, None] > 0.0) & (card[None, :] > 0.0)
        denom = np.sqrt(np.outer(card, card))
        raw += np.where(both, inter / np.where(both, denom, 1.0), 0.0)
    # BLAS products are not guaranteed bit-symmetric; mirror the upper triangle.
    return np.triu(raw) + np.triu(raw, 1).T


def pairwise_raw(scalars, cat, bounds, cards, backend: str | None = None) -> np.ndarray:
    """Raw database-similarity matrix from the encoded corpus."""
    scalars = np.ascontiguousarray(scalars, dtype=np.float64)
    cat = np.ascontiguousarray(cat, dtype=np.float64)
    bounds = np.ascontiguousarray(bounds, dtype=np.int64)
    cards = np.ascontiguousarray(cards, dtype=np.float64)
    if active_backend(backend) == "numba":
        return _pairwise_numba(scalars, cat, bounds, cards)
    return _pairwise_numpy(scalars, cat, bounds, cards)
