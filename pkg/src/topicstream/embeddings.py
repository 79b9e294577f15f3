"""Pretrained word-vector tables, document pooling and vector distances."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

SOURCES = ("word2vec", "fasttext", "glove", "unknown")


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    source: str = "unknown"

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.vectors)} {self.dim}\n")
            for word in sorted(self.vectors):
                fh.write(word + " " + " ".join(repr(float(x)) for x in self.vectors[word]) + "\n")


@dataclass
class DocVector:
    vector: np.ndarray
    oov_count: int


def load_vectors(path: str | Path, source: str = "unknown") -> EmbeddingTable:
    """Read a ``.vec`` style text table with an optional ``count dim`` header."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read vector file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue  # header
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise DataError(f"{path}:{lineno}: no vector values")
            if len(values) != dim:
                raise DataError(f"{path}:{lineno}: expected {dim} values, found {len(values)}")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if word in vectors:
                log.warning("%s:%d: duplicate word %r, keeping the later vector", path, lineno, word)
            vectors[word] = vec
    if not vectors:
        raise DataError(f"empty vector file {path}")
    return EmbeddingTable(dim, vectors, source)


def embed_document(words: Sequence[str], table: EmbeddingTable, oov_policy: str = "skip") -> DocVector:
    """Mean of the word vectors; OOV words are skipped or counted as zeros."""
    if not words:
        raise ValueError("empty document")
    if oov_policy not in ("skip", "zero"):
        raise ValueError(f"unknown oov policy {oov_policy!r}")
    found = [table.vectors[w] for w in words if w in table.vectors]
    oov = len(words) - len(found)
    if not found:
        if oov_policy == "skip":
            raise ValueError("unembeddable document: every word is out of vocabulary")
        return DocVector(np.zeros(table.dim), oov)
    total = np.sum(found, axis=0)
    n = len(found) if oov_policy == "skip" else len(words)
    return DocVector(total / n, oov)


def cosine_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine distance undefined for a zero vector")
    return float(min(2.0, max(0.0, 1.0 - (a @ b) / (na * nb))))


def euclidean_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def pairwise_distances(points: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Dense N x N distance matrix for ``euclidean`` or ``cosine``."""
    x = np.asarray(points, dtype=float)
    if metric == "euclidean":
        # exact differences (not the |a|^2+|b|^2-2ab expansion) so duplicates get 0
        n = len(x)
        d = np.empty((n, n))
        step = max(1, 4_000_000 // max(1, n * x.shape[1]))
        for lo in range(0, n, step):
            diff = x[lo:lo + step, None, :] - x[None, :, :]
            d[lo:lo + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    elif metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise ValueError("cosine distance undefined for a zero vector")
        u = x / norms[:, None]
        d = np.clip(1.0 - u @ u.T, 0.0, 2.0)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return d
