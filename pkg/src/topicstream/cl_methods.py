"""Embedding-and-clustering detectors: WVOP, FTOP, GLCM and GLGK.

Posts are mean-pooled word vectors; each cluster becomes a topic whose title
words score high inside the cluster and low across the whole window.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .clustering import fuzzy_cmeans, gustafson_kessel, harden_memberships, optics, silhouette
from .embeddings import EmbeddingTable, embed_document
from .errors import ConfigError, DataError
from .preprocess import CompoundLexicon, compose_title
from .stream import WindowBatch
from .topics import Topic

log = logging.getLogger(__name__)

SOURCES = ("word2vec", "fasttext", "glove")
KINDS = ("optics", "cmeans", "gk")
DISTANCES = ("cosine", "euclidean")
# which embedding sources pair with which clustering algorithm
_ALLOWED = {("word2vec", "optics"), ("fasttext", "optics"), ("glove", "cmeans"), ("glove", "gk")}

PRESETS = {
    "WVOP": dict(source="word2vec", kind="optics", distance="cosine"),
    "FTOP": dict(source="fasttext", kind="optics", distance="cosine"),
    "GLCM": dict(source="glove", kind="cmeans", distance="euclidean"),
    "GLGK": dict(source="glove", kind="gk", distance="euclidean"),
}


@dataclass(frozen=True)
class ClPipelineConfig:
    source: str = "word2vec"
    kind: str = "optics"
    distance: str = "cosine"
    dim: int | None = None  # expected table dimension; None accepts any
    min_pts: int = 5
    xi: float = 0.05
    c: int | None = None  # None: choose by silhouette over c_range
    c_range: tuple[int, int] = (2, 12)
    m: float = 1.1
    eps: float = 1e-3
    title_words: int = 5
    oov_policy: str = "skip"
    gk_max_dim: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ConfigError(f"unknown embedding source {self.source!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown cluster kind {self.kind!r}")
        if self.distance not in DISTANCES:
            raise ConfigError(f"unknown distance {self.distance!r}")
        if (self.source, self.kind) not in _ALLOWED:
            raise ConfigError(f"{self.source} embeddings are not paired with {self.kind}")
        if self.min_pts < 2:
            raise ConfigError("min_pts must be >= 2")
        if self.c is not None and self.c < 2:
            raise ConfigError("c must be >= 2")
        lo, hi = self.c_range
        if not 2 <= lo <= hi:
            raise ConfigError(f"bad c range {self.c_range}")
        if self.title_words < 1:
            raise ConfigError("title_words must be >= 1")

    @classmethod
    def for_method(cls, method: str, **overrides) -> "ClPipelineConfig":
        try:
            preset = PRESETS[method.upper()]
        except KeyError:
            raise ConfigError(f"not an embedding method: {method!r}") from None
        return cls(**{**preset, **overrides})

    def with_(self, **changes) -> "ClPipelineConfig":
        return replace(self, **changes)


def embed_batch(batch: WindowBatch, table: EmbeddingTable, oov_policy: str = "skip"):
    """Document vectors for the embeddable posts; returns (indices, matrix)."""
    rows, idx = [], []
    for i, post in enumerate(batch.posts):
        if not post.tokens:
            continue
        try:
            doc = embed_document(post.tokens, table, oov_policy)
        except ValueError:
            continue
        if not np.any(doc.vector):
            continue
        rows.append(doc.vector)
        idx.append(i)
    if not rows:
        return [], np.zeros((0, table.dim))
    return idx, np.vstack(rows)


def _project(x: np.ndarray, max_dim: int) -> np.ndarray:
    """Principal-component scores, keeping at most ``max_dim`` and fewer than N dimensions."""
    n, d = x.shape
    k = min(d, max_dim, n - 2)
    if k >= d:
        return x
    if k < 1:
        raise ValueError("too few posts to project")
    centered = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    signs = np.sign(vt[:k][np.arange(k), np.argmax(np.abs(vt[:k]), axis=1)])
    return centered @ (vt[:k].T * signs)


def _fuzzy_labels(x: np.ndarray, cfg: ClPipelineConfig) -> np.ndarray:
    if cfg.distance == "cosine":
        x = x / np.linalg.norm(x, axis=1, keepdims=True)
    if cfg.kind == "gk":
        x = _project(x, cfg.gk_max_dim)

    def run(c):
        if cfg.kind == "cmeans":
            res = fuzzy_cmeans(x, c, cfg.m, cfg.eps, seed=cfg.seed)
        else:
            res = gustafson_kessel(x, c, cfg.m, cfg.eps, seed=cfg.seed)
        return harden_memberships(res.memberships)

    n = len(x)
    if cfg.c is not None:
        if cfg.c > n:
            log.warning("c=%d exceeds the %d embeddable posts; using %d", cfg.c, n, n)
        return run(min(cfg.c, n))
    lo, hi = cfg.c_range
    best = None
    for c in range(lo, min(hi, n - 1) + 1):
        try:
            labels = run(c)
            score = silhouette(x, labels, "euclidean")
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.debug("c=%d skipped: %s", c, exc)
            continue
        if best is None or score > best[0]:
            best = (score, labels)
    if best is None:
        return np.zeros(n, dtype=int)
    return best[1]


def cluster_posts(x: np.ndarray, cfg: ClPipelineConfig) -> np.ndarray:
    """Hard cluster label per row of ``x``; -1 marks noise."""
    if cfg.kind == "optics":
        return optics(x, cfg.min_pts, dist=cfg.distance, xi=cfg.xi).labels
    if len(x) < 2:
        return np.zeros(len(x), dtype=int)
    return _fuzzy_labels(x, cfg)


def cluster_title(posts, doc_freq: Counter, n_posts: int, n_words: int, lexicon=None) -> tuple[list[str], float]:
    """Top words by in-cluster frequency times log inverse window frequency."""
    tf = Counter(w for p in posts for w in p.tokens)
    scores = {w: c * math.log(n_posts / doc_freq[w]) for w, c in tf.items()}
    ranked = sorted(scores, key=lambda w: (-scores[w], w))
    informative = [w for w in ranked if scores[w] > 0] or ranked
    top = informative[:n_words]
    return compose_title(top, lexicon), sum(scores[w] for w in top)


def cl_detect(batch: WindowBatch, cfg: ClPipelineConfig, table: EmbeddingTable,
              lexicon: CompoundLexicon | None = None) -> list[Topic]:
    if cfg.dim is not None and cfg.dim != table.dim:
        raise ConfigError(f"embedding table has dimension {table.dim}, expected {cfg.dim}")
    if not batch.posts:
        return []
    idx, x = embed_batch(batch, table, cfg.oov_policy)
    if not idx:
        raise DataError(f"window {batch.index}: no post could be embedded")
    if len(idx) < len(batch.posts):
        log.debug("window %d: %d of %d posts not embeddable", batch.index, len(batch.posts) - len(idx), len(batch.posts))
    labels = cluster_posts(x, cfg)
    doc_freq = Counter(w for p in batch.posts for w in set(p.tokens))
    topics = []
    for label in sorted(set(labels.tolist()) - {-1}):
        members = [batch.posts[idx[i]] for i in np.flatnonzero(labels == label)]
        words, score = cluster_title(members, doc_freq, len(batch.posts), cfg.title_words, lexicon)
        if words:
            topics.append(Topic(words, {p.id for p in members}, score))
    return topics
