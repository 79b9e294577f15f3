"""Frequent-pattern topic detectors: TSCV, DSFG and UFPT."""
from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .background import RefCorpusModel, ref_word_probability
from .fpm import (
    compute_utilities,
    consolidate_patterns,
    fp_growth,
    hupm_mine,
    maximal_patterns,
    transactions_from_batch,
)
from .stream import WindowBatch
from .topics import Topic, dedupe_topics

log = logging.getLogger(__name__)

SMALL, LARGE = "small", "large"


# --------------------------------------------------------------------------
# TSCV: term selection + co-occurrence vectors


@dataclass(frozen=True)
class TscvConfig:
    k: int = 50
    b: float = 5.0
    c: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def theta(size: int, b: float = 5.0, c: float = 2.0) -> float:
    """Similarity a candidate must beat to join a topic of ``size`` words."""
    return 1.0 - 1.0 / (1.0 + math.exp((size - b) / c))


def term_scores(batch: WindowBatch, ref: RefCorpusModel) -> dict[str, float]:
    """Ratio of add-one smoothed window probability to reference probability."""
    total = sum(batch.tf.values())
    vocab = len(batch.tf)
    return {
        w: ((c + 1) / (total + vocab)) / ref_word_probability(ref, w)
        for w, c in batch.tf.items()
    }


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def assemble_topics(vectors: Mapping[str, np.ndarray], order: Sequence[str], b=5.0, c=2.0, trace=None):
    """Greedy co-occurrence-vector topic assembly.

    Seeds are taken from ``order``; each grows by the best-matching remaining
    term while its cosine with the accumulated vector beats ``theta(|S|)``.
    After each addition entries of the accumulated vector below |S|/2 are
    zeroed. Returns ``(members, accumulated vector)`` pairs. If ``trace`` is
    a list, the accumulated vector after every growth step is appended.
    """
    remaining = list(order)
    topics = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        acc = vectors[seed].astype(float)
        while remaining:
            sims = [_cosine(acc, vectors[t]) for t in remaining]
            best = int(np.argmax(sims))
            if sims[best] <= theta(len(members), b, c):
                break
            members.append(remaining.pop(best))
            acc = acc + vectors[members[-1]]
            acc[acc < len(members) / 2] = 0.0
            if trace is not None:
                trace.append((len(members), acc.copy()))
        topics.append((members, acc))
    return topics


def tscv_detect(batch: WindowBatch, ref: RefCorpusModel, cfg: TscvConfig = TscvConfig()) -> list[Topic]:
    if not batch.posts or not batch.tf:
        return []
    scores = term_scores(batch, ref)
    k = cfg.k
    if k > len(scores):
        log.warning("k=%d exceeds window vocabulary (%d); using all words", k, len(scores))
        k = len(scores)
    top = sorted(scores, key=lambda w: (-scores[w], w))[:k]
    top_set = set(top)
    vectors = {w: np.zeros(len(batch.posts)) for w in top}
    for i, p in enumerate(batch.posts):
        for w in set(p.tokens) & top_set:
            vectors[w][i] = 1.0

    topics = []
    for members, acc in assemble_topics(vectors, top, cfg.b, cfg.c):
        pids = {batch.posts[i].id for i in np.flatnonzero(acc)}
        topics.append(Topic(members, pids, sum(scores[w] for w in members)))
    return dedupe_topics(topics)


# --------------------------------------------------------------------------
# DSFG: FP-growth with dynamic support


def classify_window(n_posts: int, history: Sequence[int]) -> str:
    """Small iff the window holds fewer than a third of the recent mean size."""
    if not history:
        return LARGE
    return SMALL if n_posts < statistics.fmean(history) / 3 else LARGE


def dynamic_support_value(tf: Mapping[str, int], size_class: str) -> float:
    """avg(TF) * median(TF) for large windows, avg(TF) * 2 * median(TF) for small."""
    if not tf:
        raise ValueError("empty window")
    values = list(tf.values())
    avg = statistics.fmean(values)
    med = statistics.median(values)
    if size_class == SMALL:
        return avg * (2 * med)
    if size_class == LARGE:
        return avg * med
    raise ValueError(f"unknown window class {size_class!r}")


def dynamic_support(tf: Mapping[str, int], size_class: str) -> int:
    return max(1, math.ceil(dynamic_support_value(tf, size_class) - 1e-9))


def dsfg_support(batch: WindowBatch, history: Sequence[int], history_window: int = 5) -> int:
    return dynamic_support(batch.tf, classify_window(len(batch.posts), list(history)[-history_window:]))


def dsfg_detect(batch: WindowBatch, history: Sequence[int] = (), history_window: int = 5) -> list[Topic]:
    """Maximal frequent patterns under the window's dynamic support."""
    if not batch.posts or not batch.tf:
        return []
    min_sup = dsfg_support(batch, history, history_window)
    patterns = maximal_patterns(fp_growth(transactions_from_batch(batch), min_sup))
    tf = batch.tf
    topics = [
        Topic(sorted(p.items, key=lambda w: (-tf[w], w)), set(p.post_ids), float(p.support))
        for p in sorted(patterns, key=lambda p: (-p.support, -len(p.items), p.items))
    ]
    return topics


# --------------------------------------------------------------------------
# UFPT: utility-based pattern mining


def ufpt_detect(
    batch: WindowBatch,
    prev_batch: WindowBatch | None,
    min_util: float | None = None,
    min_util_fraction: float = 0.001,
    max_topics: int | None = None,
) -> list[Topic]:
    """Emerging-topic patterns by high-utility mining plus consolidation.

    ``min_util`` defaults to ``min_util_fraction`` of the window's total
    transaction utility.
    """
    if not batch.posts or not batch.tf:
        return []
    table = compute_utilities(batch, prev_batch)
    if min_util is None:
        min_util = min_util_fraction * sum(table.tu.values())
    patterns = consolidate_patterns(hupm_mine(transactions_from_batch(batch), table, min_util))
    ext = table.external
    topics = [
        Topic(sorted(p.items, key=lambda w: (-ext[w], w)), set(p.post_ids), float(p.utility))
        for p in patterns
    ]
    return topics[:max_topics] if max_topics is not None else topics
