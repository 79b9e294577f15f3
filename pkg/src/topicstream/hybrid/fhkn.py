"""FHKN: frequent/high-utility patterns split into continuing and newly emerging topics.

Patterns that resemble last window's topics are assigned to them by KNN;
the rest are grouped into emerging topics by modularity clustering over the
overlap of their related posts.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..clustering import SimilarityGraph, knn_classify, newman_communities
from ..fpm import Pattern, fp_growth, transactions_from_batch
from ..stream import WindowBatch
from ..topics import Topic

COHERENT, EMERGING = "coherent", "emerging"


@dataclass(frozen=True)
class FhknConfig:
    top_k: int = 100
    knn_k: int = 3
    tau: float = 0.5
    min_support_fraction: float = 0.001
    title_words: int = 5

    def __post_init__(self):
        if self.top_k < 1 or self.knn_k < 1:
            raise ValueError("top_k and knn_k must be >= 1")


@dataclass
class MemoryEntry:
    items: tuple[str, ...]
    profile: dict[str, int]  # word counts over the pattern's related posts
    label: str


@dataclass
class CoherentTopicMemory:
    """Patterns of the previous window with the topic each was assigned to."""

    entries: list[MemoryEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


def select_patterns(patterns: list[Pattern], tf, top_k: int) -> list[Pattern]:
    """Top patterns by summed window frequency of their words."""
    util = {p.items: sum(tf[w] for w in p.items) for p in patterns}
    return sorted(patterns, key=lambda p: (-util[p.items], -p.support, p.items))[:top_k]


def _profile(pattern: Pattern, tokens_of: dict[str, tuple[str, ...]]) -> Counter:
    prof: Counter = Counter()
    for pid in pattern.post_ids:
        prof.update(tokens_of[pid])
    return prof


def _dense(profiles: list[dict[str, int]]) -> np.ndarray:
    vocab = sorted({w for p in profiles for w in p})
    col = {w: i for i, w in enumerate(vocab)}
    out = np.zeros((len(profiles), len(vocab)))
    for r, prof in enumerate(profiles):
        for w, c in prof.items():
            out[r, col[w]] = c
    return out


def _title(patterns: list[Pattern], posts: set[str], tokens_of, doc_freq: Counter, n_posts: int, n_words: int):
    """Pattern words ranked by frequency in the related posts times log inverse window frequency."""
    words = {w for p in patterns for w in p.items}
    freq = Counter(w for pid in posts for w in tokens_of[pid] if w in words)
    score = {w: freq[w] * math.log(n_posts / doc_freq[w]) for w in words}
    ranked = sorted(words, key=lambda w: (-score[w], w))
    return ranked[:n_words], sum(score[w] for w in ranked[:n_words])


def fhkn_detect(batch: WindowBatch, memory: CoherentTopicMemory | None = None,
                cfg: FhknConfig = FhknConfig()) -> tuple[list[Topic], CoherentTopicMemory]:
    """Topics of one window plus the memory to pass to the next window."""
    memory = memory or CoherentTopicMemory()
    if not batch.posts or not batch.tf:
        return [], CoherentTopicMemory()
    min_sup = max(2, math.ceil(cfg.min_support_fraction * len(batch.posts)))
    patterns = select_patterns(fp_growth(transactions_from_batch(batch), min_sup), batch.tf, cfg.top_k)
    if not patterns:
        return [], CoherentTopicMemory()
    tokens_of = {p.id: p.tokens for p in batch.posts}
    doc_freq = Counter(w for p in batch.posts for w in set(p.tokens))
    profiles = [_profile(p, tokens_of) for p in patterns]

    # coherent: nearest memory patterns vote for a previous topic
    assigned: list[str | None] = [None] * len(patterns)
    if memory.entries:
        dense = _dense(profiles + [e.profile for e in memory.entries])
        current, past = dense[: len(patterns)], dense[len(patterns):]
        labels = [e.label for e in memory.entries]
        for i in range(len(patterns)):
            assigned[i] = knn_classify(current[i], past, labels, cfg.knn_k, cfg.tau)

    groups: list[tuple[str, str, list[int]]] = []  # (kind, label, pattern indices)
    by_label: dict[str, list[int]] = {}
    for i, label in enumerate(assigned):
        if label is not None:
            by_label.setdefault(label, []).append(i)
    for label in sorted(by_label):
        groups.append((COHERENT, label, by_label[label]))

    # emerging: modularity communities over the remaining patterns
    rest = [i for i, label in enumerate(assigned) if label is None]
    if rest:
        graph = SimilarityGraph.from_sets([patterns[i].post_ids for i in rest])
        communities, _ = newman_communities(graph)
        for j, comm in enumerate(communities):
            groups.append((EMERGING, f"w{batch.index}t{j}", [rest[x] for x in comm]))

    topics, entries = [], []
    for kind, label, members in groups:
        pats = [patterns[i] for i in members]
        posts = set().union(*(p.post_ids for p in pats))
        words, score = _title(pats, posts, tokens_of, doc_freq, len(batch.posts), cfg.title_words)
        topics.append(Topic(words, posts, score, kind))
        entries.extend(MemoryEntry(patterns[i].items, dict(profiles[i]), label) for i in members)
    return topics, CoherentTopicMemory(entries)
