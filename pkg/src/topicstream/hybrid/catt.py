"""CATT: word-pair gravity ranking and clustering of the strongest pairs."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from ..clustering import connected_components
from ..stream import WindowBatch
from ..topics import Topic


@dataclass(frozen=True)
class CattConfig:
    delta: float = 0.5
    rate: float = 0.5
    min_cooc: int = 2

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must be in [0, 1]")
        if not 0 < self.rate <= 0.5:
            raise ValueError("rate must be in (0, 0.5]")


def cimawa_score(cooc: int, f_x: int, f_y: int, delta: float) -> float:
    """Cooc/f(y) + delta * Cooc/f(x)."""
    if f_x <= 0 or f_y <= 0:
        raise ValueError("unseen word")
    return cooc / f_y + delta * cooc / f_x


class PostIndex:
    """Per-window document frequencies and pair co-occurrence counts."""

    def __init__(self, batch: WindowBatch):
        self.doc_freq: Counter = Counter()
        self.cooc: Counter = Counter()
        for post in batch.posts:
            words = sorted(set(post.tokens))
            self.doc_freq.update(words)
            self.cooc.update(combinations(words, 2))

    def pair_count(self, x: str, y: str) -> int:
        return self.cooc.get((x, y) if x < y else (y, x), 0)


def _index(batch_or_index) -> PostIndex:
    return batch_or_index if isinstance(batch_or_index, PostIndex) else PostIndex(batch_or_index)


def cimawa(x: str, y: str, batch_or_index, delta: float = 0.5) -> float:
    idx = _index(batch_or_index)
    return cimawa_score(idx.pair_count(x, y), idx.doc_freq[x], idx.doc_freq[y], delta)


def agf(x: str, y: str, batch_or_index, delta: float = 0.5) -> float:
    """Symmetric gravity: CIMAWA(x, y) * CIMAWA(y, x)."""
    idx = _index(batch_or_index)
    c, fx, fy = idx.pair_count(x, y), idx.doc_freq[x], idx.doc_freq[y]
    return cimawa_score(c, fx, fy, delta) * cimawa_score(c, fy, fx, delta)


def ranked_pairs(index: PostIndex, cfg: CattConfig) -> list[tuple[float, str, str]]:
    """All pairs with enough co-occurrence, strongest gravity first."""
    out = []
    for (x, y), c in index.cooc.items():
        if c >= cfg.min_cooc:
            fx, fy = index.doc_freq[x], index.doc_freq[y]
            out.append((cimawa_score(c, fx, fy, cfg.delta) * cimawa_score(c, fy, fx, cfg.delta), x, y))
    out.sort(key=lambda t: (-t[0], t[1], t[2]))
    return out


def catt_detect(batch: WindowBatch, cfg: CattConfig = CattConfig()) -> list[Topic]:
    index = PostIndex(batch)
    pairs = ranked_pairs(index, cfg)
    if not pairs:
        return []
    kept = pairs[: max(1, math.ceil(cfg.rate * len(pairs)))]
    words = sorted({w for _, x, y in kept for w in (x, y)})
    pos = {w: i for i, w in enumerate(words)}
    labels = connected_components(len(words), [(pos[x], pos[y]) for _, x, y in kept])
    strength: Counter = Counter()
    for g, x, y in kept:
        strength[x] += g
        strength[y] += g
    groups: dict[int, list[str]] = {}
    for w, label in zip(words, labels):
        groups.setdefault(int(label), []).append(w)
    topics = []
    for members in groups.values():
        member_set = set(members)
        posts = {p.id for p in batch.posts if len(member_set.intersection(p.tokens)) >= 2}
        title = sorted(members, key=lambda w: (-strength[w], w))
        score = sum(g for g, x, _ in kept if x in member_set)
        topics.append(Topic(title, posts, score))
    return sorted(topics, key=lambda t: (-t.score, t.keywords))
