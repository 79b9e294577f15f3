"""SGJP: post segmentation by stickiness, then shared-neighbour clustering of segments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..background import AnchorModel, NgramModel, anchor_probability, ngram_probability
from ..clustering import SimilarityGraph, jarvis_patrick
from ..stream import WindowBatch
from ..topics import Topic


@dataclass
class Segment:
    words: tuple[str, ...]
    stickiness: float
    post_ids: set[str] = field(default_factory=set)


def sig(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def length_weight(n: int) -> float:
    """Preference for longer segments: 1/3 for a single word, (n-1)/n otherwise."""
    if n < 1:
        raise ValueError("empty segment")
    return 1.0 / 3.0 if n == 1 else (n - 1) / n


def scp_from_probabilities(p_phrase: float, splits: Sequence[tuple[float, float]]) -> float:
    """ln of p^2 over the mean product of the binary-split probabilities."""
    mean = sum(a * b for a, b in splits) / len(splits)
    return math.log(p_phrase * p_phrase / mean)


def scp(phrase: Sequence[str], ngrams: NgramModel) -> float:
    n = len(phrase)
    if n < 2:
        raise ValueError("SCP needs at least two words")
    pr = lambda ws: ngram_probability(ngrams, ws)  # noqa: E731
    splits = [(pr(phrase[:i]), pr(phrase[i:])) for i in range(1, n)]
    return scp_from_probabilities(pr(phrase), splits)


def stickiness(segment: Sequence[str], anchors: AnchorModel, ngrams: NgramModel) -> float:
    """C(s) = Len(s) * exp(Q(s)) * Sig(SCP(s)); a single word uses Sig(ln Pr(w))."""
    n = len(segment)
    if not 1 <= n <= ngrams.n_max:
        raise ValueError(f"segment length {n} outside 1..{ngrams.n_max}")
    q = anchor_probability(anchors, segment)
    coherence = math.log(ngram_probability(ngrams, segment)) if n == 1 else scp(segment, ngrams)
    return length_weight(n) * math.exp(q) * sig(coherence)


def best_segmentation(tokens: Sequence[str], h: int, score: Callable[[tuple[str, ...]], float]):
    """Split ``tokens`` into pieces of at most ``h`` words maximising the summed score.

    Returns ``(total, pieces)``. Among equally good segmentations the one
    whose last cut comes earliest wins, applied recursively.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    n = len(tokens)
    best = [0.0] + [-math.inf] * n
    back = [0] * (n + 1)
    for i in range(1, n + 1):
        for j in range(max(0, i - h), i):
            cand = best[j] + score(tuple(tokens[j:i]))
            if cand > best[i]:
                best[i], back[i] = cand, j
    pieces = []
    i = n
    while i > 0:
        pieces.append(tuple(tokens[back[i]:i]))
        i = back[i]
    return best[n], pieces[::-1]


class StickinessCache:
    """Memoised stickiness for one pair of background models."""

    def __init__(self, anchors: AnchorModel, ngrams: NgramModel):
        self.anchors, self.ngrams = anchors, ngrams
        self._memo: dict[tuple[str, ...], float] = {}

    def __call__(self, segment: tuple[str, ...]) -> float:
        v = self._memo.get(segment)
        if v is None:
            v = self._memo[segment] = stickiness(segment, self.anchors, self.ngrams)
        return v


def segment_post(tokens: Sequence[str], h: int, anchors: AnchorModel, ngrams: NgramModel,
                 cache: StickinessCache | None = None) -> list[Segment]:
    if not tokens:
        return []
    score = cache or StickinessCache(anchors, ngrams)
    _, pieces = best_segmentation(tokens, min(h, ngrams.n_max), score)
    return [Segment(p, score(p)) for p in pieces]


@dataclass(frozen=True)
class SgjpConfig:
    h: int = 3
    threshold: int = 3
    k: int = 10
    k_min: int = 5

    def __post_init__(self):
        if self.h < 1 or self.threshold < 1 or self.k < 1:
            raise ValueError("h, threshold and k must be positive")
        if not 0 <= self.k_min <= self.k:
            raise ValueError("need 0 <= k_min <= k")


def topic_segments(batch: WindowBatch, cfg: SgjpConfig, anchors: AnchorModel, ngrams: NgramModel) -> list[Segment]:
    """Segments occurring in at least ``threshold`` posts, most frequent first."""
    cache = StickinessCache(anchors, ngrams)
    found: dict[tuple[str, ...], Segment] = {}
    for post in batch.posts:
        for seg in segment_post(post.tokens, cfg.h, anchors, ngrams, cache):
            found.setdefault(seg.words, Segment(seg.words, seg.stickiness)).post_ids.add(post.id)
    kept = [s for s in found.values() if len(s.post_ids) >= cfg.threshold]
    return sorted(kept, key=lambda s: (-len(s.post_ids), s.words))


def sgjp_detect(batch: WindowBatch, anchors: AnchorModel, ngrams: NgramModel, cfg: SgjpConfig = SgjpConfig()) -> list[Topic]:
    segments = topic_segments(batch, cfg, anchors, ngrams)
    if not segments:
        return []
    graph = SimilarityGraph.from_sets([s.post_ids for s in segments])
    labels = jarvis_patrick(graph, cfg.k, cfg.k_min)
    groups: dict[int, list[Segment]] = {}
    for seg, label in zip(segments, labels):
        groups.setdefault(int(label), []).append(seg)
    topics = []
    for members in groups.values():
        words: list[str] = []
        for seg in members:  # already ordered by post frequency
            words.extend(w for w in seg.words if w not in words)
        posts = set().union(*(s.post_ids for s in members))
        score = sum(s.stickiness * len(s.post_ids) for s in members)
        topics.append(Topic(words, posts, score))
    return sorted(topics, key=lambda t: (-t.score, t.keywords))
