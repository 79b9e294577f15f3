"""Crisp partitioning helpers: k-means, silhouette and KNN assignment."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ..embeddings import pairwise_distances


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int


def _sq_dist(x, centers):
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeans(points, k: int, max_iter: int = 300, seed: int = 42, n_init: int = 10) -> KMeansResult:
    """Lloyd iterations from ``n_init`` k-means++ starts; the lowest inertia wins.

    An emptied cluster is re-seeded with the point farthest from its center.
    Ties between starts keep the earliest, so results depend only on ``seed``.
    """
    x = np.asarray(points, dtype=float)
    n = len(x)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        res = _lloyd(x, _plus_plus(x, k, rng), max_iter)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def _plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = [x[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sq_dist(x, np.array(centers)).min(axis=1)
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(x[idx])
    return np.array(centers)


def _lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int) -> KMeansResult:
    n, k = len(x), len(centers)
    labels = np.full(n, -1)
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dist(x, centers)
        new = np.argmin(d2, axis=1)
        for j in range(k):
            if not np.any(new == j):
                far = int(np.argmax(d2[np.arange(n), new]))
                new[far] = j
        if np.array_equal(new, labels):
            break
        labels = new
        centers = np.array([x[labels == j].mean(axis=0) for j in range(k)])
    inertia = float(_sq_dist(x, centers)[np.arange(n), labels].sum())
    return KMeansResult(labels, centers, inertia, it)


def silhouette(points, labels, metric: str = "euclidean") -> float:
    """Mean silhouette over points with a non-negative label.

    ``metric`` may be ``"precomputed"``. Points in singleton clusters score 0.
    """
    labels = np.asarray(labels)
    keep = labels >= 0
    if metric == "precomputed":
        d = np.asarray(points, dtype=float)[np.ix_(keep, keep)]
    else:
        d = pairwise_distances(np.asarray(points, dtype=float)[keep], metric)
    labels = labels[keep]
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ValueError("silhouette undefined for fewer than two clusters")
    if len(uniq) == len(labels):
        raise ValueError("silhouette undefined when every point is its own cluster")
    sums = np.stack([d[:, labels == u].sum(axis=1) for u in uniq], axis=1)
    sizes = np.array([(labels == u).sum() for u in uniq])
    own = np.searchsorted(uniq, labels)
    rows = np.arange(len(labels))
    own_size = sizes[own]
    a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
    mean_other = sums / sizes
    mean_other[rows, own] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own_size > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1), 0.0)
    return float(s.mean())


def _cosine_similarities(item: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(item)
    dots = matrix @ item
    return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)


def knn_classify(item, examples: Sequence[np.ndarray], labels: Sequence[Hashable], k: int = 3,
                 threshold: float = 0.5) -> Hashable | None:
    """Majority label among the ``k`` most cosine-similar labelled examples.

    Returns None (unclassified) when there are no examples or the best
    similarity is below ``threshold``. Vote ties go to the label with the
    larger summed similarity, then to the label of the nearer neighbour.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not len(examples):
        return None
    sims = _cosine_similarities(np.asarray(item, dtype=float), np.asarray(examples, dtype=float))
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))[:k]
    if sims[order[0]] < threshold:
        return None
    votes: dict = defaultdict(lambda: [0, 0.0, len(order)])
    for rank, i in enumerate(order):
        v = votes[labels[i]]
        v[0] += 1
        v[1] += sims[i]
        v[2] = min(v[2], rank)
    return max(votes, key=lambda lab: (votes[lab][0], votes[lab][1], -votes[lab][2]))
