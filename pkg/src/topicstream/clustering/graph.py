"""Weighted similarity graphs, shared-nearest-neighbour and modularity clustering."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from ..embeddings import pairwise_distances


@dataclass
class SimilarityGraph:
    """Undirected weighted graph on nodes ``0..n-1``; no self-loops."""

    n: int
    adj: list[dict[int, float]] = field(default_factory=list)
    names: list[Hashable] | None = None

    def __post_init__(self):
        if not self.adj:
            self.adj = [{} for _ in range(self.n)]

    def add_edge(self, u: int, v: int, w: float = 1.0) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        if w <= 0:
            return
        self.adj[u][v] = float(w)
        self.adj[v][u] = float(w)

    def weight(self, u: int, v: int) -> float:
        return self.adj[u].get(v, 0.0)

    def edges(self):
        for u in range(self.n):
            for v, w in self.adj[u].items():
                if u < v:
                    yield u, v, w

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    @classmethod
    def from_sets(cls, sets: Sequence[frozenset | set], names=None,
                  similarity: Callable[[set, set], float] | None = None) -> "SimilarityGraph":
        """Graph whose edge weights are the Jaccard overlap of the given sets."""
        sim = similarity or jaccard
        g = cls(len(sets), names=list(names) if names is not None else None)
        index: dict = {}
        for i, s in enumerate(sets):
            for x in s:
                index.setdefault(x, []).append(i)
        pairs = set()
        for members in index.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    pairs.add((members[a], members[b]))
        for i, j in sorted(pairs):
            g.add_edge(i, j, sim(sets[i], sets[j]))
        return g


def jaccard(a, b) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def _top_k_with_ties(scores: dict[int, float], k: int) -> list[int]:
    """The ``k`` best-scored keys plus any keys tied with the k-th best."""
    order = sorted(scores, key=lambda v: (-scores[v], v))
    if len(order) <= k:
        return order
    cut = scores[order[k - 1]]
    return [v for v in order if scores[v] >= cut]


def _nearest_lists(graph_or_points, k: int, metric: str) -> list[list[int]]:
    if isinstance(graph_or_points, SimilarityGraph):
        g = graph_or_points
        return [_top_k_with_ties(g.adj[u], k) for u in range(g.n)]
    d = pairwise_distances(np.asarray(graph_or_points, dtype=float), metric)
    n = len(d)
    return [_top_k_with_ties({v: -d[u, v] for v in range(n) if v != u}, k) for u in range(n)]


def connected_components(n: int, pairs) -> np.ndarray:
    """Component label per node, numbered by smallest member."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    roots = [find(x) for x in range(n)]
    relabel: dict[int, int] = {}
    return np.array([relabel.setdefault(r, len(relabel)) for r in roots], dtype=int)


def jarvis_patrick(graph_or_points, k: int, k_min: int, metric: str = "euclidean") -> np.ndarray:
    """Shared-nearest-neighbour clustering.

    Two nodes are linked when each is among the other's ``k`` nearest and
    their neighbour lists share at least ``k_min`` nodes; clusters are the
    connected components of that relation. On a graph, nearness is edge
    weight and only actual neighbours are listed. Neighbours tied with the
    k-th nearest are all kept, so the result does not depend on node order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= k_min <= k:
        raise ValueError("need 0 <= k_min <= k")
    near = _nearest_lists(graph_or_points, k, metric)
    sets = [set(x) for x in near]
    links = [
        (u, v)
        for u in range(len(near))
        for v in near[u]
        if u < v and u in sets[v] and len(sets[u] & sets[v]) >= k_min
    ]
    return connected_components(len(near), links)


def modularity(graph: SimilarityGraph, labels: Sequence[int]) -> float:
    """Weighted Newman modularity of a node labelling."""
    two_m = 2 * sum(w for _, _, w in graph.edges())
    if two_m == 0:
        return 0.0
    labels = list(labels)
    inside: dict = {}
    degree: dict = {}
    for u in range(graph.n):
        degree[labels[u]] = degree.get(labels[u], 0.0) + sum(graph.adj[u].values())
    for u, v, w in graph.edges():
        if labels[u] == labels[v]:
            inside[labels[u]] = inside.get(labels[u], 0.0) + 2 * w
    return sum(inside.get(c, 0.0) / two_m - (degree[c] / two_m) ** 2 for c in degree)


def newman_communities(graph: SimilarityGraph) -> tuple[list[list[int]], float]:
    """Greedy agglomerative modularity maximisation.

    Starting from singletons, repeatedly merges the pair of connected
    communities with the largest modularity gain (ties to the pair with the
    smallest community ids) and returns the partition seen at maximum Q,
    preferring the earliest one. Communities are lists of node indices.
    """
    if graph.n == 0:
        raise ValueError("empty graph")
    two_m = 2 * sum(w for _, _, w in graph.edges())
    comms = {u: [u] for u in range(graph.n)}
    if two_m == 0:
        return [c for _, c in sorted(comms.items())], 0.0
    a = {u: sum(graph.adj[u].values()) / two_m for u in range(graph.n)}
    e: dict[int, dict[int, float]] = {u: {} for u in range(graph.n)}
    for u, v, w in graph.edges():
        e[u][v] = e[u].get(v, 0.0) + w / two_m
        e[v][u] = e[v].get(u, 0.0) + w / two_m

    def snapshot():
        return [sorted(c) for _, c in sorted(comms.items())]

    q = -sum(x * x for x in a.values())
    best_q, best = q, snapshot()
    while True:
        pick = None
        for i in e:
            for j, eij in e[i].items():
                if i < j:
                    gain = 2 * (eij - a[i] * a[j])
                    if (pick is None or gain > pick[0] + 1e-15
                            or (gain >= pick[0] - 1e-15 and (i, j) < pick[1:])):
                        pick = (gain, i, j)
        if pick is None:
            break
        gain, i, j = pick
        # merge j into i
        for x, ejx in e.pop(j).items():
            e[x].pop(j)
            if x == i:
                continue
            e[i][x] = e[i].get(x, 0.0) + ejx
            e[x][i] = e[i][x]
        a[i] += a.pop(j)
        comms[i].extend(comms.pop(j))
        q += gain
        if q > best_q + 1e-12:
            best_q, best = q, snapshot()
    labels = np.empty(graph.n, dtype=int)
    for c, members in enumerate(best):
        labels[members] = c
    return best, modularity(graph, labels)
