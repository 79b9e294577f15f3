"""OPTICS ordering with steep-area (xi) cluster extraction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..embeddings import pairwise_distances


@dataclass
class OpticsResult:
    ordering: np.ndarray  # point indices in visiting order
    reachability: np.ndarray  # per point, inf for the start of each traversal
    core_distances: np.ndarray
    predecessor: np.ndarray  # per point, -1 if none
    labels: np.ndarray  # per point, -1 is noise
    hierarchy: list[tuple[int, int]] = field(default_factory=list)  # (start, end) positions in ordering

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) and self.labels.max() >= 0 else 0


def _distance_matrix(points, dist) -> np.ndarray:
    if isinstance(dist, str):
        if dist == "precomputed":
            return np.asarray(points, dtype=float)
        return pairwise_distances(np.asarray(points, dtype=float), dist)
    pts = list(points)
    n = len(pts)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = dist(pts[i], pts[j])
    return d


def optics_ordering(d: np.ndarray, min_pts: int):
    """Visit order, reachability, core distance and predecessor per point.

    Core distance counts the point itself among its ``min_pts`` neighbors.
    The next point is the unprocessed one with the smallest reachability,
    ties broken by index.
    """
    n = len(d)
    core = np.sort(d, axis=1)[:, min_pts - 1]
    reach = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=int)
    processed = np.zeros(n, dtype=bool)
    ordering = np.empty(n, dtype=int)
    for pos in range(n):
        todo = np.flatnonzero(~processed)
        point = todo[np.argmin(reach[todo])]
        processed[point] = True
        ordering[pos] = point
        rest = np.flatnonzero(~processed)
        if not len(rest):
            break
        new = np.maximum(core[point], d[point, rest])
        better = new < reach[rest]
        reach[rest[better]] = new[better]
        pred[rest[better]] = point
    return ordering, reach, core, pred


def _extend(steep, xward, start, min_pts):
    """End of the maximal steep region that begins at ``start``.

    The region may contain at most ``min_pts`` consecutive points that are
    not steep, and stops at the first point moving the opposite way.
    """
    n = len(steep)
    flat = 0
    end = start
    i = start
    while i < n:
        if steep[i]:
            flat = 0
            end = i
        elif not xward[i]:
            flat += 1
            if flat > min_pts:
                break
        else:
            return end
        i += 1
    return end


def _correct_by_predecessor(r, pred, ordering, s, e):
    while s < e:
        if r[s] > r[e]:
            return s, e
        p_e = pred[ordering[e]]
        if p_e in ordering[s:e]:
            return s, e
        e -= 1
    return None, None


def xi_clusters(reach_plot, pred, ordering, xi, min_pts, min_cluster_size):
    """Clusters as (start, end) positions found from steep down/up areas."""
    r = np.append(reach_plot, np.inf)
    keep = 1.0 - xi
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = r[:-1] / r[1:]
    up_steep = ratio <= keep
    down_steep = ratio >= 1.0 / keep
    down = ratio > 1
    up = ratio < 1

    downs: list[dict] = []  # steep down areas still open
    clusters: list[tuple[int, int]] = []
    index = 0
    mib = 0.0  # maximum reachability seen since the last steep area

    def filter_downs(mib):
        if np.isinf(mib):
            return []
        kept = [a for a in downs if mib <= r[a["start"]] * keep]
        for a in kept:
            a["mib"] = max(a["mib"], mib)
        return kept

    for steep_index in np.flatnonzero(up_steep | down_steep):
        if steep_index < index:
            continue
        mib = max(mib, np.max(r[index:steep_index + 1]))
        if down_steep[steep_index]:
            downs = filter_downs(mib)
            d_end = _extend(down_steep, up, steep_index, min_pts)
            downs.append({"start": steep_index, "end": d_end, "mib": 0.0})
            index = d_end + 1
            mib = r[index]
            continue

        downs = filter_downs(mib)
        u_start = steep_index
        u_end = _extend(up_steep, down, u_start, min_pts)
        index = u_end + 1
        mib = r[index]
        found = []
        for area in downs:
            c_start, c_end = area["start"], u_end
            if r[c_end + 1] * keep < area["mib"]:
                continue
            d_max = r[area["start"]]
            if d_max * keep >= r[c_end + 1]:
                # start deeper in the down area, level with the cluster end
                while r[c_start + 1] > r[c_end + 1] and c_start < area["end"]:
                    c_start += 1
            elif r[c_end + 1] * keep >= d_max:
                # end earlier in the up area, level with the cluster start
                while r[c_end - 1] > d_max and c_end > u_start:
                    c_end -= 1
            c_start, c_end = _correct_by_predecessor(r, pred, ordering, c_start, c_end)
            if c_start is None:
                continue
            if c_end - c_start + 1 < min_cluster_size:
                continue
            if c_start > area["end"] or c_end < u_start:
                continue
            found.append((int(c_start), int(c_end)))
        found.reverse()  # smaller (inner) clusters first
        clusters.extend(found)
    return clusters


def flatten_hierarchy(clusters, reach_plot, split_cover: float = 0.75, min_gap_ratio: float = 2.0):
    """Pick a flat set of clusters from nested (start, end) intervals.

    Starting from the outermost intervals, a cluster is replaced by its
    direct sub-clusters when they jointly cover at least ``split_cover`` of
    its points and every pair of neighbouring sub-clusters is well
    separated: the largest reachability between them must reach
    ``min_gap_ratio`` times the median inner reachability of the sparser of
    the two. A lone sub-cluster never replaces its parent.
    Intervals that partially overlap a larger one are ignored.
    """
    r = np.asarray(reach_plot, dtype=float)
    nodes = sorted(set(clusters), key=lambda c: (-(c[1] - c[0]), c[0]))
    children: dict = {None: []}
    placed: list[tuple[int, int]] = []
    for c in nodes:
        parent = None
        ok = True
        for p in placed:  # decreasing size, so the last container is the smallest
            if p[0] <= c[0] and c[1] <= p[1]:
                parent = p
            elif not (c[1] < p[0] or p[1] < c[0]):
                ok = False
                break
        if not ok:
            continue
        placed.append(c)
        children[c] = []
        children[parent].append(c)

    def inner(c):
        return float(np.median(r[c[0] + 1:c[1] + 1])) if c[1] > c[0] else 0.0

    def separated(kids) -> bool:
        if len(kids) < 2:
            return False
        for prev, nxt in zip(kids, kids[1:]):
            gap = float(np.max(r[prev[1] + 1:nxt[0] + 1]))
            if gap < min_gap_ratio * max(inner(prev), inner(nxt)):
                return False
        return True

    def select(node):
        kids = sorted(children[node])
        size = node[1] - node[0] + 1
        if kids and sum(k[1] - k[0] + 1 for k in kids) >= split_cover * size and separated(kids):
            return [x for k in kids for x in select(k)]
        return [node]

    out = [x for top in children[None] for x in select(top)]
    return sorted(out)


def optics(points, min_pts: int, dist="euclidean", xi: float = 0.05, min_cluster_size: int | None = None,
           split_cover: float = 0.75, min_gap_ratio: float = 2.0) -> OpticsResult:
    """OPTICS over ``points`` with xi-based flat cluster labels (noise = -1).

    ``dist`` is ``"euclidean"``, ``"cosine"``, ``"precomputed"`` (``points``
    is then a distance matrix) or a callable on two points.
    """
    if min_pts < 2:
        raise ValueError("min_pts must be >= 2")
    if not 0 < xi < 1:
        raise ValueError("xi must be in (0, 1)")
    d = _distance_matrix(points, dist)
    n = len(d)
    if n < min_pts:
        return OpticsResult(
            np.arange(n), np.full(n, np.inf), np.full(n, np.inf), np.full(n, -1), np.full(n, -1), []
        )
    ordering, reach, core, pred = optics_ordering(d, min_pts)
    hierarchy = xi_clusters(reach[ordering], pred, ordering, xi, min_pts, min_cluster_size or min_pts)
    labels = np.full(n, -1, dtype=int)
    for label, (s, e) in enumerate(flatten_hierarchy(hierarchy, reach[ordering], split_cover, min_gap_ratio)):
        labels[ordering[s:e + 1]] = label
    return OpticsResult(ordering, reach, core, pred, labels, hierarchy)
