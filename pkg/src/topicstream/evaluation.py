"""Topic-level precision/recall/F and the FS multiclass-multicluster scores."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .topics import Topic

_SPLIT = re.compile(r"[\s_‌]+")


@dataclass
class GoldenStandard:
    labels: dict[str, dict[str, float]]  # post id -> class -> assignment score
    catalog: dict[str, frozenset[str]] = field(default_factory=dict)  # class -> keywords

    @property
    def classes(self) -> list[str]:
        found = {c for assigned in self.labels.values() for c in assigned}
        return sorted(found | set(self.catalog))

    @classmethod
    def from_mapping(cls, labels: Mapping[str, Iterable[str]], catalog: Mapping[str, Iterable[str]] = None):
        return cls(
            {pid: {c: 1.0 for c in classes} for pid, classes in labels.items()},
            {c: frozenset(kw) for c, kw in (catalog or {}).items()},
        )


def _read_jsonl(path: str | Path):
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: {exc.msg}") from exc
            if not isinstance(rec, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, rec


def load_golden(path: str | Path, catalog_path: str | Path | None = None) -> GoldenStandard:
    """Read ``{post_id, classes, score?}`` lines and an optional ``{class, keywords}`` catalog."""
    labels: dict[str, dict[str, float]] = {}
    for lineno, rec in _read_jsonl(path):
        pid, classes = rec.get("post_id"), rec.get("classes")
        if not isinstance(pid, str) or not isinstance(classes, list):
            raise DataError(f"{path}:{lineno}: need string post_id and list classes")
        if pid in labels:
            raise DataError(f"{path}:{lineno}: duplicate post id {pid!r}")
        score = float(rec.get("score", 1.0))
        labels[pid] = {str(c): score for c in classes}
    catalog = load_catalog(catalog_path) if catalog_path else {}
    return GoldenStandard(labels, catalog)


def load_catalog(path: str | Path) -> dict[str, frozenset[str]]:
    out = {}
    for lineno, rec in _read_jsonl(path):
        name, kws = rec.get("class"), rec.get("keywords")
        if not isinstance(name, str) or not isinstance(kws, list):
            raise DataError(f"{path}:{lineno}: need string class and list keywords")
        out[name] = frozenset(str(k) for k in kws)
    return out


# --------------------------------------------------------------------------
# topic precision / recall / F


def title_words(keywords: Sequence[str]) -> list[str]:
    """Keywords with joined compounds split back into their words."""
    out: list[str] = []
    for kw in keywords:
        out.extend(w for w in _SPLIT.split(kw) if w)
    return out


def topic_matches(keywords: Sequence[str], class_keywords: frozenset[str], theta: float = 0.5) -> bool:
    words = title_words(keywords)
    if not words:
        return False
    return sum(w in class_keywords for w in words) >= theta * len(words)


@dataclass
class Prf:
    precision: float
    recall: float
    f: float
    matched_topics: int = 0
    covered_classes: int = 0

    def as_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f": self.f}


def f_measure(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def topic_prf(topics: Sequence[Topic], catalog: Mapping[str, frozenset[str]], theta: float = 0.5) -> Prf:
    """A topic matches a class when at least ``theta`` of its title words are class keywords."""
    if not catalog:
        raise ValueError("no golden classes")
    if not topics:
        return Prf(0.0, 0.0, 0.0)
    matched, covered = 0, set()
    for t in topics:
        hits = {c for c, kws in catalog.items() if topic_matches(t.keywords, kws, theta)}
        matched += bool(hits)
        covered |= hits
    p, r = matched / len(topics), len(covered) / len(catalog)
    return Prf(p, r, f_measure(p, r), matched, len(covered))


def mixed_topics(topics: Sequence[Topic], catalog: Mapping[str, frozenset[str]]) -> list[Topic]:
    """Topics whose title draws keywords from two or more classes."""
    out = []
    for t in topics:
        words = set(title_words(t.keywords))
        if sum(bool(words & kws) for kws in catalog.values()) >= 2:
            out.append(t)
    return out


# --------------------------------------------------------------------------
# FS scores


def assignment_matrix(topics: Sequence[Topic], golden: GoldenStandard, classes: Sequence[str] | None = None):
    """Class x cluster matrix of summed assignment scores.

    Entry (i, j) totals the scores of posts of cluster j labelled with class
    i. Returns ``(matrix, classes, unlabeled)`` where ``unlabeled`` counts
    cluster memberships whose post has no class in the golden standard.
    """
    classes = list(classes) if classes is not None else golden.classes
    row = {c: i for i, c in enumerate(classes)}
    m = np.zeros((len(classes), len(topics)))
    unlabeled = 0
    for j, t in enumerate(topics):
        for pid in t.post_ids:
            assigned = golden.labels.get(pid)
            if not assigned:
                unlabeled += 1
                continue
            for c, s in assigned.items():
                m[row[c], j] += s
    return m, classes, unlabeled


def entropy_impurity(weights: np.ndarray) -> float:
    """Normalised entropy of a weight vector; 0 for pure, 1 for uniform."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0 or len(w) < 2:
        return 0.0
    p = w[w > 0] / total
    return float(-(p * np.log(p)).sum() / math.log(len(w)))


def aggregate_fs(scores: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted mean of per-group FS scores."""
    w = np.asarray(weights, dtype=float)
    if w.sum() <= 0:
        raise ValueError("no labelled posts to score")
    return float(np.dot(np.asarray(scores, dtype=float), w) / w.sum())


Scorer = Callable[[np.ndarray], float]


@dataclass
class FsScores:
    cluster_scores: list[float]
    class_scores: dict[str, float]
    cluster_fs: float
    class_fs: float
    mean_fs: float
    unlabeled: int = 0

    def as_dict(self) -> dict:
        return {"class_fs": self.class_fs, "cluster_fs": self.cluster_fs, "mean_fs": self.mean_fs,
                "unlabeled": self.unlabeled}


def cluster_fs(topics: Sequence[Topic], golden: GoldenStandard, scorer: Scorer = entropy_impurity) -> float:
    if not topics:
        raise ValueError("empty output")
    m, _, _ = assignment_matrix(topics, golden)
    return aggregate_fs([scorer(m[:, j]) for j in range(m.shape[1])], m.sum(axis=0))


def class_fs(topics: Sequence[Topic], golden: GoldenStandard, scorer: Scorer = entropy_impurity) -> float:
    if not topics:
        raise ValueError("empty output")
    m, _, _ = assignment_matrix(topics, golden)
    return aggregate_fs([scorer(m[i, :]) for i in range(m.shape[0])], m.sum(axis=1))


def mean_fs(class_score: float, cluster_score: float) -> float:
    return (class_score + cluster_score) / 2


def fs_scores(topics: Sequence[Topic], golden: GoldenStandard, scorer: Scorer = entropy_impurity) -> FsScores:
    if not topics:
        raise ValueError("empty output")
    m, classes, unlabeled = assignment_matrix(topics, golden)
    per_cluster = [scorer(m[:, j]) for j in range(m.shape[1])]
    per_class = [scorer(m[i, :]) for i in range(m.shape[0])]
    clu = aggregate_fs(per_cluster, m.sum(axis=0))
    cla = aggregate_fs(per_class, m.sum(axis=1))
    return FsScores(per_cluster, dict(zip(classes, per_class)), clu, cla, mean_fs(cla, clu), unlabeled)
