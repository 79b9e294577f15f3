"""Method registry and the per-window run loop shared by the command line and the tests."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .background import BackgroundModels, load_models
from .cl_methods import PRESETS, ClPipelineConfig, cl_detect, embed_batch
from .clustering import silhouette
from .embeddings import EmbeddingTable, load_vectors
from .errors import ConfigError, DataError
from .fp_methods import TscvConfig, dsfg_detect, tscv_detect, ufpt_detect
from .hybrid import CattConfig, FhknConfig, SgjpConfig, catt_detect, fhkn_detect, sgjp_detect
from .preprocess import CompoundLexicon, compose_title, load_stopwords, preprocess_posts
from .stream import Post, WindowBatch, WindowSpec, ingest_posts, window_stream
from .topics import Topic

log = logging.getLogger(__name__)

METHODS = ("TSCV", "DSFG", "UFPT", "WVOP", "FTOP", "GLCM", "GLGK", "SGJP", "CATT", "FHKN")
FAMILY = {"TSCV": "FP", "DSFG": "FP", "UFPT": "FP", "WVOP": "CL", "FTOP": "CL", "GLCM": "CL",
          "GLGK": "CL", "SGJP": "FPCL", "CATT": "FPCL", "FHKN": "FPCL"}
MODEL_DIR_ENV = "TOPICSTREAM_MODEL_DIR"

# resources a method cannot run without
REQUIRES = {
    "TSCV": ("models",),
    "SGJP": ("models",),
    "WVOP": ("embeddings",),
    "FTOP": ("embeddings",),
    "GLCM": ("embeddings",),
    "GLGK": ("embeddings",),
}

# tunable and fixed parameters per method, with their types
PARAMS: dict[str, dict[str, type]] = {
    "TSCV": {"k": int, "b": float, "c": float},
    "DSFG": {"history_window": int},
    "UFPT": {"min_util_fraction": float, "max_topics": int},
    "SGJP": {"h": int, "threshold": int, "k": int, "k_min": int},
    "CATT": {"rate": float, "delta": float, "min_cooc": int},
    "FHKN": {"top_k": int, "knn_k": int, "tau": float, "min_support_fraction": float, "title_words": int},
}
_CL_PARAMS = {"min_pts": int, "xi": float, "c": int, "m": float, "eps": float, "title_words": int,
              "gk_max_dim": int, "dim": int}
for _m in PRESETS:
    PARAMS[_m] = _CL_PARAMS

ALIASES = {"minpts": "min_pts", "damp": "delta", "kmin": "k_min"}


def canonical_method(name: str) -> str:
    m = name.strip().upper()
    if m not in METHODS:
        raise ConfigError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return m


def canonical_param(method: str, name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in PARAMS[method]:
        raise ConfigError(f"{method} has no parameter {name!r}; known: {', '.join(sorted(PARAMS[method]))}")
    return key


def coerce_params(method: str, raw: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for name, value in raw.items():
        key = canonical_param(method, name)
        kind = PARAMS[method][key]
        try:
            if kind is int and isinstance(value, str):
                out[key] = int(value)
            elif kind is int and isinstance(value, float):
                if not value.is_integer():
                    raise ValueError(f"{value} is not an integer")
                out[key] = int(value)
            else:
                out[key] = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{method} parameter {key}: {exc}") from None
    return out


@dataclass
class RunConfig:
    method: str
    posts: Path | None = None
    models: Path | None = None
    embeddings: Path | None = None
    stopwords: Path | None = None
    lexicon: Path | None = None
    window_seconds: int = 3600
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 42

    def __post_init__(self):
        self.method = canonical_method(self.method)
        self.params = coerce_params(self.method, self.params)
        if self.window_seconds <= 0:
            raise ConfigError("window length must be positive")

    def with_params(self, **params) -> "RunConfig":
        merged = {**self.params, **params}
        return RunConfig(**{f.name: getattr(self, f.name) for f in fields(self) if f.name != "params"}, params=merged)

    def resolved_models(self) -> Path | None:
        env = os.environ.get(MODEL_DIR_ENV)
        return Path(env) if env else self.models

    def check_resources(self) -> None:
        """Fail before any processing when a required input is missing."""
        for need in REQUIRES.get(self.method, ()):
            path = self.resolved_models() if need == "models" else self.embeddings
            if path is None:
                raise ConfigError(f"{self.method} requires {need} (set '{need}' in the run config)")
            if not Path(path).exists():
                raise DataError(f"{self.method} requires {need}, but {path} does not exist")

    def header(self) -> dict:
        return {"method": self.method, "params": dict(sorted(self.params.items())), "seed": self.seed,
                "window_seconds": self.window_seconds}


@dataclass
class Resources:
    models: BackgroundModels | None = None
    table: EmbeddingTable | None = None
    lexicon: CompoundLexicon | None = None
    stopwords: frozenset[str] = frozenset()


def load_resources(cfg: RunConfig) -> Resources:
    cfg.check_resources()
    res = Resources()
    needs = REQUIRES.get(cfg.method, ())
    if "models" in needs:
        res.models = load_models(cfg.resolved_models())
    if "embeddings" in needs:
        source = PRESETS[cfg.method]["source"]
        res.table = load_vectors(cfg.embeddings, source)
    if cfg.lexicon:
        res.lexicon = CompoundLexicon.load(cfg.lexicon)
    if cfg.stopwords:
        res.stopwords = load_stopwords(cfg.stopwords)
    return res


class Detector:
    """Runs one method window by window, carrying whatever state it needs."""

    def __init__(self, method: str, params: dict[str, Any], resources: Resources, seed: int = 42):
        self.method = canonical_method(method)
        self.params = coerce_params(self.method, params)
        self.res = resources
        self.seed = seed
        self._history: list[int] = []
        self._prev: WindowBatch | None = None
        self._memory = None
        self._step: Callable[[WindowBatch], list[Topic]] = self._build()

    def _build(self):
        m, p, res = self.method, self.params, self.res
        try:
            if m == "TSCV":
                cfg = TscvConfig(**p)
                return lambda b: tscv_detect(b, res.models.ref, cfg)
            if m == "DSFG":
                hw = p.get("history_window", 5)
                return lambda b: dsfg_detect(b, self._history, hw)
            if m == "UFPT":
                return lambda b: ufpt_detect(b, self._prev, **p)
            if m in PRESETS:
                cfg = ClPipelineConfig.for_method(m, seed=self.seed, **p)
                return lambda b: cl_detect(b, cfg, res.table)
            if m == "SGJP":
                cfg = SgjpConfig(**p)
                return lambda b: sgjp_detect(b, res.models.anchors, res.models.ngrams, cfg)
            if m == "CATT":
                cfg = CattConfig(**p)
                return lambda b: catt_detect(b, cfg)
            cfg = FhknConfig(**p)
            return self._fhkn(cfg)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{m}: {exc}") from None

    def _fhkn(self, cfg: FhknConfig):
        def step(b: WindowBatch) -> list[Topic]:
            topics, self._memory = fhkn_detect(b, self._memory, cfg)
            return topics
        return step

    def __call__(self, batch: WindowBatch) -> list[Topic]:
        topics = self._step(batch) if batch.posts else []
        self._history.append(len(batch.posts))
        self._prev = batch
        if self.res.lexicon is not None:
            for t in topics:
                t.keywords = compose_title(t.keywords, self.res.lexicon)
        return topics


@dataclass
class WindowResult:
    batch: WindowBatch
    topics: list[Topic]

    def to_record(self, method: str) -> dict:
        b = self.batch
        return {"window": b.index, "start": b.start, "end": b.end, "method": method,
                "n_posts": len(b.posts), "topics": [t.to_record() for t in self.topics]}


def prepare_windows(posts: Sequence[Post], stopwords=frozenset(), window_seconds: int = 3600) -> list[WindowBatch]:
    return window_stream(preprocess_posts(posts, stopwords), WindowSpec(window_seconds))


def run_detector(detector: Detector, batches: Sequence[WindowBatch]) -> list[WindowResult]:
    return [WindowResult(b, detector(b)) for b in batches]


def run(cfg: RunConfig, posts: Sequence[Post] | None = None, resources: Resources | None = None,
        batches: Sequence[WindowBatch] | None = None) -> list[WindowResult]:
    """Load what the method needs, window the stream and detect topics in every window."""
    resources = resources or load_resources(cfg)
    if batches is None:
        if posts is None:
            if cfg.posts is None:
                raise ConfigError("no posts file given")
            posts = ingest_posts(cfg.posts).posts
        batches = prepare_windows(posts, resources.stopwords, cfg.window_seconds)
    return run_detector(Detector(cfg.method, cfg.params, resources, cfg.seed), batches)


def topic_silhouette(batch: WindowBatch, topics: Sequence[Topic], table: EmbeddingTable | None = None) -> float:
    """Silhouette of the hard post partition induced by ``topics``.

    Each post goes to the first listed topic that contains it; posts in no
    topic are left out. Posts are represented by their embedding when a
    table is given, otherwise by their term-count vector, with cosine
    distance either way.
    """
    owner: dict[str, int] = {}
    for j, t in enumerate(topics):
        for pid in t.post_ids:
            owner.setdefault(pid, j)
    if table is not None:
        idx, x = embed_batch(batch, table)
        posts = [batch.posts[i] for i in idx]
    else:
        posts = list(batch.posts)
        vocab = {w: i for i, w in enumerate(sorted(batch.tf))}
        x = np.zeros((len(posts), len(vocab)))
        for r, p in enumerate(posts):
            for w in p.tokens:
                x[r, vocab[w]] += 1
    labels = np.array([owner.get(p.id, -1) for p in posts])
    keep = np.linalg.norm(x, axis=1) > 0
    return silhouette(x[keep], labels[keep], "cosine")
