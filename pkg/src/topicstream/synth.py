"""Synthetic planted-topic streams for testing and sweeps.

Every planted topic owns a disjoint core vocabulary and a two-word headline
phrase. Topic posts mix core words with filler words drawn from a large
shared vocabulary; noise posts use a separate noise vocabulary and carry no
class. Words are pseudo-words in Arabic script so the default tokenizer keeps
them.

Besides posts and the golden standard, the generator writes the resources the
detectors need: a background corpus (for n-gram and reference models), an
anchor-text TSV, a word-vector table, a stopword list and a compound lexicon.
"""
from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .stream import Post, write_posts

LETTERS = "ابپتثجچحخدذرزژسشصضطظعغفقکگلمنوهی"
DECORATIONS = ("#خبر", "http://t.me/x", "😀", "۱۲۳", "news", "@channel", "!")


@dataclass
class SynthConfig:
    n_topics: int = 3
    posts_per_topic: int = 30  # per window
    n_windows: int = 5
    window_seconds: int = 3600
    start_ts: int = 1_483_228_800  # 2017-01-01T00:00:00Z
    noise_rate: float = 0.1
    core_vocab: int = 8
    core_per_post: int = 4
    phrase_rate: float = 0.6
    filler_vocab: int = 2000
    filler_per_post: int = 4
    noise_vocab: int = 300
    n_stopwords: int = 20
    stopwords_per_post: int = 2
    decoration_rate: float = 0.3
    dim: int = 32
    background_docs: int = 3000
    seed: int = 42

    def __post_init__(self):
        for name in ("n_topics", "posts_per_topic", "n_windows", "core_vocab", "core_per_post", "dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.noise_rate < 1:
            raise ValueError("noise_rate must be in [0, 1)")
        if self.core_per_post > self.core_vocab:
            raise ValueError("core_per_post exceeds core_vocab")


@dataclass
class SynthCorpus:
    config: SynthConfig
    posts: list[Post]
    golden: dict[str, list[str]]  # post id -> classes ([] for noise)
    catalog: dict[str, list[str]]  # class -> core keywords
    phrases: dict[str, tuple[str, str]]
    stopwords: list[str]
    vectors: dict[str, np.ndarray]
    background: list[list[str]]
    anchors: dict[str, int]


def _vocabulary(rng: random.Random, size: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < size:
        w = "".join(rng.choice(LETTERS) for _ in range(rng.randint(4, 7)))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def generate(cfg: SynthConfig = SynthConfig()) -> SynthCorpus:
    rng = random.Random(cfg.seed)
    nrng = np.random.default_rng(cfg.seed)
    taken: set[str] = set()
    cores = [_vocabulary(rng, cfg.core_vocab, taken) for _ in range(cfg.n_topics)]
    filler = _vocabulary(rng, cfg.filler_vocab, taken)
    noise = _vocabulary(rng, cfg.noise_vocab, taken)
    stop = _vocabulary(rng, cfg.n_stopwords, taken)
    classes = [f"topic{i}" for i in range(cfg.n_topics)]
    phrases = {c: (core[0], core[1]) for c, core in zip(classes, cores)}

    posts: list[Post] = []
    golden: dict[str, list[str]] = {}
    n_per_window = cfg.n_topics * cfg.posts_per_topic
    n_noise = round(cfg.noise_rate * n_per_window)
    pid = 0
    for w in range(cfg.n_windows):
        labels: list[int | None] = [None] * n_noise
        labels += [i % cfg.n_topics for i in range(n_per_window - n_noise)]
        rng.shuffle(labels)
        start = cfg.start_ts + w * cfg.window_seconds
        stamps = sorted(rng.randrange(start, start + cfg.window_seconds) for _ in labels)
        for ts, label in zip(stamps, labels):
            if label is None:
                units = [[x] for x in rng.sample(noise, cfg.core_per_post + cfg.filler_per_post)]
            else:
                core = cores[label]
                if cfg.core_per_post >= 2 and rng.random() < cfg.phrase_rate:
                    units = [[core[0], core[1]]]
                    units += [[x] for x in rng.sample(core[2:], cfg.core_per_post - 2)]
                else:
                    units = [[x] for x in rng.sample(core, cfg.core_per_post)]
                units += [[x] for x in rng.sample(filler, cfg.filler_per_post)]
            units += [[x] for x in rng.sample(stop, min(cfg.stopwords_per_post, len(stop)))]
            if rng.random() < cfg.decoration_rate:
                units.append([rng.choice(DECORATIONS)])
            rng.shuffle(units)
            text = " ".join(x for u in units for x in u)
            post_id = f"p{pid:06d}"
            pid += 1
            posts.append(Post(post_id, ts, f"ch{rng.randrange(5)}", text))
            golden[post_id] = [] if label is None else [classes[label]]

    # word vectors: core words near their topic centroid, everything else diffuse
    vectors: dict[str, np.ndarray] = {}
    centroids = nrng.normal(size=(cfg.n_topics, cfg.dim))
    centroids /= np.linalg.norm(centroids, axis=1, keepdims=True)
    for t, core in enumerate(cores):
        for word in core:
            vectors[word] = centroids[t] + nrng.normal(scale=0.1, size=cfg.dim)
    for word in filler + noise + stop:
        vectors[word] = nrng.normal(scale=0.15, size=cfg.dim)

    # background corpus: general language from filler/noise/stop words; the
    # headline phrases occur as fixed expressions, other core words never
    background = []
    general = filler + noise
    for _ in range(cfg.background_docs):
        doc = rng.sample(general, rng.randint(8, 16))
        doc += rng.sample(stop, 2)
        if rng.random() < 0.05:
            a, b = phrases[rng.choice(classes)]
            at = rng.randrange(len(doc) + 1)
            doc[at:at] = [a, b]
        background.append(doc)

    anchors = {f"{a} {b}": 40 + 5 * i for i, (a, b) in enumerate(phrases.values())}
    for _ in range(200):
        a, b = rng.sample(filler, 2)
        anchors[f"{a} {b}"] = anchors.get(f"{a} {b}", 0) + rng.randint(1, 10)

    catalog = {c: list(core) for c, core in zip(classes, cores)}
    return SynthCorpus(cfg, posts, golden, catalog, phrases, stop, vectors, background, anchors)


def write_corpus(corpus: SynthCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write every artifact of ``corpus`` into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "posts": out / "posts.jsonl",
        "golden": out / "golden.jsonl",
        "catalog": out / "catalog.jsonl",
        "vectors": out / "vectors.vec",
        "background": out / "background.txt",
        "anchors": out / "anchors.tsv",
        "stopwords": out / "stopwords.txt",
        "compounds": out / "compounds.txt",
        "config": out / "synth.json",
    }
    write_posts(corpus.posts, paths["posts"])
    with open(paths["golden"], "w", encoding="utf-8") as fh:
        for pid, classes in corpus.golden.items():
            fh.write(json.dumps({"post_id": pid, "classes": classes}, ensure_ascii=False) + "\n")
    with open(paths["catalog"], "w", encoding="utf-8") as fh:
        for c, kws in corpus.catalog.items():
            fh.write(json.dumps({"class": c, "keywords": kws}, ensure_ascii=False) + "\n")
    with open(paths["vectors"], "w", encoding="utf-8") as fh:
        fh.write(f"{len(corpus.vectors)} {corpus.config.dim}\n")
        for word, vec in corpus.vectors.items():
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
    with open(paths["background"], "w", encoding="utf-8") as fh:
        for doc in corpus.background:
            fh.write(" ".join(doc) + "\n")
    with open(paths["anchors"], "w", encoding="utf-8") as fh:
        for phrase, count in corpus.anchors.items():
            fh.write(f"{phrase}\t{count}\n")
    with open(paths["stopwords"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(corpus.stopwords) + "\n")
    with open(paths["compounds"], "w", encoding="utf-8") as fh:
        for a, b in corpus.phrases.values():
            fh.write(f"{a} {b}\n")
    with open(paths["config"], "w", encoding="utf-8") as fh:
        json.dump(asdict(corpus.config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
