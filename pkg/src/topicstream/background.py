"""Background-knowledge count stores: n-grams, anchor texts, reference unigrams.

On-disk layout of a model directory (format version 1)::

    meta.json          totals, n_max, distinct-token count, format version
    ngram1.tsv ...     one store per n-gram order
    anchors.tsv        anchor phrase counts
    ref.tsv            reference-corpus unigram counts

Each store ``X.tsv`` holds ``key<TAB>count\\n`` lines sorted by the UTF-8
bytes of the key and is accompanied by ``X.idx``: the 8-byte magic
``b"TSIDX1\\0\\0"``, a little-endian uint64 entry count, then one uint64 byte
offset per line. Lookups binary-search the index over a memory map, so
stores far larger than RAM can be queried.
"""
from __future__ import annotations

import heapq
import json
import logging
import mmap
import os
import shutil
import struct
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
N_MAX = 5
INDEX_MAGIC = b"TSIDX1\x00\x00"
_U64 = struct.Struct("<Q")


# --------------------------------------------------------------------------
# count stores


class MmapCountStore(Mapping[str, int]):
    """Read-only sorted TSV store queried through its offset index."""

    def __init__(self, tsv_path: str | Path):
        tsv_path = Path(tsv_path)
        idx_path = tsv_path.with_suffix(".idx")
        with open(idx_path, "rb") as fh:
            head = fh.read(16)
            if len(head) < 16 or head[:8] != INDEX_MAGIC:
                raise DataError(f"bad index file {idx_path}")
            (self._n,) = _U64.unpack(head[8:])
            raw = fh.read(8 * self._n)
        if len(raw) != 8 * self._n:
            raise DataError(f"truncated index file {idx_path}")
        self._offsets = memoryview(raw).cast("Q")
        self._fh = open(tsv_path, "rb")
        size = os.fstat(self._fh.fileno()).st_size
        self._mm = mmap.mmap(self._fh.fileno(), 0, access=mmap.ACCESS_READ) if size else b""

    def _entry(self, i: int) -> tuple[bytes, int]:
        start = self._offsets[i]
        end = self._mm.find(b"\n", start)
        line = self._mm[start:end]
        key, _, count = line.partition(b"\t")
        return key, int(count)

    def _key(self, i: int) -> bytes:
        start = self._offsets[i]
        return self._mm[start:self._mm.find(b"\t", start)]

    def __getitem__(self, key: str) -> int:
        target = key.encode("utf-8")
        lo, hi = 0, self._n
        while lo < hi:
            mid = (lo + hi) // 2
            if self._key(mid) < target:
                lo = mid + 1
            else:
                hi = mid
        if lo < self._n:
            k, c = self._entry(lo)
            if k == target:
                return c
        raise KeyError(key)

    def __len__(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[str]:
        for i in range(self._n):
            yield self._key(i).decode("utf-8")

    def items(self):  # type: ignore[override]
        for i in range(self._n):
            k, c = self._entry(i)
            yield k.decode("utf-8"), c

    def close(self) -> None:
        if isinstance(self._mm, mmap.mmap):
            self._mm.close()
        self._fh.close()


def _sorted_items(counts: Mapping[str, int]) -> list[tuple[bytes, int]]:
    return sorted((k.encode("utf-8"), c) for k, c in counts.items())


def _write_sorted(items: Iterable[tuple[bytes, int]], tsv_path: Path) -> int:
    offsets = []
    pos = 0
    with open(tsv_path, "wb") as out:
        for key, count in items:
            line = key + b"\t" + str(count).encode() + b"\n"
            offsets.append(pos)
            out.write(line)
            pos += len(line)
    with open(tsv_path.with_suffix(".idx"), "wb") as out:
        out.write(INDEX_MAGIC)
        out.write(_U64.pack(len(offsets)))
        for off in offsets:
            out.write(_U64.pack(off))
    return len(offsets)


def write_store(counts: Mapping[str, int], tsv_path: str | Path) -> int:
    """Write ``counts`` as a sorted TSV plus offset index; returns entry count."""
    for k in counts:
        if "\t" in k or "\n" in k:
            raise ValueError(f"store keys may not contain tabs or newlines: {k!r}")
    return _write_sorted(_sorted_items(counts), Path(tsv_path))


class _SpillingCounter:
    """Counter that spills sorted runs to disk and merges them at the end."""

    def __init__(self, tmpdir: Path, name: str, limit: int):
        self.tmpdir, self.name, self.limit = tmpdir, name, limit
        self.counts: Counter = Counter()
        self.runs: list[Path] = []

    def add(self, key: str, n: int = 1) -> None:
        self.counts[key] += n
        if len(self.counts) >= self.limit:
            self._spill()

    def _spill(self) -> None:
        run = self.tmpdir / f"{self.name}.run{len(self.runs)}"
        with open(run, "wb") as out:
            for k, c in _sorted_items(self.counts):
                out.write(k + b"\t" + str(c).encode() + b"\n")
        self.runs.append(run)
        self.counts = Counter()

    @staticmethod
    def _read_run(path: Path) -> Iterator[tuple[bytes, int]]:
        with open(path, "rb") as fh:
            for line in fh:
                k, _, c = line.rstrip(b"\n").partition(b"\t")
                yield k, int(c)

    def merged(self) -> Iterator[tuple[bytes, int]]:
        if not self.runs:
            yield from _sorted_items(self.counts)
            return
        if self.counts:
            self._spill()
        key, total = None, 0
        for k, c in heapq.merge(*(self._read_run(r) for r in self.runs)):
            if k != key:
                if key is not None:
                    yield key, total
                key, total = k, 0
            total += c
        if key is not None:
            yield key, total


# --------------------------------------------------------------------------
# models


@dataclass
class NgramModel:
    """Counts of contiguous n-grams for n = 1..n_max."""

    counts: list[Mapping[str, int]]  # counts[n-1]: n-gram (space-joined) -> count
    totals: list[int]
    distinct_tokens: int

    @property
    def n_max(self) -> int:
        return len(self.counts)

    def count(self, phrase: Sequence[str]) -> int:
        return self.counts[len(phrase) - 1].get(" ".join(phrase), 0)


@dataclass
class AnchorModel:
    counts: Mapping[str, int]
    total: int

    @classmethod
    def empty(cls) -> "AnchorModel":
        return cls({}, 0)


@dataclass
class RefCorpusModel:
    counts: Mapping[str, int]
    total: int

    @property
    def vocabulary(self) -> int:
        return len(self.counts)


@dataclass
class BackgroundModels:
    ngrams: NgramModel
    anchors: AnchorModel
    ref: RefCorpusModel


def _read_lines(path: Path) -> Iterator[list[str]]:
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                toks = line.split()
                if toks:
                    yield toks
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc


def _read_corpus(corpus) -> Iterator[list[str]]:
    """Yield token lists.

    ``corpus`` is a single path, or an iterable whose items are ``Path``
    objects (files with one document per line), strings of space-separated
    tokens, or token lists.
    """
    if isinstance(corpus, (str, Path)):
        yield from _read_lines(Path(corpus))
        return
    for item in corpus:
        if isinstance(item, Path):
            yield from _read_lines(item)
        else:
            toks = item.split() if isinstance(item, str) else list(item)
            if toks:
                yield toks


def _count_ngrams(docs: Iterable[list[str]], n_max: int, add) -> None:
    for toks in docs:
        for n in range(1, n_max + 1):
            for i in range(len(toks) - n + 1):
                add(n, " ".join(toks[i:i + n]))


def build_ngram_model(corpus, n_max: int = N_MAX) -> NgramModel:
    """Count all contiguous n-grams (per document line) in memory.

    ``corpus`` is a path, a list of paths, or an iterable of documents given
    as strings of space-separated tokens or token lists.
    """
    if not 1 <= n_max <= N_MAX:
        raise ValueError(f"n_max must be in 1..{N_MAX}")
    counters = [Counter() for _ in range(n_max)]

    def add(n, key):
        counters[n - 1][key] += 1

    _count_ngrams(_read_corpus(corpus), n_max, add)
    if not counters[0]:
        raise DataError("empty corpus")
    return NgramModel([dict(c) for c in counters], [sum(c.values()) for c in counters], len(counters[0]))


def ngram_probability(model: NgramModel, phrase: Sequence[str]) -> float:
    """Corpus-level MLE of a phrase; unseen phrases get (1/V)^n."""
    n = len(phrase)
    if n < 1:
        raise ValueError("empty phrase")
    if n > model.n_max:
        raise ValueError(f"order exceeds model: |phrase|={n} > n_max={model.n_max}")
    c = model.count(phrase)
    total = model.totals[n - 1]
    if c > 0 and total > 0:
        return c / total
    return (1.0 / max(model.distinct_tokens, 1)) ** n


def _normalize_phrase(phrase) -> str:
    if isinstance(phrase, str):
        return " ".join(phrase.lower().split())
    return " ".join(w.lower() for w in phrase)


def load_anchor_tsv(path: str | Path) -> AnchorModel:
    counts: Counter = Counter()
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                phrase, sep, count = line.rstrip("\n").rpartition("\t")
                try:
                    c = int(count)
                except ValueError:
                    c = -1
                if not sep or not phrase.strip() or c <= 0:
                    raise DataError(f"{path}:{lineno}: expected 'phrase<TAB>positive count'")
                counts[_normalize_phrase(phrase)] += c
    except OSError as exc:
        raise DataError(f"cannot read anchor file {path}: {exc}") from exc
    return AnchorModel(dict(counts), sum(counts.values()))


def anchor_probability(model: AnchorModel, phrase) -> float:
    if model.total <= 0:
        return 0.0
    return model.counts.get(_normalize_phrase(phrase), 0) / model.total


def build_ref_model(corpus) -> RefCorpusModel:
    counts: Counter = Counter()
    for toks in _read_corpus(corpus):
        counts.update(toks)
    if not counts:
        raise DataError("empty reference corpus")
    return RefCorpusModel(dict(counts), sum(counts.values()))


def ref_from_ngrams(model: NgramModel) -> RefCorpusModel:
    return RefCorpusModel(model.counts[0], model.totals[0])


def ref_word_probability(model: RefCorpusModel, word: str) -> float:
    """Add-one smoothed unigram probability (count+1)/(total+V)."""
    return (model.counts.get(word, 0) + 1) / (model.total + model.vocabulary)


# --------------------------------------------------------------------------
# persistence


def save_models(models: BackgroundModels, out_dir: str | Path) -> dict:
    """Persist in-memory models; returns the metadata written to meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ng = models.ngrams
    distinct = []
    for n, counts in enumerate(ng.counts, 1):
        distinct.append(write_store(counts, out / f"ngram{n}.tsv"))
    write_store(models.anchors.counts, out / "anchors.tsv")
    write_store(models.ref.counts, out / "ref.tsv")
    meta = _meta(ng.n_max, ng.totals, distinct, ng.distinct_tokens, models.anchors, models.ref)
    _write_meta(meta, out)
    return meta


def _meta(n_max, totals, distinct, distinct_tokens, anchors: AnchorModel, ref: RefCorpusModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n_max": n_max,
        "ngram_totals": list(totals),
        "ngram_distinct": list(distinct),
        "distinct_tokens": distinct_tokens,
        "anchor_total": anchors.total,
        "anchor_distinct": len(anchors.counts),
        "ref_total": ref.total,
        "ref_vocabulary": len(ref.counts),
    }


def _write_meta(meta: dict, out: Path) -> None:
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_models(model_dir: str | Path) -> BackgroundModels:
    d = Path(model_dir)
    try:
        with open(d / "meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read model directory {d}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format {meta.get('format_version')!r} in {d}")
    ngrams = NgramModel(
        [MmapCountStore(d / f"ngram{n}.tsv") for n in range(1, meta["n_max"] + 1)],
        meta["ngram_totals"],
        meta["distinct_tokens"],
    )
    anchors = AnchorModel(MmapCountStore(d / "anchors.tsv"), meta["anchor_total"])
    ref = RefCorpusModel(MmapCountStore(d / "ref.tsv"), meta["ref_total"])
    return BackgroundModels(ngrams, anchors, ref)


def build_model_dir(
    corpus_paths: Sequence[str | Path],
    out_dir: str | Path,
    anchor_tsv: str | Path | None = None,
    ref_corpus_paths: Sequence[str | Path] | None = None,
    n_max: int = N_MAX,
    spill_limit: int = 2_000_000,
) -> dict:
    """Stream corpora into a model directory without holding all counts in RAM.

    Counters spill sorted runs to a scratch directory once they reach
    ``spill_limit`` keys; runs are merged into the final stores. On any
    failure the partially written directory is removed. Returns meta.json.
    """
    out = Path(out_dir)
    if not 1 <= n_max <= N_MAX:
        raise ValueError(f"n_max must be in 1..{N_MAX}")
    for p in list(corpus_paths) + list(ref_corpus_paths or []) + ([anchor_tsv] if anchor_tsv else []):
        if not Path(p).is_file():
            raise DataError(f"input not found: {p}")
    created = not out.exists()
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".bk-", dir=out.parent))
    try:
        with tempfile.TemporaryDirectory() as tmp:
            tmpdir = Path(tmp)
            sinks = [_SpillingCounter(tmpdir, f"ngram{n}", spill_limit) for n in range(1, n_max + 1)]
            totals = [0] * n_max

            def add(n, key):
                sinks[n - 1].add(key)
                totals[n - 1] += 1

            _count_ngrams(_read_corpus([Path(p) for p in corpus_paths]), n_max, add)
            if totals[0] == 0:
                raise DataError("empty corpus")
            distinct = [_write_sorted(s.merged(), staging / f"ngram{i}.tsv") for i, s in enumerate(sinks, 1)]
            distinct_tokens = distinct[0]

            if ref_corpus_paths:
                ref_sink = _SpillingCounter(tmpdir, "ref", spill_limit)
                ref_total = 0
                for toks in _read_corpus([Path(p) for p in ref_corpus_paths]):
                    for t in toks:
                        ref_sink.add(t)
                        ref_total += 1
                if ref_total == 0:
                    raise DataError("empty reference corpus")
                ref_vocab = _write_sorted(ref_sink.merged(), staging / "ref.tsv")
            else:
                shutil.copyfile(staging / "ngram1.tsv", staging / "ref.tsv")
                shutil.copyfile(staging / "ngram1.idx", staging / "ref.idx")
                ref_total, ref_vocab = totals[0], distinct_tokens

        if anchor_tsv:
            anchors = load_anchor_tsv(anchor_tsv)
        else:
            log.warning("no anchor file given; anchor probabilities will be 0")
            anchors = AnchorModel.empty()
        write_store(anchors.counts, staging / "anchors.tsv")

        meta = _meta(n_max, totals, distinct, distinct_tokens, anchors, RefCorpusModel({}, ref_total))
        meta["ref_vocabulary"] = ref_vocab
        _write_meta(meta, staging)

        if out.exists():
            shutil.rmtree(out)
        staging.rename(out)
        return meta
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        if created and out.exists():
            shutil.rmtree(out, ignore_errors=True)
        raise
