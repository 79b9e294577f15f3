"""Post ingestion and landmark-window batching."""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_BATCH_SECONDS = 3600


@dataclass(frozen=True)
class Post:
    id: str
    timestamp: int
    channel: str
    text: str
    tokens: tuple[str, ...] | None = None

    def to_record(self) -> dict:
        return {"id": self.id, "ts": self.timestamp, "channel": self.channel, "text": self.text}


@dataclass(frozen=True)
class WindowSpec:
    duration: int = DEFAULT_BATCH_SECONDS
    mode: str = "landmark"

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"window duration must be positive, got {self.duration}")
        if self.mode != "landmark":
            raise ValueError(f"unsupported window mode {self.mode!r}")


@dataclass(frozen=True)
class WindowBatch:
    index: int
    start: int
    end: int
    posts: tuple[Post, ...]
    tf: Mapping[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.posts)

    @property
    def post_ids(self) -> list[str]:
        return [p.id for p in self.posts]

    @classmethod
    def from_posts(cls, posts: Sequence[Post], index: int = 0, start: int = 0, end: int = 0) -> "WindowBatch":
        posts = tuple(posts)
        for p in posts:
            if p.tokens is None:
                raise DataError(f"post {p.id!r} has no tokens; run preprocessing first")
        return cls(index, start, end, posts, MappingProxyType(dict(_count(posts))))


@dataclass
class IngestResult:
    posts: list[Post]
    malformed: list[int]  # 1-based line numbers

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    def __len__(self) -> int:
        return len(self.posts)


def _parse_record(line: str) -> Post:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    pid, ts, channel, text = rec["id"], rec["ts"], rec["channel"], rec["text"]
    if not isinstance(pid, str) or not pid:
        raise ValueError("id must be a nonempty string")
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise ValueError("ts must be an integer")
    if not isinstance(channel, str) or not isinstance(text, str):
        raise ValueError("channel and text must be strings")
    return Post(pid, ts, channel, text)


def ingest_posts(source: str | Path, max_malformed: float = 0.1) -> IngestResult:
    """Read a posts-jsonl file.

    Malformed lines (bad JSON, missing fields, wrong types, duplicate ids) are
    skipped and their line numbers reported. More than ``max_malformed`` of
    nonblank lines being malformed is fatal.
    """
    try:
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read posts file {source}: {exc}") from exc

    posts: list[Post] = []
    malformed: list[int] = []
    seen: set[str] = set()
    n_lines = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        n_lines += 1
        try:
            post = _parse_record(line)
        except (ValueError, KeyError, TypeError):
            malformed.append(lineno)
            continue
        if post.id in seen:
            malformed.append(lineno)
            continue
        seen.add(post.id)
        posts.append(post)

    if malformed:
        if len(malformed) > max_malformed * n_lines:
            raise DataError(
                f"{len(malformed)} of {n_lines} lines malformed in {source} (lines {malformed[:20]})"
            )
        log.warning("skipped %d malformed line(s) in %s: %s", len(malformed), source, malformed[:20])
    return IngestResult(posts, malformed)


def write_posts(posts: Iterable[Post], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps(p.to_record(), ensure_ascii=False) + "\n")


def _count(posts: Iterable[Post]) -> Counter:
    tf: Counter = Counter()
    for p in posts:
        tf.update(p.tokens)
    return tf


def term_frequencies(batch: WindowBatch | Sequence[Post]) -> dict[str, int]:
    """Total occurrences of each word over all posts of the batch."""
    posts = batch.posts if isinstance(batch, WindowBatch) else batch
    for p in posts:
        if p.tokens is None:
            raise DataError(f"post {p.id!r} has no tokens; run preprocessing first")
    return dict(_count(posts))


def window_stream(posts: Sequence[Post], spec: WindowSpec = WindowSpec()) -> list[WindowBatch]:
    """Partition posts into consecutive half-open landmark intervals.

    The landmark is the earliest timestamp. Intervals with no posts produce
    empty batches so that batch ``t`` always covers
    ``[landmark + t*duration, landmark + (t+1)*duration)``.
    """
    for p in posts:
        if p.tokens is None:
            raise DataError(f"post {p.id!r} has no tokens; run preprocessing first")
    if not posts:
        return []
    ordered = sorted(posts, key=lambda p: p.timestamp)  # stable: file order within equal ts
    origin = ordered[0].timestamp
    n_batches = (ordered[-1].timestamp - origin) // spec.duration + 1
    buckets: list[list[Post]] = [[] for _ in range(n_batches)]
    for p in ordered:
        buckets[(p.timestamp - origin) // spec.duration].append(p)
    return [
        WindowBatch.from_posts(b, t, origin + t * spec.duration, origin + (t + 1) * spec.duration)
        for t, b in enumerate(buckets)
    ]
