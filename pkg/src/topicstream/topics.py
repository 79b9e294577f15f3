"""The Topic record every detector emits."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Topic:
    keywords: list[str]
    post_ids: set[str] = field(default_factory=set)
    score: float = 0.0
    kind: str | None = None  # "coherent"/"emerging" for FHKN, else None

    def to_record(self) -> dict:
        rec = {
            "keywords": list(self.keywords),
            "post_ids": sorted(self.post_ids),
            "score": round(float(self.score), 10),
        }
        if self.kind is not None:
            rec["kind"] = self.kind
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Topic":
        return cls(list(rec["keywords"]), set(rec.get("post_ids", ())), float(rec.get("score", 0.0)), rec.get("kind"))


def dedupe_topics(topics: list[Topic]) -> list[Topic]:
    """Drop topics whose keyword set repeats an earlier one."""
    seen: set[frozenset] = set()
    out = []
    for t in topics:
        key = frozenset(t.keywords)
        if key in seen:
            continue
        seen.add(key)
        out.append(t)
    return out
