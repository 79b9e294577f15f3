"""Character-class tokenizer, content-word filtering and compound joining.

Tags follow the usual social-media tokenizer inventory: target-language
words, other-language words, numbers, punctuation, emoji, hashtags, URLs,
mentions and everything else. The "target language" is a set of code point
ranges, Arabic script by default.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .stream import Post

WORD_TARGET = "word-target-lang"
WORD_OTHER = "word-other-lang"
NUMBER = "number"
PUNCT = "punctuation"
EMOJI = "emoji"
HASHTAG = "hashtag"
URL = "url"
MENTION = "mention"
OTHER = "other"

TAGS = (WORD_TARGET, WORD_OTHER, NUMBER, PUNCT, EMOJI, HASHTAG, URL, MENTION, OTHER)

ARABIC_SCRIPT = ((0x0600, 0x06FF), (0x0750, 0x077F), (0x08A0, 0x08FF), (0xFB50, 0xFDFF), (0xFE70, 0xFEFF))
LATIN_SCRIPT = ((0x0041, 0x005A), (0x0061, 0x007A), (0x00C0, 0x024F))

ZWNJ = "‌"
ZWJ = "‍"

_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2300, 0x23FF),
    (0x2B00, 0x2BFF),
    (0x1F1E6, 0x1F1FF),
)
_EMOJI_MODIFIERS = {0xFE0F, 0xFE0E, 0x200D, 0x20E3} | set(range(0x1F3FB, 0x1F400))

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#[\w‌]+")
_TRAILING_PUNCT = ".,;:!?)]}»\"'،؛؟"


@dataclass(frozen=True)
class Token:
    text: str
    tag: str


def _in_ranges(cp: int, ranges) -> bool:
    return any(lo <= cp <= hi for lo, hi in ranges)


def _is_emoji(ch: str) -> bool:
    return _in_ranges(ord(ch), _EMOJI_RANGES)


def _is_digit(ch: str) -> bool:
    return unicodedata.category(ch) == "Nd"


def _is_letter(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat.startswith("L") or cat in ("Mn", "Mc")


def tokenize(text: str, target: Sequence[tuple[int, int]] = ARABIC_SCRIPT) -> list[Token]:
    """Split ``text`` into tagged tokens.

    Every non-whitespace character ends up in exactly one token. Letter runs
    are split where the script class (target / other) changes; ZWNJ is kept
    inside target-language words.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "hHwW":
            m = _URL_RE.match(text, i)
            if m:
                url = m.group(0).rstrip(_TRAILING_PUNCT) or m.group(0)
                tokens.append(Token(url, URL))
                i += len(url)
                continue
        if ch == "@":
            m = _MENTION_RE.match(text, i)
            if m:
                tokens.append(Token(m.group(0), MENTION))
                i = m.end()
                continue
        if ch == "#":
            m = _HASHTAG_RE.match(text, i)
            if m:
                tokens.append(Token(m.group(0), HASHTAG))
                i = m.end()
                continue
        if _is_emoji(ch):
            j = i + 1
            while j < n and (_is_emoji(text[j]) or ord(text[j]) in _EMOJI_MODIFIERS):
                j += 1
            tokens.append(Token(text[i:j], EMOJI))
            i = j
            continue
        if _is_digit(ch):
            j = i + 1
            while j < n:
                if _is_digit(text[j]):
                    j += 1
                elif text[j] in ".,/٫٬" and j + 1 < n and _is_digit(text[j + 1]):
                    j += 2
                else:
                    break
            tokens.append(Token(text[i:j], NUMBER))
            i = j
            continue
        if _is_letter(ch):
            is_target = _in_ranges(ord(ch), target)
            j = i + 1
            while j < n:
                c = text[j]
                if c == ZWNJ and is_target and j + 1 < n and _in_ranges(ord(text[j + 1]), target):
                    j += 1
                elif _is_letter(c) and (
                    unicodedata.category(c) in ("Mn", "Mc") or _in_ranges(ord(c), target) == is_target
                ):
                    j += 1
                else:
                    break
            tokens.append(Token(text[i:j], WORD_TARGET if is_target else WORD_OTHER))
            i = j
            continue
        if unicodedata.category(ch).startswith("P"):
            tokens.append(Token(ch, PUNCT))
        else:
            tokens.append(Token(ch, OTHER))
        i += 1
    return tokens


def filter_tokens(tokens: Iterable[Token], stopwords: Iterable[str] = frozenset()) -> list[str]:
    """Keep lowercased target-language words that are not stopwords."""
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    out = []
    for tok in tokens:
        if tok.tag != WORD_TARGET:
            continue
        w = tok.text.lower()
        if w not in stop:
            out.append(w)
    return out


def preprocess_post(post: Post, stopwords=frozenset(), target=ARABIC_SCRIPT) -> Post:
    return replace(post, tokens=tuple(filter_tokens(tokenize(post.text, target), stopwords)))


def preprocess_posts(posts: Iterable[Post], stopwords=frozenset(), target=ARABIC_SCRIPT) -> list[Post]:
    stop = frozenset(stopwords)
    return [preprocess_post(p, stop, target) for p in posts]


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


class CompoundLexicon:
    """Multi-word entries (2..4 words) joined into single title tokens."""

    def __init__(self, entries: Iterable[str | Sequence[str]] = (), joiner: str = "_"):
        self.joiner = joiner
        self.entries: set[tuple[str, ...]] = set()
        for e in entries:
            words = tuple(e.lower().split()) if isinstance(e, str) else tuple(w.lower() for w in e)
            if not 2 <= len(words) <= 4:
                raise ValueError(f"compound entry must have 2..4 words: {e!r}")
            self.entries.add(words)
        self.max_len = max((len(e) for e in self.entries), default=0)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, words) -> bool:
        return tuple(words) in self.entries

    @classmethod
    def load(cls, path: str | Path, joiner: str = "_") -> "CompoundLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls((line for line in fh if line.strip()), joiner=joiner)


def join_compounds(words: Sequence[str], lexicon: CompoundLexicon) -> list[str]:
    """Greedy leftmost-longest replacement of lexicon runs by joined tokens."""
    if not len(lexicon):
        return list(words)
    out = []
    i, n = 0, len(words)
    while i < n:
        for size in range(min(lexicon.max_len, n - i), 1, -1):
            if tuple(words[i:i + size]) in lexicon.entries:
                out.append(lexicon.joiner.join(words[i:i + size]))
                i += size
                break
        else:
            out.append(words[i])
            i += 1
    return out


def compose_title(words: Sequence[str], lexicon: CompoundLexicon | None) -> list[str]:
    """Join compound words in a ranked title.

    Title words come ranked by score, so the parts of a compound are rarely
    adjacent. Any lexicon entry whose words all occur in the title is merged
    at the position of its best-ranked part; remaining words keep their order.
    """
    if lexicon is None or not len(lexicon):
        return list(words)
    rank = {w: i for i, w in enumerate(words)}
    used: set[str] = set()
    placed: dict[int, str] = {}
    for entry in sorted(lexicon.entries, key=lambda e: (-len(e), min(rank.get(w, len(words)) for w in e), e)):
        if all(w in rank and w not in used for w in entry) and len(set(entry)) == len(entry):
            used.update(entry)
            placed[min(rank[w] for w in entry)] = lexicon.joiner.join(entry)
    out = []
    for i, w in enumerate(words):
        if i in placed:
            out.append(placed[i])
        elif w not in used:
            out.append(w)
    return out
