"""Frequent-pattern and high-utility-pattern mining kernels.

``fp_growth`` mines all itemsets above a support count with an FP-tree.
``hupm_mine`` mines all itemsets above a utility threshold using utility
lists (HUI-Miner style) after transaction-weighted-utility (TWU) pruning.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .stream import WindowBatch


@dataclass(frozen=True)
class Transaction:
    post_id: str
    items: frozenset[str]
    counts: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def from_tokens(cls, post_id: str, tokens: Iterable[str]) -> "Transaction":
        c = Counter(tokens)
        return cls(post_id, frozenset(c), dict(c))


@dataclass(frozen=True)
class Pattern:
    items: tuple[str, ...]
    support: int
    utility: float | None = None
    post_ids: frozenset[str] = frozenset()


def transactions_from_batch(batch: WindowBatch) -> list[Transaction]:
    return [Transaction.from_tokens(p.id, p.tokens or ()) for p in batch.posts]


def _as_transactions(transactions) -> list[Transaction]:
    out = []
    for i, t in enumerate(transactions):
        out.append(t if isinstance(t, Transaction) else Transaction.from_tokens(str(i), t))
    return out


class _Bits:
    """Post-id bitmasks (Python ints) for fast support-set intersection."""

    def __init__(self, transactions: Sequence[Transaction]):
        self.ids = [t.post_id for t in transactions]
        self.item_mask: dict[str, int] = defaultdict(int)
        for pos, t in enumerate(transactions):
            bit = 1 << pos
            for it in t.items:
                self.item_mask[it] |= bit

    def mask(self, items: Iterable[str]) -> int:
        it = iter(items)
        m = self.item_mask.get(next(it), 0)
        for x in it:
            m &= self.item_mask.get(x, 0)
        return m

    def post_ids(self, mask: int) -> frozenset[str]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.ids[low.bit_length() - 1])
            mask ^= low
        return frozenset(out)


# --------------------------------------------------------------------------
# FP-growth


class _Node:
    __slots__ = ("item", "count", "parent", "children", "link")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}
        self.link = None


class _FPTree:
    def __init__(self, weighted: Iterable[tuple[Sequence[int], int]], min_support: int):
        weighted = list(weighted)
        support: Counter = Counter()
        for items, w in weighted:
            for it in items:
                support[it] += w
        self.support = {it: s for it, s in support.items() if s >= min_support}
        # header order: most frequent first, ties by item rank
        self.order = sorted(self.support, key=lambda it: (-self.support[it], it))
        rank = {it: r for r, it in enumerate(self.order)}
        self.root = _Node(None, None)
        self.heads: dict[int, _Node] = {}
        tails: dict[int, _Node] = {}
        for items, w in weighted:
            path = sorted((it for it in items if it in rank), key=rank.__getitem__)
            node = self.root
            for it in path:
                child = node.children.get(it)
                if child is None:
                    child = _Node(it, node)
                    node.children[it] = child
                    if it in tails:
                        tails[it].link = child
                    else:
                        self.heads[it] = child
                    tails[it] = child
                child.count += w
                node = child

    def prefix_paths(self, item: int) -> list[tuple[list[int], int]]:
        base = []
        node = self.heads.get(item)
        while node is not None:
            path = []
            p = node.parent
            while p.item is not None:
                path.append(p.item)
                p = p.parent
            if path:
                base.append((path, node.count))
            node = node.link
        return base


def _mine(tree: _FPTree, suffix: tuple[int, ...], min_support: int, out: list) -> None:
    for item in reversed(tree.order):
        itemset = suffix + (item,)
        out.append((itemset, tree.support[item]))
        base = tree.prefix_paths(item)
        if base:
            sub = _FPTree(base, min_support)
            if sub.order:
                _mine(sub, itemset, min_support, out)


def fp_growth(transactions, min_support: int, with_posts: bool = True) -> list[Pattern]:
    """All itemsets contained in at least ``min_support`` transactions.

    ``transactions`` is a sequence of :class:`Transaction` or of item
    iterables. Items inside each returned pattern are sorted; patterns are
    sorted by (size, items).
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    trans = _as_transactions(transactions)
    vocab = sorted({it for t in trans for it in t.items})
    code = {it: i for i, it in enumerate(vocab)}
    weighted = Counter(tuple(sorted(code[it] for it in t.items)) for t in trans if t.items)
    tree = _FPTree(weighted.items(), min_support)
    raw: list = []
    _mine(tree, (), min_support, raw)

    bits = _Bits(trans) if with_posts else None
    patterns = []
    for itemset, sup in raw:
        items = tuple(sorted(vocab[i] for i in itemset))
        pids = bits.post_ids(bits.mask(items)) if bits else frozenset()
        patterns.append(Pattern(items, sup, None, pids))
    patterns.sort(key=lambda p: (len(p.items), p.items))
    return patterns


def maximal_patterns(patterns: Sequence[Pattern]) -> list[Pattern]:
    """Patterns with no proper superset among ``patterns``.

    Relies on downward closure: if a frequent superset exists then some
    one-item extension is frequent too.
    """
    keys = {frozenset(p.items) for p in patterns}
    items = sorted({it for p in patterns for it in p.items})
    out = []
    for p in patterns:
        s = frozenset(p.items)
        if not any(x not in s and (s | {x}) in keys for x in items):
            out.append(p)
    return out


# --------------------------------------------------------------------------
# utilities and high-utility pattern mining


@dataclass
class UtilityTable:
    internal: dict[str, dict[str, int]]  # post id -> word -> count
    external: dict[str, float]
    tu: dict[str, float]
    twu: dict[str, float]

    def utility(self, items: Iterable[str], post_id: str) -> float:
        row = self.internal[post_id]
        return sum(row[w] * self.external.get(w, 0.0) for w in items)


def build_utility_table(transactions: Sequence[Transaction], external: Mapping[str, float]) -> UtilityTable:
    internal = {t.post_id: dict(t.counts) if t.counts else {w: 1 for w in t.items} for t in transactions}
    tu = {pid: sum(c * external.get(w, 0.0) for w, c in row.items()) for pid, row in internal.items()}
    twu: dict[str, float] = defaultdict(float)
    for pid, row in internal.items():
        for w in row:
            twu[w] += tu[pid]
    return UtilityTable(internal, dict(external), tu, dict(twu))


def external_utilities(tf: Mapping[str, int], prev_tf: Mapping[str, int]) -> dict[str, int]:
    """Emergence weight max(TF_t - TF_{t-1}, 0) + 1 per word of the current window."""
    return {w: max(c - prev_tf.get(w, 0), 0) + 1 for w, c in tf.items()}


def compute_utilities(batch: WindowBatch, prev_batch: WindowBatch | None) -> UtilityTable:
    prev_tf = prev_batch.tf if prev_batch is not None else {}
    return build_utility_table(transactions_from_batch(batch), external_utilities(batch.tf, prev_tf))


def hupm_mine(transactions, utilities: UtilityTable, min_util: float) -> list[Pattern]:
    """All itemsets occurring in some transaction with utility >= ``min_util``.

    Words whose TWU is below ``min_util`` are discarded first; TWU bounds the
    utility of every superset, so no qualifying itemset is lost. The search
    over the remaining words uses utility lists with remaining-utility pruning.
    """
    if min_util < 0:
        raise ValueError("min_util must be >= 0")
    trans = _as_transactions(transactions)
    twu = utilities.twu
    keep = {w for w, v in twu.items() if v >= min_util}
    order = sorted(keep, key=lambda w: (twu[w], w))
    rank = {w: r for r, w in enumerate(order)}
    ext = utilities.external

    # utility lists: item -> list of (tid, iutil, rutil); pair_twu holds the
    # TWU of every co-occurring pair, which bounds all itemsets containing both
    ulists: dict[str, list[tuple[int, float, float]]] = {w: [] for w in order}
    pair_twu: dict[tuple[str, str], float] = defaultdict(float)
    for tid, t in enumerate(trans):
        row = utilities.internal.get(t.post_id, {})
        items = sorted((w for w in row if w in rank), key=rank.__getitem__)
        utils = [row[w] * ext.get(w, 0.0) for w in items]
        remaining = sum(utils)
        tu = utilities.tu.get(t.post_id, remaining)
        for i, (w, u) in enumerate(zip(items, utils)):
            remaining -= u
            ulists[w].append((tid, u, remaining))
            for v in items[i + 1:]:
                pair_twu[w, v] += tu

    found: list[tuple[tuple[str, ...], float, list[int]]] = []

    def search(prefix: tuple[str, ...], prefix_list, exts) -> None:
        p_by_tid = {e[0]: e[1] for e in prefix_list} if prefix_list is not None else None
        for i, (x, xl) in enumerate(exts):
            iu = sum(e[1] for e in xl)
            ru = sum(e[2] for e in xl)
            itemset = prefix + (x,)
            if xl and iu >= min_util:
                found.append((itemset, iu, [e[0] for e in xl]))
            if xl and iu + ru >= min_util:
                sub = []
                for y, yl in exts[i + 1:]:
                    if pair_twu.get((x, y), 0.0) < min_util:
                        continue
                    joined = _join(p_by_tid, xl, yl)
                    if joined:
                        sub.append((y, joined))
                if sub:
                    search(itemset, xl, sub)

    search((), None, [(w, ulists[w]) for w in order])

    out = []
    for itemset, util, tids in found:
        out.append(
            Pattern(tuple(sorted(itemset)), len(tids), util, frozenset(trans[t].post_id for t in tids))
        )
    out.sort(key=lambda p: (-p.utility, len(p.items), p.items))
    return out


def _join(p_by_tid, x_list, y_list):
    """Utility list of prefix+x+y from those of prefix+x and prefix+y."""
    y_by_tid = {e[0]: e for e in y_list}
    out = []
    for tid, xi, _ in x_list:
        ye = y_by_tid.get(tid)
        if ye is None:
            continue
        iu = xi + ye[1]
        if p_by_tid is not None:
            iu -= p_by_tid[tid]
        out.append((tid, iu, ye[2]))
    return out


def consolidate_patterns(patterns: Sequence[Pattern], min_overlap: float = 0.5) -> list[Pattern]:
    """Absorb patterns into higher-utility supersets that share their posts.

    A pattern is dropped when some strict superset with strictly higher
    utility covers at least ``min_overlap`` of its posts. Identical item sets
    are merged first (highest utility kept). Output is sorted by utility,
    descending.
    """
    best: dict[tuple[str, ...], Pattern] = {}
    for p in patterns:
        key = tuple(sorted(p.items))
        cur = best.get(key)
        if cur is None or (p.utility or 0.0) > (cur.utility or 0.0):
            best[key] = p
    ranked = sorted(best.values(), key=lambda p: (-(p.utility or 0.0), len(p.items), tuple(sorted(p.items))))

    post_pos: dict[str, int] = {}
    for p in ranked:
        for pid in p.post_ids:
            post_pos.setdefault(pid, len(post_pos))
    post_mask = [sum(1 << post_pos[pid] for pid in p.post_ids) for p in ranked]

    # bit r of item_mask[w] set <=> ranked[r] contains w
    item_mask: dict[str, int] = defaultdict(int)
    for r, p in enumerate(ranked):
        for w in p.items:
            item_mask[w] |= 1 << r

    out = []
    higher = 0  # ranked[:higher] have utility strictly above the current pattern
    for r, p in enumerate(ranked):
        util = p.utility or 0.0
        while higher < r and (ranked[higher].utility or 0.0) > util:
            higher += 1
        # candidate supersets: contain every item of p and rank strictly higher in utility
        cand = (1 << higher) - 1
        for w in p.items:
            cand &= item_mask[w]
        absorbed = False
        mine = post_mask[r]
        need = min_overlap * mine.bit_count()
        while cand:
            low = cand & -cand
            q = low.bit_length() - 1
            cand ^= low
            if len(ranked[q].items) > len(p.items) and (mine & post_mask[q]).bit_count() >= need:
                absorbed = True
                break
        if not absorbed:
            out.append(p)
    return out
