import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import apriori_bruteforce, powerset, utility_bruteforce
from topicstream.fpm import (
    Pattern,
    Transaction,
    build_utility_table,
    compute_utilities,
    consolidate_patterns,
    external_utilities,
    fp_growth,
    hupm_mine,
    maximal_patterns,
)
from topicstream.stream import Post, WindowBatch


def _as_dict(patterns):
    return {p.items: p.support for p in patterns}


class TestFpGrowth:
    def test_textbook_example(self):
        T = [["A", "B"], ["A", "B", "C"], ["A", "C"], ["B"]]
        got = _as_dict(fp_growth(T, 2))
        assert got == {("A",): 3, ("B",): 3, ("C",): 2, ("A", "B"): 2, ("A", "C"): 2}
        assert got == apriori_bruteforce(T, 2)

    def test_support_above_transaction_count(self):
        assert fp_growth([["a", "b"], ["a"]], 3) == []

    def test_single_transaction_gives_powerset(self):
        got = _as_dict(fp_growth([["x", "y", "z"]], 1))
        assert set(got) == set(powerset(["x", "y", "z"]))
        assert set(got.values()) == {1}

    def test_empty_input(self):
        assert fp_growth([], 1) == []

    def test_post_ids_match_support(self):
        T = [Transaction.from_tokens(f"p{i}", t) for i, t in enumerate([["a", "b"], ["a", "b", "c"], ["a"]])]
        for p in fp_growth(T, 1):
            assert len(p.post_ids) == p.support
        ab = next(p for p in fp_growth(T, 1) if p.items == ("a", "b"))
        assert ab.post_ids == {"p0", "p1"}

    def test_rejects_zero_support(self):
        with pytest.raises(ValueError):
            fp_growth([["a"]], 0)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.sets(st.integers(0, 9), max_size=6), max_size=25),
        st.integers(1, 4),
    )
    def test_matches_apriori(self, raw, min_sup):
        T = [[f"i{x}" for x in t] for t in raw]
        got = fp_growth(T, min_sup)
        assert _as_dict(got) == apriori_bruteforce(T, min_sup)
        # downward closure
        keys = set(_as_dict(got))
        for items in keys:
            for sub in powerset(items):
                assert tuple(sub) in keys


def test_maximal_patterns():
    T = [["a", "b", "c"], ["a", "b", "c"], ["a", "d"], ["a", "d"]]
    got = {p.items for p in maximal_patterns(fp_growth(T, 2))}
    assert got == {("a", "b", "c"), ("a", "d")}


def _batch(texts, prefix="p"):
    posts = [Post(f"{prefix}{i}", i, "c", t, tuple(t.split())) for i, t in enumerate(texts)]
    return WindowBatch.from_posts(posts)


class TestUtilities:
    def test_external_from_tf_difference(self):
        ext = external_utilities({"w": 10, "v": 3}, {"w": 4, "v": 9})
        assert ext == {"w": 7, "v": 1}

    def test_empty_previous_window(self):
        b = _batch(["a a b", "a"])
        u = compute_utilities(b, None)
        assert u.external == {"a": 4, "b": 2}

    def test_tu_twu_hand_example(self):
        T = [Transaction.from_tokens("P1", "a a b".split()), Transaction.from_tokens("P2", "a c".split())]
        u = build_utility_table(T, {"a": 1, "b": 2, "c": 1})
        assert u.tu == {"P1": 4, "P2": 2}
        assert u.twu == {"a": 6, "b": 4, "c": 2}


class TestHupm:
    T = [Transaction.from_tokens("P1", "a a b".split()), Transaction.from_tokens("P2", "a c".split())]
    EXT = {"a": 1, "b": 2, "c": 1}

    def test_twu_prunes_word(self):
        u = build_utility_table(self.T, self.EXT)
        got = hupm_mine(self.T, u, 3)
        assert all("c" not in p.items for p in got)
        assert {p.items: p.utility for p in got} == {("a",): 3, ("a", "b"): 4}

    def test_zero_threshold_returns_every_occurring_itemset(self):
        u = build_utility_table(self.T, self.EXT)
        got = {p.items: p.utility for p in hupm_mine(self.T, u, 0)}
        rows = [t.counts for t in self.T]
        assert got == utility_bruteforce(rows, self.EXT, 0)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_exhaustive(self, seed):
        rng = random.Random(seed)
        items = [f"w{i}" for i in range(rng.randint(1, 8))]
        T = []
        for j in range(rng.randint(1, 12)):
            words = rng.sample(items, rng.randint(1, len(items)))
            T.append(Transaction.from_tokens(f"t{j}", [w for w in words for _ in range(rng.randint(1, 3))]))
        ext = {w: rng.randint(0, 5) for w in items}
        u = build_utility_table(T, ext)
        min_util = rng.randint(0, 30)
        got = {p.items: p.utility for p in hupm_mine(T, u, min_util)}
        assert got == utility_bruteforce([t.counts for t in T], ext, min_util)


class TestConsolidate:
    def test_subset_absorbed(self):
        ps = [Pattern(("a", "b"), 2, 10, frozenset({"1", "2"})), Pattern(("a",), 2, 4, frozenset({"1", "2"}))]
        assert [p.items for p in consolidate_patterns(ps)] == [("a", "b")]

    def test_disjoint_unchanged(self):
        ps = [Pattern(("a",), 1, 5, frozenset({"1"})), Pattern(("b",), 1, 3, frozenset({"2"}))]
        assert consolidate_patterns(ps) == ps

    def test_identical_collapse(self):
        p = Pattern(("a", "b"), 1, 5, frozenset({"1"}))
        assert consolidate_patterns([p, p]) == [p]

    def test_low_overlap_survives(self):
        big = Pattern(("a", "b"), 1, 10, frozenset({"1"}))
        small = Pattern(("a",), 4, 4, frozenset({"1", "2", "3", "4"}))
        assert len(consolidate_patterns([big, small])) == 2

    def test_lower_utility_superset_does_not_absorb(self):
        big = Pattern(("a", "b"), 2, 3, frozenset({"1", "2"}))
        small = Pattern(("a",), 2, 4, frozenset({"1", "2"}))
        assert len(consolidate_patterns([big, small])) == 2
