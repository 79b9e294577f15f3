import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import theta_direct
from topicstream.background import RefCorpusModel
from topicstream.fp_methods import (
    LARGE,
    SMALL,
    TscvConfig,
    assemble_topics,
    classify_window,
    dsfg_detect,
    dsfg_support,
    dynamic_support,
    dynamic_support_value,
    term_scores,
    theta,
    tscv_detect,
    ufpt_detect,
)
from topicstream.stream import Post, WindowBatch


def batch(docs, index=0, prefix="p"):
    posts = [Post(f"{prefix}{i}", i, "c", d, tuple(d.split())) for i, d in enumerate(docs)]
    return WindowBatch.from_posts(posts, index)


def two_topic_batch():
    return batch(["x1 x2"] * 6 + ["y1 y2"] * 6)


FLAT_REF = RefCorpusModel({w: 10 for w in ("x1", "x2", "y1", "y2")}, 40)


class TestTheta:
    def test_midpoint_exact(self):
        assert theta(5) == 0.5

    def test_direct_evaluation(self):
        assert abs(theta(7) - theta_direct(7)) < 1e-9
        assert abs(theta(3) - theta_direct(3)) < 1e-9
        assert theta(7) == pytest.approx(0.7311, abs=1e-4)
        assert theta(3) == pytest.approx(0.2689, abs=1e-4)

    def test_strictly_increasing(self):
        values = [theta(s) for s in range(1, 21)]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestTscv:
    def test_planted_two_topics(self):
        topics = tscv_detect(two_topic_batch(), FLAT_REF, TscvConfig(k=4))
        assert sorted(sorted(t.keywords) for t in topics) == [["x1", "x2"], ["y1", "y2"]]
        by_words = {frozenset(t.keywords): t.post_ids for t in topics}
        assert by_words[frozenset({"x1", "x2"})] == {f"p{i}" for i in range(6)}

    def test_k_larger_than_vocabulary_warns(self, caplog):
        topics = tscv_detect(two_topic_batch(), FLAT_REF, TscvConfig(k=500))
        assert len(topics) == 2
        assert "exceeds" in caplog.text

    def test_empty_batch(self):
        assert tscv_detect(batch([]), FLAT_REF) == []

    def test_score_is_ratio_of_smoothed_probabilities(self):
        b = batch(["a a b"])
        ref = RefCorpusModel({"a": 9, "c": 1}, 10)
        s = term_scores(b, ref)
        assert s["a"] == pytest.approx(((2 + 1) / (3 + 2)) / ((9 + 1) / (10 + 2)))
        assert s["b"] == pytest.approx(((1 + 1) / (3 + 2)) / (1 / 12))

    def test_duplicate_topics_removed(self):
        b = batch(["a b"] * 4)
        topics = tscv_detect(b, RefCorpusModel({"a": 1, "b": 1}, 2), TscvConfig(k=2))
        assert [sorted(t.keywords) for t in topics] == [["a", "b"]]

    @given(st.lists(st.lists(st.booleans(), min_size=8, max_size=8), min_size=2, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_pruned_vector_entries_reach_half_topic_size(self, rows):
        vectors = {f"w{i}": np.array(r, dtype=float) for i, r in enumerate(rows)}
        trace = []
        assemble_topics(vectors, list(vectors), trace=trace)
        for size, acc in trace:
            positive = acc[acc > 0]
            assert positive.size == 0 or positive.min() >= size / 2


class TestDsfg:
    def test_classify(self):
        assert classify_window(90, [300]) == SMALL
        assert classify_window(100, [300]) == LARGE
        assert classify_window(5, []) == LARGE

    def test_support_examples(self):
        tf = dict(zip("abcde", [2, 3, 4, 5, 6]))
        assert dynamic_support_value(tf, LARGE) == 16
        assert dynamic_support_value(tf, SMALL) == 32
        assert dynamic_support({"a": 5}, LARGE) == 25

    def test_rounds_up(self):
        assert dynamic_support({"a": 1, "b": 2}, LARGE) == math.ceil(1.5 * 1.5)

    def test_empty_window(self):
        with pytest.raises(ValueError, match="empty window"):
            dynamic_support({}, LARGE)

    @given(st.dictionaries(st.text("abc", min_size=1, max_size=3), st.integers(1, 50), min_size=1, max_size=15))
    def test_small_doubles_large(self, tf):
        assert dynamic_support_value(tf, SMALL) == pytest.approx(2 * dynamic_support_value(tf, LARGE))

    @given(st.integers(1, 6), st.integers(1, 6))
    def test_uniform_tf_gives_square(self, c, n):
        assert dynamic_support({f"w{i}": c for i in range(n)}, LARGE) == c * c

    def test_planted_two_topics(self):
        # every word has TF 6 so min support is 36; use enough copies
        b = batch(["x1 x2"] * 36 + ["y1 y2"] * 36)
        assert dsfg_support(b, []) == 36 * 36
        b = batch(["x1 x2 x3"] * 3 + ["y1 y2 y3"] * 3 + [f"n{i}" for i in range(30)])
        assert dsfg_support(b, []) == 2  # avg 36/33, median 1
        topics = dsfg_detect(b)
        assert sorted(sorted(t.keywords) for t in topics) == [["x1", "x2", "x3"], ["y1", "y2", "y3"]]

    def test_empty_batch(self):
        assert dsfg_detect(batch([])) == []

    def test_small_window_uses_history(self):
        b = batch(["a b"] * 2 + ["c"])
        assert dsfg_support(b, [30, 30]) == dynamic_support(b.tf, SMALL)


class TestUfpt:
    def test_no_emergence_all_unit_externals(self):
        b = batch(["a b", "a b", "c"])
        topics = ufpt_detect(b, b, min_util=4)
        assert [sorted(t.keywords) for t in topics] == [["a", "b"]]
        assert topics[0].score == 4  # unit externals: pure frequency

    def test_emerging_outranks_steady(self):
        prev = batch(["s1 s2"] * 3, prefix="q")
        cur = batch(["s1 s2"] * 3 + ["e1 e2"] * 3)
        topics = ufpt_detect(cur, prev, min_util=1)
        assert set(topics[0].keywords) == {"e1", "e2"}
        steady = [t for t in topics if set(t.keywords) == {"s1", "s2"}]
        assert steady and steady[0].score < topics[0].score

    def test_empty_previous_window_uses_tf_plus_one(self):
        cur = batch(["a b", "a"])
        topics = ufpt_detect(cur, None, min_util=0)
        scores = {frozenset(t.keywords): t.score for t in topics}
        assert scores[frozenset({"a", "b"})] == (2 + 1) + (1 + 1)

    def test_empty_batch(self):
        assert ufpt_detect(batch([]), None) == []
