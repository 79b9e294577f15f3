import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicstream.errors import DataError
from topicstream.stream import (
    Post,
    WindowBatch,
    WindowSpec,
    ingest_posts,
    term_frequencies,
    window_stream,
    write_posts,
)


def tok(pid, ts, words=("w",)):
    return Post(pid, ts, "c", " ".join(words), tuple(words))


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def record(i, ts=0):
    return json.dumps({"id": f"p{i}", "ts": ts, "channel": "c", "text": f"text {i}"})


class TestIngest:
    def test_valid_file_keeps_order(self, tmp_path):
        path = write_lines(tmp_path / "p.jsonl", [record(3, 5), record(1, 1), record(2, 9)])
        result = ingest_posts(path)
        assert [p.id for p in result] == ["p3", "p1", "p2"]
        assert result.malformed == []

    def test_one_bad_line_in_ten_is_skipped(self, tmp_path, caplog):
        lines = [record(i) for i in range(9)] + ["{not json"]
        result = ingest_posts(write_lines(tmp_path / "p.jsonl", lines))
        assert len(result) == 9
        assert result.malformed == [10]
        assert "malformed" in caplog.text

    def test_too_many_bad_lines_is_fatal(self, tmp_path):
        lines = [record(0), "{}", "[1]", record(3)]
        with pytest.raises(DataError, match="lines malformed"):
            ingest_posts(write_lines(tmp_path / "p.jsonl", lines))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text("", encoding="utf-8")
        assert len(ingest_posts(path)) == 0

    def test_unreadable(self, tmp_path):
        with pytest.raises(DataError):
            ingest_posts(tmp_path / "missing.jsonl")

    def test_duplicate_ids_and_bad_types_count_as_malformed(self, tmp_path):
        lines = [record(i) for i in range(20)]
        lines.append(record(0))  # duplicate id
        lines.append(json.dumps({"id": "x", "ts": "1", "channel": "c", "text": "t"}))
        result = ingest_posts(write_lines(tmp_path / "p.jsonl", lines))
        assert len(result) == 20
        assert result.malformed == [21, 22]

    def test_round_trip(self, tmp_path):
        posts = [Post("a", 1, "ch", "سلام دنیا"), Post("b", 2, "ch", "x")]
        write_posts(posts, tmp_path / "p.jsonl")
        assert list(ingest_posts(tmp_path / "p.jsonl")) == posts


class TestWindows:
    def test_hand_partition(self):
        batches = window_stream([tok("p1", 0), tok("p2", 10), tok("p3", 3700)], WindowSpec(3600))
        assert [b.post_ids for b in batches] == [["p1", "p2"], ["p3"]]
        assert (batches[1].start, batches[1].end) == (3600, 7200)

    def test_single_batch(self):
        batches = window_stream([tok("a", 100), tok("b", 200)])
        assert len(batches) == 1

    def test_gap_emits_empty_batch(self):
        batches = window_stream([tok("a", 0), tok("b", 3 * 3600 - 1)], WindowSpec(3600))
        assert [len(b) for b in batches] == [1, 0, 1]
        assert batches[1].tf == {}

    def test_boundary_goes_to_later_batch(self):
        batches = window_stream([tok("a", 50), tok("b", 3650)], WindowSpec(3600))
        assert [b.post_ids for b in batches] == [["a"], ["b"]]

    def test_origin_is_first_post_and_input_is_sorted(self):
        batches = window_stream([tok("late", 5000), tok("early", 1000)], WindowSpec(3600))
        assert batches[0].start == 1000
        assert batches[0].post_ids == ["early"]

    def test_untokenized_posts_rejected(self):
        with pytest.raises(DataError, match="preprocessing"):
            window_stream([Post("a", 0, "c", "text")])

    def test_empty_stream(self):
        assert window_stream([]) == []

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            WindowSpec(0)


class TestTermFrequencies:
    def test_hand_count(self):
        posts = [tok("1", 0, ["a", "a", "b"]), tok("2", 0, ["a"])]
        assert term_frequencies(posts) == {"a": 3, "b": 1}

    def test_empty(self):
        assert term_frequencies([]) == {}
        assert dict(WindowBatch.from_posts([]).tf) == {}

    def test_single(self):
        assert term_frequencies([tok("1", 0, ["w"])]) == {"w": 1}


posts_strategy = st.lists(
    st.tuples(st.integers(0, 20_000), st.lists(st.sampled_from("abcde"), max_size=6)), max_size=40
)


@given(posts_strategy, st.integers(1, 5000))
@settings(max_examples=150, deadline=None)
def test_partition_and_recount(rows, duration):
    posts = [tok(f"p{i}", ts, words) for i, (ts, words) in enumerate(rows)]
    batches = window_stream(posts, WindowSpec(duration))
    seen = [p.id for b in batches for p in b.posts]
    assert sorted(seen) == sorted(p.id for p in posts)
    assert len(seen) == len(set(seen))
    for b in batches:
        for p in b.posts:
            assert b.start <= p.timestamp < b.end
        naive = Counter(w for p in b.posts for w in p.tokens)
        assert dict(b.tf) == dict(naive)
    for prev, nxt in zip(batches, batches[1:]):
        assert prev.end == nxt.start
