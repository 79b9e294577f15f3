import filecmp
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicstream.background import (
    AnchorModel,
    BackgroundModels,
    RefCorpusModel,
    anchor_probability,
    build_model_dir,
    build_ngram_model,
    build_ref_model,
    load_anchor_tsv,
    load_models,
    ngram_probability,
    ref_from_ngrams,
    ref_word_probability,
    save_models,
)
from topicstream.errors import DataError


def naive_ngrams(docs, n):
    return Counter(" ".join(d[i:i + n]) for d in docs for i in range(len(d) - n + 1))


class TestNgrams:
    def test_hand_count(self):
        m = build_ngram_model(["a b a"], n_max=2)
        assert dict(m.counts[0]) == {"a": 2, "b": 1}
        assert dict(m.counts[1]) == {"a b": 1, "b a": 1}
        assert m.totals == [3, 2]

    def test_single_token(self):
        m = build_ngram_model(["a"], n_max=2)
        assert dict(m.counts[1]) == {}

    def test_duplicate_lines_double(self):
        one = build_ngram_model(["a b c"], n_max=3)
        two = build_ngram_model(["a b c", "a b c"], n_max=3)
        for n in range(3):
            assert {k: 2 * v for k, v in one.counts[n].items()} == dict(two.counts[n])

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            build_ngram_model([""])

    def test_mle_and_floor(self):
        m = build_ngram_model(["a b a"], n_max=2)
        assert ngram_probability(m, ["a"]) == pytest.approx(2 / 3)
        assert ngram_probability(m, ["z"]) == pytest.approx(1 / 2)  # 2 distinct tokens
        assert ngram_probability(m, ["a", "a"]) == pytest.approx(1 / 4)

    def test_order_exceeds_model(self):
        m = build_ngram_model(["a b"], n_max=2)
        with pytest.raises(ValueError, match="order exceeds model"):
            ngram_probability(m, ["a", "b", "a"])

    @given(st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8), min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_counts_match_naive_and_probabilities_bounded(self, docs):
        m = build_ngram_model(docs, n_max=3)
        for n in range(1, 4):
            assert dict(m.counts[n - 1]) == dict(naive_ngrams(docs, n))
            assert m.totals[n - 1] == sum(m.counts[n - 1].values())
            for key in m.counts[n - 1]:
                assert 0 < ngram_probability(m, key.split()) <= 1

    @given(st.lists(st.lists(st.sampled_from("abc"), min_size=1, max_size=6), min_size=1, max_size=5),
           st.lists(st.sampled_from("abc"), min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_adding_a_document_never_decreases_counts(self, docs, extra):
        before, after = build_ngram_model(docs, 3), build_ngram_model(docs + [extra], 3)
        for n in range(3):
            for k, c in before.counts[n].items():
                assert after.counts[n][k] >= c


class TestAnchorsAndRef:
    def test_anchor_ratio(self):
        model = AnchorModel({"x y": 5, "z": 45}, 50)
        assert anchor_probability(model, ["x", "y"]) == pytest.approx(0.1)
        assert anchor_probability(model, "absent") == 0
        assert anchor_probability(AnchorModel({"only": 3}, 3), "only") == 1
        assert anchor_probability(AnchorModel.empty(), "x") == 0

    def test_anchor_tsv(self, tmp_path):
        path = tmp_path / "a.tsv"
        path.write_text("Fire Station\t3\nfire station\t2\nother\t5\n", encoding="utf-8")
        model = load_anchor_tsv(path)
        assert model.total == 10
        assert anchor_probability(model, "fire station") == pytest.approx(0.5)

    def test_bad_anchor_line(self, tmp_path):
        path = tmp_path / "a.tsv"
        path.write_text("no count here\n", encoding="utf-8")
        with pytest.raises(DataError, match=":1:"):
            load_anchor_tsv(path)

    def test_ref_add_one(self):
        counts = {f"w{i}": 1 for i in range(9)}
        counts["w9"] = 81
        model = RefCorpusModel(counts, 90)
        assert ref_word_probability(model, "w9") == pytest.approx(82 / 100)
        model = RefCorpusModel({"x": 9, **{f"o{i}": 9 for i in range(9)}}, 90)
        assert ref_word_probability(model, "x") == pytest.approx(0.1)
        assert ref_word_probability(model, "unseen") == pytest.approx(1 / 100)

    def test_ref_mass_bound(self):
        model = build_ref_model(["a b b c c c"])
        total = sum(ref_word_probability(model, w) for w in model.counts) + ref_word_probability(model, "?")
        assert total <= 1 + model.vocabulary * ref_word_probability(model, "?")


class TestPersistence:
    def corpus(self, tmp_path):
        path = tmp_path / "corpus.txt"
        path.write_text("a b c a b\nb c d\n\nسلام دنیا سلام\n", encoding="utf-8")
        anchors = tmp_path / "anchors.tsv"
        anchors.write_text("a b\t4\nسلام دنیا\t6\n", encoding="utf-8")
        return path, anchors

    def test_round_trip_matches_in_memory(self, tmp_path):
        path, anchors = self.corpus(tmp_path)
        build_model_dir([path], tmp_path / "m", anchor_tsv=anchors)
        loaded = load_models(tmp_path / "m")
        mem = build_ngram_model(path)
        for n in range(1, 6):
            assert dict(loaded.ngrams.counts[n - 1].items()) == dict(mem.counts[n - 1])
        for phrase in (["a"], ["a", "b"], ["سلام", "دنیا"], ["q"], ["a", "b", "c"]):
            assert ngram_probability(loaded.ngrams, phrase) == ngram_probability(mem, phrase)
        assert anchor_probability(loaded.anchors, "سلام دنیا") == pytest.approx(0.6)
        assert loaded.ref.total == mem.totals[0]

    def test_spilling_gives_same_stores(self, tmp_path):
        path, anchors = self.corpus(tmp_path)
        build_model_dir([path], tmp_path / "big", anchor_tsv=anchors)
        build_model_dir([path], tmp_path / "small", anchor_tsv=anchors, spill_limit=2)
        cmp = filecmp.dircmp(tmp_path / "big", tmp_path / "small")
        assert not cmp.diff_files and not cmp.left_only and not cmp.right_only

    def test_rebuild_is_byte_identical(self, tmp_path):
        path, anchors = self.corpus(tmp_path)
        build_model_dir([path], tmp_path / "one", anchor_tsv=anchors)
        build_model_dir([path], tmp_path / "two", anchor_tsv=anchors)
        names = sorted(p.name for p in (tmp_path / "one").iterdir())
        match, mismatch, errors = filecmp.cmpfiles(tmp_path / "one", tmp_path / "two", names, shallow=False)
        assert not mismatch and not errors

    def test_report_counts(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("a b a\nb\nc a\n", encoding="utf-8")
        meta = build_model_dir([path], tmp_path / "m", n_max=2)
        assert meta["ngram_totals"] == [6, 3]
        assert meta["ngram_distinct"] == [3, 3]  # a b, b a, c a
        assert meta["anchor_total"] == 0

    def test_missing_anchors_warn(self, tmp_path, caplog):
        path, _ = self.corpus(tmp_path)
        build_model_dir([path], tmp_path / "m")
        assert "anchor" in caplog.text
        assert anchor_probability(load_models(tmp_path / "m").anchors, "a b") == 0

    def test_failed_build_leaves_nothing(self, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("\n", encoding="utf-8")
        with pytest.raises(DataError):
            build_model_dir([empty], tmp_path / "m")
        assert not (tmp_path / "m").exists()
        assert [p.name for p in tmp_path.iterdir()] == ["empty.txt"]

    def test_missing_input(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            build_model_dir([tmp_path / "nope.txt"], tmp_path / "m")

    def test_save_models_round_trip(self, tmp_path):
        ng = build_ngram_model(["x y z", "x y"], n_max=3)
        models = BackgroundModels(ng, AnchorModel({"x y": 2}, 2), ref_from_ngrams(ng))
        save_models(models, tmp_path / "saved")
        loaded = load_models(tmp_path / "saved")
        assert loaded.ngrams.n_max == 3
        assert ngram_probability(loaded.ngrams, ["x", "y"]) == ngram_probability(ng, ["x", "y"])
        assert anchor_probability(loaded.anchors, "x y") == 1

    def test_unknown_directory(self, tmp_path):
        with pytest.raises(DataError):
            load_models(tmp_path)

    def test_floor_is_power_of_inverse_vocabulary(self, tmp_path):
        path, _ = self.corpus(tmp_path)
        build_model_dir([path], tmp_path / "m")
        ng = load_models(tmp_path / "m").ngrams
        v = ng.distinct_tokens
        assert ngram_probability(ng, ["zz", "zz"]) == pytest.approx(math.pow(1 / v, 2))
