import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from topicstream.embeddings import (
    EmbeddingTable,
    cosine_distance,
    embed_document,
    euclidean_distance,
    load_vectors,
    pairwise_distances,
)
from topicstream.errors import DataError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_headerless(self, tmp_path):
        t = load_vectors(write(tmp_path / "v.vec", "a 1 2 3\nb 4 5 6\n"))
        assert (len(t), t.dim) == (2, 3)
        np.testing.assert_array_equal(t.vectors["b"], [4, 5, 6])

    def test_header_is_skipped(self, tmp_path):
        plain = load_vectors(write(tmp_path / "a.vec", "a 1 2 3\nb 4 5 6\n"))
        headed = load_vectors(write(tmp_path / "b.vec", "2 3\na 1 2 3\nb 4 5 6\n"))
        assert plain.vectors.keys() == headed.vectors.keys()
        for w in plain.vectors:
            np.testing.assert_array_equal(plain.vectors[w], headed.vectors[w])

    def test_short_line(self, tmp_path):
        with pytest.raises(DataError, match=":2:"):
            load_vectors(write(tmp_path / "v.vec", "a 1 2 3\nb 4 5\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(DataError):
            load_vectors(write(tmp_path / "v.vec", ""))

    def test_duplicate_last_wins(self, tmp_path, caplog):
        t = load_vectors(write(tmp_path / "v.vec", "a 1 1\na 2 2\n"))
        np.testing.assert_array_equal(t.vectors["a"], [2, 2])
        assert "duplicate" in caplog.text

    def test_save_load_deterministic(self, tmp_path):
        t = EmbeddingTable(2, {"b": np.array([0.1, 1 / 3]), "a": np.array([-2.0, 5e-7])})
        t.save(tmp_path / "one.vec")
        load_vectors(tmp_path / "one.vec").save(tmp_path / "two.vec")
        assert (tmp_path / "one.vec").read_bytes() == (tmp_path / "two.vec").read_bytes()
        np.testing.assert_array_equal(load_vectors(tmp_path / "one.vec").vectors["b"], t.vectors["b"])


class TestEmbed:
    table = EmbeddingTable(2, {"x": np.array([1.0, 2.0]), "y": np.array([-1.0, -2.0]), "z": np.array([3.0, 0.0])})

    def test_single_word(self):
        np.testing.assert_array_equal(embed_document(["x"], self.table).vector, [1, 2])

    def test_opposites_cancel(self):
        np.testing.assert_array_equal(embed_document(["x", "y"], self.table).vector, [0, 0])

    def test_skip_oov(self):
        d = embed_document(["x", "oov", "z"], self.table)
        np.testing.assert_allclose(d.vector, [2.0, 1.0])
        assert d.oov_count == 1

    def test_zero_policy(self):
        d = embed_document(["x", "oov", "z"], self.table, "zero")
        np.testing.assert_allclose(d.vector, [4 / 3, 2 / 3])

    def test_unembeddable(self):
        with pytest.raises(ValueError, match="unembeddable"):
            embed_document(["q"], self.table)


class TestDistances:
    def test_cosine_examples(self):
        assert cosine_distance([1, 2], [1, 2]) == pytest.approx(0)
        assert cosine_distance([1, 0], [0, 3]) == pytest.approx(1)
        assert cosine_distance([1, 1], [1, 0]) == pytest.approx(1 - math.sqrt(2) / 2)

    def test_cosine_zero_vector(self):
        with pytest.raises(ValueError):
            cosine_distance([0, 0], [1, 0])

    def test_euclidean_examples(self):
        assert euclidean_distance([1, 2], [1, 2]) == 0
        assert euclidean_distance([0, 0], [3, 4]) == 5
        with pytest.raises(ValueError, match="mismatch"):
            euclidean_distance([1], [1, 2])

    vec = arrays(np.float64, 4, elements=st.floats(-10, 10, allow_nan=False))

    @given(vec, vec, st.floats(0.01, 100), st.floats(0.01, 100))
    def test_cosine_scale_invariant(self, a, b, s, t):
        if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
            return
        assert cosine_distance(s * a, t * b) == pytest.approx(cosine_distance(a, b), abs=1e-9)
        assert 0 <= cosine_distance(a, b) <= 2

    @given(vec, vec, vec)
    def test_triangle_and_symmetry(self, a, b, c):
        assert euclidean_distance(a, b) == euclidean_distance(b, a)
        assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9

    def test_pairwise_matches_scalar(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(6, 3))
        for metric, fn in (("euclidean", euclidean_distance), ("cosine", cosine_distance)):
            d = pairwise_distances(x, metric)
            for i in range(6):
                for j in range(6):
                    assert d[i, j] == pytest.approx(fn(x[i], x[j]) if i != j else 0, abs=1e-12)
