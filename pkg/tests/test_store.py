import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_model
from wembed.corpus import Vocabulary
from wembed.store import (
    ModelFormatError,
    NotInVocabulary,
    UnitIndex,
    contains,
    load_text,
    most_similar,
    save_text,
    similarity,
    top_k_indices,
)
from wembed.trainer import EmbeddingModel


def brute_force_most_similar(vectors, tokens, query, k):
    """Independent oracle: full cosine scan + stable sort, no shared code."""
    qi = tokens.index(query)
    norms = [float(np.linalg.norm(v)) for v in vectors]
    scored = []
    for i, v in enumerate(vectors):
        if i == qi or norms[i] == 0.0:
            continue
        unit_q = vectors[qi] / np.float32(norms[qi])
        unit_v = v / np.float32(norms[i])
        scored.append((i, float(np.dot(unit_q, unit_v))))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return [(tokens[i], s) for i, s in scored[:k]]


class TestPersistence:
    def test_single_token_file_shape(self, tmp_path):
        model = make_model(["Q1"], [[1.0, 0.0]])
        path = tmp_path / "m.txt"
        save_text(model, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "1 2"
        fields = lines[1].split(" ")
        assert fields[0] == "Q1"
        assert [float(x) for x in fields[1:]] == [1.0, 0.0]

    def test_save_load_save_byte_identical(self, tmp_path):
        rs = np.random.RandomState(0)
        model = make_model([f"Q{i}" for i in range(1, 40)], rs.randn(39, 7).astype(np.float32))
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        save_text(model, p1)
        save_text(load_text(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_roundtrip_exact_components_and_order(self, tmp_path):
        rs = np.random.RandomState(1)
        vectors = (rs.randn(25, 12) * np.exp(rs.uniform(-20, 20, (25, 12)))).astype(np.float32)
        tokens = [f"Q{i}" for i in range(1, 26)]
        model = make_model(tokens, vectors)
        path = tmp_path / "m.txt"
        save_text(model, path)
        loaded = load_text(path)
        assert loaded.vocab.tokens == tokens
        assert np.array_equal(loaded.vectors, vectors)

    def test_empty_model_roundtrip(self, tmp_path):
        model = make_model([], np.zeros((0, 3), dtype=np.float32))
        path = tmp_path / "m.txt"
        save_text(model, path)
        loaded = load_text(path)
        assert len(loaded.vocab) == 0 and loaded.dim == 3

    def test_truncated_file_names_line(self, tmp_path):
        model = make_model(["Q1", "Q2", "Q3"], np.eye(3, dtype=np.float32))
        path = tmp_path / "m.txt"
        save_text(model, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ModelFormatError) as err:
            load_text(path)
        assert "expected 3" in str(err.value)

    @pytest.mark.parametrize(
        "mutate,complaint",
        [
            (lambda lines: ["notaheader"] + lines[1:], "header"),
            (lambda lines: [lines[0], "Q1 1.0"] + lines[2:], "components"),
            (lambda lines: [lines[0], lines[1].replace("Q1", "xx")] + lines[2:], "entity id"),
            (lambda lines: [lines[0], lines[1].replace("Q1 ", "Q1 nan ", 1)[: len(lines[1])]] , "component"),
            (lambda lines: lines + ["Q9 1 0 0"], "more than"),
        ],
    )
    def test_corrupt_files_rejected(self, tmp_path, mutate, complaint):
        model = make_model(["Q1", "Q2"], np.eye(2, 3, dtype=np.float32))
        path = tmp_path / "m.txt"
        save_text(model, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(mutate(lines)) + "\n")
        with pytest.raises(ModelFormatError) as err:
            load_text(path)
        assert complaint in str(err.value)

    def test_duplicate_token_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("2 2\nQ1 1 0\nQ1 0 1\n")
        with pytest.raises(ModelFormatError):
            load_text(path)

    def test_nonfinite_component_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("1 2\nQ1 inf 0\n")
        with pytest.raises(ModelFormatError):
            load_text(path)

    @settings(max_examples=20, deadline=None)
    @given(data=st.data())
    def test_any_float32_roundtrips(self, data, tmp_path_factory):
        floats = data.draw(
            st.lists(
                st.floats(width=32, allow_nan=False, allow_infinity=False),
                min_size=4,
                max_size=4,
            )
        )
        model = make_model(["Q1"], np.array([floats], dtype=np.float32))
        path = tmp_path_factory.mktemp("f32") / "m.txt"
        save_text(model, path)
        assert np.array_equal(load_text(path).vectors, model.vectors)


class TestSimilarity:
    def test_self_similarity(self, tiny_model):
        for token in tiny_model.vocab.tokens:
            assert abs(similarity(tiny_model, token, token) - 1.0) <= 1e-6

    def test_orthogonal(self):
        model = make_model(["Q1", "Q2"], [[1.0, 0.0], [0.0, 1.0]])
        assert similarity(model, "Q1", "Q2") == 0.0

    def test_opposite(self, tiny_model):
        assert abs(similarity(tiny_model, "Q1", "Q4") + 1.0) <= 1e-6

    def test_symmetry_100_random_pairs(self):
        rs = np.random.RandomState(3)
        tokens = [f"Q{i}" for i in range(1, 41)]
        model = make_model(tokens, rs.randn(40, 16).astype(np.float32))
        for _ in range(100):
            a, b = rs.choice(tokens, 2, replace=False)
            assert similarity(model, a, b) == similarity(model, b, a)

    def test_scale_invariance(self):
        rs = np.random.RandomState(5)
        vectors = rs.randn(10, 8).astype(np.float32)
        tokens = [f"Q{i}" for i in range(1, 11)]
        m1 = make_model(tokens, vectors)
        scaled = vectors.copy()
        scaled[3] *= 7.5
        m2 = make_model(tokens, scaled)
        got1 = similarity(m1, "Q4", "Q7")
        got2 = similarity(m2, "Q4", "Q7")
        assert abs(got1 - got2) < 1e-6

    def test_oov_raises_with_id(self, tiny_model):
        with pytest.raises(NotInVocabulary) as err:
            similarity(tiny_model, "Q1", "Q999")
        assert err.value.entity == "Q999"

    def test_bounds(self):
        rs = np.random.RandomState(11)
        tokens = [f"Q{i}" for i in range(1, 31)]
        model = make_model(tokens, rs.randn(30, 4).astype(np.float32))
        for a in tokens[:10]:
            for b in tokens[10:20]:
                s = similarity(model, a, b)
                assert -1.0 - 1e-6 <= s <= 1.0 + 1e-6


class TestContains:
    def test_empty_model(self):
        model = make_model([], np.zeros((0, 2), dtype=np.float32))
        assert not contains(model, "Q1")

    def test_present(self, tiny_model):
        assert contains(tiny_model, "Q1")

    def test_case_sensitive(self, tiny_model):
        assert not contains(tiny_model, "q1")


class TestMostSimilar:
    def test_self_excluded_two_token_model(self):
        model = make_model(["Q1", "Q2"], [[1.0, 0.0], [0.5, 0.5]])
        hits = most_similar(model, "Q1", 10)
        assert len(hits) == 1
        assert str(hits[0].entity) == "Q2"

    def test_oracle_200x16(self):
        rs = np.random.RandomState(20)
        tokens = [f"Q{i}" for i in range(1, 201)]
        vectors = rs.randn(200, 16).astype(np.float32)
        model = make_model(tokens, vectors)
        index = UnitIndex(model)
        queries = rs.choice(tokens, 20, replace=False)
        for q in queries:
            for k in (1, 5, 199):
                hits = most_similar(model, q, k, index=index)
                expected = brute_force_most_similar(vectors, tokens, q, k)
                assert [str(h.entity) for h in hits] == [t for t, _ in expected]
                for h, (_, s) in zip(hits, expected):
                    assert abs(h.score - s) < 1e-5

    def test_tie_break_ascending_index(self):
        # duplicated vectors force exact score ties
        vectors = np.array(
            [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0], [1.0, 1.0]], dtype=np.float32
        )
        model = make_model(["Q9", "Q5", "Q7", "Q1", "Q3"], vectors)
        hits = most_similar(model, "Q5", 4)
        # Q7 and Q1 tie at 1.0; vocabulary order (index 2 before 3) wins
        assert [str(h.entity) for h in hits] == ["Q7", "Q1", "Q3", "Q9"]

    def test_k_larger_than_vocab(self, tiny_model):
        hits = most_similar(tiny_model, "Q1", 100)
        assert len(hits) == len(tiny_model.vocab) - 1

    def test_zero_norm_rows_excluded(self):
        vectors = np.array([[1.0, 0.0], [0.0, 0.0], [0.5, 0.1]], dtype=np.float32)
        model = make_model(["Q1", "Q2", "Q3"], vectors)
        hits = most_similar(model, "Q1", 10)
        assert [str(h.entity) for h in hits] == ["Q3"]

    def test_sorted_strictly(self):
        rs = np.random.RandomState(8)
        model = make_model([f"Q{i}" for i in range(1, 51)], rs.randn(50, 6).astype(np.float32))
        hits = most_similar(model, "Q10", 49)
        keys = [(-h.score, model.vocab.index[str(h.entity)]) for h in hits]
        assert keys == sorted(keys)
        assert all(str(h.entity) != "Q10" for h in hits)

    def test_k_validation(self, tiny_model):
        with pytest.raises(ValueError):
            most_similar(tiny_model, "Q1", 0)

    def test_oov_query(self, tiny_model):
        with pytest.raises(NotInVocabulary):
            most_similar(tiny_model, "Q404", 3)


class TestUnitIndex:
    def test_rows_unit_norm(self):
        rs = np.random.RandomState(2)
        model = make_model([f"Q{i}" for i in range(1, 31)], rs.randn(30, 10).astype(np.float32))
        index = UnitIndex(model)
        norms = np.linalg.norm(index.unit.astype(np.float64), axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-6

    def test_zero_rows_flagged(self):
        vectors = np.zeros((3, 4), dtype=np.float32)
        vectors[1, 2] = 2.0
        model = make_model(["Q1", "Q2", "Q3"], vectors)
        index = UnitIndex(model)
        assert list(index.zero_rows) == [True, False, True]
        assert index.n_zero_rows == 2


class TestTopK:
    def test_matches_python_sort_on_random_data(self):
        rs = np.random.RandomState(4)
        for _ in range(50):
            n = rs.randint(3, 60)
            # coarse quantization produces plenty of exact ties
            scores = np.round(rs.randn(n).astype(np.float32), 1)
            exclude = np.zeros(n, dtype=bool)
            exclude[rs.randint(0, n)] = True
            k = int(rs.randint(1, n + 2))
            got = list(top_k_indices(scores, k, exclude))
            expected = sorted(
                (i for i in range(n) if not exclude[i]),
                key=lambda i: (-scores[i], i),
            )[:k]
            assert got == expected
