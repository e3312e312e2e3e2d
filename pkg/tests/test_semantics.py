import numpy as np
import pytest

from chartforge.errors import DimensionMismatch, MalformedLine, ProviderUnavailable, UnknownWord
from chartforge.semantics import (
    EmbeddingEntry,
    EmbeddingTable,
    FallbackKeywordProvider,
    extract_keywords,
    load_embeddings,
    related_terms,
)


def _embedding_line(word, vec, freq):
    return word + " " + " ".join(f"{c:.6f}" for c in vec) + f" {freq}"


def _make_table(entries):
    return EmbeddingTable(
        {w: EmbeddingEntry(np.asarray(v, dtype=np.float64), f) for w, (v, f) in entries.items()}
    )


def test_load_three_words_dim300(rng):
    lines = [_embedding_line(w, rng.normal(size=300), i + 1) for i, w in enumerate("abc")]
    table = load_embeddings("\n".join(lines))
    assert len(table) == 3
    assert table.dimension == 300


def test_mixed_dimensions_rejected(rng):
    lines = [
        _embedding_line("a", rng.normal(size=300), 1),
        _embedding_line("b", rng.normal(size=299), 2),
    ]
    with pytest.raises(DimensionMismatch):
        load_embeddings("\n".join(lines))


def test_dim_check_against_expected(rng):
    line = _embedding_line("a", rng.normal(size=120), 1)
    with pytest.raises(DimensionMismatch):
        load_embeddings(line)  # default expects the 300-dim corpus format
    table = load_embeddings(line, expected_dim=None)
    assert table.dimension == 120


def test_empty_file_gives_empty_table():
    table = load_embeddings("")
    assert len(table) == 0


def test_malformed_lines(rng):
    with pytest.raises(MalformedLine):
        load_embeddings("word 1.0")  # too few fields
    with pytest.raises(MalformedLine):
        load_embeddings("word " + " ".join(["x"] * 300) + " 3")
    with pytest.raises(MalformedLine):
        load_embeddings(_embedding_line("w", rng.normal(size=300), -2))


def test_keyword_fallback_removes_stopwords():
    ks = extract_keywords("The global change in desert area")
    assert "desert" in ks.terms
    assert "area" in ks.terms
    assert "the" not in ks.terms
    assert "in" not in ks.terms


def test_empty_title_gives_empty_keywords():
    assert extract_keywords("").keywords == []


def test_repeated_word_deduplicated():
    ks = extract_keywords("fire fire fire")
    assert ks.terms == ["fire"]


def test_scores_non_increasing_and_clamped():
    class Noisy:
        def score_terms(self, title):
            return [("a", 3.0), ("b", -1.0), ("c", 0.5), ("a", 0.2)]

    ks = extract_keywords("anything", Noisy())
    scores = [s for _, s in ks.keywords]
    assert scores == sorted(scores, reverse=True)
    assert all(0.0 <= s <= 1.0 for s in scores)
    assert ks.terms.count("a") == 1


def test_fallback_rarity_prefers_rare_words():
    table = _make_table(
        {
            "stock": ([1.0, 0.0], 1000),
            "nasdaq": ([0.9, 0.1], 3),
        }
    )
    ks = extract_keywords("stock nasdaq", FallbackKeywordProvider(table))
    assert ks.terms[0] == "nasdaq"
    assert ks.keywords[0][1] == 1.0


def test_provider_unavailable_propagates():
    class Down:
        def score_terms(self, title):
            raise ProviderUnavailable("no provider")

    with pytest.raises(ProviderUnavailable):
        extract_keywords("title", Down())


def test_duplicate_vector_has_similarity_one():
    table = _make_table(
        {
            "sun": ([0.5, 0.5, 0.0], 10),
            "sol": ([0.5, 0.5, 0.0], 4),
            "mud": ([-0.5, 0.4, 0.1], 9),
        }
    )
    out = related_terms("sun", table, k=2)
    by_term = {r.term: r for r in out}
    assert by_term["sol"].similarity == pytest.approx(1.0, abs=1e-12)


def test_unknown_word_raises():
    table = _make_table({"a": ([1.0, 0.0], 1)})
    with pytest.raises(UnknownWord):
        related_terms("zzz", table, k=1)


def test_keyword_itself_excluded_and_rank_dense():
    table = _make_table(
        {f"w{i}": (list(np.eye(6)[i % 6] + 0.1), i) for i in range(6)}
    )
    out = related_terms("w0", table, k=3)
    assert all(r.term != "w0" for r in out)
    assert [r.rank for r in out] == [1, 2, 3]


def _brute_force(keyword, table, k):
    """Independent oracle: cosine top-3k, then frequency re-rank, first k."""
    q = table.vector(keyword)
    qn = np.linalg.norm(q)
    cands = []
    for w in table.words:
        if w == keyword:
            continue
        v = table.vector(w)
        n = np.linalg.norm(v)
        if n == 0 or qn == 0:
            continue
        cands.append((w, float(v @ q / (n * qn))))
    cands.sort(key=lambda t: (-t[1], t[0]))
    pool = cands[: 3 * k]
    pool.sort(key=lambda t: (-table.frequency(t[0]), -t[1], t[0]))
    return [w for w, _ in pool[:k]]


def test_five_word_table_matches_exhaustive_oracle():
    table = _make_table(
        {
            "query": ([1.0, 0.0, 0.0], 10),
            "near1": ([0.9, 0.1, 0.0], 5),
            "near2": ([0.8, 0.2, 0.0], 500),
            "far1": ([0.0, 1.0, 0.0], 50),
            "far2": ([-1.0, 0.0, 0.0], 9999),
        }
    )
    # k=1 keeps the 3k cosine pool at three words, excluding the very common
    # but dissimilar far2; frequency re-rank then promotes near2 inside it.
    out = related_terms("query", table, k=1)
    assert [r.term for r in out] == _brute_force("query", table, 1)
    assert out[0].term == "near2"


def test_random_tables_match_oracle(rng):
    for _ in range(20):
        size = int(rng.integers(5, 30))
        entries = {
            f"w{i}": (rng.normal(size=8), int(rng.integers(0, 1000)))
            for i in range(size)
        }
        table = _make_table(entries)
        k = int(rng.integers(1, 5))
        out = related_terms("w0", table, k=k)
        assert [r.term for r in out] == _brute_force("w0", table, k)


def test_zero_vector_words_skipped():
    table = _make_table(
        {
            "q": ([1.0, 0.0], 1),
            "zero": ([0.0, 0.0], 999),
            "ok": ([0.5, 0.5], 2),
        }
    )
    out = related_terms("q", table, k=2)
    assert [r.term for r in out] == ["ok"]


def test_zero_vector_query_returns_nothing():
    table = _make_table({"q": ([0.0, 0.0], 1), "a": ([1.0, 0.0], 5)})
    assert related_terms("q", table, k=2) == []
