import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikihoax.negsample import (
    EmbeddingRecord,
    build_negative_set,
    cosine,
    fallback_embed,
    load_embeddings,
    top_k_neighbors,
    write_embeddings,
)


def rec(id, *values):
    v = np.array(values, dtype=np.float64)
    return EmbeddingRecord(id=id, vector=v, dim=v.shape[0])


# Brute-force reference: python-loop cosine over every candidate, full sort.
def oracle_top_k(query, corpus, k):
    def cos(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
        return dot / (nu * nv)

    scored = [
        (r.id, cos(query.vector.tolist(), r.vector.tolist()))
        for r in corpus
        if r.id != query.id
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [pair[0] for pair in scored[:k]]


# --- cosine ---------------------------------------------------------------------

def test_cosine_self_is_one():
    v = np.array([3.0, -1.0, 2.0])
    assert cosine(v, v) == pytest.approx(1.0)


def test_cosine_orthogonal():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)


def test_cosine_hand_value():
    got = cosine(np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0]))
    assert got == pytest.approx(32.0 / math.sqrt(14.0 * 77.0), abs=1e-12)
    assert got == pytest.approx(0.974632, abs=1e-6)


def test_cosine_zero_norm_rejected():
    with pytest.raises(ValueError, match="zero-norm"):
        cosine(np.zeros(3), np.ones(3))


def test_cosine_dim_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        cosine(np.ones(3), np.ones(4))


@given(
    st.lists(st.floats(min_value=-10, max_value=10), min_size=2, max_size=8),
    st.floats(min_value=0.01, max_value=100.0),
)
def test_cosine_scale_invariance(values, alpha):
    u = np.array(values)
    if np.linalg.norm(u) == 0:
        return
    v = np.arange(1.0, len(values) + 1.0)
    assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)


# --- top-k retrieval ---------------------------------------------------------------

def test_top_k_forced_ordering():
    corpus = [rec("a", 1.0, 0.0), rec("b", 0.0, 1.0), rec("c", -1.0, 0.0)]
    result = top_k_neighbors(rec("q", 1.0, 0.0), corpus, k=2)
    assert [n[0] for n in result.neighbors] == ["a", "b"]
    assert result.neighbors[0][1] == pytest.approx(1.0)
    assert result.neighbors[1][1] == pytest.approx(0.0)


def test_top_k_tie_breaks_by_id():
    corpus = [rec("zeta", 2.0, 0.0), rec("alpha", 1.0, 0.0), rec("mid", 0.0, 1.0)]
    result = top_k_neighbors(rec("q", 1.0, 0.0), corpus, k=2)
    # zeta and alpha have identical cosine 1.0; alpha sorts first.
    assert [n[0] for n in result.neighbors] == ["alpha", "zeta"]


def test_top_k_excludes_query_id():
    corpus = [rec("q", 1.0, 0.0), rec("b", 0.9, 0.1), rec("c", 0.0, 1.0)]
    result = top_k_neighbors(rec("q", 1.0, 0.0), corpus, k=2)
    assert "q" not in [n[0] for n in result.neighbors]


def test_top_k_rejects_oversized_k():
    corpus = [rec("a", 1.0, 0.0)]
    with pytest.raises(ValueError, match="exceeds candidate count"):
        top_k_neighbors(rec("q", 0.0, 1.0), corpus, k=2)


def test_top_k_scores_non_increasing_and_bounded():
    rng = np.random.default_rng(5)
    corpus = [rec(f"c{i}", *rng.normal(size=6)) for i in range(40)]
    result = top_k_neighbors(rec("q", *rng.normal(size=6)), corpus, k=10)
    scores = [s for _, s in result.neighbors]
    assert all(-1.0 <= s <= 1.0 for s in scores)
    assert all(a >= b for a, b in zip(scores, scores[1:]))


@given(st.integers(min_value=0, max_value=2**31))
@settings(max_examples=40, deadline=None)
def test_top_k_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    dim = int(rng.integers(2, 16))
    corpus = [rec(f"c{i:03d}", *rng.normal(size=dim)) for i in range(n)]
    query = rec("q", *rng.normal(size=dim))
    k = int(rng.integers(1, n))
    got = top_k_neighbors(query, corpus, k)
    assert [i for i, _ in got.neighbors] == oracle_top_k(query, corpus, k)


# --- negative set ------------------------------------------------------------------

def test_negative_set_disjoint_neighbors():
    hoaxes = [rec("h1", 1.0, 0.0, 0.0), rec("h2", 0.0, 0.0, 1.0)]
    cands = [
        rec("a", 0.9, 0.1, 0.0),
        rec("b", 0.8, 0.2, 0.0),
        rec("c", 0.0, 0.1, 0.9),
        rec("d", 0.0, 0.2, 0.8),
    ]
    assert build_negative_set(hoaxes, cands, k=2) == {"a", "b", "c", "d"}


def test_negative_set_dedups_shared_neighbor():
    hoaxes = [rec("h1", 1.0, 0.0), rec("h2", 0.9, 0.1)]
    cands = [rec("a", 1.0, 0.05), rec("b", 1.0, -0.05), rec("c", -1.0, 0.0)]
    got = build_negative_set(hoaxes, cands, k=2)
    assert got == {"a", "b"}


def test_negative_set_permutation_invariant():
    rng = np.random.default_rng(11)
    hoaxes = [rec(f"h{i}", *rng.normal(size=8)) for i in range(5)]
    cands = [rec(f"c{i}", *rng.normal(size=8)) for i in range(30)]
    a = build_negative_set(hoaxes, cands, k=4)
    b = build_negative_set(hoaxes[::-1], cands[::-1], k=4)
    assert a == b


def test_negative_set_rejects_empty_candidates():
    with pytest.raises(ValueError, match="empty"):
        build_negative_set([rec("h", 1.0, 0.0)], [], k=1)


# --- fallback embedding ---------------------------------------------------------------

def test_fallback_embed_deterministic():
    a = fallback_embed("abc", 64)
    b = fallback_embed("abc", 64)
    assert np.array_equal(a, b)


def test_fallback_embed_unit_norm():
    for title in ("abc", "List of birds", "x", "Ωμέγα"):
        v = fallback_embed(title, 32)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


def test_fallback_embed_similarity_ordering():
    a = fallback_embed("List of birds", 256)
    b = fallback_embed("List of bird", 256)
    c = fallback_embed("Quantum field theory", 256)
    assert cosine(a, b) > cosine(a, c)


def test_fallback_embed_rejects_bad_inputs():
    with pytest.raises(ValueError, match="empty title"):
        fallback_embed("", 64)
    with pytest.raises(ValueError, match="dim must be"):
        fallback_embed("abc", 8)


# --- embedding file round-trip ----------------------------------------------------------

def test_embedding_file_roundtrip(tmp_path):
    records = [
        EmbeddingRecord(id=f"t{i}", vector=fallback_embed(f"Title {i}", 32), dim=32)
        for i in range(5)
    ]
    path = tmp_path / "emb.tsv"
    write_embeddings(records, path)
    loaded = load_embeddings(path)
    assert [r.id for r in loaded] == [r.id for r in records]
    for orig, back in zip(records, loaded):
        assert np.allclose(orig.vector, back.vector, atol=1e-6)


def test_embedding_file_validation(tmp_path):
    path = tmp_path / "emb.tsv"
    path.write_text("dim=3 count=1\na\t1.0\t2.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="expected 3 values"):
        load_embeddings(path)
    path.write_text("banana\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad embedding header"):
        load_embeddings(path)
    path.write_text("dim=2 count=3\na\t1\t2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="count=3"):
        load_embeddings(path)
    path.write_text("dim=2 count=1\na\t1\tnan\n", encoding="utf-8")
    with pytest.raises(ValueError, match="non-finite"):
        load_embeddings(path)
