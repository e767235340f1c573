"""Topic-matched negative sampling over title embeddings.

For every hoax title the k most cosine-similar legitimate titles are
retrieved (exact exhaustive search) and the union, deduplicated by id,
becomes the negative set. Exactness keeps retrieval testable against a
brute-force oracle; the corpora involved are small enough that an
approximate index would buy nothing.

Embedding file contract (shared with any external encoder):

    dim=<d> count=<n>
    <id>\t<float>\t<float>...      (exactly d tab-separated values)

Floats are written with 8 significant digits, which preserves cosine
rankings at corpus scale.
"""

import hashlib
import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class EmbeddingRecord:
    id: str
    vector: np.ndarray
    dim: int


@dataclass
class NeighborResult:
    query_id: str
    neighbors: list  # (candidate id, similarity) pairs, scores non-increasing


def load_embeddings(path) -> list[EmbeddingRecord]:
    """Parse an embedding file, validating the header and every row."""
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        parts = header.split()
        if len(parts) != 2 or not parts[0].startswith("dim=") or not parts[1].startswith("count="):
            raise ValueError(f"bad embedding header: '{header}'")
        try:
            dim = int(parts[0][4:])
            count = int(parts[1][6:])
        except ValueError:
            raise ValueError(f"bad embedding header: '{header}'") from None
        if dim < 1:
            raise ValueError(f"bad embedding dimension {dim}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != dim + 1:
                raise ValueError(
                    f"line {lineno}: expected {dim} values, got {len(fields) - 1}"
                )
            vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"line {lineno}: non-finite component")
            records.append(EmbeddingRecord(id=fields[0], vector=vec, dim=dim))
    if len(records) != count:
        raise ValueError(f"header claims count={count} but file has {len(records)} records")
    return records


def write_embeddings(records: list[EmbeddingRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        dim = records[0].dim if records else 0
        fh.write(f"dim={dim} count={len(records)}\n")
        for rec in records:
            values = "\t".join(f"{x:.8g}" for x in rec.vector)
            fh.write(f"{rec.id}\t{values}\n")


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine of a zero-norm vector is undefined")
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def _stack(records: list[EmbeddingRecord]) -> tuple[np.ndarray, np.ndarray, list]:
    matrix = np.stack([r.vector for r in records])
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        bad = records[int(np.argmin(norms))].id
        raise ValueError(f"zero-norm embedding for id '{bad}'")
    return matrix, norms, [r.id for r in records]


def _top_k(scores: np.ndarray, ids: list, k: int) -> list:
    # Total order: descending score, then ascending id, so ties cannot
    # make retrieval depend on input order.
    order = np.lexsort((np.array(ids), -scores))
    return [(ids[i], float(scores[i])) for i in order[:k]]


def top_k_neighbors(
    query: EmbeddingRecord, corpus: list[EmbeddingRecord], k: int
) -> NeighborResult:
    """The k corpus records most similar to the query, descending.

    The query id itself is never a neighbor, even if present in the
    corpus list.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    candidates = [r for r in corpus if r.id != query.id]
    if k > len(candidates):
        raise ValueError(f"k={k} exceeds candidate count {len(candidates)}")
    matrix, norms, ids = _stack(candidates)
    if matrix.shape[1] != query.vector.shape[0]:
        raise ValueError("query dimension does not match corpus dimension")
    qnorm = float(np.linalg.norm(query.vector))
    if qnorm == 0.0:
        raise ValueError(f"zero-norm embedding for id '{query.id}'")
    scores = np.clip((matrix @ query.vector) / (norms * qnorm), -1.0, 1.0)
    return NeighborResult(query_id=query.id, neighbors=_top_k(scores, ids, k))


def build_negative_set(
    hoax_embeddings: list[EmbeddingRecord],
    candidate_embeddings: list[EmbeddingRecord],
    k: int,
) -> set:
    """Union of every hoax's top-k neighbor ids, deduplicated.

    Callers must pass candidates that exclude hoax pages. The pre-dedup
    total is logged so overlap between hoaxes stays auditable.
    """
    if not candidate_embeddings:
        raise ValueError("candidate embedding set is empty")
    if k < 1 or k > len(candidate_embeddings):
        raise ValueError(f"k={k} out of range for {len(candidate_embeddings)} candidates")
    matrix, norms, ids = _stack(candidate_embeddings)
    ids_arr = np.array(ids)
    selected: set = set()
    for hoax in hoax_embeddings:
        qnorm = float(np.linalg.norm(hoax.vector))
        if qnorm == 0.0:
            raise ValueError(f"zero-norm embedding for id '{hoax.id}'")
        scores = np.clip((matrix @ hoax.vector) / (norms * qnorm), -1.0, 1.0)
        order = np.lexsort((ids_arr, -scores))
        selected.update(ids[i] for i in order[:k])
    log.info(
        "negative sampling: %d pre-dedup -> %d unique ids",
        k * len(hoax_embeddings),
        len(selected),
    )
    return selected


def fallback_embed(title: str, dim: int) -> np.ndarray:
    """Deterministic unit vector from hashed character trigrams.

    A stand-in encoder for tests and offline runs: similar titles share
    trigrams and so land near each other, which is all negative sampling
    needs. Hashing is keyed on nothing (stable across processes).
    """
    if not title:
        raise ValueError("cannot embed an empty title")
    if dim < 16:
        raise ValueError(f"dim must be >= 16, got {dim}")
    t = title.lower()
    grams = [t[i:i + 3] for i in range(len(t) - 2)] or [t]
    vec = np.zeros(dim, dtype=np.float64)
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        h = int.from_bytes(digest, "big")
        sign = 1.0 if h & 1 else -1.0
        vec[(h >> 1) % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signs cancelled exactly; fall back to a one-hot on the title hash.
        digest = hashlib.blake2b(t.encode("utf-8"), digest_size=8).digest()
        vec[int.from_bytes(digest, "big") % dim] = 1.0
        norm = 1.0
    return vec / norm
