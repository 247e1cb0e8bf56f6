"""Pairwise note similarity metrics: gestalt matching, ROUGE, embedding scores.

All metrics operate on token lists (whitespace words in the pipeline).  The
embedding metric mirrors greedy-match scoring: cosine similarity matrix,
row/column maxima averaged into precision/recall, optionally rescaled against
a random cross-admission baseline.
"""

from __future__ import annotations

import hashlib
import random
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import Corpus
from .tokenize import word_tokenize


class MetricsError(ValueError):
    """Raised for invalid metric inputs or malformed embedding files."""


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class PairScore:
    """All metric components for one (candidate, reference) note pair."""

    gestalt: float
    rouge1: PRF
    rougeL: PRF
    embed: PRF | None
    cand_tokens: int
    ref_tokens: int


@dataclass(frozen=True)
class RescaleBaseline:
    """Mean unrescaled embed F1 over random cross-admission pairs."""

    b: float
    n_pairs: int
    seed: int


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _longest_match(
    a: Sequence, b: Sequence, alo: int, ahi: int, blo: int, bhi: int, b2j: dict
) -> tuple[int, int, int]:
    """Longest contiguous matching block; ties go to the block starting
    earliest in a, then earliest in b."""
    besti, bestj, bestsize = alo, blo, 0
    j2len: dict[int, int] = {}
    for i in range(alo, ahi):
        newj2len: dict[int, int] = {}
        for j in b2j.get(a[i], ()):
            if j < blo:
                continue
            if j >= bhi:
                break
            k = newj2len[j] = j2len.get(j - 1, 0) + 1
            if k > bestsize:
                besti, bestj, bestsize = i - k + 1, j - k + 1, k
        j2len = newj2len
    return besti, bestj, bestsize


def gestalt_ratio(a_tokens: Sequence, b_tokens: Sequence) -> float:
    """Ratcliff-Obershelp similarity 2M/(|a|+|b|) over token sequences.

    Recursively matches the longest common block and recurses into the left
    and right flanks; two empty sequences have ratio 1.0.  The earliest-block
    tie break matches the stdlib matcher and can make the ratio depend on
    argument order in ambiguous cases.
    """
    if not a_tokens and not b_tokens:
        return 1.0
    b2j: dict = {}
    for j, tok in enumerate(b_tokens):
        b2j.setdefault(tok, []).append(j)
    matched = 0
    queue = [(0, len(a_tokens), 0, len(b_tokens))]
    while queue:
        alo, ahi, blo, bhi = queue.pop()
        i, j, k = _longest_match(a_tokens, b_tokens, alo, ahi, blo, bhi, b2j)
        if k:
            matched += k
            queue.append((alo, i, blo, j))
            queue.append((i + k, ahi, j + k, bhi))
    return 2.0 * matched / (len(a_tokens) + len(b_tokens))


def _ngrams(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(cand_tokens: Sequence, ref_tokens: Sequence, n: int = 1) -> PRF:
    """Clipped n-gram overlap precision/recall/F1."""
    if n < 1:
        raise MetricsError(f"n must be >= 1, got {n}")
    cand = _ngrams(cand_tokens, n)
    ref = _ngrams(ref_tokens, n)
    overlap = sum(min(c, ref[g]) for g, c in cand.items())
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    precision = overlap / n_cand if n_cand else 0.0
    recall = overlap / n_ref if n_ref else 0.0
    return PRF(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok in a:
        cur = [0]
        for j, other in enumerate(b, start=1):
            if tok == other:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(cand_tokens: Sequence, ref_tokens: Sequence) -> PRF:
    """Longest-common-subsequence precision/recall/F1."""
    lcs = _lcs_length(cand_tokens, ref_tokens)
    precision = lcs / len(cand_tokens) if cand_tokens else 0.0
    recall = lcs / len(ref_tokens) if ref_tokens else 0.0
    return PRF(precision, recall, _f1(precision, recall))


class EmbeddingProvider:
    """Maps a token list to a matrix of fixed-dimension vectors, one row per
    token.  Providers backed by stored contextual vectors additionally key on
    the document id."""

    provider_label = "base"

    def embed(self, tokens: Sequence[str], doc_id: str | None = None) -> np.ndarray:
        raise NotImplementedError


class CharNgramProvider(EmbeddingProvider):
    """Lexical fallback: tokens embedded as hashed bags of character n-grams.

    Tokens are padded with boundary markers so every non-empty token yields at
    least one n-gram.  The hash is content-based, so embeddings are identical
    across runs and processes.
    """

    provider_label = "char-ngram"

    def __init__(self, n_range: tuple[int, int] = (2, 4), dim: int = 256):
        if dim < 64:
            raise MetricsError(f"dim must be >= 64, got {dim}")
        if n_range[0] < 1 or n_range[1] < n_range[0]:
            raise MetricsError(f"invalid n_range {n_range}")
        self.n_range = n_range
        self.dim = dim

    def _token_vector(self, token: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        padded = f"<{token}>"
        for n in range(self.n_range[0], self.n_range[1] + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n].encode("utf-8")
                slot = int.from_bytes(hashlib.blake2b(gram, digest_size=8).digest(), "little")
                vec[slot % self.dim] += 1.0
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def embed(self, tokens: Sequence[str], doc_id: str | None = None) -> np.ndarray:
        if not tokens:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self._token_vector(t) for t in tokens])


class OneHotProvider(EmbeddingProvider):
    """Each distinct token gets its own basis vector; cosine is an exact
    token-identity indicator.  Useful as a lexical oracle."""

    provider_label = "one-hot"

    def __init__(self, dim: int = 4096):
        self.dim = dim
        self._index: dict[str, int] = {}

    def embed(self, tokens: Sequence[str], doc_id: str | None = None) -> np.ndarray:
        out = np.zeros((len(tokens), self.dim), dtype=np.float64)
        for row, token in enumerate(tokens):
            slot = self._index.get(token)
            if slot is None:
                slot = len(self._index)
                if slot >= self.dim:
                    raise MetricsError(f"one-hot provider exhausted: more than {self.dim} distinct tokens")
                self._index[token] = slot
            out[row, slot] = 1.0
        return out


REMB_MAGIC = b"REMB1"


def write_remb(doc_matrices: dict[str, np.ndarray], path: str | Path) -> None:
    """Write per-document float32 token-vector matrices in the REMB1 format."""
    dims = {m.shape[1] for m in doc_matrices.values()}
    if len(dims) > 1:
        raise MetricsError(f"inconsistent embedding dimensions: {sorted(dims)}")
    dim = dims.pop() if dims else 0
    with Path(path).open("wb") as fh:
        fh.write(REMB_MAGIC)
        fh.write(struct.pack("<II", len(doc_matrices), dim))
        for doc_id, matrix in doc_matrices.items():
            encoded = doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", matrix.shape[0]))
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_remb(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    """Read an REMB1 file; returns (doc_id -> matrix, dimension)."""
    data = Path(path).read_bytes()
    if data[: len(REMB_MAGIC)] != REMB_MAGIC:
        raise MetricsError(f"{path}: bad magic, not an REMB1 file")
    offset = len(REMB_MAGIC)

    def take(count: int) -> bytes:
        nonlocal offset
        if offset + count > len(data):
            raise MetricsError(f"{path}: truncated at offset {offset}")
        chunk = data[offset : offset + count]
        offset += count
        return chunk

    doc_count, dim = struct.unpack("<II", take(8))
    matrices: dict[str, np.ndarray] = {}
    for _ in range(doc_count):
        (id_len,) = struct.unpack("<I", take(4))
        doc_id = take(id_len).decode("utf-8")
        (token_count,) = struct.unpack("<I", take(4))
        raw = take(token_count * dim * 4)
        matrices[doc_id] = np.frombuffer(raw, dtype="<f4").reshape(token_count, dim).astype(np.float64)
    if offset != len(data):
        raise MetricsError(f"{path}: {len(data) - offset} trailing bytes after last document")
    return matrices, dim


class ExternalEmbeddingProvider(EmbeddingProvider):
    """Stored contextual vectors keyed by (doc_id, token position)."""

    provider_label = "external"

    def __init__(self, path: str | Path):
        self._matrices, self.dim = read_remb(path)
        self.path = str(path)

    def embed(self, tokens: Sequence[str], doc_id: str | None = None) -> np.ndarray:
        if doc_id is None:
            raise MetricsError("external provider requires a doc_id")
        matrix = self._matrices.get(doc_id)
        if matrix is None:
            raise MetricsError(f"no stored embeddings for doc_id {doc_id!r} in {self.path}")
        if matrix.shape[0] != len(tokens):
            raise MetricsError(
                f"doc_id {doc_id!r}: stored {matrix.shape[0]} token vectors, requested {len(tokens)}"
            )
        return matrix


def _row_normalize(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(norms > 0, matrix / norms, 0.0)
    return out


def embed_score(
    cand_tokens: Sequence[str],
    ref_tokens: Sequence[str],
    provider: EmbeddingProvider,
    baseline: RescaleBaseline | None = None,
    cand_doc_id: str | None = None,
    ref_doc_id: str | None = None,
) -> PRF:
    """Greedy-match cosine precision/recall/F1, optionally baseline-rescaled.

    Precision averages each candidate token's best match in the reference;
    recall averages each reference token's best match in the candidate.
    Zero-norm vectors count as similarity 0 to everything.
    """
    if not cand_tokens or not ref_tokens:
        raise MetricsError("embed_score requires non-empty token lists on both sides")
    cand = _row_normalize(np.asarray(provider.embed(cand_tokens, doc_id=cand_doc_id), dtype=np.float64))
    ref = _row_normalize(np.asarray(provider.embed(ref_tokens, doc_id=ref_doc_id), dtype=np.float64))
    sim = cand @ ref.T
    precision = float(np.mean(np.max(sim, axis=1)))
    recall = float(np.mean(np.max(sim, axis=0)))
    f1 = _f1(precision, recall)
    if baseline is not None:
        b = baseline.b
        precision = (precision - b) / (1.0 - b)
        recall = (recall - b) / (1.0 - b)
        f1 = (f1 - b) / (1.0 - b)
    return PRF(precision, recall, f1)


def estimate_baseline(
    corpus: Corpus,
    provider: EmbeddingProvider,
    n_pairs: int = 1000,
    seed: int = 0,
) -> RescaleBaseline:
    """Mean unrescaled embed F1 over random document pairs drawn from
    different admissions."""
    eligible = [d for d in corpus.documents if word_tokenize(d.text)]
    admissions = {d.admission_id for d in eligible}
    if len(admissions) < 2:
        raise MetricsError("baseline estimation needs documents from at least 2 admissions")
    rng = random.Random(seed)
    total = 0.0
    for _ in range(n_pairs):
        first = rng.choice(eligible)
        second = rng.choice(eligible)
        while second.admission_id == first.admission_id:
            second = rng.choice(eligible)
        score = embed_score(
            word_tokenize(first.text),
            word_tokenize(second.text),
            provider,
            cand_doc_id=first.doc_id,
            ref_doc_id=second.doc_id,
        )
        total += score.f1
    b = min(total / n_pairs, 1.0 - 1e-9)
    return RescaleBaseline(b=b, n_pairs=n_pairs, seed=seed)


def char_ngram_provider(n_range: tuple[int, int] = (2, 4), dim: int = 256) -> CharNgramProvider:
    return CharNgramProvider(n_range=n_range, dim=dim)


def external_embedding_provider(path: str | Path) -> ExternalEmbeddingProvider:
    return ExternalEmbeddingProvider(path)
