"""Tokenizers: whitespace word tokenizer and a trainable byte-level BPE.

The word tokenizer feeds the pairwise note metrics; the BPE tokenizer feeds
the language-model pipeline.  BPE works on raw UTF-8 bytes, so every text is
encodable (no out-of-vocabulary failures) and decode(encode(t)) reproduces
the original bytes exactly.
"""

from __future__ import annotations

import base64
import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

BPE_FORMAT_VERSION = "bpe-v1"
N_BYTE_TOKENS = 256


class TokenizerError(ValueError):
    """Raised for invalid tokenizer inputs or malformed tokenizer files."""


def word_tokenize(text: str) -> list[str]:
    """Split text on runs of Unicode whitespace. No normalization is applied."""
    return text.split()


@dataclass(frozen=True)
class Vocab:
    """Ordered byte-string token table with stable index assignment."""

    entries: tuple[bytes, ...]

    def __post_init__(self) -> None:
        if len(set(self.entries)) != len(self.entries):
            raise TokenizerError("vocab entries must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def token(self, token_id: int) -> bytes:
        if not 0 <= token_id < len(self.entries):
            raise TokenizerError(f"token id {token_id} out of range (vocab size {len(self.entries)})")
        return self.entries[token_id]


@dataclass
class BpeModel:
    """Byte-level BPE: 256 base byte tokens plus an ordered merge list."""

    vocab: Vocab
    merges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.vocab) != N_BYTE_TOKENS + len(self.merges):
            raise TokenizerError(
                f"merge-count mismatch: vocab has {len(self.vocab)} entries "
                f"but {len(self.merges)} merges imply {N_BYTE_TOKENS + len(self.merges)}"
            )
        for k, (i, j) in enumerate(self.merges):
            merged = self.vocab.entries[N_BYTE_TOKENS + k]
            if self.vocab.token(i) + self.vocab.token(j) != merged:
                raise TokenizerError(f"merge {k} does not produce vocab entry {N_BYTE_TOKENS + k}")
        # Rank of each mergeable pair: lower rank merges first.
        self._ranks = {pair: k for k, pair in enumerate(self.merges)}
        self._merged_id = {pair: N_BYTE_TOKENS + k for k, pair in enumerate(self.merges)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def content_hash(self) -> str:
        """Stable hash of the model content, used to detect tokenizer/model mismatch."""
        h = hashlib.sha256()
        for entry in self.vocab.entries:
            h.update(len(entry).to_bytes(4, "little"))
            h.update(entry)
        return h.hexdigest()

    def encode(self, text: str) -> list[int]:
        """Encode text to token ids by applying merges in training order."""
        ids = list(text.encode("utf-8"))
        if not ids or not self._ranks:
            return ids
        while True:
            best_rank = None
            best_pair = None
            for pair in zip(ids, ids[1:]):
                rank = self._ranks.get(pair)
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_pair = pair
            if best_pair is None:
                return ids
            merged = self._merged_id[best_pair]
            out: list[int] = []
            i = 0
            while i < len(ids):
                if i < len(ids) - 1 and (ids[i], ids[i + 1]) == best_pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(ids[i])
                    i += 1
            ids = out

    def decode(self, ids: list[int]) -> str:
        return b"".join(self.vocab.token(i) for i in ids).decode("utf-8")


def _pair_counts(sequences: list[list[int]]) -> Counter:
    counts: Counter = Counter()
    for seq in sequences:
        counts.update(zip(seq, seq[1:]))
    return counts


def _merge_sequence(seq: list[int], pair: tuple[int, int], new_id: int) -> list[int]:
    out: list[int] = []
    i = 0
    while i < len(seq):
        if i < len(seq) - 1 and (seq[i], seq[i + 1]) == pair:
            out.append(new_id)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def bpe_train(corpus_texts: list[str], target_vocab_size: int) -> BpeModel:
    """Train byte-level BPE by iterative most-frequent-pair merging.

    Ties between equally frequent pairs go to the lexicographically smaller
    pair of byte strings.  Training stops at the target vocab size or when no
    adjacent pair remains to merge.
    """
    if target_vocab_size < N_BYTE_TOKENS + 1:
        raise TokenizerError(f"target_vocab_size must be >= {N_BYTE_TOKENS + 1}, got {target_vocab_size}")
    sequences = [list(t.encode("utf-8")) for t in corpus_texts if t]
    if not sequences:
        raise TokenizerError("cannot train BPE on empty text")

    entries: list[bytes] = [bytes([b]) for b in range(N_BYTE_TOKENS)]
    merges: list[tuple[int, int]] = []
    while len(entries) < target_vocab_size:
        counts = _pair_counts(sequences)
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], entries[kv[0][0]], entries[kv[0][1]]))[0]
        new_id = len(entries)
        entries.append(entries[best[0]] + entries[best[1]])
        merges.append(best)
        sequences = [_merge_sequence(seq, best, new_id) for seq in sequences]
    return BpeModel(vocab=Vocab(tuple(entries)), merges=merges)


def bpe_encode(model: BpeModel, text: str) -> list[int]:
    return model.encode(text)


def bpe_decode(model: BpeModel, ids: list[int]) -> str:
    return model.decode(ids)


def save_bpe(model: BpeModel, path: str | Path) -> None:
    payload = {
        "version": BPE_FORMAT_VERSION,
        "vocab": [base64.b64encode(e).decode("ascii") for e in model.vocab.entries],
        "merges": [list(pair) for pair in model.merges],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_bpe(path: str | Path) -> BpeModel:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TokenizerError(f"malformed tokenizer file {path}: {exc.msg} at offset {exc.pos}") from exc
    if not isinstance(payload, dict) or payload.get("version") != BPE_FORMAT_VERSION:
        raise TokenizerError(f"malformed tokenizer file {path}: bad or missing version header")
    try:
        entries = tuple(base64.b64decode(e, validate=True) for e in payload["vocab"])
        merges = [(int(i), int(j)) for i, j in payload["merges"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise TokenizerError(f"malformed tokenizer file {path}: {exc}") from exc
    return BpeModel(vocab=Vocab(entries), merges=merges)
