"""Reader/encoder for the core toolkit's bpe-v1 tokenizer files.

The adapter shares the core's tokenizer through its file format only: a JSON
object {"version": "bpe-v1", "vocab": [base64 byte strings], "merges":
[[i, j], ...]} where merges apply in order, lowest rank first.
"""

from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path


class BpeFileError(ValueError):
    pass


class BpeEncoder:
    def __init__(self, vocab: list[bytes], merges: list[tuple[int, int]]):
        self.vocab = vocab
        self.merges = merges
        self._ranks = {pair: k for k, pair in enumerate(merges)}
        self._merged_id = {pair: 256 + k for k, pair in enumerate(merges)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for entry in self.vocab:
            h.update(len(entry).to_bytes(4, "little"))
            h.update(entry)
        return h.hexdigest()

    def encode(self, text: str) -> list[int]:
        ids = list(text.encode("utf-8"))
        if not ids or not self._ranks:
            return ids
        while True:
            best_rank, best_pair = None, None
            for pair in zip(ids, ids[1:]):
                rank = self._ranks.get(pair)
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_pair = rank, pair
            if best_pair is None:
                return ids
            merged = self._merged_id[best_pair]
            out, i = [], 0
            while i < len(ids):
                if i < len(ids) - 1 and (ids[i], ids[i + 1]) == best_pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(ids[i])
                    i += 1
            ids = out

    def decode(self, ids: list[int]) -> str:
        return b"".join(self.vocab[i] for i in ids).decode("utf-8")


def load_bpe_file(path: str | Path) -> BpeEncoder:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BpeFileError(f"{path}: malformed JSON at offset {exc.pos}") from exc
    if payload.get("version") != "bpe-v1":
        raise BpeFileError(f"{path}: not a bpe-v1 tokenizer file")
    vocab = [base64.b64decode(e) for e in payload["vocab"]]
    merges = [(int(i), int(j)) for i, j in payload["merges"]]
    if len(vocab) != 256 + len(merges):
        raise BpeFileError(f"{path}: vocab/merge count mismatch")
    return BpeEncoder(vocab, merges)
