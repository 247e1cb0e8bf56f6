"""Readers for the core toolkit's JSONL corpora and split manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusDoc:
    doc_id: str
    text: str


def read_corpus_jsonl(path: str | Path) -> list[CorpusDoc]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file missing: {path}")
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from exc
            docs.append(CorpusDoc(doc_id=str(obj["doc_id"]), text=str(obj["text"])))
    return docs


def read_split_manifest(path: str | Path) -> dict[str, list[str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"split manifest missing: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    return {name: [str(i) for i in ids] for name, ids in payload.items()}


def select_split(docs: list[CorpusDoc], manifest: dict[str, list[str]], split: str) -> list[CorpusDoc]:
    if split not in manifest:
        raise DataError(f"split {split!r} not in manifest (has {sorted(manifest)})")
    wanted = set(manifest[split])
    return [d for d in docs if d.doc_id in wanted]
