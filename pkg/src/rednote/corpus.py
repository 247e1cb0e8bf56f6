"""Document corpus model: ingestion, filtering, splitting, grouping, statistics.

Corpora are immutable after ingestion.  Documents group by
(admission_id, note_type) into time-ordered note sequences, the unit of the
pairwise redundancy evaluation.  No text cleaning is applied anywhere.
"""

from __future__ import annotations

import csv
import json
import random
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

JSONL_REQUIRED_KEYS = ("doc_id", "admission_id", "note_type", "updated_at", "text")
MIMIC_REQUIRED_COLUMNS = ("ROW_ID", "HADM_ID", "CATEGORY", "DESCRIPTION", "TEXT")


class CorpusError(ValueError):
    """Raised for malformed corpus inputs or contract violations."""


def _parse_timestamp(value: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value)
    except ValueError as exc:
        raise CorpusError(f"invalid timestamp {value!r}: {exc}") from exc
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts.replace(microsecond=0)


@dataclass(frozen=True)
class Document:
    """One note: identifiers, type label, update time, raw text."""

    doc_id: str
    admission_id: str
    note_type: str
    updated_at: datetime
    text: str
    primary_diagnosis: str | None = None

    def to_json_obj(self) -> dict:
        obj = {
            "doc_id": self.doc_id,
            "admission_id": self.admission_id,
            "note_type": self.note_type,
            "updated_at": self.updated_at.isoformat(sep="T"),
            "text": self.text,
        }
        if self.primary_diagnosis is not None:
            obj["primary_diagnosis"] = self.primary_diagnosis
        return obj


@dataclass(frozen=True)
class Corpus:
    """Immutable document collection with a corpus label."""

    documents: tuple[Document, ...]
    label: str

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise CorpusError(f"duplicate doc_id: {doc.doc_id}")
            seen.add(doc.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    def admission_ids(self) -> list[str]:
        return sorted({d.admission_id for d in self.documents})

    def relabel(self, label: str) -> "Corpus":
        return replace(self, label=label)


@dataclass(frozen=True)
class NoteSequence:
    """Documents of one (admission, note type), ascending by update time."""

    admission_id: str
    note_type: str
    docs: tuple[Document, ...]

    def __post_init__(self) -> None:
        if not self.docs:
            raise CorpusError("NoteSequence requires at least one document")
        for prev, cur in zip(self.docs, self.docs[1:]):
            if cur.updated_at < prev.updated_at:
                raise CorpusError("NoteSequence documents must be time-ordered")


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test fractions, seed, and the unit kept intact when splitting."""

    train_frac: float
    val_frac: float
    test_frac: float
    seed: int
    unit: str = "admission"

    def __post_init__(self) -> None:
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if not all(0.0 < f < 1.0 for f in fracs):
            raise CorpusError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise CorpusError(f"split fractions must sum to 1, got {sum(fracs)}")
        if self.unit not in ("document", "admission"):
            raise CorpusError(f"split unit must be 'document' or 'admission', got {self.unit!r}")


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_char_length: float
    n_note_types: int
    test_vocab_size: int


@dataclass
class DropReport:
    """Counts of records discarded during ingestion."""

    dropped_empty: int = 0
    dropped_missing: int = 0
    duplicates: int = 0

    def to_json_obj(self) -> dict:
        return {
            "dropped_empty": self.dropped_empty,
            "dropped_missing": self.dropped_missing,
            "duplicates": self.duplicates,
        }


@dataclass
class IngestResult:
    corpus: Corpus
    drops: DropReport


@dataclass(frozen=True)
class IngestOptions:
    keep_empty: bool = False
    skip_duplicates: bool = False
    label: str = ""


def ingest_jsonl(path: str | Path, options: IngestOptions = IngestOptions()) -> IngestResult:
    """Read one JSON object per line into a Corpus, counting dropped records.

    Malformed lines and (by default) duplicate doc_ids are errors; records
    with missing fields or empty text are dropped and counted.
    """
    path = Path(path)
    docs: list[Document] = []
    seen_ids: set[str] = set()
    drops = DropReport()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or any(k not in obj for k in JSONL_REQUIRED_KEYS):
                drops.dropped_missing += 1
                continue
            doc_id = str(obj["doc_id"])
            if doc_id in seen_ids:
                if options.skip_duplicates:
                    drops.duplicates += 1
                    continue
                raise CorpusError(f"{path}:{lineno}: duplicate doc_id: {doc_id}")
            text = str(obj["text"])
            if not text and not options.keep_empty:
                drops.dropped_empty += 1
                continue
            diagnosis = obj.get("primary_diagnosis")
            docs.append(
                Document(
                    doc_id=doc_id,
                    admission_id=str(obj["admission_id"]),
                    note_type=str(obj["note_type"]),
                    updated_at=_parse_timestamp(str(obj["updated_at"])),
                    text=text,
                    primary_diagnosis=None if diagnosis is None else str(diagnosis),
                )
            )
            seen_ids.add(doc_id)
    label = options.label or path.stem
    return IngestResult(Corpus(tuple(docs), label=label), drops)


def ingest_mimic_csv(path: str | Path, options: IngestOptions = IngestOptions()) -> IngestResult:
    """Read a MIMIC NOTEEVENTS-shaped CSV (RFC-4180, embedded newlines in TEXT).

    note_type is CATEGORY + ":" + DESCRIPTION.  Rows without HADM_ID are
    dropped and counted; CHARTTIME is preferred over CHARTDATE.
    """
    path = Path(path)
    docs: list[Document] = []
    seen_ids: set[str] = set()
    drops = DropReport()
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in MIMIC_REQUIRED_COLUMNS:
            if col not in header:
                raise CorpusError(f"{path}: missing required column: {col}")
        if "CHARTTIME" not in header and "CHARTDATE" not in header:
            raise CorpusError(f"{path}: missing required column: CHARTTIME or CHARTDATE")
        for row in reader:
            if not (row.get("HADM_ID") or "").strip():
                drops.dropped_missing += 1
                continue
            when = (row.get("CHARTTIME") or "").strip() or (row.get("CHARTDATE") or "").strip()
            if not when:
                drops.dropped_missing += 1
                continue
            doc_id = row["ROW_ID"]
            if doc_id in seen_ids:
                if options.skip_duplicates:
                    drops.duplicates += 1
                    continue
                raise CorpusError(f"{path}: duplicate doc_id: {doc_id}")
            text = row["TEXT"]
            if not text and not options.keep_empty:
                drops.dropped_empty += 1
                continue
            diagnosis = row.get("PRIMARY_DIAGNOSIS") or row.get("DIAGNOSIS") or None
            docs.append(
                Document(
                    doc_id=doc_id,
                    admission_id=row["HADM_ID"],
                    note_type=f"{row['CATEGORY']}:{row['DESCRIPTION']}",
                    updated_at=_parse_timestamp(when),
                    text=text,
                    primary_diagnosis=diagnosis,
                )
            )
            seen_ids.add(doc_id)
    label = options.label or path.stem
    return IngestResult(Corpus(tuple(docs), label=label), drops)


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the standard JSONL interchange format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps(doc.to_json_obj(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def filter_primary_diagnosis(corpus: Corpus, min_count: int = 20) -> Corpus:
    """Keep documents whose primary diagnosis occurs in >= min_count admissions."""
    admissions_per_dx: dict[str, set[str]] = defaultdict(set)
    for doc in corpus.documents:
        if doc.primary_diagnosis is not None:
            admissions_per_dx[doc.primary_diagnosis].add(doc.admission_id)
    if not admissions_per_dx:
        raise CorpusError(f"corpus {corpus.label!r} carries no primary_diagnosis values")
    keep = {dx for dx, adms in admissions_per_dx.items() if len(adms) >= min_count}
    kept = tuple(d for d in corpus.documents if d.primary_diagnosis in keep)
    return Corpus(kept, label=corpus.label)


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic disjoint exhaustive train/val/test partition.

    With unit="admission" every document of an admission lands in the same
    split; with unit="document" documents are shuffled individually.
    """
    if spec.unit == "admission":
        keys = sorted({d.admission_id for d in corpus.documents})
    else:
        keys = sorted(d.doc_id for d in corpus.documents)
    rng = random.Random(spec.seed)
    rng.shuffle(keys)
    n = len(keys)
    n_train = int(round(spec.train_frac * n))
    n_val = int(round(spec.val_frac * n))
    n_train = min(n_train, n)
    n_val = min(n_val, n - n_train)
    groups = (set(keys[:n_train]), set(keys[n_train : n_train + n_val]), set(keys[n_train + n_val :]))

    def member(doc: Document) -> str:
        return doc.admission_id if spec.unit == "admission" else doc.doc_id

    parts = tuple(
        Corpus(tuple(d for d in corpus.documents if member(d) in group), label=f"{corpus.label}:{name}")
        for group, name in zip(groups, ("train", "val", "test"))
    )
    return parts


def stats(
    corpus: Corpus,
    tokenizer: Callable[[str], Iterable],
    test_corpus: Corpus | None = None,
) -> CorpusStats:
    """Descriptive statistics; vocab size is counted over the designated test
    split (the corpus itself when none is given)."""
    n_docs = len(corpus)
    avg_len = sum(len(d.text) for d in corpus.documents) / n_docs if n_docs else 0.0
    note_types = {d.note_type for d in corpus.documents}
    vocab_source = corpus if test_corpus is None else test_corpus
    vocab: set = set()
    for doc in vocab_source.documents:
        vocab.update(tokenizer(doc.text))
    return CorpusStats(
        n_docs=n_docs,
        avg_char_length=avg_len,
        n_note_types=len(note_types),
        test_vocab_size=len(vocab),
    )


def group_sequences(corpus: Corpus) -> list[NoteSequence]:
    """One NoteSequence per (admission_id, note_type), docs sorted by
    (updated_at, doc_id)."""
    groups: dict[tuple[str, str], list[Document]] = defaultdict(list)
    for doc in corpus.documents:
        groups[(doc.admission_id, doc.note_type)].append(doc)
    sequences = []
    for (admission_id, note_type) in sorted(groups):
        docs = sorted(groups[(admission_id, note_type)], key=lambda d: (d.updated_at, d.doc_id))
        sequences.append(NoteSequence(admission_id=admission_id, note_type=note_type, docs=tuple(docs)))
    return sequences
