"""Successive-note-pair scoring over grouped sequences and its aggregation.

Each adjacent pair in a note sequence is scored with the later note as
candidate and the earlier note as reference, so recall measures how much of
the previous note survives in the current one.  Pair scores pool per note
type into medians and roll up into token-weighted corpus averages.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from statistics import median
from typing import Sequence

from .corpus import NoteSequence
from .metrics import PRF, EmbeddingProvider, PairScore, RescaleBaseline, embed_score, gestalt_ratio, rouge_l, rouge_n
from .tokenize import word_tokenize

LEXICAL_COMPONENTS = (
    "gestalt",
    "rouge1_precision",
    "rouge1_recall",
    "rouge1_f1",
    "rougeL_precision",
    "rougeL_recall",
    "rougeL_f1",
)
EMBED_COMPONENTS = ("embed_precision", "embed_recall", "embed_f1")


class PipelineError(ValueError):
    """Raised for invalid pipeline inputs."""


@dataclass(frozen=True)
class MetricConfig:
    """Which metrics to compute for each pair; embed needs a provider."""

    provider: EmbeddingProvider | None = None
    baseline: RescaleBaseline | None = None


@dataclass(frozen=True)
class PairRecord:
    admission_id: str
    note_type: str
    prev_doc_id: str
    next_doc_id: str
    score: PairScore
    pair_token_count: int


@dataclass(frozen=True)
class TypeAggregate:
    note_type: str
    n_pairs: int
    medians: dict[str, float]
    total_token_count: int


@dataclass(frozen=True)
class CorpusSummary:
    """Token-weighted averages per metric component over all pairs."""

    weighted: dict[str, float]
    total_token_count: int

    @property
    def gestalt(self) -> float:
        return self.weighted["gestalt"]

    @property
    def rouge_recall(self) -> float:
        return self.weighted["rouge1_recall"]

    @property
    def rouge_precision(self) -> float:
        return self.weighted["rouge1_precision"]

    @property
    def embed_recall(self) -> float | None:
        return self.weighted.get("embed_recall")

    @property
    def embed_precision(self) -> float | None:
        return self.weighted.get("embed_precision")


def score_components(score: PairScore) -> dict[str, float]:
    """Flatten a PairScore into named component values."""
    out = {
        "gestalt": score.gestalt,
        "rouge1_precision": score.rouge1.precision,
        "rouge1_recall": score.rouge1.recall,
        "rouge1_f1": score.rouge1.f1,
        "rougeL_precision": score.rougeL.precision,
        "rougeL_recall": score.rougeL.recall,
        "rougeL_f1": score.rougeL.f1,
    }
    if score.embed is not None:
        out["embed_precision"] = score.embed.precision
        out["embed_recall"] = score.embed.recall
        out["embed_f1"] = score.embed.f1
    return out


def score_pair(cand_tokens: list[str], ref_tokens: list[str], config: MetricConfig,
               cand_doc_id: str | None = None, ref_doc_id: str | None = None) -> PairScore:
    embed: PRF | None = None
    if config.provider is not None and cand_tokens and ref_tokens:
        embed = embed_score(
            cand_tokens,
            ref_tokens,
            config.provider,
            baseline=config.baseline,
            cand_doc_id=cand_doc_id,
            ref_doc_id=ref_doc_id,
        )
    return PairScore(
        gestalt=gestalt_ratio(cand_tokens, ref_tokens),
        rouge1=rouge_n(cand_tokens, ref_tokens, 1),
        rougeL=rouge_l(cand_tokens, ref_tokens),
        embed=embed,
        cand_tokens=len(cand_tokens),
        ref_tokens=len(ref_tokens),
    )


def pairwise_scores(sequences: Sequence[NoteSequence], config: MetricConfig = MetricConfig()) -> list[PairRecord]:
    """Score every adjacent pair of every sequence with >= 2 documents.

    The later note is the candidate and the earlier note the reference.
    Records come back sorted by (note_type, admission_id, prev_doc_id).
    """
    records: list[PairRecord] = []
    for seq in sequences:
        for prev_doc, next_doc in zip(seq.docs, seq.docs[1:]):
            cand = word_tokenize(next_doc.text)
            ref = word_tokenize(prev_doc.text)
            score = score_pair(cand, ref, config, cand_doc_id=next_doc.doc_id, ref_doc_id=prev_doc.doc_id)
            records.append(
                PairRecord(
                    admission_id=seq.admission_id,
                    note_type=seq.note_type,
                    prev_doc_id=prev_doc.doc_id,
                    next_doc_id=next_doc.doc_id,
                    score=score,
                    pair_token_count=len(cand) + len(ref),
                )
            )
    records.sort(key=lambda r: (r.note_type, r.admission_id, r.prev_doc_id))
    return records


def aggregate_per_type(records: Sequence[PairRecord], per_admission: bool = False) -> list[TypeAggregate]:
    """Median per metric component for each note type.

    Default pools all pairs of a type across admissions before taking the
    median; per_admission=True instead takes per-admission medians first and
    averages those.
    """
    by_type: dict[str, list[PairRecord]] = defaultdict(list)
    for rec in records:
        by_type[rec.note_type].append(rec)
    aggregates = []
    for note_type in sorted(by_type):
        recs = by_type[note_type]
        medians: dict[str, float] = {}
        if per_admission:
            by_adm: dict[str, list[dict[str, float]]] = defaultdict(list)
            for rec in recs:
                by_adm[rec.admission_id].append(score_components(rec.score))
            adm_medians: dict[str, list[float]] = defaultdict(list)
            for adm_scores in by_adm.values():
                for comp in LEXICAL_COMPONENTS + EMBED_COMPONENTS:
                    values = [s[comp] for s in adm_scores if comp in s]
                    if values:
                        adm_medians[comp].append(median(values))
            for comp, values in adm_medians.items():
                medians[comp] = math.fsum(values) / len(values)
        else:
            pooled: dict[str, list[float]] = defaultdict(list)
            for rec in recs:
                for comp, value in score_components(rec.score).items():
                    pooled[comp].append(value)
            for comp, values in pooled.items():
                medians[comp] = median(values)
        aggregates.append(
            TypeAggregate(
                note_type=note_type,
                n_pairs=len(recs),
                medians=medians,
                total_token_count=sum(r.pair_token_count for r in recs),
            )
        )
    return aggregates


def top_types(aggregates: Sequence[TypeAggregate], k: int, key: str = "rouge1_f1") -> list[TypeAggregate]:
    """First k aggregates by descending key median, ties by note_type."""
    if k < 1:
        raise PipelineError(f"k must be >= 1, got {k}")
    ranked = sorted(aggregates, key=lambda a: (-a.medians.get(key, -math.inf), a.note_type))
    return ranked[:k]


def weighted_summary(records: Sequence[PairRecord]) -> CorpusSummary:
    """Token-count-weighted average of every component over all pairs."""
    if not records:
        raise PipelineError("cannot summarize an empty record list")
    sums: dict[str, list[float]] = defaultdict(list)
    weights: dict[str, list[float]] = defaultdict(list)
    for rec in records:
        w = float(rec.pair_token_count)
        for comp, value in score_components(rec.score).items():
            sums[comp].append(w * value)
            weights[comp].append(w)
    weighted = {comp: math.fsum(sums[comp]) / math.fsum(weights[comp]) for comp in sums}
    return CorpusSummary(
        weighted=weighted,
        total_token_count=sum(r.pair_token_count for r in records),
    )


_CSV_COLUMNS = (
    ["admission_id", "note_type", "prev_doc_id", "next_doc_id", "pair_token_count", "cand_tokens", "ref_tokens"]
    + list(LEXICAL_COMPONENTS)
    + list(EMBED_COMPONENTS)
)


def write_pair_records_csv(records: Sequence[PairRecord], path: str | Path) -> None:
    """One row per pair, one column per metric component (full precision)."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for rec in records:
            comps = score_components(rec.score)
            row = [
                rec.admission_id,
                rec.note_type,
                rec.prev_doc_id,
                rec.next_doc_id,
                rec.pair_token_count,
                rec.score.cand_tokens,
                rec.score.ref_tokens,
            ]
            row += [repr(comps[c]) if c in comps else "" for c in LEXICAL_COMPONENTS + EMBED_COMPONENTS]
            writer.writerow(row)


def read_pair_records_csv(path: str | Path) -> list[PairRecord]:
    records = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(_CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise PipelineError(f"{path}: missing columns: {sorted(missing)}")
        for row in reader:
            embed = None
            if row["embed_f1"]:
                embed = PRF(float(row["embed_precision"]), float(row["embed_recall"]), float(row["embed_f1"]))
            score = PairScore(
                gestalt=float(row["gestalt"]),
                rouge1=PRF(float(row["rouge1_precision"]), float(row["rouge1_recall"]), float(row["rouge1_f1"])),
                rougeL=PRF(float(row["rougeL_precision"]), float(row["rougeL_recall"]), float(row["rougeL_f1"])),
                embed=embed,
                cand_tokens=int(row["cand_tokens"]),
                ref_tokens=int(row["ref_tokens"]),
            )
            records.append(
                PairRecord(
                    admission_id=row["admission_id"],
                    note_type=row["note_type"],
                    prev_doc_id=row["prev_doc_id"],
                    next_doc_id=row["next_doc_id"],
                    score=score,
                    pair_token_count=int(row["pair_token_count"]),
                )
            )
    return records
