"""Result-table assembly and deterministic CSV/JSON/Markdown emission.

Every table formats floats the same way (2 decimals for perplexities and
scores, 3 for bits) and renders missing cells as an en dash, so output bytes
are identical across runs and platforms for identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

from .lm import EntropyReport, efficiency_ratio, ppl_to_bits
from .pipeline import EMBED_COMPONENTS, LEXICAL_COMPONENTS, CorpusSummary, TypeAggregate
from .corpus import CorpusStats

MISSING = "–"  # en dash for absent cells
FORMATS = ("csv", "json", "markdown")

_KIND_DECIMALS = {"ppl": 2, "score": 2, "bits": 3, "ratio": 2}


class ReportError(ValueError):
    """Raised for malformed report inputs or unknown formats."""


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "text"  # text | count | ppl | score | bits | ratio


@dataclass
class Table:
    title: str
    columns: list[Column]
    rows: list[list] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)

    def to_table(self) -> "Table":
        return self


def _format_cell(value, kind: str) -> str:
    if value is None:
        return MISSING
    if kind in _KIND_DECIMALS:
        return f"{value:.{_KIND_DECIMALS[kind]}f}"
    if kind == "count":
        return str(int(value))
    return str(value)


def _json_cell(value, kind: str):
    if value is None:
        return None
    if kind in _KIND_DECIMALS:
        return round(float(value), _KIND_DECIMALS[kind])
    if kind == "count":
        return int(value)
    return str(value)


@dataclass(frozen=True)
class PplRow:
    """One trained model's perplexities: validation, test, and extra corpora."""

    train_corpus: str
    test: EntropyReport
    val: EntropyReport | None = None
    holdouts: tuple[tuple[str, EntropyReport], ...] = ()


@dataclass
class PplTable:
    rows: list[PplRow]
    reference: str | None = None

    def to_table(self) -> Table:
        holdout_names: list[str] = []
        for row in self.rows:
            for name, _ in row.holdouts:
                if name not in holdout_names:
                    holdout_names.append(name)
        columns = [Column("Dataset")]
        columns += [Column("Val", "ppl"), Column("Test", "ppl")]
        columns += [Column(name, "ppl") for name in holdout_names]
        columns += [Column("Val (bits)", "bits"), Column("Test (bits)", "bits")]
        columns += [Column(f"{name} (bits)", "bits") for name in holdout_names]
        cells = []
        for row in self.rows:
            holdouts = dict(row.holdouts)
            ppls = [row.val.perplexity if row.val else None, row.test.perplexity]
            ppls += [holdouts[n].perplexity if n in holdouts else None for n in holdout_names]
            bits = [ppl_to_bits(p) if p is not None else None for p in ppls]
            cells.append([row.train_corpus] + ppls + bits)
        footer = []
        if self.reference is not None and len(self.rows) > 1:
            ref_rows = [r for r in self.rows if r.train_corpus == self.reference]
            if not ref_rows:
                raise ReportError(f"reference row {self.reference!r} not found")
            ref_bits = ppl_to_bits(ref_rows[0].test.perplexity)
            ratios = [
                efficiency_ratio(ref_bits, ppl_to_bits(r.test.perplexity))
                for r in self.rows
                if r.train_corpus != self.reference
            ]
            footer.append(
                f"efficiency ratio vs {self.reference}: {min(ratios):.2f}×{MISSING}{max(ratios):.2f}×"
            )
        return Table(title="Perplexity by dataset", columns=columns, rows=cells, footer=footer)


@dataclass
class CrossMatrix:
    """Perplexity of models trained on one corpus and tested on another."""

    train_labels: list[str]
    test_labels: list[str]
    cells: dict[tuple[str, str], float]

    def to_table(self) -> Table:
        columns = [Column("Training")] + [Column(t, "ppl") for t in self.test_labels]
        rows = [
            [train] + [self.cells.get((train, test)) for test in self.test_labels]
            for train in self.train_labels
        ]
        return Table(title="Cross-dataset perplexity", columns=columns, rows=rows)


def build_ppl_table(entries: Sequence[PplRow], reference: str | None = None) -> PplTable:
    """Assemble the perplexity table; rows stay in input order.  When a
    reference row is named, a footer reports the min-max efficiency-ratio
    range of the remaining rows against it."""
    return PplTable(rows=list(entries), reference=reference)


def build_cross_matrix(entries: Sequence[tuple[str, str, float]]) -> CrossMatrix:
    """Dense (train x test) matrix; missing cells render as an en dash."""
    train_labels: list[str] = []
    test_labels: list[str] = []
    cells: dict[tuple[str, str], float] = {}
    for train, test, ppl in entries:
        key = (train, test)
        if key in cells:
            raise ReportError(f"duplicate cross-matrix entry for {key}")
        cells[key] = ppl
        if train not in train_labels:
            train_labels.append(train)
        if test not in test_labels:
            test_labels.append(test)
    return CrossMatrix(train_labels=train_labels, test_labels=test_labels, cells=cells)


def build_stats_table(entries: Sequence[tuple[str, CorpusStats]]) -> Table:
    columns = [
        Column("Dataset"),
        Column("# Docs", "count"),
        Column("Avg. Length", "score"),
        Column("# Note Types", "count"),
        Column("Test Set Vocab Size", "count"),
    ]
    rows = [
        [label, s.n_docs, s.avg_char_length, s.n_note_types, s.test_vocab_size]
        for label, s in entries
    ]
    return Table(title="Descriptive statistics", columns=columns, rows=rows)


def build_type_table(aggregates: Sequence[TypeAggregate]) -> Table:
    components = list(LEXICAL_COMPONENTS)
    if any(c in agg.medians for agg in aggregates for c in EMBED_COMPONENTS):
        components += list(EMBED_COMPONENTS)
    columns = [Column("Note Type"), Column("# Pairs", "count"), Column("Tokens", "count")]
    columns += [Column(c, "score") for c in components]
    rows = [
        [agg.note_type, agg.n_pairs, agg.total_token_count]
        + [agg.medians.get(c) for c in components]
        for agg in aggregates
    ]
    return Table(title="Per-type median scores", columns=columns, rows=rows)


def build_type_long_table(aggregates: Sequence[TypeAggregate]) -> Table:
    """Long format (note_type, metric, component, value) for external plotting."""
    columns = [Column("note_type"), Column("metric"), Column("component"), Column("value", "score")]
    rows = []
    for agg in aggregates:
        for comp in sorted(agg.medians):
            metric, _, part = comp.partition("_")
            rows.append([agg.note_type, metric, part or "ratio", agg.medians[comp]])
    return Table(title="Per-type median scores (long)", columns=columns, rows=rows)


def build_summary_table(summaries: Sequence[tuple[str, CorpusSummary]]) -> Table:
    columns = [
        Column("Dataset"),
        Column("Gestalt", "score"),
        Column("ROUGE Rec", "score"),
        Column("ROUGE Prec", "score"),
        Column("Embed Rec", "score"),
        Column("Embed Prec", "score"),
    ]
    rows = [
        [label, s.gestalt, s.rouge_recall, s.rouge_precision, s.embed_recall, s.embed_precision]
        for label, s in summaries
    ]
    return Table(title="Token-weighted average redundancy", columns=columns, rows=rows)


def build_entropy_table(entries: Sequence[tuple[str, EntropyReport]]) -> Table:
    columns = [
        Column("Split"),
        Column("PPL", "ppl"),
        Column("Cross-Entropy (bits)", "bits"),
        Column("Tokens", "count"),
        Column("Upper Bound (bits)", "bits"),
    ]
    rows = [
        [label, r.perplexity, r.cross_entropy_bits, r.n_scored_tokens, r.upper_bound_bits]
        for label, r in entries
    ]
    return Table(title="Cross-entropy report", columns=columns, rows=rows)


def emit(report_object, format: str) -> bytes:
    """Render a table to csv, json, or markdown bytes, deterministically."""
    if format not in FORMATS:
        raise ReportError(f"unknown format {format!r}; expected one of {FORMATS}")
    table = report_object.to_table()
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow([c.name for c in table.columns])
        for row in table.rows:
            writer.writerow([_format_cell(v, c.kind) for v, c in zip(row, table.columns)])
        for line in table.footer:
            writer.writerow([f"# {line}"])
        return buf.getvalue().encode("utf-8")
    if format == "json":
        payload = {
            "title": table.title,
            "columns": [c.name for c in table.columns],
            "rows": [
                [_json_cell(v, c.kind) for v, c in zip(row, table.columns)]
                for row in table.rows
            ],
            "footer": table.footer,
        }
        return (json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
    lines = [f"## {table.title}", ""]
    header = [c.name for c in table.columns]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in table.rows:
        lines.append("| " + " | ".join(_format_cell(v, c.kind) for v, c in zip(row, table.columns)) + " |")
    for line in table.footer:
        lines += ["", line]
    return ("\n".join(lines) + "\n").encode("utf-8")
