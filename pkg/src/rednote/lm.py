"""Smoothed n-gram causal language model and entropy/perplexity evaluation.

The model is an interpolated modified Kneser-Ney estimator: the highest order
uses raw counts, lower orders use continuation counts, and the recursion
terminates in a uniform distribution over the full vocabulary, so every token
has probability > 0 and every conditional distribution sums to one.

Evaluation concatenates documents with a reserved boundary token and scores
the stream in strided sliding windows: each window conditions on its own
content and only the tokens past the previous window's end are scored, so
every position is scored exactly once.  All log probabilities are base 2.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_ORDER = 5
DEFAULT_WINDOW = 768
DEFAULT_STRIDE = 384
MIN_DISCOUNT = 1e-4

MODEL_FORMAT_VERSION = "knlm-v1"
TLP_FORMAT_VERSION = "tlp-v1"


class LmError(ValueError):
    """Raised for invalid model inputs, streams, or files."""


@dataclass(frozen=True)
class EvalWindowSpec:
    """Sliding-window evaluation geometry: window length W and stride S."""

    window_len: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE

    def __post_init__(self) -> None:
        if not 1 <= self.stride <= self.window_len:
            raise LmError(f"require 1 <= stride <= window_len, got S={self.stride}, W={self.window_len}")


@dataclass(frozen=True)
class EntropyReport:
    """Cross-entropy in bits/token with its perplexity and scoring context."""

    cross_entropy_bits: float
    perplexity: float
    n_scored_tokens: int
    upper_bound_bits: float | None


@dataclass(frozen=True)
class TokenLogProbStream:
    """Externally computed per-token base-2 log probabilities."""

    source_label: str
    records: tuple[tuple[int, int, float], ...]  # (position, token_id, logprob_bits)
    meta: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self) -> None:
        prev_pos = None
        for pos, tid, lp2 in self.records:
            if not math.isfinite(lp2):
                raise LmError(f"non-finite log probability at position {pos}")
            if lp2 > 0.0:
                raise LmError(f"positive log probability {lp2} at position {pos}")
            if tid < 0:
                raise LmError(f"negative token id at position {pos}")
            if prev_pos is not None and pos <= prev_pos:
                raise LmError(f"positions must be strictly increasing (at position {pos})")
            prev_pos = pos


def _normalize_streams(token_streams) -> list[list[int]]:
    """Accept a flat id sequence or an iterable of per-document sequences."""
    streams = list(token_streams)
    if streams and isinstance(streams[0], int):
        return [streams]
    return [list(s) for s in streams]


def _count_of_counts_discounts(counts: Iterable[int]) -> tuple[float, float, float]:
    """Modified Kneser-Ney discounts D1, D2, D3+ from count-of-count statistics.

    Where the count-of-count evidence is degenerate (some n_j is zero, as on
    tiny corpora) the affected discount falls back to j*Y instead of the full
    j, which would zero out that count class entirely.
    """
    n = Counter()
    for c in counts:
        if c <= 4:
            n[c] += 1
    y = n[1] / (n[1] + 2 * n[2]) if n[1] > 0 and n[2] > 0 else 0.5
    d1 = 1.0 - 2.0 * y * (n[2] / n[1]) if n[1] > 0 and n[2] > 0 else 1.0 * y
    d2 = 2.0 - 3.0 * y * (n[3] / n[2]) if n[2] > 0 and n[3] > 0 else 2.0 * y
    d3 = 3.0 - 4.0 * y * (n[4] / n[3]) if n[3] > 0 and n[4] > 0 else 3.0 * y
    # Clamp into (0, j]: discounts above j would over-credit the backoff mass
    # and break normalization; a tiny floor keeps all probabilities positive.
    return (
        min(max(d1, MIN_DISCOUNT), 1.0),
        min(max(d2, MIN_DISCOUNT), 2.0),
        min(max(d3, MIN_DISCOUNT), 3.0),
    )


class NgramModel:
    """Interpolated modified Kneser-Ney n-gram model over a fixed vocabulary.

    Token ids live in [0, vocab_size); id vocab_size is the reserved document
    boundary symbol, so the model distribution has vocab_size + 1 outcomes.
    """

    def __init__(
        self,
        order: int,
        vocab_size: int,
        raw_counts: dict[int, dict[tuple, Counter]],
        discount_override: float | None = None,
        tokenizer_hash: str | None = None,
    ):
        if order < 1:
            raise LmError(f"order must be >= 1, got {order}")
        if vocab_size < 1:
            raise LmError(f"vocab_size must be >= 1, got {vocab_size}")
        self.order = order
        self.vocab_size = vocab_size
        self.discount_override = discount_override
        self.tokenizer_hash = tokenizer_hash
        self._raw = raw_counts
        self._build_tables()

    @property
    def boundary_id(self) -> int:
        return self.vocab_size

    @property
    def model_vocab_size(self) -> int:
        return self.vocab_size + 1

    def _build_tables(self) -> None:
        # Active table per n-gram level: raw counts at the top, continuation
        # counts (distinct left extensions) below.
        self._tables: dict[int, dict[tuple, Counter]] = {self.order: self._raw[self.order]}
        for lvl in range(self.order - 1, 0, -1):
            cont: dict[tuple, Counter] = defaultdict(Counter)
            for ctx, counter in self._raw[lvl + 1].items():
                suffix = ctx[1:]
                for token in counter:
                    cont[suffix][token] += 1
            self._tables[lvl] = dict(cont)

        self._discounts: dict[int, tuple[float, float, float]] = {}
        self._ctx_stats: dict[int, dict[tuple, tuple[int, int, int, int]]] = {}
        for lvl in range(1, self.order + 1):
            table = self._tables[lvl]
            if self.discount_override is not None:
                d = self.discount_override
                self._discounts[lvl] = (min(d, 1.0), min(d, 2.0), min(d, 3.0))
            else:
                self._discounts[lvl] = _count_of_counts_discounts(
                    c for counter in table.values() for c in counter.values()
                )
            stats = {}
            for ctx, counter in table.items():
                total = sum(counter.values())
                n1 = n2 = n3p = 0
                for c in counter.values():
                    if c == 1:
                        n1 += 1
                    elif c == 2:
                        n2 += 1
                    else:
                        n3p += 1
                stats[ctx] = (total, n1, n2, n3p)
            self._ctx_stats[lvl] = stats

    def _prob(self, token: int, context: tuple) -> float:
        lvl = len(context) + 1
        if lvl == 1:
            table = self._tables[1]
            stats = self._ctx_stats[1].get(())
            uniform = 1.0 / self.model_vocab_size
            if stats is None or stats[0] == 0:
                return uniform
            total, n1, n2, n3p = stats
            d1, d2, d3 = self._discounts[1]
            c = table[()].get(token, 0)
            disc = d1 if c == 1 else d2 if c == 2 else d3
            gamma = (d1 * n1 + d2 * n2 + d3 * n3p) / total
            return max(c - disc, 0.0) / total + gamma * uniform
        stats = self._ctx_stats[lvl].get(context)
        if stats is None or stats[0] == 0:
            return self._prob(token, context[1:])
        total, n1, n2, n3p = stats
        d1, d2, d3 = self._discounts[lvl]
        c = self._tables[lvl][context].get(token, 0)
        disc = d1 if c == 1 else d2 if c == 2 else d3
        gamma = (d1 * n1 + d2 * n2 + d3 * n3p) / total
        return max(c - disc, 0.0) / total + gamma * self._prob(token, context[1:])

    def prob(self, token: int, context: Sequence[int] = ()) -> float:
        """Smoothed conditional probability; only the last order-1 context
        tokens are used."""
        if not 0 <= token <= self.boundary_id:
            raise LmError(f"token id {token} outside model vocabulary [0, {self.boundary_id}]")
        ctx = tuple(context[-(self.order - 1) :]) if self.order > 1 else ()
        return self._prob(token, ctx)

    def log_prob(self, token: int, context: Sequence[int] = ()) -> float:
        return math.log2(self.prob(token, context))


def fit(
    token_streams,
    order: int = DEFAULT_ORDER,
    vocab_size: int | None = None,
    discount_params: float | None = None,
    tokenizer_hash: str | None = None,
) -> NgramModel:
    """Fit the n-gram model on one or more per-document token streams.

    Documents are joined with the reserved boundary token before counting, so
    boundary crossings are explicit events rather than spurious contexts.
    """
    docs = _normalize_streams(token_streams)
    docs = [d for d in docs if d]
    if not docs:
        raise LmError("cannot fit on an empty token stream")
    if order < 1:
        raise LmError(f"order must be >= 1, got {order}")
    max_id = max(max(d) for d in docs)
    if vocab_size is None:
        vocab_size = max_id + 1
    elif max_id >= vocab_size:
        raise LmError(f"token id {max_id} outside vocab of size {vocab_size}")

    boundary = vocab_size
    stream: list[int] = []
    for i, doc in enumerate(docs):
        if i > 0:
            stream.append(boundary)
        stream.extend(doc)

    raw: dict[int, dict[tuple, Counter]] = {}
    for n in range(1, order + 1):
        table: dict[tuple, Counter] = defaultdict(Counter)
        for i in range(len(stream) - n + 1):
            table[tuple(stream[i : i + n - 1])][stream[i + n - 1]] += 1
        raw[n] = dict(table)
    return NgramModel(
        order=order,
        vocab_size=vocab_size,
        raw_counts=raw,
        discount_override=discount_params,
        tokenizer_hash=tokenizer_hash,
    )


def log_prob(model: NgramModel, token: int, context: Sequence[int] = ()) -> float:
    """Base-2 log of the smoothed conditional probability (always finite)."""
    return model.log_prob(token, context)


def cross_entropy(
    model: NgramModel,
    token_streams,
    window_spec: EvalWindowSpec = EvalWindowSpec(),
) -> EntropyReport:
    """Strided sliding-window cross-entropy of the model on a token stream.

    Windows of W tokens advance by S; within each window only the tokens past
    the previous window's end are scored, conditioned on the window content to
    their left, so every position is scored exactly once.
    """
    docs = _normalize_streams(token_streams)
    docs = [d for d in docs if d]
    stream: list[int] = []
    for i, doc in enumerate(docs):
        if i > 0:
            stream.append(model.boundary_id)
        stream.extend(doc)
    n = len(stream)
    if n < 2:
        raise LmError(f"evaluation stream must hold at least 2 tokens, got {n}")

    w, s = window_spec.window_len, window_spec.stride
    ctx_len = model.order - 1
    logps: list[float] = []
    prev_end = 0
    begin = 0
    while True:
        end = min(begin + w, n)
        for t in range(prev_end, end):
            context = stream[max(begin, t - ctx_len) : t]
            logps.append(model.log_prob(stream[t], context))
        prev_end = end
        if end == n:
            break
        begin += s
    ce = -math.fsum(logps) / len(logps)
    return EntropyReport(
        cross_entropy_bits=ce,
        perplexity=2.0**ce,
        n_scored_tokens=len(logps),
        upper_bound_bits=math.log2(model.model_vocab_size),
    )


def cross_entropy_from_stream(stream: TokenLogProbStream) -> EntropyReport:
    """Entropy report from externally computed per-token log probabilities."""
    if not stream.records:
        raise LmError(f"token log-prob stream {stream.source_label!r} is empty")
    ce = -math.fsum(lp2 for _, _, lp2 in stream.records) / len(stream.records)
    vocab_size = stream.meta.get("vocab_size")
    return EntropyReport(
        cross_entropy_bits=ce,
        perplexity=2.0**ce,
        n_scored_tokens=len(stream.records),
        upper_bound_bits=math.log2(vocab_size) if vocab_size else None,
    )


def entropy_upper_bound(vocab) -> float:
    """log2 |V|: entropy of the uniform distribution over the vocabulary."""
    size = vocab if isinstance(vocab, int) else len(vocab)
    if size < 1:
        raise LmError(f"vocabulary must have at least 1 symbol, got {size}")
    return math.log2(size)


def ppl_to_bits(ppl: float) -> float:
    """Convert perplexity to cross-entropy bits/token via log2."""
    if ppl < 1.0:
        raise LmError(f"perplexity must be >= 1, got {ppl}")
    return math.log2(ppl)


def efficiency_ratio(bits_reference: float, bits_target: float) -> float:
    """How many times fewer bits/token the target corpus needs than the reference."""
    if bits_reference <= 0 or bits_target <= 0:
        raise LmError(f"bits must be positive, got {bits_reference} and {bits_target}")
    return bits_reference / bits_target


def save_model(model: NgramModel, path: str | Path) -> None:
    counts = {
        str(n): {" ".join(map(str, ctx)): dict(sorted((str(t), c) for t, c in counter.items()))
                 for ctx, counter in table.items()}
        for n, table in model._raw.items()
    }
    payload = {
        "format": MODEL_FORMAT_VERSION,
        "order": model.order,
        "vocab_size": model.vocab_size,
        "discount_override": model.discount_override,
        "tokenizer_hash": model.tokenizer_hash,
        "counts": counts,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> NgramModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LmError(f"malformed model file {path}: {exc.msg} at offset {exc.pos}") from exc
    if payload.get("format") != MODEL_FORMAT_VERSION:
        raise LmError(f"malformed model file {path}: bad or missing format header")
    raw: dict[int, dict[tuple, Counter]] = {}
    for n_str, table in payload["counts"].items():
        parsed: dict[tuple, Counter] = {}
        for ctx_str, counter in table.items():
            ctx = tuple(int(t) for t in ctx_str.split()) if ctx_str else ()
            parsed[ctx] = Counter({int(t): c for t, c in counter.items()})
        raw[int(n_str)] = parsed
    return NgramModel(
        order=payload["order"],
        vocab_size=payload["vocab_size"],
        raw_counts=raw,
        discount_override=payload.get("discount_override"),
        tokenizer_hash=payload.get("tokenizer_hash"),
    )


def write_tlp(stream: TokenLogProbStream, path: str | Path) -> None:
    header = {"format": TLP_FORMAT_VERSION, "source": stream.source_label}
    header.update(stream.meta)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True))
        fh.write("\n")
        for pos, tid, lp2 in stream.records:
            fh.write(json.dumps({"pos": pos, "tid": tid, "lp2": lp2}, sort_keys=True))
            fh.write("\n")


def read_tlp(path: str | Path) -> TokenLogProbStream:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip()]
    if not lines:
        raise LmError(f"{path}: empty token log-prob file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LmError(f"{path}:1: malformed header: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("format") != TLP_FORMAT_VERSION:
        raise LmError(f"{path}: bad or missing tlp-v1 header")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            records.append((int(obj["pos"]), int(obj["tid"]), float(obj["lp2"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise LmError(f"{path}:{lineno}: malformed record: {exc}") from exc
    meta = {k: v for k, v in header.items() if k not in ("format", "source")}
    return TokenLogProbStream(
        source_label=str(header.get("source", path.stem)),
        records=tuple(records),
        meta=meta,
    )
