"""Synthetic corpora and token sources with analytically known answers.

The redundancy generator copies an exact prefix fraction of each note into
its successor and pads with globally unique fresh tokens, so unigram recall
of every successive pair is known by construction.  The Markov generator
carries its analytic entropy rate alongside the sampled stream.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .corpus import Corpus, Document


class SynthError(ValueError):
    """Raised for invalid plans or sources."""


@dataclass(frozen=True)
class TypePlan:
    type_label: str
    redundancy: float
    notes_per_admission: int
    tokens_per_note: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.redundancy <= 1.0:
            raise SynthError(f"redundancy must lie in [0, 1], got {self.redundancy}")
        if self.tokens_per_note < 1:
            raise SynthError(f"tokens_per_note must be >= 1, got {self.tokens_per_note}")
        if self.notes_per_admission < 1:
            raise SynthError(f"notes_per_admission must be >= 1, got {self.notes_per_admission}")


@dataclass(frozen=True)
class RedundancyPlan:
    note_types: tuple[TypePlan, ...]
    n_admissions: int
    vocab_size: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_admissions < 1:
            raise SynthError(f"n_admissions must be >= 1, got {self.n_admissions}")
        if not self.note_types:
            raise SynthError("plan needs at least one note type")


def generate_redundant_corpus(plan: RedundancyPlan, label: str = "synthetic") -> Corpus:
    """Materialize a plan: note i+1 copies the first ceil(r*len) tokens of
    note i and fills the rest with never-before-used tokens."""
    rng = random.Random(plan.seed)
    pool = list(range(plan.vocab_size))
    rng.shuffle(pool)
    cursor = 0

    def draw(count: int) -> list[str]:
        nonlocal cursor
        if cursor + count > len(pool):
            raise SynthError(
                f"vocab exhausted: plan needs more than {plan.vocab_size} distinct tokens"
            )
        chunk = [str(t) for t in pool[cursor : cursor + count]]
        cursor += count
        return chunk

    base_time = datetime(2020, 1, 1)
    docs: list[Document] = []
    doc_counter = 0
    for adm_idx in range(plan.n_admissions):
        admission_id = f"adm{adm_idx:04d}"
        for type_idx, tp in enumerate(plan.note_types):
            prev_tokens: list[str] | None = None
            for note_idx in range(tp.notes_per_admission):
                length = tp.tokens_per_note
                if prev_tokens is None:
                    tokens = draw(length)
                else:
                    n_copy = math.ceil(tp.redundancy * length)
                    tokens = prev_tokens[:n_copy] + draw(length - n_copy)
                docs.append(
                    Document(
                        doc_id=f"d{doc_counter:06d}",
                        admission_id=admission_id,
                        note_type=tp.type_label,
                        updated_at=base_time + timedelta(days=adm_idx, hours=type_idx, minutes=note_idx),
                        text=" ".join(tokens),
                    )
                )
                doc_counter += 1
                prev_tokens = tokens
    return Corpus(tuple(docs), label=label)


@dataclass(frozen=True)
class MarkovSource:
    """Finite-state Markov chain with its stationary distribution and
    analytic entropy rate in bits/symbol."""

    transitions: np.ndarray
    stationary: np.ndarray = field(init=False)
    entropy_rate_bits: float = field(init=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.transitions, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise SynthError(f"transition matrix must be square, got shape {p.shape}")
        if np.any(p < 0):
            raise SynthError("transition probabilities must be non-negative")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-12:
            raise SynthError("transition matrix rows must sum to 1")
        object.__setattr__(self, "transitions", p)
        n = p.shape[0]
        a = np.vstack([p.T - np.eye(n), np.ones(n)])
        b = np.concatenate([np.zeros(n), [1.0]])
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        pi = pi / pi.sum()
        object.__setattr__(self, "stationary", pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        row_entropy = -(p * logs).sum(axis=1)
        object.__setattr__(self, "entropy_rate_bits", float(pi @ row_entropy))

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @classmethod
    def uniform(cls, n_symbols: int) -> "MarkovSource":
        """IID uniform source over n symbols: entropy rate log2 n."""
        if n_symbols < 1:
            raise SynthError(f"need at least 1 symbol, got {n_symbols}")
        return cls(np.full((n_symbols, n_symbols), 1.0 / n_symbols))

    @classmethod
    def two_state(cls, p_stay: float) -> "MarkovSource":
        """Symmetric two-state chain: entropy rate is the binary entropy of p_stay."""
        if not 0.0 <= p_stay <= 1.0:
            raise SynthError(f"p_stay must lie in [0, 1], got {p_stay}")
        return cls(np.array([[p_stay, 1.0 - p_stay], [1.0 - p_stay, p_stay]]))

    @classmethod
    def cycle(cls, n_states: int) -> "MarkovSource":
        """Deterministic cycle: entropy rate 0."""
        p = np.zeros((n_states, n_states))
        for s in range(n_states):
            p[s, (s + 1) % n_states] = 1.0
        return cls(p)


def generate_markov_stream(source: MarkovSource, n_tokens: int, seed: int) -> tuple[list[int], float]:
    """Sample n_tokens symbols (initial state from the stationary
    distribution) and return them with the analytic entropy rate."""
    if n_tokens < 1:
        raise SynthError(f"n_tokens must be >= 1, got {n_tokens}")
    rng = np.random.default_rng(seed)
    cumulative = np.cumsum(source.transitions, axis=1)
    uniforms = rng.random(n_tokens)
    state = int(np.searchsorted(np.cumsum(source.stationary), uniforms[0], side="right"))
    state = min(state, source.n_states - 1)
    stream = [state]
    for u in uniforms[1:]:
        state = int(np.searchsorted(cumulative[state], u, side="right"))
        state = min(state, source.n_states - 1)
        stream.append(state)
    return stream, source.entropy_rate_bits
