import math
from collections import Counter

import numpy as np
import pytest

from rednote.corpus import group_sequences
from rednote.pipeline import aggregate_per_type, pairwise_scores
from rednote.synth import (
    MarkovSource,
    RedundancyPlan,
    SynthError,
    TypePlan,
    generate_markov_stream,
    generate_redundant_corpus,
)


def plan_for(r, notes=5, length=100, admissions=20, vocab=500_000, seed=0):
    return RedundancyPlan(
        note_types=(TypePlan("t", r, notes, length),),
        n_admissions=admissions,
        vocab_size=vocab,
        seed=seed,
    )


class TestRedundantCorpus:
    def test_full_redundancy_identical_pairs(self):
        corpus = generate_redundant_corpus(plan_for(1.0, admissions=3))
        records = pairwise_scores(group_sequences(corpus))
        assert all(r.score.rouge1.recall == 1.0 for r in records)
        assert all(r.score.gestalt == 1.0 for r in records)

    def test_zero_redundancy_disjoint_pairs(self):
        corpus = generate_redundant_corpus(plan_for(0.0, admissions=3))
        records = pairwise_scores(group_sequences(corpus))
        assert all(r.score.rouge1.recall == 0.0 for r in records)

    def test_half_redundancy_exact(self):
        corpus = generate_redundant_corpus(plan_for(0.5, admissions=3))
        records = pairwise_scores(group_sequences(corpus))
        assert all(r.score.rouge1.recall == 0.5 for r in records)

    def test_recall_equals_ceil_fraction(self):
        # r=0.33, len=10 -> copy ceil(3.3)=4 tokens -> recall exactly 0.4
        corpus = generate_redundant_corpus(plan_for(0.33, length=10, admissions=2))
        records = pairwise_scores(group_sequences(corpus))
        assert all(r.score.rouge1.recall == 0.4 for r in records)

    def test_pipeline_median_matches_plan(self):
        for r in (0.0, 0.5, 0.9):
            corpus = generate_redundant_corpus(plan_for(r, admissions=5))
            aggs = aggregate_per_type(pairwise_scores(group_sequences(corpus)))
            assert aggs[0].medians["rouge1_recall"] == r
            assert aggs[0].medians["gestalt"] >= r

    def test_vocab_exhaustion_rejected(self):
        with pytest.raises(SynthError, match="exhausted"):
            generate_redundant_corpus(plan_for(0.0, admissions=20, vocab=100))

    def test_deterministic_for_seed(self):
        a = generate_redundant_corpus(plan_for(0.5, admissions=2, seed=5))
        b = generate_redundant_corpus(plan_for(0.5, admissions=2, seed=5))
        assert a.documents == b.documents

    def test_tokens_globally_unique_across_sequences(self):
        corpus = generate_redundant_corpus(plan_for(0.0, notes=2, length=5, admissions=4))
        all_tokens = [t for d in corpus.documents for t in d.text.split()]
        assert len(all_tokens) == len(set(all_tokens))

    def test_plan_validation(self):
        with pytest.raises(SynthError):
            TypePlan("t", 1.5, 2, 10)
        with pytest.raises(SynthError):
            TypePlan("t", 0.5, 2, 0)
        with pytest.raises(SynthError):
            RedundancyPlan(note_types=(), n_admissions=1, vocab_size=10)


class TestMarkovSource:
    def test_uniform_rate(self):
        assert MarkovSource.uniform(16).entropy_rate_bits == pytest.approx(4.0)

    def test_two_state_rate_is_binary_entropy(self):
        p = 0.9
        expected = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        assert MarkovSource.two_state(p).entropy_rate_bits == pytest.approx(expected)
        assert expected == pytest.approx(0.469, abs=0.001)

    def test_cycle_rate_zero(self):
        assert MarkovSource.cycle(3).entropy_rate_bits == pytest.approx(0.0, abs=1e-12)

    def test_stationary_distribution(self):
        source = MarkovSource(np.array([[0.5, 0.5], [0.1, 0.9]]))
        pi = source.stationary
        assert pi @ source.transitions == pytest.approx(pi)
        assert pi.sum() == pytest.approx(1.0)

    def test_invalid_rows_rejected(self):
        with pytest.raises(SynthError):
            MarkovSource(np.array([[0.5, 0.6], [0.5, 0.5]]))
        with pytest.raises(SynthError):
            MarkovSource(np.array([[1.0, 0.0]]))


class TestMarkovStream:
    def test_deterministic_for_seed(self):
        source = MarkovSource.two_state(0.8)
        a, _ = generate_markov_stream(source, 1000, seed=3)
        b, _ = generate_markov_stream(source, 1000, seed=3)
        assert a == b

    def test_returns_analytic_rate(self):
        source = MarkovSource.uniform(4)
        _, rate = generate_markov_stream(source, 10, seed=0)
        assert rate == pytest.approx(2.0)

    def test_cycle_stream_is_cyclic(self):
        source = MarkovSource.cycle(3)
        stream, rate = generate_markov_stream(source, 30, seed=1)
        assert rate == pytest.approx(0.0, abs=1e-12)
        for prev, cur in zip(stream, stream[1:]):
            assert cur == (prev + 1) % 3

    def test_empirical_frequencies_converge_to_stationary(self):
        source = MarkovSource(np.array([[0.7, 0.3], [0.2, 0.8]]))
        stream, _ = generate_markov_stream(source, 100_000, seed=11)
        counts = Counter(stream)
        empirical = np.array([counts[0], counts[1]]) / len(stream)
        total_variation = 0.5 * np.abs(empirical - source.stationary).sum()
        assert total_variation < 0.01

    def test_n_tokens_validated(self):
        with pytest.raises(SynthError):
            generate_markov_stream(MarkovSource.uniform(2), 0, seed=0)
