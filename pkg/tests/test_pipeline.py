import random

import pytest

from conftest import make_doc
from oracles import brute_median, brute_weighted_mean
from rednote.corpus import Corpus, group_sequences
from rednote.metrics import PRF, OneHotProvider, PairScore
from rednote.pipeline import (
    MetricConfig,
    PairRecord,
    PipelineError,
    aggregate_per_type,
    pairwise_scores,
    read_pair_records_csv,
    score_components,
    top_types,
    weighted_summary,
    write_pair_records_csv,
)


def corpus_from_texts(texts, admission="a1", note_type="t"):
    docs = tuple(
        make_doc(f"{admission}-{note_type}-{i}", admission_id=admission, note_type=note_type,
                 when=f"2020-01-01T{8 + i:02d}:00:00", text=text)
        for i, text in enumerate(texts)
    )
    return Corpus(docs, label="p")


def synthetic_record(i, note_type="t", admission="a1", gestalt=0.5, rouge1=None, weight=10):
    rouge1 = rouge1 if rouge1 is not None else PRF(0.5, 0.5, 0.5)
    score = PairScore(
        gestalt=gestalt, rouge1=rouge1, rougeL=rouge1, embed=None, cand_tokens=weight // 2,
        ref_tokens=weight - weight // 2,
    )
    return PairRecord(
        admission_id=admission, note_type=note_type, prev_doc_id=f"p{i}", next_doc_id=f"n{i}",
        score=score, pair_token_count=weight,
    )


class TestPairwiseScores:
    def test_three_docs_two_records(self):
        corpus = corpus_from_texts(["a b", "a c", "a d"])
        records = pairwise_scores(group_sequences(corpus))
        assert len(records) == 2
        assert (records[0].prev_doc_id, records[0].next_doc_id) == ("a1-t-0", "a1-t-1")

    def test_exact_copy_scores_one(self):
        corpus = corpus_from_texts(["alpha beta gamma", "alpha beta gamma"])
        rec = pairwise_scores(group_sequences(corpus))[0]
        assert rec.score.rouge1 == (1.0, 1.0, 1.0)
        assert rec.score.gestalt == 1.0

    def test_half_copy_pair_hand_counted(self):
        # next = first half of prev + equally many fresh tokens
        prev = [f"t{i}" for i in range(100)]
        nxt = prev[:50] + [f"f{i}" for i in range(50)]
        corpus = corpus_from_texts([" ".join(prev), " ".join(nxt)])
        rec = pairwise_scores(group_sequences(corpus))[0]
        assert rec.score.rouge1.recall == 0.5
        assert rec.score.rouge1.precision == 0.5
        assert rec.pair_token_count == 200

    def test_candidate_is_later_note(self):
        # prev has 4 tokens, next keeps 2 of them plus 2 fresh: recall is
        # measured against the previous note.
        corpus = corpus_from_texts(["w x y z", "w x q r"])
        rec = pairwise_scores(group_sequences(corpus))[0]
        assert rec.score.rouge1.recall == 0.5
        assert rec.score.cand_tokens == 4

    def test_singleton_sequences_skipped(self):
        corpus = corpus_from_texts(["only note"])
        assert pairwise_scores(group_sequences(corpus)) == []

    def test_record_count_invariant(self):
        rng = random.Random(2)
        docs = []
        for a in range(5):
            for t in ("x", "y"):
                for i in range(rng.randrange(1, 5)):
                    docs.append(
                        make_doc(f"d{a}-{t}-{i}", admission_id=f"a{a}", note_type=t,
                                 when=f"2020-01-01T{8 + i:02d}:00:00", text="w1 w2 w3")
                    )
        corpus = Corpus(tuple(docs), label="inv")
        seqs = group_sequences(corpus)
        records = pairwise_scores(seqs)
        assert len(records) == sum(max(0, len(s.docs) - 1) for s in seqs)

    def test_embed_included_with_provider(self):
        corpus = corpus_from_texts(["a b", "a b"])
        config = MetricConfig(provider=OneHotProvider())
        rec = pairwise_scores(group_sequences(corpus), config)[0]
        assert rec.score.embed == pytest.approx((1.0, 1.0, 1.0))


class TestAggregatePerType:
    def test_single_pair_identity(self):
        rec = synthetic_record(0, gestalt=0.7)
        agg = aggregate_per_type([rec])[0]
        assert agg.medians["gestalt"] == 0.7
        assert agg.n_pairs == 1

    def test_median_definition(self):
        records = [synthetic_record(i, gestalt=g) for i, g in enumerate((0.2, 0.9, 0.4))]
        agg = aggregate_per_type(records)[0]
        assert agg.medians["gestalt"] == 0.4

    def test_even_count_averages_central_values(self):
        records = [synthetic_record(i, gestalt=g) for i, g in enumerate((0.1, 0.2, 0.6, 0.9))]
        agg = aggregate_per_type(records)[0]
        assert agg.medians["gestalt"] == pytest.approx(0.4)

    def test_matches_brute_force_median(self):
        rng = random.Random(8)
        records = [
            synthetic_record(i, note_type=rng.choice("abc"), gestalt=rng.random())
            for i in range(500)
        ]
        for agg in aggregate_per_type(records):
            values = [r.score.gestalt for r in records if r.note_type == agg.note_type]
            assert agg.medians["gestalt"] == pytest.approx(brute_median(values), abs=1e-12)

    def test_permutation_invariant(self):
        rng = random.Random(9)
        records = [synthetic_record(i, gestalt=rng.random()) for i in range(50)]
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert aggregate_per_type(records) == aggregate_per_type(shuffled)

    def test_per_admission_variant(self):
        records = [
            synthetic_record(0, admission="a1", gestalt=0.0),
            synthetic_record(1, admission="a1", gestalt=0.2),
            synthetic_record(2, admission="a2", gestalt=1.0),
        ]
        pooled = aggregate_per_type(records)[0]
        per_adm = aggregate_per_type(records, per_admission=True)[0]
        assert pooled.medians["gestalt"] == 0.2
        assert per_adm.medians["gestalt"] == pytest.approx((0.1 + 1.0) / 2)


class TestTopTypes:
    @staticmethod
    def aggregates(scores: dict[str, float]):
        records = []
        for i, (note_type, f1) in enumerate(scores.items()):
            records.append(synthetic_record(i, note_type=note_type, rouge1=PRF(f1, f1, f1)))
        return aggregate_per_type(records)

    def test_takes_first_k_descending(self):
        aggs = self.aggregates({"a": 0.1, "b": 0.9, "c": 0.5})
        top = top_types(aggs, 2)
        assert [a.note_type for a in top] == ["b", "c"]

    def test_k_larger_than_available(self):
        aggs = self.aggregates({"a": 0.1, "b": 0.9})
        assert len(top_types(aggs, 20)) == 2

    def test_ties_break_lexicographically(self):
        aggs = self.aggregates({"zeta": 0.5, "alpha": 0.5, "mid": 0.5})
        assert [a.note_type for a in top_types(aggs, 3)] == ["alpha", "mid", "zeta"]

    def test_k_validated(self):
        with pytest.raises(PipelineError):
            top_types([], 0)


class TestWeightedSummary:
    def test_weighted_arithmetic(self):
        records = [
            synthetic_record(0, gestalt=0.0, rouge1=PRF(0.0, 0.0, 0.0), weight=100),
            synthetic_record(1, gestalt=1.0, rouge1=PRF(1.0, 1.0, 1.0), weight=300),
        ]
        summary = weighted_summary(records)
        assert summary.gestalt == pytest.approx(0.75)
        assert summary.rouge_recall == pytest.approx(0.75)
        assert summary.total_token_count == 400

    def test_constant_scores(self):
        records = [synthetic_record(i, gestalt=0.37, weight=10 * (i + 1)) for i in range(5)]
        assert weighted_summary(records).gestalt == pytest.approx(0.37)

    def test_matches_brute_force(self):
        rng = random.Random(13)
        records = [
            synthetic_record(i, gestalt=rng.random(), weight=rng.randrange(1, 500))
            for i in range(1000)
        ]
        summary = weighted_summary(records)
        expected = brute_weighted_mean(
            (r.pair_token_count, r.score.gestalt) for r in records
        )
        assert summary.gestalt == pytest.approx(expected, abs=1e-9)

    def test_summary_within_score_range(self):
        rng = random.Random(14)
        records = [
            synthetic_record(i, gestalt=rng.random(), weight=rng.randrange(1, 100))
            for i in range(100)
        ]
        values = [r.score.gestalt for r in records]
        assert min(values) <= weighted_summary(records).gestalt <= max(values)

    def test_empty_records_rejected(self):
        with pytest.raises(PipelineError):
            weighted_summary([])


class TestCsvRoundtrip:
    def test_roundtrip_preserves_records(self, tmp_path):
        corpus = corpus_from_texts(["a b c", "a b d", "a x y"])
        config = MetricConfig(provider=OneHotProvider())
        records = pairwise_scores(group_sequences(corpus), config)
        path = tmp_path / "pairs.csv"
        write_pair_records_csv(records, path)
        assert read_pair_records_csv(path) == records

    def test_roundtrip_without_embed(self, tmp_path):
        corpus = corpus_from_texts(["a b", "a c"])
        records = pairwise_scores(group_sequences(corpus))
        path = tmp_path / "pairs.csv"
        write_pair_records_csv(records, path)
        back = read_pair_records_csv(path)
        assert back == records
        assert back[0].score.embed is None

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "pairs.csv"
        path.write_text("admission_id,note_type\n", encoding="utf-8")
        with pytest.raises(PipelineError):
            read_pair_records_csv(path)


class TestScoreComponents:
    def test_embed_components_optional(self):
        rec = synthetic_record(0)
        comps = score_components(rec.score)
        assert "embed_f1" not in comps
        assert set(comps) == {
            "gestalt",
            "rouge1_precision", "rouge1_recall", "rouge1_f1",
            "rougeL_precision", "rougeL_recall", "rougeL_f1",
        }
