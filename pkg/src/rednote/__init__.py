"""Corpus redundancy analysis toolkit.

Two complementary redundancy measures over longitudinal document corpora:
cross-entropy/perplexity of smoothed n-gram language models (with external
transformer log-prob streams flowing through the same reporting path), and
summarisation-style metrics over temporally successive note pairs.
"""

from .corpus import (
    Corpus,
    CorpusError,
    CorpusStats,
    Document,
    DropReport,
    IngestOptions,
    IngestResult,
    NoteSequence,
    SplitSpec,
    filter_primary_diagnosis,
    group_sequences,
    ingest_jsonl,
    ingest_mimic_csv,
    split,
    stats,
    write_jsonl,
)
from .lm import (
    EntropyReport,
    EvalWindowSpec,
    LmError,
    NgramModel,
    TokenLogProbStream,
    cross_entropy,
    cross_entropy_from_stream,
    efficiency_ratio,
    entropy_upper_bound,
    fit,
    load_model,
    log_prob,
    ppl_to_bits,
    read_tlp,
    save_model,
    write_tlp,
)
from .metrics import (
    CharNgramProvider,
    EmbeddingProvider,
    ExternalEmbeddingProvider,
    MetricsError,
    OneHotProvider,
    PairScore,
    PRF,
    RescaleBaseline,
    char_ngram_provider,
    embed_score,
    estimate_baseline,
    external_embedding_provider,
    gestalt_ratio,
    read_remb,
    rouge_l,
    rouge_n,
    write_remb,
)
from .pipeline import (
    CorpusSummary,
    MetricConfig,
    PairRecord,
    PipelineError,
    TypeAggregate,
    aggregate_per_type,
    pairwise_scores,
    read_pair_records_csv,
    top_types,
    weighted_summary,
    write_pair_records_csv,
)
from .report import (
    CrossMatrix,
    PplRow,
    PplTable,
    ReportError,
    Table,
    build_cross_matrix,
    build_ppl_table,
    emit,
)
from .synth import (
    MarkovSource,
    RedundancyPlan,
    SynthError,
    TypePlan,
    generate_markov_stream,
    generate_redundant_corpus,
)
from .tokenize import (
    BpeModel,
    TokenizerError,
    Vocab,
    bpe_decode,
    bpe_encode,
    bpe_train,
    load_bpe,
    save_bpe,
    word_tokenize,
)

__version__ = "0.1.0"
