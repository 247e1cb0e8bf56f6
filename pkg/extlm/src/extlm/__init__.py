"""External transformer adapter for the corpus redundancy toolkit.

Fine-tunes a causal language model on core-exported corpus splits and emits
per-token base-2 log probabilities (tlp-v1) and per-word contextual
embeddings (REMB1) for the core's evaluation and metric pipelines.
"""

from .adapter import (
    AdapterConfig,
    AdapterError,
    export_embeddings,
    export_logprobs,
    finetune,
    init_base_model,
    load_model,
)
from .bpe import BpeEncoder, BpeFileError, load_bpe_file
from .data import CorpusDoc, read_corpus_jsonl, read_split_manifest, select_split

__version__ = "0.1.0"
