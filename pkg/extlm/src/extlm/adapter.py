"""Causal-LM fine-tuning and interchange exports.

Fine-tunes a (pre)trained GPT-2-family model on corpus splits exported by the
core CLI, then exports strided per-token base-2 log probabilities (tlp-v1
JSONL) and per-word contextual embeddings (REMB1 binary) in the exact formats
the core consumes.  All base-2 conversion happens here; the core never sees
natural-log values.  Output files are written atomically (temp file, rename).
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import transformers
from transformers import GPT2Config, GPT2LMHeadModel

from .bpe import BpeEncoder
from .data import CorpusDoc

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

LN2 = math.log(2.0)


class AdapterError(ValueError):
    pass


@dataclass
class AdapterConfig:
    base_model: str = ""
    epochs: int = 8
    weight_decay: float = 0.01
    learning_rate: float = 5e-4
    window: int = 768
    stride: int = 384
    seq_len: int = 64
    batch_size: int = 8
    seed: int = 0
    max_doc_tokens: int = 100_000
    out_dir: str = "adapter_out"

    def __post_init__(self) -> None:
        if self.stride > self.window or self.stride < 1:
            raise AdapterError(f"require 1 <= stride <= window, got S={self.stride}, W={self.window}")
        if self.epochs < 1:
            raise AdapterError(f"epochs must be >= 1, got {self.epochs}")


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def init_base_model(
    vocab_size: int,
    out_dir: str | Path,
    n_layer: int = 2,
    n_embd: int = 64,
    n_head: int = 2,
    n_positions: int = 512,
    seed: int = 0,
) -> Path:
    """Materialize a randomly initialized GPT-2-family base model artifact.

    Stands in for a hub checkpoint in offline environments; the +1 on the
    vocabulary reserves the document boundary id used at split joins.
    """
    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=vocab_size + 1,
        n_positions=n_positions,
        n_embd=n_embd,
        n_layer=n_layer,
        n_head=n_head,
        bos_token_id=vocab_size,
        eos_token_id=vocab_size,
    )
    model = GPT2LMHeadModel(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    return out_dir


def load_model(path_or_id: str) -> GPT2LMHeadModel:
    try:
        model = GPT2LMHeadModel.from_pretrained(path_or_id)
    except (OSError, ValueError) as exc:
        raise AdapterError(f"cannot load base model {path_or_id!r}: {exc}") from exc
    model.eval()
    return model


def _boundary_id(model: GPT2LMHeadModel) -> int:
    return model.config.vocab_size - 1


def encode_documents(docs: list[CorpusDoc], encoder: BpeEncoder, boundary: int) -> list[int]:
    """Concatenate documents into one id stream, boundary token at joins."""
    stream: list[int] = []
    for i, doc in enumerate(docs):
        if i > 0:
            stream.append(boundary)
        stream.extend(encoder.encode(doc.text))
    return stream


def _blocks(stream: list[int], seq_len: int) -> torch.Tensor:
    n_blocks = len(stream) // seq_len
    if n_blocks == 0:
        raise AdapterError(f"stream of {len(stream)} tokens too short for seq_len {seq_len}")
    data = torch.tensor(stream[: n_blocks * seq_len], dtype=torch.long)
    return data.view(n_blocks, seq_len)


@torch.no_grad()
def _mean_loss(model: GPT2LMHeadModel, blocks: torch.Tensor, batch_size: int) -> float:
    model.eval()
    losses = []
    for start in range(0, blocks.shape[0], batch_size):
        batch = blocks[start : start + batch_size]
        out = model(batch, labels=batch)
        losses.append(float(out.loss) * batch.shape[0])
    return sum(losses) / blocks.shape[0]


def finetune(
    train_docs: list[CorpusDoc],
    val_docs: list[CorpusDoc],
    encoder: BpeEncoder,
    config: AdapterConfig,
) -> tuple[Path, list[float]]:
    """Train for the fixed epoch count with AdamW weight decay.

    Returns the saved model directory and the per-epoch validation
    perplexities (natural-exp of mean token loss, = 2^bits).
    """
    if not train_docs:
        raise AdapterError("no training documents")
    torch.manual_seed(config.seed)
    model = load_model(config.base_model)
    model.train()
    boundary = _boundary_id(model)
    train_blocks = _blocks(encode_documents(train_docs, encoder, boundary), config.seq_len)
    val_blocks = None
    if val_docs:
        val_blocks = _blocks(encode_documents(val_docs, encoder, boundary), config.seq_len)

    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    val_ppls: list[float] = []
    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(train_blocks.shape[0])
        for start in range(0, train_blocks.shape[0], config.batch_size):
            batch = train_blocks[perm[start : start + config.batch_size]]
            out = model(batch, labels=batch)
            out.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
        if val_blocks is not None:
            val_ppl = math.exp(_mean_loss(model, val_blocks, config.batch_size))
            val_ppls.append(val_ppl)
            print(f"epoch {epoch + 1}/{config.epochs}: val PPL {val_ppl:.2f}")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    (out_dir / "adapter_config.json").write_text(
        json.dumps(
            {
                "epochs": config.epochs,
                "weight_decay": config.weight_decay,
                "learning_rate": config.learning_rate,
                "seq_len": config.seq_len,
                "seed": config.seed,
                "tokenizer_hash": encoder.content_hash(),
                "val_ppl_per_epoch": val_ppls,
            },
            sort_keys=True,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return out_dir, val_ppls


@torch.no_grad()
def export_logprobs(
    model: GPT2LMHeadModel,
    test_docs: list[CorpusDoc],
    encoder: BpeEncoder,
    config: AdapterConfig,
    out_path: str | Path,
    source_label: str = "extlm",
) -> Path:
    """Strided sliding-window per-token log probabilities, base 2, tlp-v1.

    The first window scores every position after the stream start; later
    windows score only the final-stride tail, so each position is scored once
    with bounded left context.  The self-reported perplexity in the header is
    computed from the emitted records themselves.
    """
    if not test_docs:
        raise AdapterError("empty test corpus")
    model.eval()
    boundary = _boundary_id(model)
    stream = encode_documents(test_docs, encoder, boundary)
    if len(stream) < 2:
        raise AdapterError("test stream must hold at least 2 tokens")
    window, stride = config.window, config.stride
    if window > model.config.n_positions:
        raise AdapterError(
            f"window {window} exceeds model context {model.config.n_positions}"
        )
    ids = torch.tensor(stream, dtype=torch.long)
    records: list[tuple[int, int, float]] = []
    prev_end = 0
    begin = 0
    while True:
        # A causal LM cannot score a window's first position; when the stride
        # would land the next unscored token there (S = W), pull the window
        # back one token so every position is scored exactly once.
        if prev_end > 0 and begin + 1 > prev_end:
            begin = prev_end - 1
        end = min(begin + window, len(stream))
        chunk = ids[begin:end].unsqueeze(0)
        logits = model(chunk).logits[0]
        logp2 = torch.log_softmax(logits.float(), dim=-1) / LN2
        for t in range(max(prev_end, begin + 1), end):
            records.append((t, stream[t], float(logp2[t - begin - 1, stream[t]])))
        prev_end = end
        if end == len(stream):
            break
        begin += stride
    mean_bits = -math.fsum(lp for _, _, lp in records) / len(records)
    header = {
        "format": "tlp-v1",
        "source": source_label,
        "tokenizer": f"bpe-v1:{encoder.content_hash()}",
        "vocab_size": model.config.vocab_size,
        "ppl": 2.0**mean_bits,
        "window": window,
        "stride": stride,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [
        json.dumps({"pos": pos, "tid": tid, "lp2": lp2}, sort_keys=True)
        for pos, tid, lp2 in records
    ]
    out_path = Path(out_path)
    _atomic_write_bytes(out_path, ("\n".join(lines) + "\n").encode("utf-8"))
    return out_path


@torch.no_grad()
def _hidden_states(model: GPT2LMHeadModel, ids: list[int]) -> np.ndarray:
    out = model(torch.tensor([ids], dtype=torch.long), output_hidden_states=True)
    return out.hidden_states[-1][0].float().numpy()


@torch.no_grad()
def export_embeddings(
    model: GPT2LMHeadModel,
    docs: list[CorpusDoc],
    encoder: BpeEncoder,
    config: AdapterConfig,
    out_path: str | Path,
) -> Path:
    """Final-layer contextual vectors, one per whitespace word, REMB1 binary.

    Words are encoded to subtokens and mean-pooled.  Documents longer than
    the model context are chunked with 50% overlap; each subtoken's vector is
    taken from the chunk where it sits furthest from a chunk boundary.
    """
    model.eval()
    max_len = model.config.n_positions
    half = max(1, max_len // 2)
    dim = model.config.n_embd
    matrices: dict[str, np.ndarray] = {}
    for doc in docs:
        words = doc.text.split()
        if not words:
            matrices[doc.doc_id] = np.zeros((0, dim), dtype=np.float32)
            continue
        pieces = [encoder.encode(w if i == 0 else " " + w) for i, w in enumerate(words)]
        word_spans = []
        flat: list[int] = []
        for piece in pieces:
            word_spans.append((len(flat), len(flat) + len(piece)))
            flat.extend(piece)
        if len(flat) > config.max_doc_tokens:
            raise AdapterError(f"document {doc.doc_id!r} exceeds max_doc_tokens ({len(flat)})")

        vectors = np.zeros((len(flat), dim), dtype=np.float64)
        best_margin = np.full(len(flat), -1, dtype=np.int64)
        begin = 0
        while True:
            end = min(begin + max_len, len(flat))
            hidden = _hidden_states(model, flat[begin:end])
            for t in range(begin, end):
                margin = min(t - begin, end - 1 - t)
                if margin > best_margin[t]:
                    best_margin[t] = margin
                    vectors[t] = hidden[t - begin]
            if end == len(flat):
                break
            begin += half
        word_matrix = np.stack([vectors[lo:hi].mean(axis=0) for lo, hi in word_spans])
        matrices[doc.doc_id] = word_matrix.astype(np.float32)

    payload = bytearray()
    payload += b"REMB1"
    payload += struct.pack("<II", len(matrices), dim)
    for doc_id, matrix in matrices.items():
        encoded = doc_id.encode("utf-8")
        payload += struct.pack("<I", len(encoded))
        payload += encoded
        payload += struct.pack("<I", matrix.shape[0])
        payload += np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    out_path = Path(out_path)
    _atomic_write_bytes(out_path, bytes(payload))
    return out_path
