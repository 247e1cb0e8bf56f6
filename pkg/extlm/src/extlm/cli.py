"""Adapter CLI: init-base, finetune, export-logprobs, export-embeddings."""

from __future__ import annotations

import argparse
import sys

from .adapter import (
    AdapterConfig,
    export_embeddings,
    export_logprobs,
    finetune,
    init_base_model,
    load_model,
)
from .bpe import load_bpe_file
from .data import read_corpus_jsonl, read_split_manifest, select_split


def cmd_init_base(args) -> int:
    encoder = load_bpe_file(args.tokenizer)
    out = init_base_model(
        vocab_size=encoder.vocab_size,
        out_dir=args.out_dir,
        n_layer=args.layers,
        n_embd=args.dim,
        n_head=args.heads,
        n_positions=args.positions,
        seed=args.seed,
    )
    print(f"initialized base model (vocab {encoder.vocab_size}+1) -> {out}")
    return 0


def cmd_finetune(args) -> int:
    encoder = load_bpe_file(args.tokenizer)
    train_docs = read_corpus_jsonl(args.train)
    val_docs = read_corpus_jsonl(args.val) if args.val else []
    if args.manifest:
        manifest = read_split_manifest(args.manifest)
        train_docs = select_split(train_docs, manifest, "train")
        if val_docs:
            val_docs = select_split(val_docs, manifest, "val")
    config = AdapterConfig(
        base_model=args.base_model,
        epochs=args.epochs,
        weight_decay=args.weight_decay,
        learning_rate=args.lr,
        seq_len=args.seq_len,
        batch_size=args.batch_size,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    out, val_ppls = finetune(train_docs, val_docs, encoder, config)
    print(f"fine-tuned {config.epochs} epochs -> {out}")
    if val_ppls:
        print(f"final val PPL {val_ppls[-1]:.2f}")
    return 0


def cmd_export_logprobs(args) -> int:
    encoder = load_bpe_file(args.tokenizer)
    model = load_model(args.model)
    docs = read_corpus_jsonl(args.corpus)
    if args.manifest:
        docs = select_split(docs, read_split_manifest(args.manifest), args.split)
    config = AdapterConfig(base_model=args.model, window=args.window, stride=args.stride)
    out = export_logprobs(model, docs, encoder, config, args.out, source_label=args.label)
    print(f"exported log probs -> {out}")
    return 0


def cmd_export_embeddings(args) -> int:
    encoder = load_bpe_file(args.tokenizer)
    model = load_model(args.model)
    docs = read_corpus_jsonl(args.corpus)
    config = AdapterConfig(base_model=args.model)
    out = export_embeddings(model, docs, encoder, config, args.out)
    print(f"exported embeddings for {len(docs)} documents -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extlm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init-base", help="materialize a randomly initialized base model artifact")
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--positions", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_init_base)

    p = sub.add_parser("finetune", help="fine-tune for a fixed epoch count")
    p.add_argument("--base-model", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--val")
    p.add_argument("--manifest")
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--seq-len", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("export-logprobs", help="write strided base-2 log probs as tlp-v1")
    p.add_argument("--model", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest")
    p.add_argument("--split", default="test")
    p.add_argument("--window", type=int, default=768)
    p.add_argument("--stride", type=int, default=384)
    p.add_argument("--label", default="extlm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_logprobs)

    p = sub.add_parser("export-embeddings", help="write per-word contextual vectors as REMB1")
    p.add_argument("--model", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_embeddings)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
