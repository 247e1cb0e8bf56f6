"""Command-line entry point wiring corpora, tokenizers, models, and reports.

Configuration precedence is CLI flags > config file (TOML or JSON) > built-in
defaults; REDNOTE_* environment variables sit between file and flags.  Every
command derives its internal seeds from the single run seed by labeled
hashing and archives its resolved configuration next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime
from pathlib import Path

from . import corpus as corpus_mod
from . import figures, lm, metrics, pipeline, report, synth
from . import tokenize as tok

ENV_PREFIX = "REDNOTE_"
DEFAULT_FORMATS = "csv,json,markdown"
FORMAT_SUFFIX = {"csv": "csv", "json": "json", "markdown": "md"}


class ConfigError(ValueError):
    """Raised for invalid CLI configuration."""


def derive_seed(master: int, label: str) -> int:
    """Fan a single run seed out into labeled sub-seeds."""
    digest = hashlib.blake2b(f"{master}:{label}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % (2**63)


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    if p.suffix.lower() == ".json":
        return json.loads(p.read_text(encoding="utf-8"))
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with p.open("rb") as fh:
        return tomllib.load(fh)


def _coerce(value: str, like) -> object:
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def resolve_config(args: argparse.Namespace, defaults: dict, command: str) -> dict:
    """Merge defaults < config file < environment < explicit CLI flags."""
    resolved = dict(defaults)
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
        section = raw.get(command, {}) if isinstance(raw.get(command), dict) else {}
        for key in resolved:
            if key in raw and not isinstance(raw[key], dict):
                resolved[key] = raw[key]
            if key in section:
                resolved[key] = section[key]
    for key, default in defaults.items():
        env_key = ENV_PREFIX + key.upper()
        if env_key in os.environ:
            resolved[key] = _coerce(os.environ[env_key], default)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def write_run_config(cfg: dict, command: str, out: Path) -> None:
    payload = {"command": command, "config": cfg}
    target = out / "run_config.json" if out.is_dir() else out.with_suffix(out.suffix + ".run_config.json")
    target.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _emit_table(table_obj, stem: str, out_dir: Path, formats: str) -> None:
    for fmt in formats.split(","):
        fmt = fmt.strip()
        if fmt not in report.FORMATS:
            raise ConfigError(f"unknown output format {fmt!r}")
        path = out_dir / f"{stem}.{FORMAT_SUFFIX[fmt]}"
        path.write_bytes(report.emit(table_obj, fmt))


def _read_corpus(path: str, fmt: str, options: corpus_mod.IngestOptions) -> corpus_mod.IngestResult:
    if not Path(path).exists():
        raise ConfigError(f"corpus file not found: {path}")
    if fmt == "jsonl":
        return corpus_mod.ingest_jsonl(path, options)
    if fmt == "mimic-csv":
        return corpus_mod.ingest_mimic_csv(path, options)
    raise ConfigError(f"unknown corpus format {fmt!r}")


def _load_tokenizer(path: str) -> tok.BpeModel:
    if not Path(path).exists():
        raise ConfigError(f"tokenizer file not found: {path}")
    return tok.load_bpe(path)


def _encode_corpus(corpus: corpus_mod.Corpus, model: tok.BpeModel) -> list[list[int]]:
    return [model.encode(doc.text) for doc in corpus.documents]


def _provider_from_name(name: str, dim: int) -> metrics.EmbeddingProvider | None:
    if name == "none":
        return None
    if name == "char-ngram":
        return metrics.CharNgramProvider(dim=dim)
    if name == "one-hot":
        return metrics.OneHotProvider(dim=max(dim, 4096))
    if name.startswith("remb:"):
        return metrics.ExternalEmbeddingProvider(name[len("remb:") :])
    raise ConfigError(f"unknown embedding provider {name!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    defaults = {"input": "", "format": "jsonl", "label": "", "keep_empty": False,
                "skip_duplicates": False, "out_dir": "out"}
    cfg = resolve_config(args, defaults, "ingest")
    if not cfg["input"]:
        raise ConfigError("ingest requires --input")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    options = corpus_mod.IngestOptions(
        keep_empty=cfg["keep_empty"], skip_duplicates=cfg["skip_duplicates"], label=cfg["label"]
    )
    result = _read_corpus(cfg["input"], cfg["format"], options)
    corpus_mod.write_jsonl(result.corpus, out_dir / "corpus.jsonl")
    (out_dir / "drop_report.json").write_text(
        json.dumps(result.drops.to_json_obj(), sort_keys=True) + "\n", encoding="utf-8"
    )
    write_run_config(cfg, "ingest", out_dir)
    print(f"ingested {len(result.corpus)} documents -> {out_dir / 'corpus.jsonl'}")
    print(f"drops: {result.drops.to_json_obj()}")
    return 0


def cmd_stats(args) -> int:
    defaults = {"corpus": "", "format": "jsonl", "test_corpus": "", "tokenizer": "",
                "label": "", "out_dir": "out", "formats": DEFAULT_FORMATS}
    cfg = resolve_config(args, defaults, "stats")
    if not cfg["corpus"]:
        raise ConfigError("stats requires --corpus")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    options = corpus_mod.IngestOptions(label=cfg["label"])
    corpus = _read_corpus(cfg["corpus"], cfg["format"], options).corpus
    test_corpus = None
    if cfg["test_corpus"]:
        test_corpus = _read_corpus(cfg["test_corpus"], cfg["format"], corpus_mod.IngestOptions()).corpus
    if cfg["tokenizer"]:
        bpe = _load_tokenizer(cfg["tokenizer"])
        tokenizer = bpe.encode
    else:
        tokenizer = tok.word_tokenize
    st = corpus_mod.stats(corpus, tokenizer, test_corpus=test_corpus)
    _emit_table(report.build_stats_table([(corpus.label, st)]), "stats", out_dir, cfg["formats"])
    write_run_config(cfg, "stats", out_dir)
    print(report.emit(report.build_stats_table([(corpus.label, st)]), "markdown").decode("utf-8"))
    return 0


def cmd_split(args) -> int:
    defaults = {"corpus": "", "format": "jsonl", "train": 0.8, "val": 0.1, "test": 0.1,
                "seed": 0, "unit": "admission", "out_dir": "out"}
    cfg = resolve_config(args, defaults, "split")
    if not cfg["corpus"]:
        raise ConfigError("split requires --corpus")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = _read_corpus(cfg["corpus"], cfg["format"], corpus_mod.IngestOptions()).corpus
    spec = corpus_mod.SplitSpec(
        train_frac=cfg["train"], val_frac=cfg["val"], test_frac=cfg["test"],
        seed=derive_seed(cfg["seed"], "split"), unit=cfg["unit"],
    )
    parts = corpus_mod.split(corpus, spec)
    manifest = {}
    for name, part in zip(("train", "val", "test"), parts):
        corpus_mod.write_jsonl(part, out_dir / f"{name}.jsonl")
        manifest[name] = [d.doc_id for d in part.documents]
    (out_dir / "split_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_run_config(cfg, "split", out_dir)
    print(f"split sizes: train={len(parts[0])} val={len(parts[1])} test={len(parts[2])}")
    return 0


def cmd_tok_train(args) -> int:
    defaults = {"corpus": "", "vocab_size": 1024, "out": "tokenizer.json"}
    cfg = resolve_config(args, defaults, "tok-train")
    if not cfg["corpus"]:
        raise ConfigError("tok-train requires --corpus")
    corpus = _read_corpus(cfg["corpus"], "jsonl", corpus_mod.IngestOptions()).corpus
    model = tok.bpe_train([d.text for d in corpus.documents], cfg["vocab_size"])
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    tok.save_bpe(model, out)
    write_run_config(cfg, "tok-train", out)
    print(f"trained BPE vocab={model.vocab_size} -> {out}")
    return 0


def cmd_lm_train(args) -> int:
    defaults = {"corpus": "", "tokenizer": "", "order": lm.DEFAULT_ORDER,
                "discount": -1.0, "out": "model.json"}
    cfg = resolve_config(args, defaults, "lm-train")
    if not cfg["corpus"] or not cfg["tokenizer"]:
        raise ConfigError("lm-train requires --corpus and --tokenizer")
    corpus = _read_corpus(cfg["corpus"], "jsonl", corpus_mod.IngestOptions()).corpus
    bpe = _load_tokenizer(cfg["tokenizer"])
    streams = _encode_corpus(corpus, bpe)
    discount = None if cfg["discount"] < 0 else cfg["discount"]
    model = lm.fit(streams, order=cfg["order"], vocab_size=bpe.vocab_size,
                   discount_params=discount, tokenizer_hash=bpe.content_hash())
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    lm.save_model(model, out)
    write_run_config(cfg, "lm-train", out)
    print(f"fitted order-{model.order} model on {sum(len(s) for s in streams)} tokens -> {out}")
    return 0


def cmd_lm_eval(args) -> int:
    defaults = {"model": "", "tokenizer": "", "val": "", "test": "", "label": "",
                "window": lm.DEFAULT_WINDOW, "stride": lm.DEFAULT_STRIDE,
                "from_stream": "", "out_dir": "out", "formats": DEFAULT_FORMATS,
                "figures": True}
    cfg = resolve_config(args, defaults, "lm-eval")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    entries: list[tuple[str, lm.EntropyReport]] = []
    if cfg["from_stream"]:
        stream = lm.read_tlp(cfg["from_stream"])
        entries.append((stream.source_label, lm.cross_entropy_from_stream(stream)))
        row_label = cfg["label"] or stream.source_label
        ppl_row = report.PplRow(train_corpus=row_label, test=entries[0][1])
    else:
        if not cfg["model"] or not cfg["tokenizer"]:
            raise ConfigError("lm-eval requires --model and --tokenizer (or --from-stream)")
        if not cfg["test"]:
            raise ConfigError("lm-eval requires --test")
        model = lm.load_model(cfg["model"])
        bpe = _load_tokenizer(cfg["tokenizer"])
        if model.tokenizer_hash and model.tokenizer_hash != bpe.content_hash():
            raise ConfigError("tokenizer/model mismatch: vocab hashes differ")
        spec = lm.EvalWindowSpec(window_len=cfg["window"], stride=cfg["stride"])
        holdouts = []
        for spec_str in getattr(args, "holdout", None) or []:
            name, _, path = spec_str.partition("=")
            if not path:
                raise ConfigError(f"--holdout expects NAME=PATH, got {spec_str!r}")
            holdouts.append((name, path))
        val_report = None
        if cfg["val"]:
            val_corpus = _read_corpus(cfg["val"], "jsonl", corpus_mod.IngestOptions()).corpus
            val_report = lm.cross_entropy(model, _encode_corpus(val_corpus, bpe), spec)
            entries.append(("val", val_report))
        test_corpus = _read_corpus(cfg["test"], "jsonl", corpus_mod.IngestOptions()).corpus
        test_report = lm.cross_entropy(model, _encode_corpus(test_corpus, bpe), spec)
        entries.append(("test", test_report))
        holdout_reports = []
        for name, path in holdouts:
            h_corpus = _read_corpus(path, "jsonl", corpus_mod.IngestOptions()).corpus
            h_report = lm.cross_entropy(model, _encode_corpus(h_corpus, bpe), spec)
            holdout_reports.append((name, h_report))
            entries.append((name, h_report))
        row_label = cfg["label"] or Path(cfg["model"]).stem
        ppl_row = report.PplRow(
            train_corpus=row_label, test=test_report, val=val_report, holdouts=tuple(holdout_reports)
        )

    payload = {
        label: {
            "cross_entropy_bits": rep.cross_entropy_bits,
            "perplexity": rep.perplexity,
            "n_scored_tokens": rep.n_scored_tokens,
            "upper_bound_bits": rep.upper_bound_bits,
        }
        for label, rep in entries
    }
    (out_dir / "entropy_reports.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _emit_table(report.build_entropy_table(entries), "entropy", out_dir, cfg["formats"])
    _emit_table(report.build_ppl_table([ppl_row]), "ppl_table", out_dir, cfg["formats"])
    if cfg["figures"]:
        figures.render_bits_figure(entries, out_dir / "entropy_bits.png")
    write_run_config(cfg, "lm-eval", out_dir)
    for label, rep in entries:
        print(f"{label}: PPL {rep.perplexity:.2f} ({rep.cross_entropy_bits:.3f} bits/token, "
              f"{rep.n_scored_tokens} tokens)")
    return 0


def cmd_pairwise(args) -> int:
    defaults = {"corpus": "", "provider": "char-ngram", "embed_dim": 256,
                "rescale": False, "baseline_pairs": 1000, "seed": 0, "out_dir": "out"}
    cfg = resolve_config(args, defaults, "pairwise")
    if not cfg["corpus"]:
        raise ConfigError("pairwise requires --corpus")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = _read_corpus(cfg["corpus"], "jsonl", corpus_mod.IngestOptions()).corpus
    provider = _provider_from_name(cfg["provider"], cfg["embed_dim"])
    baseline = None
    if cfg["rescale"] and provider is not None:
        baseline = metrics.estimate_baseline(
            corpus, provider, n_pairs=cfg["baseline_pairs"], seed=derive_seed(cfg["seed"], "baseline")
        )
        (out_dir / "baseline.json").write_text(
            json.dumps({"b": baseline.b, "n_pairs": baseline.n_pairs, "seed": baseline.seed},
                       sort_keys=True) + "\n",
            encoding="utf-8",
        )
    sequences = corpus_mod.group_sequences(corpus)
    records = pipeline.pairwise_scores(sequences, pipeline.MetricConfig(provider=provider, baseline=baseline))
    if not records:
        print("warning: no sequence of length >= 2; writing empty outputs", file=sys.stderr)
    pipeline.write_pair_records_csv(records, out_dir / "pairs.csv")
    write_run_config(cfg, "pairwise", out_dir)
    print(f"scored {len(records)} successive pairs -> {out_dir / 'pairs.csv'}")
    return 0


def cmd_aggregate(args) -> int:
    defaults = {"pairs": "", "top_k": 0, "key": "rouge1_f1", "per_admission": False,
                "out_dir": "out", "formats": DEFAULT_FORMATS, "figures": True}
    cfg = resolve_config(args, defaults, "aggregate")
    if not cfg["pairs"]:
        raise ConfigError("aggregate requires --pairs")
    if not Path(cfg["pairs"]).exists():
        raise ConfigError(f"pair records file not found: {cfg['pairs']}")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    records = pipeline.read_pair_records_csv(cfg["pairs"])
    aggregates = pipeline.aggregate_per_type(records, per_admission=cfg["per_admission"])
    if cfg["top_k"]:
        aggregates = pipeline.top_types(aggregates, cfg["top_k"], key=cfg["key"])
    _emit_table(report.build_type_table(aggregates), "types", out_dir, cfg["formats"])
    (out_dir / "types_long.csv").write_bytes(report.emit(report.build_type_long_table(aggregates), "csv"))
    if cfg["figures"] and aggregates:
        figures.render_type_figure(aggregates, out_dir / "types.png")
    write_run_config(cfg, "aggregate", out_dir)
    print(f"aggregated {len(records)} pairs into {len(aggregates)} note types -> {out_dir}")
    return 0


def cmd_summarize(args) -> int:
    defaults = {"pairs": "", "label": "corpus", "out_dir": "out", "formats": DEFAULT_FORMATS}
    cfg = resolve_config(args, defaults, "summarize")
    if not cfg["pairs"]:
        raise ConfigError("summarize requires --pairs")
    if not Path(cfg["pairs"]).exists():
        raise ConfigError(f"pair records file not found: {cfg['pairs']}")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    records = pipeline.read_pair_records_csv(cfg["pairs"])
    summary = pipeline.weighted_summary(records)
    _emit_table(report.build_summary_table([(cfg["label"], summary)]), "summary", out_dir, cfg["formats"])
    write_run_config(cfg, "summarize", out_dir)
    print(report.emit(report.build_summary_table([(cfg["label"], summary)]), "markdown").decode("utf-8"))
    return 0


def _parse_type_plan(spec_str: str) -> synth.TypePlan:
    parts = spec_str.split(":")
    if len(parts) != 4:
        raise ConfigError(f"--type expects LABEL:R:NOTES:LEN, got {spec_str!r}")
    return synth.TypePlan(
        type_label=parts[0],
        redundancy=float(parts[1]),
        notes_per_admission=int(parts[2]),
        tokens_per_note=int(parts[3]),
    )


def cmd_synth(args) -> int:
    defaults = {"admissions": 20, "vocab_size": 100000, "seed": 0, "out": "synthetic.jsonl",
                "markov": "", "tokens": 10000, "label": "synthetic"}
    cfg = resolve_config(args, defaults, "synth")
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    if cfg["markov"]:
        kind, _, param = cfg["markov"].partition(":")
        if kind == "uniform":
            source = synth.MarkovSource.uniform(int(param))
        elif kind == "two-state":
            source = synth.MarkovSource.two_state(float(param))
        elif kind == "cycle":
            source = synth.MarkovSource.cycle(int(param))
        else:
            raise ConfigError(f"unknown markov source {cfg['markov']!r}")
        stream, rate = synth.generate_markov_stream(source, cfg["tokens"], derive_seed(cfg["seed"], "markov"))
        doc = corpus_mod.Document(
            doc_id="m000000", admission_id="adm0000", note_type="markov",
            updated_at=datetime(2020, 1, 1), text=" ".join(map(str, stream)),
        )
        corpus_mod.write_jsonl(corpus_mod.Corpus((doc,), label=cfg["label"]), out)
        sidecar = {"analytic_entropy_bits": rate, "n_tokens": cfg["tokens"], "source": cfg["markov"]}
        out.with_suffix(".meta.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8")
        print(f"markov stream of {cfg['tokens']} tokens (H={rate:.3f} bits) -> {out}")
    else:
        type_specs = getattr(args, "type", None) or ["noteA:0.5:5:100"]
        plan = synth.RedundancyPlan(
            note_types=tuple(_parse_type_plan(s) for s in type_specs),
            n_admissions=cfg["admissions"],
            vocab_size=cfg["vocab_size"],
            seed=derive_seed(cfg["seed"], "synth"),
        )
        corpus = synth.generate_redundant_corpus(plan, label=cfg["label"])
        corpus_mod.write_jsonl(corpus, out)
        sidecar = {
            "n_admissions": plan.n_admissions,
            "vocab_size": plan.vocab_size,
            "note_types": [
                {"label": tp.type_label, "redundancy": tp.redundancy,
                 "notes_per_admission": tp.notes_per_admission, "tokens_per_note": tp.tokens_per_note}
                for tp in plan.note_types
            ],
        }
        out.with_suffix(".meta.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8")
        print(f"generated {len(corpus)} documents -> {out}")
    write_run_config(cfg, "synth", out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rednote",
        description="Corpus redundancy analysis: LM cross-entropy and successive-note metrics.",
        epilog=f"Environment variables with prefix {ENV_PREFIX} override config-file values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML or JSON config file")

    p = sub.add_parser("ingest", help="read a raw corpus and write normalized JSONL plus a drop report")
    common(p)
    p.add_argument("--input")
    p.add_argument("--format", choices=("jsonl", "mimic-csv"))
    p.add_argument("--label")
    p.add_argument("--keep-empty", action="store_const", const=True, dest="keep_empty")
    p.add_argument("--skip-duplicates", action="store_const", const=True, dest="skip_duplicates")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="descriptive statistics table")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--format", choices=("jsonl", "mimic-csv"))
    p.add_argument("--test-corpus", dest="test_corpus", help="corpus whose vocab size to report")
    p.add_argument("--tokenizer", help="BPE tokenizer file; default whitespace words")
    p.add_argument("--label")
    p.add_argument("--formats")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="deterministic train/val/test split with manifests")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--format", choices=("jsonl", "mimic-csv"))
    p.add_argument("--train", type=float)
    p.add_argument("--val", type=float)
    p.add_argument("--test", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--unit", choices=("admission", "document"))
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("tok-train", help="train the byte-level BPE tokenizer")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tok_train)

    p = sub.add_parser("lm-train", help="fit the Kneser-Ney n-gram language model")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--tokenizer")
    p.add_argument("--order", type=int)
    p.add_argument("--discount", type=float, help="constant discount override; negative = estimate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("lm-eval", help="strided-window cross-entropy/perplexity evaluation")
    common(p)
    p.add_argument("--model")
    p.add_argument("--tokenizer")
    p.add_argument("--val")
    p.add_argument("--test")
    p.add_argument("--holdout", action="append", metavar="NAME=PATH")
    p.add_argument("--label")
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--from-stream", dest="from_stream", help="evaluate a tlp-v1 log-prob stream instead")
    p.add_argument("--formats")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_lm_eval)

    p = sub.add_parser("pairwise", help="score successive note pairs")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--provider", help="char-ngram | one-hot | none | remb:PATH")
    p.add_argument("--embed-dim", type=int, dest="embed_dim")
    p.add_argument("--rescale", action="store_const", const=True)
    p.add_argument("--baseline-pairs", type=int, dest="baseline_pairs")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("aggregate", help="per-type median score table (and figure)")
    common(p)
    p.add_argument("--pairs")
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--key")
    p.add_argument("--per-admission", action="store_const", const=True, dest="per_admission")
    p.add_argument("--formats")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("summarize", help="token-weighted corpus summary")
    common(p)
    p.add_argument("--pairs")
    p.add_argument("--label")
    p.add_argument("--formats")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("synth", help="generate synthetic corpora with known redundancy or entropy")
    common(p)
    p.add_argument("--type", action="append", metavar="LABEL:R:NOTES:LEN")
    p.add_argument("--admissions", type=int)
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--markov", metavar="uniform:K|two-state:P|cycle:K")
    p.add_argument("--tokens", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--label")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected faults
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
