import subprocess
import sys

import pytest

from extlm.adapter import AdapterConfig, init_base_model
from extlm.bpe import load_bpe_file
from extlm.data import read_corpus_jsonl


def run_core(*argv, cwd):
    """Invoke the core CLI through its installed console entry point."""
    proc = subprocess.run(
        [sys.executable, "-m", "rednote.cli", *argv], cwd=cwd, capture_output=True, text=True
    )
    assert proc.returncode == 0, f"rednote {argv[0]} failed: {proc.stderr}"
    return proc


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """Core-exported corpus splits, tokenizer, and a tiny base model."""
    ws = tmp_path_factory.mktemp("extlm_ws")
    run_core("synth", "--type", "progress:0.6:4:40", "--type", "scan:0.2:3:25",
             "--admissions", "8", "--vocab-size", "100000", "--seed", "77",
             "--out", "corpus.jsonl", cwd=ws)
    run_core("split", "--corpus", "corpus.jsonl", "--train", "0.6", "--val", "0.2",
             "--test", "0.2", "--seed", "77", "--out-dir", "sp", cwd=ws)
    run_core("tok-train", "--corpus", "sp/train.jsonl", "--vocab-size", "300",
             "--out", "tok.json", cwd=ws)
    init_base_model(
        vocab_size=load_bpe_file(ws / "tok.json").vocab_size,
        out_dir=ws / "base",
        n_layer=2, n_embd=32, n_head=2, n_positions=128, seed=3,
    )
    return ws


@pytest.fixture(scope="session")
def encoder(workspace):
    return load_bpe_file(workspace / "tok.json")


@pytest.fixture(scope="session")
def splits(workspace):
    return {
        name: read_corpus_jsonl(workspace / "sp" / f"{name}.jsonl")
        for name in ("train", "val", "test")
    }


@pytest.fixture
def tiny_config(workspace, tmp_path):
    return AdapterConfig(
        base_model=str(workspace / "base"),
        epochs=1,
        seq_len=32,
        batch_size=4,
        window=64,
        stride=32,
        seed=5,
        out_dir=str(tmp_path / "tuned"),
    )
