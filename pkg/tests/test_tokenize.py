import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rednote.tokenize import (
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

FIXTURE_TEXTS = ["hello hello world", "hello there world", "he said hello to the world"]
_SHARED_MODEL = bpe_train(FIXTURE_TEXTS, 280)


class TestWordTokenize:
    def test_splits_on_whitespace_runs(self):
        assert word_tokenize("the  cat sat") == ["the", "cat", "sat"]

    def test_empty_text(self):
        assert word_tokenize("") == []

    def test_mixed_whitespace(self):
        assert word_tokenize("A\nB\tC") == ["A", "B", "C"]

    def test_no_normalization(self):
        assert word_tokenize("The THE the.") == ["The", "THE", "the."]


class TestBpeTrain:
    def test_first_merge_on_repeated_byte(self):
        model = bpe_train(["aaaa"], 258)
        assert model.merges[0] == (ord("a"), ord("a"))
        assert model.vocab.entries[256] == b"aa"

    def test_single_merge_reaches_target(self):
        model = bpe_train(["ab"], 257)
        assert model.merges == [(ord("a"), ord("b"))]
        assert model.vocab.entries[256] == b"ab"

    def test_tie_break_lexicographic(self):
        # "abba" holds (a,b), (b,b), (b,a) once each; ("a","b") sorts first.
        model = bpe_train(["abba"], 257)
        assert model.vocab.entries[256] == b"ab"

    def test_empty_training_text_rejected(self):
        with pytest.raises(TokenizerError):
            bpe_train([""], 300)

    def test_target_below_byte_vocab_rejected(self):
        with pytest.raises(TokenizerError):
            bpe_train(["abc"], 256)

    def test_training_is_deterministic(self):
        a = bpe_train(FIXTURE_TEXTS, 280)
        b = bpe_train(FIXTURE_TEXTS, 280)
        assert a.merges == b.merges
        assert a.vocab.entries == b.vocab.entries


class TestEncodeDecode:
    def test_fixture_golden_ids(self):
        # Frozen from the deterministic fixture model at build time.
        model = bpe_train(FIXTURE_TEXTS, 270)
        assert model.encode("hello") == [259, 111]
        assert model.decode([259, 111]) == "hello"

    def test_empty_text(self):
        model = bpe_train(FIXTURE_TEXTS, 270)
        assert bpe_encode(model, "") == []
        assert bpe_decode(model, []) == ""

    def test_out_of_range_id_rejected(self):
        model = bpe_train(FIXTURE_TEXTS, 270)
        with pytest.raises(TokenizerError):
            model.decode([model.vocab_size])

    def test_roundtrip_random_unicode(self):
        rng = random.Random(12345)
        alphabet = "abcdefgh \n\tàéü日本語🏥-—"
        model = bpe_train(FIXTURE_TEXTS, 280)
        for _ in range(1000):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 40)))
            assert model.decode(model.encode(text)) == text

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=200))
    def test_roundtrip_property(self, text):
        assert _SHARED_MODEL.decode(_SHARED_MODEL.encode(text)) == text

    def test_encode_deterministic(self):
        model = bpe_train(FIXTURE_TEXTS, 280)
        text = "hello world, said he"
        assert model.encode(text) == model.encode(text)


class TestSaveLoad:
    def test_roundtrip_preserves_encoding(self, tmp_path):
        model = bpe_train(FIXTURE_TEXTS, 280)
        path = tmp_path / "tok.json"
        save_bpe(model, path)
        loaded = load_bpe(path)
        for text in FIXTURE_TEXTS + ["unseen text entirely"]:
            assert loaded.encode(text) == model.encode(text)
        assert loaded.content_hash() == model.content_hash()

    def test_corrupted_header_rejected(self, tmp_path):
        path = tmp_path / "tok.json"
        path.write_text('{"version": "bogus", "vocab": [], "merges": []}')
        with pytest.raises(TokenizerError):
            load_bpe(path)

    def test_malformed_json_reports_offset(self, tmp_path):
        path = tmp_path / "tok.json"
        path.write_text('{"version": "bpe-v1", ')
        with pytest.raises(TokenizerError, match="offset"):
            load_bpe(path)

    def test_merge_count_mismatch_rejected(self, tmp_path):
        model = bpe_train(["aaaa"], 258)
        path = tmp_path / "tok.json"
        save_bpe(model, path)
        payload = json.loads(path.read_text())
        payload["merges"] = payload["merges"][:-1]
        path.write_text(json.dumps(payload))
        with pytest.raises(TokenizerError, match="merge-count mismatch"):
            load_bpe(path)


class TestVocab:
    def test_duplicate_entries_rejected(self):
        with pytest.raises(TokenizerError):
            Vocab((b"a", b"a"))

    def test_merge_consistency_checked(self):
        entries = tuple(bytes([b]) for b in range(256)) + (b"zz",)
        with pytest.raises(TokenizerError):
            BpeModel(vocab=Vocab(entries), merges=[(ord("a"), ord("b"))])
