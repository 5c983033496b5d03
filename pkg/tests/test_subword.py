import logging
import math
import random
import string

import pytest
from hypothesis import given, strategies as st

from termforge.subword import SubwordVocab, load_vocab, subtoken_count, tokenize_word


def longest_vocab_prefix(word, vocab):
    """Brute-force scan for the longest vocabulary prefix of a word."""
    best = None
    for end in range(1, len(word) + 1):
        if word[:end] in vocab.entries:
            best = word[:end]
    return best


class TestLoadVocab:
    def test_small_file(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("sun\npara\n##ce\n##tam\n##ol\n[UNK]\n")
        vocab = load_vocab(path)
        assert len(vocab) == 6

    def test_real_vocab_size(self, bert_vocab):
        assert len(bert_vocab) == 30522

    def test_duplicates_warn_and_dedup(self, tmp_path, caplog):
        path = tmp_path / "vocab.txt"
        path.write_text("sun\nsun\n[UNK]\n")
        with caplog.at_level(logging.WARNING):
            vocab = load_vocab(path)
        assert len(vocab) == 2
        assert any("duplicate" in r.message for r in caplog.records)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_vocab(tmp_path / "nope.txt")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("\n\n")
        with pytest.raises(ValueError):
            load_vocab(path)

    def test_unk_always_present(self):
        vocab = SubwordVocab(["sun"])
        assert "[UNK]" in vocab


class TestTokenizeWord:
    def test_sun_single_unit(self, tiny_vocab):
        assert tokenize_word("sun", tiny_vocab).units == ("sun",)

    def test_paracetamol_four_units(self, tiny_vocab):
        seg = tokenize_word("paracetamol", tiny_vocab)
        assert seg.units == ("para", "##ce", "##tam", "##ol")
        assert not seg.is_unknown

    def test_real_vocab_reproduces_segmentations(self, bert_vocab):
        assert tokenize_word("paracetamol", bert_vocab).units == ("para", "##ce", "##tam", "##ol")
        assert tokenize_word("sun", bert_vocab).units == ("sun",)

    def test_lowercases_input(self, tiny_vocab):
        assert tokenize_word("Paracetamol", tiny_vocab).units == ("para", "##ce", "##tam", "##ol")

    def test_whole_word_in_vocab_is_single_unit(self, bert_vocab):
        for word in ("telescope", "galaxy", "Study", "BASELINE"):
            seg = tokenize_word(word, bert_vocab)
            assert seg.units == (word.lower(),)

    def test_unknown_character_gives_unk(self, tiny_vocab):
        seg = tokenize_word("sun☃", tiny_vocab)
        assert seg.is_unknown and seg.units == ("[UNK]",)

    def test_too_long_word_is_unk(self):
        vocab = SubwordVocab(["a", "##a"], max_word_chars=5)
        assert not tokenize_word("aaaaa", vocab).is_unknown
        assert tokenize_word("aaaaaa", vocab).is_unknown

    def test_empty_word_rejected(self, tiny_vocab):
        with pytest.raises(ValueError):
            tokenize_word("", tiny_vocab)

    def test_determinism(self, bert_vocab):
        a = tokenize_word("pharmacokinetics", bert_vocab)
        b = tokenize_word("pharmacokinetics", bert_vocab)
        assert a == b

    def test_first_unit_is_longest_prefix(self, bert_vocab):
        rng = random.Random(31337)
        for _ in range(200):
            word = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 12)))
            seg = tokenize_word(word, bert_vocab)
            if seg.is_unknown:
                continue
            assert seg.units[0] == longest_vocab_prefix(word, bert_vocab)

    @given(st.text(alphabet=string.ascii_letters + string.digits, min_size=1, max_size=20))
    def test_reconstruction(self, word):
        vocab = SubwordVocab(
            [c for c in string.ascii_lowercase + string.digits]
            + ["##" + c for c in string.ascii_lowercase + string.digits]
            + ["the", "##ing", "para", "##ce"]
        )
        seg = tokenize_word(word, vocab)
        assert not seg.is_unknown
        rebuilt = "".join(u[2:] if u.startswith("##") else u for u in seg.units)
        assert rebuilt == word.lower()

    def test_reconstruction_on_real_vocab(self, bert_vocab):
        rng = random.Random(777)
        words = ["conductivity", "hepatotoxicity", "tokenizers", "Multilingual", "x-ray"]
        words += ["".join(rng.choice(string.ascii_lowercase) for _ in range(8)) for _ in range(50)]
        for word in words:
            seg = tokenize_word(word, bert_vocab)
            if seg.is_unknown:
                continue
            rebuilt = "".join(u[2:] if u.startswith("##") else u for u in seg.units)
            assert rebuilt == word.lower()


class TestSubtokenCount:
    def test_paper_counts(self, bert_vocab):
        assert subtoken_count("paracetamol", bert_vocab) == 4
        assert subtoken_count("sun", bert_vocab) == 1

    def test_unknown_is_infinite(self, tiny_vocab):
        count = subtoken_count("qqq", tiny_vocab)
        assert math.isinf(count)
        assert count > 10**9
