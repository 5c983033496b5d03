import os
from pathlib import Path

import hypothesis
import pytest

from termforge.subword import SubwordVocab, load_vocab

hypothesis.settings.register_profile("ci", deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CORPUS = FIXTURES / "corpus"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def bert_vocab() -> SubwordVocab:
    return load_vocab(FIXTURES / "bert-base-uncased-vocab.txt")


@pytest.fixture
def tiny_vocab() -> SubwordVocab:
    return SubwordVocab(
        ["sun", "para", "##ce", "##tam", "##ol", "net", "##work", "##s", "[UNK]"]
    )
