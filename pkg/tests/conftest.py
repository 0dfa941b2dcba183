"""Shared fixtures: hand-built lexicons and seeded synthetic corpora."""

import pytest

from emoaug.lexicon import build_emotion_lexicon, load_wordlist, parse_nrc, parse_sentiwordnet
from helpers_corpora import FIXTURES, make_contract_corpus, make_planted_corpus


@pytest.fixture(scope="session")
def nrc():
    return parse_nrc(FIXTURES / "nrc_fixture.txt")


@pytest.fixture(scope="session")
def se_words():
    return load_wordlist(FIXTURES / "se_words.txt")


@pytest.fixture(scope="session")
def emotion_lexicon(nrc, se_words):
    return build_emotion_lexicon(nrc, se_words)


@pytest.fixture(scope="session")
def polarity_lexicon():
    return parse_sentiwordnet(FIXTURES / "sentiwordnet_fixture.txt")


@pytest.fixture(scope="session")
def contract_corpus():
    return make_contract_corpus()


@pytest.fixture(scope="session")
def planted_corpus():
    return make_planted_corpus()
