import pytest
from hypothesis import given, settings, strategies as st

from emoaug.errors import LexiconError
from emoaug.lexicon import (
    PolarityClass,
    build_emotion_lexicon,
    load_emotion_lexicon,
    load_polarity_lexicon,
    parse_nrc,
    parse_sentiwordnet,
    save_lexicons,
    word_emotions,
    word_polarity,
)
from emoaug.taxonomy import BasicEmotion as E

# Hand-derived expectation for the fixture NRC x SE intersection.
EXPECTED_LEXICON = {
    "afraid": {E.FEAR},
    "fantastic": {E.JOY},
    "delightful": {E.JOY},
    "gleeful": {E.JOY},
    "superb": {E.JOY, E.LOVE},
    "wonderful": {E.LOVE},
    "adorable": {E.LOVE},
    "heartwarming": {E.LOVE},
    "infuriating": {E.ANGER},
    "maddening": {E.ANGER},
    "outrageous": {E.ANGER},
    "revolting": {E.ANGER},
    "terrifying": {E.FEAR},
    "worrisome": {E.FEAR},
    "frightful": {E.FEAR},
    "miserable": {E.SADNESS},
    "gloomy": {E.SADNESS},
    "sorrowful": {E.SADNESS},
    "worse": {E.SADNESS},
    "astonishing": {E.SURPRISE},
    "startling": {E.SURPRISE},
    "unforeseen": {E.SURPRISE},
    "baffling": {E.SURPRISE},
    "uncanny": {E.SURPRISE},
    "inexplicable": {E.SURPRISE},
    "perplexing": {E.SURPRISE},
    "curious": {E.SURPRISE},
}


def test_parse_nrc_flags(nrc):
    assert nrc["afraid"] == {"fear", "negative"}
    assert nrc["fantastic"] == {"joy"}  # positive row carries a 0 flag
    assert nrc["superb"] == {"joy", "positive"}
    assert "notaword" not in nrc


def test_parse_nrc_rejects_malformed(tmp_path):
    p = tmp_path / "nrc.txt"
    p.write_text("word\tjoy\t2\n")
    with pytest.raises(LexiconError, match="malformed"):
        parse_nrc(p)
    p.write_text("word\tgrief\t1\n")
    with pytest.raises(LexiconError, match="unknown NRC category"):
        parse_nrc(p)


def test_emotion_lexicon_matches_hand_oracle(emotion_lexicon):
    got = {w: set(es) for w, es in emotion_lexicon.entries.items()}
    assert got == EXPECTED_LEXICON


def test_dropped_words(emotion_lexicon):
    # trust/anticipation/negative-only words have no image; happy is not in
    # the SE list; refactor/pipeline are not in NRC.
    for absent in ("reliable", "upcoming", "buggy", "happy", "refactor", "pipeline"):
        assert absent not in emotion_lexicon.entries


def test_disgust_words_land_in_anger(emotion_lexicon):
    assert word_emotions("revolting", emotion_lexicon) == frozenset({E.ANGER})
    assert word_emotions("outrageous", emotion_lexicon) == frozenset({E.ANGER})


def test_positive_words_land_in_love(emotion_lexicon):
    assert word_emotions("wonderful", emotion_lexicon) == frozenset({E.LOVE})
    assert emotion_lexicon.positive_provenance == frozenset(
        {"superb", "wonderful", "adorable", "heartwarming"}
    )


def test_buckets(emotion_lexicon):
    assert emotion_lexicon.bucket(E.JOY) == ["delightful", "fantastic", "gleeful", "superb"]
    assert emotion_lexicon.bucket(E.LOVE) == ["adorable", "heartwarming", "superb", "wonderful"]
    assert len(emotion_lexicon.bucket(E.SURPRISE)) == 8
    covered = set()
    for e in E:
        covered.update(emotion_lexicon.bucket(e))
    assert covered == set(emotion_lexicon.entries)


def test_lexicon_is_subset_of_both_sources(emotion_lexicon, nrc, se_words):
    vocab = set(emotion_lexicon.vocabulary())
    assert vocab <= set(nrc)
    assert vocab <= set(se_words)


def test_empty_se_list_rejected(nrc):
    with pytest.raises(LexiconError):
        build_emotion_lexicon(nrc, [])


def test_sentiwordnet_synset_averaging(polarity_lexicon):
    # good appears in two synsets: ((0.6 + 0.5)/2, (0.06 + 0)/2)
    assert polarity_lexicon.entries["good"] == pytest.approx((0.55, 0.03))
    # mixed: ((0.5 + 0.25)/2, (0 + 0.25)/2)
    assert polarity_lexicon.entries["mixed"] == pytest.approx((0.375, 0.125))
    assert polarity_lexicon.entries["weak"] == pytest.approx((0.2, 0.15))


@pytest.mark.parametrize(
    "word,cls",
    [
        ("fantastic", PolarityClass.POSITIVE),
        ("good", PolarityClass.POSITIVE),
        ("mixed", PolarityClass.POSITIVE),
        ("weak", PolarityClass.NEUTRAL),  # |0.2 - 0.15| <= 0.1
        ("miserable", PolarityClass.NEGATIVE),
        ("bad", PolarityClass.NEGATIVE),
        ("astonishing", PolarityClass.NEUTRAL),  # absent from the file
    ],
)
def test_polarity_classes(polarity_lexicon, word, cls):
    assert word_polarity(word, polarity_lexicon) is cls


def test_words_of_class_partition(polarity_lexicon):
    classes = [polarity_lexicon.words_of_class(c) for c in PolarityClass]
    flat = sorted(w for ws in classes for w in ws)
    assert flat == sorted(polarity_lexicon.entries)


def test_tau_monotonicity():
    from emoaug.lexicon import PolarityLexicon

    entries = {"a": (0.3, 0.0), "b": (0.15, 0.0), "c": (0.0, 0.3), "d": (0.05, 0.0)}
    prev_polar = None
    for tau in (0.05, 0.1, 0.2, 0.35):
        plex = PolarityLexicon(entries=entries, tau=tau)
        polar = {
            w for w in entries
            if plex.classify(w) is not PolarityClass.NEUTRAL
        }
        if prev_polar is not None:
            assert polar <= prev_polar
        prev_polar = polar


def test_sentiwordnet_rejects_bad_lines(tmp_path):
    p = tmp_path / "swn.txt"
    p.write_text("a\t1\t0.5\n")
    with pytest.raises(LexiconError, match="fields"):
        parse_sentiwordnet(p)
    p.write_text("a\t1\tx\t0\tword#1\tgloss\n")
    with pytest.raises(LexiconError, match="non-numeric"):
        parse_sentiwordnet(p)


@given(
    st.dictionaries(
        st.sampled_from(["alpha", "beta", "gamma", "delta"]),
        st.sets(st.sampled_from(sorted({"joy", "fear", "trust", "positive", "negative"})), min_size=1),
        min_size=1,
    )
)
@settings(max_examples=100, deadline=None)
def test_build_respects_intersection(nrc_map):
    se = ["alpha", "beta", "extra"]
    lex = build_emotion_lexicon(nrc_map, se)
    for word, emotions in lex.entries.items():
        assert word in se and word in nrc_map
        assert emotions  # never an empty mapping
        for e in emotions:
            assert isinstance(e, E)


def test_save_load_roundtrip(tmp_path, emotion_lexicon, polarity_lexicon):
    log = save_lexicons(emotion_lexicon, polarity_lexicon, tmp_path)
    assert log["emotion_lexicon_words"] == len(EXPECTED_LEXICON)
    lex2 = load_emotion_lexicon(tmp_path / "emotion_lexicon.json")
    plex2 = load_polarity_lexicon(tmp_path / "polarity_lexicon.json")
    assert lex2.entries == emotion_lexicon.entries
    assert plex2.tau == polarity_lexicon.tau
    for w, (p, n) in polarity_lexicon.entries.items():
        assert plex2.entries[w] == pytest.approx((p, n))
