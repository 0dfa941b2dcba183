import math
import random
import re
from collections import Counter

import pytest

from emoaug.corpus import Utterance
from emoaug.lexicon import PolarityClass, word_emotions, word_polarity
from emoaug.operators import Token, detokenize, op_insert, tokenize
from emoaug.seeding import rng_for
from emoaug.strategies import (
    AugmentationConfig,
    PolarityProfile,
    VariantRejected,
    augment_dataset,
    cosine,
    embed_native,
    generate_variant,
    ops_count,
    polarity_ok,
    polarity_profile,
    repair_lexicon,
    similarity_gate,
)
from emoaug.taxonomy import BasicEmotion as E

from helpers_corpora import make_contract_corpus


def _cfg(**kw):
    return AugmentationConfig(**kw)


# ------------------------------------------------------------------ op budget

@pytest.mark.parametrize("n,expected", [(5, 2), (10, 2), (13, 2), (15, 3), (20, 4), (30, 6)])
def test_ops_count(n, expected):
    assert ops_count(n, _cfg()) == expected


def test_ops_count_respects_min():
    assert ops_count(100, _cfg(ops_fraction=0.01, ops_min=3)) == 3


# -------------------------------------------------------------- polarity rules

P = PolarityProfile


@pytest.mark.parametrize(
    "orig,cand,labels,ok",
    [
        # purely positive labels: positive-word count must not drop
        (P(2, 0), P(2, 5), {E.JOY}, True),
        (P(2, 0), P(3, 0), {E.LOVE, E.JOY}, True),
        (P(2, 0), P(1, 0), {E.JOY}, False),
        # purely negative labels: negative-word count must not drop
        (P(0, 2), P(0, 2), {E.ANGER, E.SADNESS}, True),
        (P(0, 2), P(4, 1), {E.FEAR}, False),
        # surprise / mixed / neutral: net sign must be preserved
        (P(1, 1), P(3, 3), {E.SURPRISE}, True),
        (P(2, 1), P(1, 2), {E.SURPRISE}, False),
        (P(0, 0), P(0, 0), frozenset(), True),
        (P(0, 0), P(1, 0), frozenset(), False),
        (P(3, 1), P(2, 1), {E.JOY, E.ANGER}, True),  # sign still positive
        (P(3, 1), P(1, 1), {E.JOY, E.ANGER}, False),
    ],
)
def test_polarity_ok(orig, cand, labels, ok):
    assert polarity_ok(orig, cand, frozenset(labels)) is ok


def test_polarity_profile_counts(polarity_lexicon):
    tu = tokenize("fantastic but miserable and gloomy <url> stuff.")
    prof = polarity_profile(tu, polarity_lexicon)
    assert (prof.pos_count, prof.neg_count, prof.net_sign) == (1, 2, -1)


# ------------------------------------------------------------------- embedding

def _brute_trigrams(text):
    s = re.sub(r"\s+", " ", text.strip().lower())
    grams = Counter(s[i : i + 3] for i in range(len(s) - 2)) if len(s) >= 3 else Counter([s] if s else [])
    norm = math.sqrt(sum(v * v for v in grams.values()))
    return {g: v / norm for g, v in grams.items()} if norm else {}


@pytest.mark.parametrize(
    "text",
    ["the build failed again.", "ab", "a", "  spaced   OUT  text ", "<url> and <code>"],
)
def test_embed_native_matches_brute_force(text):
    got = embed_native(text)
    want = _brute_trigrams(text)
    assert set(got) == set(want)
    for g in got:
        assert got[g] == pytest.approx(want[g], abs=1e-9)


def test_embed_native_unit_norm():
    vec = embed_native("some reasonably long sentence about builds.")
    assert sum(v * v for v in vec.values()) == pytest.approx(1.0, abs=1e-9)


def test_cosine_bounds():
    a = embed_native("identical text here")
    assert cosine(a, a) == pytest.approx(1.0, abs=1e-9)
    b = embed_native("zzz qqq xxx")
    assert cosine(a, b) == pytest.approx(0.0, abs=1e-9)
    assert cosine({}, a) == 0.0


def test_similarity_gate_threshold():
    text = "one two three four five six seven eight nine ten eleven twelve."
    near = text.replace("five", "fave")
    far = "completely different content with nothing shared at all whatsoever."
    assert similarity_gate(text, near, _cfg()).passed
    res = similarity_gate(text, far, _cfg())
    assert not res.passed and res.similarity < 0.5


# ---------------------------------------------------------------------- repair

class OneWordProposer:
    def __init__(self, word):
        self.word = word

    def propose(self, context, position, mode, constraint, rng):
        from emoaug.operators import Proposal

        return [Proposal(self.word, 1.0, "lexicon")]


def test_repair_replaces_conflicting_word(emotion_lexicon):
    tu = tokenize("adorable work on this patch.")
    # introduce a Sadness word into a Love-labeled instance
    tu2, edit = op_insert(tu, 2, OneWordProposer("worse"), random.Random(0))
    introduced = [tu2.tokens[edit.index]]
    edits = [edit]
    out = repair_lexicon(tu2, edits, introduced, frozenset({E.LOVE}), emotion_lexicon, random.Random(1))
    text = detokenize(out)
    assert "worse" not in text
    inserted = text.split()[2]
    assert E.LOVE in word_emotions(inserted, emotion_lexicon)
    assert edits[-1].op == "substitute" and edits[-1].before == "worse"


def test_repair_keeps_compatible_and_unknown_words(emotion_lexicon):
    tu = tokenize("nice work here.")
    tu2, e1 = op_insert(tu, 0, OneWordProposer("wonderful"), random.Random(0))
    tu3, e2 = op_insert(tu2, 1, OneWordProposer("compiler"), random.Random(0))
    introduced = [tu2.tokens[e1.index], tu3.tokens[e2.index]]
    out = repair_lexicon(tu3, [e1, e2], introduced, frozenset({E.LOVE}), emotion_lexicon, random.Random(1))
    assert detokenize(out) == detokenize(tu3)


def test_repair_rejects_neutral_conflict(emotion_lexicon):
    tu = tokenize("plain text here.")
    tu2, edit = op_insert(tu, 0, OneWordProposer("miserable"), random.Random(0))
    with pytest.raises(VariantRejected, match="neutral"):
        repair_lexicon(tu2, [edit], [tu2.tokens[edit.index]], frozenset(), emotion_lexicon, random.Random(0))


# ------------------------------------------------------------------- generation

def _utterance(text, labels=frozenset(), uid="u1"):
    return Utterance(id=uid, raw_text=text, masked_text=text, labels=frozenset(labels))


def test_generate_variant_deterministic(emotion_lexicon, polarity_lexicon):
    from emoaug.operators import LexiconProposer

    u = _utterance("the build failed on the new runner again today. we rolled it back.")
    cfg = _cfg(strategy="unconstrained", seed=5)
    prop = LexiconProposer(emotion_lexicon, polarity_lexicon)
    out1 = generate_variant(u, cfg, emotion_lexicon, polarity_lexicon, prop, rng_for(5, "x"))
    out2 = generate_variant(u, cfg, emotion_lexicon, polarity_lexicon, prop, rng_for(5, "x"))
    assert detokenize(out1[0]) == detokenize(out2[0])
    assert [e.to_dict() for e in out1[1]] == [e.to_dict() for e in out2[1]]


def test_generate_variant_applies_budget(emotion_lexicon, polarity_lexicon):
    from emoaug.operators import LexiconProposer

    text = " ".join(["word"] * 20) + "."
    u = _utterance(text)
    cfg = _cfg(strategy="unconstrained", seed=1)
    prop = LexiconProposer(emotion_lexicon, polarity_lexicon)
    tu, edits, _ = generate_variant(u, cfg, emotion_lexicon, polarity_lexicon, prop, rng_for(1, "y"))
    assert len(edits) == ops_count(20, cfg)


def test_generate_variant_empty_text_rejected(emotion_lexicon):
    from emoaug.operators import LexiconProposer

    u = _utterance("...")
    with pytest.raises(VariantRejected):
        generate_variant(
            u, _cfg(), emotion_lexicon, None, LexiconProposer(emotion_lexicon), rng_for(0, "z")
        )


# ------------------------------------------------------------- dataset pipeline

@pytest.fixture(scope="module")
def small_corpus():
    return make_contract_corpus(n=21, seed=3)


@pytest.mark.parametrize("strategy", ["unconstrained", "lexicon", "polarity"])
def test_augment_dataset_contract(strategy, small_corpus, emotion_lexicon, polarity_lexicon):
    cfg = _cfg(strategy=strategy, variants_per_instance=4, seed=9)
    variants, report = augment_dataset(
        small_corpus, cfg, lex=emotion_lexicon, plex=polarity_lexicon
    )
    by_parent = {u.id: u for u in small_corpus}
    for v in variants:
        parent = by_parent[v.parent_id]
        assert v.labels == parent.labels
        assert v.id == f"{v.parent_id}-aug{v.variant_index}"
        assert v.text != parent.masked_text
        assert v.similarity >= cfg.similarity_threshold
        assert v.edits
    ids = [v.id for v in variants]
    assert len(ids) == len(set(ids))
    assert report["variants_emitted"] == len(variants) <= report["variants_requested"]
    assert sum(r["emitted"] for r in report["per_instance"]) == len(variants)


def test_augment_lexicon_strategy_never_contradicts_labels(
    small_corpus, emotion_lexicon, polarity_lexicon
):
    cfg = _cfg(strategy="lexicon", variants_per_instance=4, seed=9)
    variants, _ = augment_dataset(small_corpus, cfg, lex=emotion_lexicon, plex=polarity_lexicon)
    by_parent = {u.id: u for u in small_corpus}
    for v in variants:
        parent_words = set(by_parent[v.parent_id].masked_text.lower().split())
        for word in v.text.lower().split():
            word = word.strip(".,!?")
            emotions = word_emotions(word, emotion_lexicon)
            if emotions and word not in parent_words:
                assert emotions & v.labels, (v.id, word)


def test_augment_polarity_strategy_respects_rules(
    small_corpus, emotion_lexicon, polarity_lexicon
):
    cfg = _cfg(strategy="polarity", variants_per_instance=4, seed=9)
    variants, _ = augment_dataset(small_corpus, cfg, lex=emotion_lexicon, plex=polarity_lexicon)
    by_parent = {u.id: u for u in small_corpus}
    assert variants
    for v in variants:
        orig = polarity_profile(tokenize(by_parent[v.parent_id].masked_text), polarity_lexicon)
        cand = polarity_profile(tokenize(v.text), polarity_lexicon)
        assert polarity_ok(orig, cand, v.labels), v.id


def test_augment_dataset_deterministic_across_workers(
    small_corpus, emotion_lexicon, polarity_lexicon
):
    cfg = _cfg(strategy="lexicon", variants_per_instance=3, seed=4)
    runs = [
        augment_dataset(small_corpus, cfg, lex=emotion_lexicon, plex=polarity_lexicon, workers=w)[0]
        for w in (1, 1, 4)
    ]
    records = [[v.to_record() for v in run] for run in runs]
    assert records[0] == records[1] == records[2]


def test_augment_dataset_seed_changes_output(small_corpus, emotion_lexicon, polarity_lexicon):
    a, _ = augment_dataset(
        small_corpus, _cfg(strategy="unconstrained", variants_per_instance=2, seed=1),
        lex=emotion_lexicon, plex=polarity_lexicon,
    )
    b, _ = augment_dataset(
        small_corpus, _cfg(strategy="unconstrained", variants_per_instance=2, seed=2),
        lex=emotion_lexicon, plex=polarity_lexicon,
    )
    assert [v.text for v in a] != [v.text for v in b]


def test_polarity_tau_override_rebuilds_lexicon(small_corpus, emotion_lexicon, polarity_lexicon):
    cfg = _cfg(strategy="polarity", variants_per_instance=2, seed=3, polarity_tau=0.5)
    variants, _ = augment_dataset(small_corpus, cfg, lex=emotion_lexicon, plex=polarity_lexicon)
    # with tau=0.5 every fixture word is Neutral, so deletes become legal everywhere
    assert polarity_lexicon.tau == pytest.approx(0.1)  # input untouched
    assert all(word_polarity(v.text.split()[0], polarity_lexicon) is not None for v in variants)


# ---------------------------------------------------------------------- config

def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown augmentation config keys"):
        AugmentationConfig.from_dict({"strategy": "lexicon", "variance": 3})


@pytest.mark.parametrize(
    "kw",
    [
        {"strategy": "mystery"},
        {"variants_per_instance": 0},
        {"ops_fraction": 0.0},
        {"similarity_threshold": 1.5},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AugmentationConfig(**kw)
