"""Emotion and polarity lexicons.

The emotion lexicon is the intersection of a software-engineering word list
with the NRC emotion lexicon, with NRC categories remapped onto the six basic
emotions (Disgust folded into Anger, the positive module standing in for
Love). Word polarity comes from synset-averaged SentiWordNet scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import LexiconError
from .taxonomy import PLUTCHIK_TO_SHAVER, BasicEmotion

NRC_CATEGORIES = {
    "anger", "anticipation", "disgust", "fear", "joy",
    "sadness", "surprise", "trust", "positive", "negative",
}

DEFAULT_POLARITY_TAU = 0.1


class PolarityClass(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


def parse_nrc(path: str | Path) -> dict[str, set[str]]:
    """Parse the tab-separated NRC file into word -> flagged categories."""
    mapping: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise LexiconError(f"{path}:{lineno}: malformed NRC line {line.rstrip()!r}")
            word, category, flag = parts
            category = category.strip().lower()
            if category not in NRC_CATEGORIES:
                raise LexiconError(f"{path}:{lineno}: unknown NRC category {category!r}")
            if flag == "1":
                mapping.setdefault(word.strip().lower(), set()).add(category)
    return mapping


def load_wordlist(path: str | Path) -> list[str]:
    """One word per line; blank lines and # comments skipped; lowercased."""
    words: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.append(word)
    return words


@dataclass
class PolarityLexicon:
    entries: dict[str, tuple[float, float]]  # word -> (pos_score, neg_score)
    tau: float = DEFAULT_POLARITY_TAU

    def classify(self, word: str) -> PolarityClass:
        return word_polarity(word, self)

    def words_of_class(self, cls: PolarityClass) -> list[str]:
        return sorted(w for w in self.entries if self.classify(w) is cls)


def parse_sentiwordnet(path: str | Path, tau: float = DEFAULT_POLARITY_TAU) -> PolarityLexicon:
    """Parse a SentiWordNet 3.0 style file into synset-averaged scores.

    Terms are stripped of their #sense suffix and lowercased; a term's scores
    are the arithmetic mean over every synset row it appears in.
    """
    sums: dict[str, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 5:
                raise LexiconError(f"{path}:{lineno}: expected >=5 tab-separated fields")
            try:
                pos_score = float(parts[2])
                neg_score = float(parts[3])
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: non-numeric score")
            for term in parts[4].split():
                word = term.split("#")[0].strip().lower()
                if not word:
                    continue
                acc = sums.setdefault(word, [0.0, 0.0, 0.0])
                acc[0] += pos_score
                acc[1] += neg_score
                acc[2] += 1.0
    entries = {w: (p / n, m / n) for w, (p, m, n) in sums.items()}
    return PolarityLexicon(entries=entries, tau=tau)


@dataclass
class EmotionLexicon:
    entries: dict[str, frozenset[BasicEmotion]]
    # words whose Love membership came from the NRC positive module
    positive_provenance: frozenset[str] = frozenset()
    _buckets: dict[BasicEmotion, list[str]] = field(default_factory=dict, repr=False)

    def bucket(self, emotion: BasicEmotion) -> list[str]:
        if emotion not in self._buckets:
            self._buckets[emotion] = sorted(
                w for w, es in self.entries.items() if emotion in es
            )
        return self._buckets[emotion]

    def vocabulary(self) -> list[str]:
        return sorted(self.entries)

    def to_json(self) -> dict[str, list[str]]:
        return {w: sorted(e.value for e in es) for w, es in sorted(self.entries.items())}


def build_emotion_lexicon(nrc: dict[str, set[str]], se_words: list[str]) -> EmotionLexicon:
    """Intersect the SE word list with NRC and remap categories.

    Words whose NRC categories all lack an image under the Plutchik-to-basic
    mapping (e.g. only trust/anticipation/negative) are dropped.
    """
    if not se_words:
        raise LexiconError("software-engineering word list is empty")
    entries: dict[str, frozenset[BasicEmotion]] = {}
    from_positive: set[str] = set()
    for word in sorted({w.lower() for w in se_words}):
        cats = nrc.get(word)
        if not cats:
            continue
        mapped = {PLUTCHIK_TO_SHAVER[c] for c in cats if c in PLUTCHIK_TO_SHAVER}
        if not mapped:
            continue
        entries[word] = frozenset(mapped)
        if "positive" in cats:
            from_positive.add(word)
    return EmotionLexicon(entries=entries, positive_provenance=frozenset(from_positive))


def word_emotions(word: str, lex: EmotionLexicon) -> frozenset[BasicEmotion]:
    return lex.entries.get(word.lower(), frozenset())


def word_polarity(word: str, plex: PolarityLexicon) -> PolarityClass:
    scores = plex.entries.get(word.lower())
    if scores is None:
        return PolarityClass.NEUTRAL
    pos, neg = scores
    if pos - neg > plex.tau:
        return PolarityClass.POSITIVE
    if neg - pos > plex.tau:
        return PolarityClass.NEGATIVE
    return PolarityClass.NEUTRAL


def save_lexicons(lex: EmotionLexicon, plex: PolarityLexicon, out_dir: str | Path) -> dict:
    """Serialize both lexicons as JSON for inspection; returns a build log."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "emotion_lexicon.json", "w", encoding="utf-8") as fh:
        json.dump(lex.to_json(), fh, indent=2, sort_keys=True)
    with open(out_dir / "polarity_lexicon.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "tau": plex.tau,
                "entries": {w: {"pos": p, "neg": n} for w, (p, n) in sorted(plex.entries.items())},
            },
            fh,
            indent=2,
            sort_keys=True,
        )
    log = {
        "emotion_lexicon_words": len(lex.entries),
        "polarity_lexicon_words": len(plex.entries),
        "bucket_sizes": {e.value: len(lex.bucket(e)) for e in BasicEmotion},
    }
    with open(out_dir / "build_log.json", "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
    return log


def load_emotion_lexicon(path: str | Path) -> EmotionLexicon:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    entries = {
        w: frozenset(BasicEmotion.parse(e) for e in es) for w, es in data.items()
    }
    return EmotionLexicon(entries=entries)


def load_polarity_lexicon(path: str | Path) -> PolarityLexicon:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return PolarityLexicon(
        entries={w: (v["pos"], v["neg"]) for w, v in data["entries"].items()},
        tau=data.get("tau", DEFAULT_POLARITY_TAU),
    )
