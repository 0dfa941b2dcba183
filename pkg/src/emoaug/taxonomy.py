"""Three-level emotion tree (basic / secondary / tertiary) and schema mappings.

The default tree combines Shaver's hierarchy with six secondary categories
imported from GoEmotions. A separate static mapping bridges the Plutchik-style
categories used by the NRC lexicon onto the six basic emotions.
"""

from __future__ import annotations

import csv
import difflib
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import TaxonomyError


class BasicEmotion(str, Enum):
    ANGER = "Anger"
    LOVE = "Love"
    FEAR = "Fear"
    JOY = "Joy"
    SADNESS = "Sadness"
    SURPRISE = "Surprise"

    @classmethod
    def parse(cls, name: str) -> "BasicEmotion":
        for e in cls:
            if e.value.lower() == name.strip().lower():
                return e
        raise TaxonomyError(f"unknown basic emotion: {name!r}")


# NRC categories -> basic emotions. Disgust folds into Anger; the positive
# module stands in for Love; Trust, Anticipation and negative have no image.
PLUTCHIK_TO_SHAVER: dict[str, BasicEmotion] = {
    "anger": BasicEmotion.ANGER,
    "disgust": BasicEmotion.ANGER,
    "fear": BasicEmotion.FEAR,
    "joy": BasicEmotion.JOY,
    "sadness": BasicEmotion.SADNESS,
    "surprise": BasicEmotion.SURPRISE,
    "positive": BasicEmotion.LOVE,
}

GOEMOTIONS_SECONDARY = {
    "Disapproval", "Approval", "Admiration", "Confusion", "Curiosity", "Realization",
}


@dataclass
class TaxonomyEntry:
    basic: BasicEmotion
    secondary: str
    tertiary: list[str] = field(default_factory=list)
    origin: str = "shaver"


@dataclass
class EmotionTaxonomy:
    entries: list[TaxonomyEntry]
    # lowercased name -> owning basic emotion, per level
    _secondary: dict[str, BasicEmotion] = field(default_factory=dict, repr=False)
    _tertiary: dict[str, BasicEmotion] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for entry in self.entries:
            key = entry.secondary.lower()
            if key in self._secondary:
                raise TaxonomyError(f"duplicate secondary emotion: {entry.secondary}")
            self._secondary[key] = entry.basic
            for t in entry.tertiary:
                # tertiary duplicates across branches exist in the source
                # table (Loathing); first occurrence wins, both map to Anger.
                self._tertiary.setdefault(t.lower(), entry.basic)

    def secondaries_of(self, basic: BasicEmotion) -> list[str]:
        return [e.secondary for e in self.entries if e.basic == basic]

    def known_names(self) -> list[str]:
        names = {e.value for e in BasicEmotion}
        names.update(self._secondary)
        names.update(self._tertiary)
        return sorted(n.capitalize() if n.islower() else n for n in names)

    def basic_of(self, name: str) -> BasicEmotion:
        """Resolve a name at any level of the tree to its basic emotion.

        A name that is itself a basic emotion resolves to itself, even when it
        also appears deeper in the tree (e.g. Sadness, Surprise, Anger).
        """
        key = name.strip().lower()
        for e in BasicEmotion:
            if e.value.lower() == key:
                return e
        if key in self._secondary:
            return self._secondary[key]
        if key in self._tertiary:
            return self._tertiary[key]
        near = difflib.get_close_matches(key, list(self._secondary) + list(self._tertiary), n=3)
        raise TaxonomyError(f"unknown emotion name: {name!r} (close matches: {near})")

    def contains(self, name: str) -> bool:
        try:
            self.basic_of(name)
            return True
        except TaxonomyError:
            return False


def default_taxonomy_path() -> Path:
    return Path(str(resources.files("emoaug").joinpath("data/taxonomy.csv")))


def load_taxonomy(path: str | Path | None = None) -> EmotionTaxonomy:
    """Load and validate a taxonomy CSV (basic,secondary,tertiary,origin)."""
    path = Path(path) if path is not None else default_taxonomy_path()
    grouped: dict[tuple[str, str], TaxonomyEntry] = {}
    seen_secondary: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"basic", "secondary", "tertiary", "origin"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise TaxonomyError(f"taxonomy file {path} must have columns {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                basic = BasicEmotion.parse(row["basic"])
            except TaxonomyError as exc:
                raise TaxonomyError(f"{path}:{lineno}: {exc}") from exc
            secondary = row["secondary"].strip()
            if not secondary:
                raise TaxonomyError(f"{path}:{lineno}: empty secondary name")
            owner = seen_secondary.setdefault(secondary.lower(), basic.value)
            if owner != basic.value:
                raise TaxonomyError(
                    f"{path}:{lineno}: secondary {secondary!r} listed under both {owner} and {basic.value}"
                )
            key = (basic.value, secondary.lower())
            entry = grouped.setdefault(
                key, TaxonomyEntry(basic, secondary, [], row["origin"].strip() or "shaver")
            )
            tertiary = row["tertiary"].strip()
            if tertiary and tertiary not in entry.tertiary:
                entry.tertiary.append(tertiary)
    if not grouped:
        raise TaxonomyError(f"taxonomy file {path} is empty")
    return EmotionTaxonomy(list(grouped.values()))
