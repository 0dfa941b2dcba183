"""Placeholder-aware tokenization and the four augmentation operators.

Operators are pure functions of (input, rng): equal seeds give equal output.
Word proposals for insert/substitute come through a pluggable proposer; the
native proposer draws from the built lexicons, the external one from the
model-service HTTP endpoint.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

import requests

from .errors import OperatorFailure, ProposerProtocolError, ProposerUnavailableError
from .lexicon import EmotionLexicon, PolarityClass, PolarityLexicon, word_polarity
from .taxonomy import BasicEmotion

PLACEHOLDERS = ("<url>", "<username>", "<code>")
MASK_TOKEN = "<mask>"

_SENTENCE_END = re.compile(r"[.!?]")
_EDGE = re.compile(r"^(\W*)(.*?)(\W*)$", re.S)

WORD = "word"
PUNCT = "punct"
PLACEHOLDER = "placeholder"


@dataclass(frozen=True)
class Token:
    text: str
    kind: str  # word | punct | placeholder
    glued: bool = False  # attaches to the previous token without a space


@dataclass
class TokenizedUtterance:
    tokens: list[Token]
    sentence_bounds: list[tuple[int, int]]

    def word_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if t.kind == WORD]


def tokenize(text: str) -> TokenizedUtterance:
    """Whitespace tokenization with punctuation peeling and atomic placeholders.

    Sentence boundaries fall after `.`, `!` or `?` at the end of a whitespace
    token (i.e. followed by whitespace or end of text).
    """
    tokens: list[Token] = []
    breaks: list[int] = []  # indices of last token of each sentence
    for chunk in text.split():
        if chunk in PLACEHOLDERS:
            tokens.append(Token(chunk, PLACEHOLDER))
            continue
        m = _EDGE.match(chunk)
        lead, core, trail = m.group(1), m.group(2), m.group(3)
        if not core and not trail:
            core, lead = lead, ""
        if lead:
            tokens.append(Token(lead, PUNCT))
        if core:
            tokens.append(Token(core, WORD if any(c.isalnum() for c in core) else PUNCT,
                                glued=bool(lead) and False))
        if trail:
            tokens.append(Token(trail, PUNCT, glued=True))
            if _SENTENCE_END.search(trail):
                breaks.append(len(tokens) - 1)
        elif core and not any(c.isalnum() for c in core) and _SENTENCE_END.search(core):
            breaks.append(len(tokens) - 1)

    bounds: list[tuple[int, int]] = []
    start = 0
    for b in breaks:
        bounds.append((start, b + 1))
        start = b + 1
    if start < len(tokens):
        bounds.append((start, len(tokens)))
    if not bounds and tokens:
        bounds.append((0, len(tokens)))
    return TokenizedUtterance(tokens=tokens, sentence_bounds=bounds)


def detokenize(tu: TokenizedUtterance) -> str:
    parts: list[str] = []
    for tok in tu.tokens:
        if tok.glued and parts:
            parts[-1] += tok.text
        else:
            parts.append(tok.text)
    return " ".join(parts)


def augmentable_length(tu: TokenizedUtterance) -> int:
    """Number of word tokens; placeholders and punctuation do not count."""
    return len(tu.word_indices())


@dataclass(frozen=True)
class Proposal:
    word: str
    score: float
    source: str  # lexicon | external

    def __post_init__(self):
        if not self.word or any(c.isspace() for c in self.word):
            raise ValueError(f"proposal must be a single token, got {self.word!r}")


@dataclass
class EditRecord:
    op: str  # insert | substitute | delete | shuffle
    index: Optional[int] = None
    before: Optional[str] = None
    after: Optional[str] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


class Proposer(Protocol):
    def propose(
        self,
        context: TokenizedUtterance,
        position: int,
        mode: str,
        constraint: Optional[dict],
        rng: random.Random,
    ) -> list[Proposal]: ...


def _pick_best(proposals: list[Proposal], rng: random.Random) -> Proposal:
    best = max(p.score for p in proposals)
    tied = [p for p in proposals if p.score == best]
    return rng.choice(tied)


def op_insert(
    tu: TokenizedUtterance,
    gap: int,
    proposer: Proposer,
    rng: random.Random,
    constraint: Optional[dict] = None,
) -> tuple[TokenizedUtterance, EditRecord]:
    """Insert a proposed word at word-gap `gap` (0 .. number of words)."""
    words = tu.word_indices()
    if not words:
        raise OperatorFailure("no word position to insert next to")
    if not 0 <= gap <= len(words):
        raise OperatorFailure(f"insert gap {gap} out of range")
    proposals = proposer.propose(tu, gap, "insert", constraint, rng)
    if not proposals:
        raise OperatorFailure("proposer returned no insertion candidates")
    chosen = _pick_best(proposals, rng)
    tok_index = words[gap] if gap < len(words) else words[-1] + 1
    tokens = list(tu.tokens)
    tokens.insert(tok_index, Token(chosen.word, WORD))
    return _retokenized(tokens), EditRecord("insert", index=tok_index, after=chosen.word)


def op_substitute(
    tu: TokenizedUtterance,
    position: int,
    proposer: Proposer,
    rng: random.Random,
    constraint: Optional[dict] = None,
) -> tuple[TokenizedUtterance, EditRecord]:
    """Replace the word at word-index `position` with a proposed word."""
    words = tu.word_indices()
    if not 0 <= position < len(words):
        raise OperatorFailure(f"substitute position {position} out of range")
    tok_index = words[position]
    target = tu.tokens[tok_index]
    if target.kind != WORD:
        raise OperatorFailure("substitution target must be a plain word")
    proposals = proposer.propose(tu, position, "substitute", constraint, rng)
    proposals = [p for p in proposals if p.word.lower() != target.text.lower()]
    if not proposals:
        raise OperatorFailure("proposer returned no substitution candidates")
    chosen = _pick_best(proposals, rng)
    tokens = list(tu.tokens)
    tokens[tok_index] = replace(target, text=chosen.word)
    return _retokenized(tokens), EditRecord(
        "substitute", index=tok_index, before=target.text, after=chosen.word
    )


def op_delete(
    tu: TokenizedUtterance,
    position: int,
    rng: random.Random,
) -> tuple[TokenizedUtterance, EditRecord]:
    """Delete the word at word-index `position`; never deletes the last word."""
    words = tu.word_indices()
    if len(words) < 2:
        raise OperatorFailure("refusing to delete the only word")
    if not 0 <= position < len(words):
        raise OperatorFailure(f"delete position {position} out of range")
    tok_index = words[position]
    tokens = list(tu.tokens)
    removed = tokens.pop(tok_index)
    return _retokenized(tokens), EditRecord("delete", index=tok_index, before=removed.text)


def op_shuffle(
    tu: TokenizedUtterance,
    rng: random.Random,
) -> tuple[TokenizedUtterance, EditRecord]:
    """Apply a non-identity seeded permutation of the sentences."""
    if len(tu.sentence_bounds) < 2:
        raise OperatorFailure("need at least two sentences to shuffle")
    order = list(range(len(tu.sentence_bounds)))
    while True:
        rng.shuffle(order)
        if order != sorted(order):
            break
    tokens: list[Token] = []
    for idx in order:
        start, end = tu.sentence_bounds[idx]
        tokens.extend(tu.tokens[start:end])
    return _retokenized(tokens), EditRecord("shuffle")


def _retokenized(tokens: list[Token]) -> TokenizedUtterance:
    # Rebuild sentence bounds from the edited token list so subsequent
    # operators see consistent structure.
    breaks = []
    for i, tok in enumerate(tokens):
        if tok.kind == PUNCT and _SENTENCE_END.search(tok.text):
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is None or not nxt.glued:
                breaks.append(i)
    bounds: list[tuple[int, int]] = []
    start = 0
    for b in breaks:
        bounds.append((start, b + 1))
        start = b + 1
    if start < len(tokens):
        bounds.append((start, len(tokens)))
    if not bounds and tokens:
        bounds.append((0, len(tokens)))
    return TokenizedUtterance(tokens=tokens, sentence_bounds=bounds)


@dataclass
class LexiconProposer:
    """Draws candidates from the built lexicons.

    constraint: {"emotion": BasicEmotion} restricts to that emotion bucket,
    {"polarity": PolarityClass} restricts to polarity-lexicon words of that
    class; no constraint means the full emotion-lexicon vocabulary.
    """

    lex: EmotionLexicon
    plex: Optional[PolarityLexicon] = None

    def propose(self, context, position, mode, constraint, rng) -> list[Proposal]:
        if constraint and "emotion" in constraint:
            emotion = constraint["emotion"]
            if not isinstance(emotion, BasicEmotion):
                emotion = BasicEmotion.parse(str(emotion))
            candidates = list(self.lex.bucket(emotion))
        elif constraint and "polarity" in constraint:
            if self.plex is None:
                return []
            cls = constraint["polarity"]
            if not isinstance(cls, PolarityClass):
                cls = PolarityClass(str(cls))
            candidates = self.plex.words_of_class(cls)
        else:
            candidates = self.lex.vocabulary()
        if mode == "substitute":
            words = context.word_indices()
            if 0 <= position < len(words):
                current = context.tokens[words[position]].text.lower()
                candidates = [w for w in candidates if w != current]
        rng.shuffle(candidates)
        return [Proposal(w, 1.0, "lexicon") for w in candidates]


def masked_context(tu: TokenizedUtterance, position: int, mode: str) -> str:
    """Render the utterance with a <mask> token at the edit site."""
    words = tu.word_indices()
    tokens = list(tu.tokens)
    if mode == "insert":
        tok_index = words[position] if position < len(words) else (words[-1] + 1 if words else 0)
        tokens.insert(tok_index, Token(MASK_TOKEN, WORD))
    else:
        tokens[words[position]] = Token(MASK_TOKEN, WORD)
    return detokenize(_retokenized(tokens))


@dataclass
class ExternalProposer:
    """Client for the model-service /propose endpoint."""

    url: str
    top_k: int = 10
    timeout: float = 10.0
    session: object = None  # anything with .post(url, json=..., timeout=...)

    def propose(self, context, position, mode, constraint, rng) -> list[Proposal]:
        if self.top_k <= 0:
            return []
        payload = {
            "text": masked_context(context, position, mode),
            "mode": mode,
            "top_k": self.top_k,
        }
        session = self.session or requests
        try:
            resp = session.post(f"{self.url.rstrip('/')}/propose", json=payload, timeout=self.timeout)
        except (requests.ConnectionError, requests.Timeout, ConnectionError, OSError) as exc:
            raise ProposerUnavailableError(f"model service unreachable: {exc}")
        if resp.status_code != 200:
            raise ProposerProtocolError(f"/propose returned HTTP {resp.status_code}")
        try:
            body = resp.json()
            candidates = body["candidates"]
            proposals = [
                Proposal(str(c["word"]), float(c["score"]), "external")
                for c in candidates
                if not any(ch.isspace() for ch in str(c["word"]))
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProposerProtocolError(f"malformed /propose response: {exc}")
        proposals.sort(key=lambda p: -p.score)
        return proposals[: self.top_k]


@dataclass
class FallbackProposer:
    """Tries the external proposer, falling back to the lexicon on outage."""

    primary: ExternalProposer
    fallback: LexiconProposer

    def propose(self, context, position, mode, constraint, rng) -> list[Proposal]:
        try:
            return self.primary.propose(context, position, mode, constraint, rng)
        except ProposerUnavailableError:
            return self.fallback.propose(context, position, mode, constraint, rng)
