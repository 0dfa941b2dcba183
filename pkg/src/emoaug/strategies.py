"""The three augmentation strategies and the per-dataset pipeline.

Variant generation stacks randomly chosen operators, then enforces the
strategy's label-preservation constraints (lexicon repair or polarity rules),
rejects duplicates, and gates on embedding cosine similarity. Every variant
draws its RNG from mix(seed, instance id, variant index, attempt), so output
is identical regardless of worker count or scheduling.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from .corpus import Dataset, Utterance
from .errors import EmoaugError, OperatorFailure
from .lexicon import (
    DEFAULT_POLARITY_TAU,
    EmotionLexicon,
    PolarityClass,
    PolarityLexicon,
    word_emotions,
    word_polarity,
)
from .operators import (
    WORD,
    EditRecord,
    Proposer,
    Token,
    TokenizedUtterance,
    augmentable_length,
    detokenize,
    op_delete,
    op_insert,
    op_shuffle,
    op_substitute,
    tokenize,
)
from .seeding import rng_for
from .taxonomy import BasicEmotion

STRATEGIES = ("unconstrained", "lexicon", "polarity")

POSITIVE_GROUP = {BasicEmotion.LOVE, BasicEmotion.JOY}
NEGATIVE_GROUP = {BasicEmotion.ANGER, BasicEmotion.FEAR, BasicEmotion.SADNESS}


@dataclass
class AugmentationConfig:
    strategy: str = "unconstrained"
    variants_per_instance: int = 10
    ops_fraction: float = 0.2
    ops_min: int = 2
    similarity_threshold: float = 0.9
    max_retries: int = 5
    polarity_tau: float = DEFAULT_POLARITY_TAU
    seed: int = 0
    proposer: str = "lexicon"  # lexicon | external
    proposer_fallback: bool = True
    model_service_url: Optional[str] = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.variants_per_instance < 1:
            raise ValueError("variants_per_instance must be >= 1")
        if not 0 < self.ops_fraction <= 1:
            raise ValueError("ops_fraction must be in (0, 1]")
        if not 0 <= self.similarity_threshold <= 1:
            raise ValueError("similarity_threshold must be in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown augmentation config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class AugmentedInstance:
    parent_id: str
    variant_index: int
    text: str
    labels: frozenset[BasicEmotion]
    strategy: str
    edits: list[EditRecord]
    similarity: float
    attempts: int

    @property
    def id(self) -> str:
        return f"{self.parent_id}-aug{self.variant_index}"

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "text": self.text,
            "labels": sorted(e.value for e in self.labels),
            "strategy": self.strategy,
            "edits": [e.to_dict() for e in self.edits],
            "similarity": round(self.similarity, 6),
        }


@dataclass
class PolarityProfile:
    pos_count: int
    neg_count: int

    @property
    def net_sign(self) -> int:
        return (self.pos_count > self.neg_count) - (self.pos_count < self.neg_count)


def polarity_profile(tu: TokenizedUtterance, plex: PolarityLexicon) -> PolarityProfile:
    pos = neg = 0
    for tok in tu.tokens:
        if tok.kind != WORD:
            continue
        cls = word_polarity(tok.text, plex)
        if cls is PolarityClass.POSITIVE:
            pos += 1
        elif cls is PolarityClass.NEGATIVE:
            neg += 1
    return PolarityProfile(pos, neg)


def ops_count(word_len: int, cfg: AugmentationConfig) -> int:
    """Operator budget: at least ops_min, else floor(ops_fraction * length)."""
    return max(cfg.ops_min, math.floor(cfg.ops_fraction * word_len))


def polarity_ok(
    orig: PolarityProfile, cand: PolarityProfile, labels: frozenset[BasicEmotion]
) -> bool:
    """The three polarity rules on label groups.

    Purely positive labels must preserve or increase positive-word count;
    purely negative labels likewise for negative words; Surprise, mixed-group
    and unlabeled instances must preserve the net polarity sign.
    """
    if labels and labels <= POSITIVE_GROUP:
        return cand.pos_count >= orig.pos_count
    if labels and labels <= NEGATIVE_GROUP:
        return cand.neg_count >= orig.neg_count
    return cand.net_sign == orig.net_sign


class VariantRejected(EmoaugError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _proposal_constraint(strategy: str, labels: frozenset[BasicEmotion]) -> Optional[dict]:
    if strategy != "polarity" or not labels:
        return None
    if labels <= POSITIVE_GROUP:
        return {"polarity": PolarityClass.POSITIVE}
    if labels <= NEGATIVE_GROUP:
        return {"polarity": PolarityClass.NEGATIVE}
    return None


def generate_variant(
    u: Utterance,
    cfg: AugmentationConfig,
    lex: Optional[EmotionLexicon],
    plex: Optional[PolarityLexicon],
    proposer: Proposer,
    rng,
) -> tuple[TokenizedUtterance, list[EditRecord], list[Token]]:
    """Apply a stacked random operator sequence; returns the introduced tokens.

    Raises VariantRejected when no constraint-satisfying sequence exists for
    this rng draw (the caller retries with the next attempt seed).
    """
    tu = tokenize(u.masked_text)
    n_words = augmentable_length(tu)
    if n_words < 1:
        raise VariantRejected("no augmentable words")
    budget = ops_count(n_words, cfg)
    constraint = _proposal_constraint(cfg.strategy, u.labels)

    edits: list[EditRecord] = []
    introduced: list[Token] = []
    shuffled = False
    for _ in range(budget):
        attempted: set[str] = set()
        while True:
            eligible = _eligible_ops(tu, cfg, plex, shuffled) - attempted
            if not eligible:
                raise VariantRejected("no applicable operator")
            op = rng.choice(sorted(eligible))
            attempted.add(op)
            try:
                if op == "insert":
                    words = augmentable_length(tu)
                    gap = rng.randrange(words + 1)
                    tu, edit = op_insert(tu, gap, proposer, rng, constraint)
                    introduced.append(tu.tokens[edit.index])
                elif op == "substitute":
                    pos = rng.randrange(augmentable_length(tu))
                    tu, edit = op_substitute(tu, pos, proposer, rng, constraint)
                    introduced.append(tu.tokens[edit.index])
                elif op == "delete":
                    pos = _delete_position(tu, cfg, plex, rng)
                    tu, edit = op_delete(tu, pos, rng)
                else:
                    tu, edit = op_shuffle(tu, rng)
                    shuffled = True
                edits.append(edit)
                break
            except OperatorFailure:
                continue
    return tu, edits, introduced


def _eligible_ops(
    tu: TokenizedUtterance,
    cfg: AugmentationConfig,
    plex: Optional[PolarityLexicon],
    shuffled: bool,
) -> set[str]:
    n = augmentable_length(tu)
    ops: set[str] = set()
    if n >= 1:
        ops.add("insert")
        ops.add("substitute")
    if n >= 2:
        if cfg.strategy == "polarity":
            if plex is not None and _neutral_word_positions(tu, plex):
                ops.add("delete")
        else:
            ops.add("delete")
    if not shuffled and len(tu.sentence_bounds) >= 2:
        ops.add("shuffle")
    return ops


def _neutral_word_positions(tu: TokenizedUtterance, plex: PolarityLexicon) -> list[int]:
    positions = []
    for i, tok_index in enumerate(tu.word_indices()):
        if word_polarity(tu.tokens[tok_index].text, plex) is PolarityClass.NEUTRAL:
            positions.append(i)
    return positions


def _delete_position(tu, cfg: AugmentationConfig, plex, rng) -> int:
    if cfg.strategy == "polarity":
        positions = _neutral_word_positions(tu, plex)
        if not positions:
            raise OperatorFailure("no polarity-neutral word to delete")
        return rng.choice(positions)
    return rng.randrange(augmentable_length(tu))


def repair_lexicon(
    tu: TokenizedUtterance,
    edits: list[EditRecord],
    introduced: list[Token],
    labels: frozenset[BasicEmotion],
    lex: EmotionLexicon,
    rng,
) -> TokenizedUtterance:
    """Replace edit-introduced words whose emotions conflict with the labels.

    A conflicting word is swapped for a uniform pick from the bucket of one of
    the instance's labels; the swap is recorded as a chained substitute edit.
    """
    tokens = list(tu.tokens)
    for tok in introduced:
        positions = [i for i, t in enumerate(tokens) if t is tok]
        if not positions:
            continue  # introduced then deleted by a later operator
        emotions = word_emotions(tok.text, lex)
        if not emotions or emotions & labels:
            continue
        if not labels:
            raise VariantRejected("emotion word introduced into a neutral instance")
        label = rng.choice(sorted(labels, key=lambda e: e.value))
        bucket = [w for w in lex.bucket(label) if w != tok.text.lower()]
        if not bucket:
            raise VariantRejected(f"empty repair bucket for {label.value}")
        replacement = rng.choice(bucket)
        idx = positions[0]
        tokens[idx] = Token(replacement, WORD)
        edits.append(EditRecord("substitute", index=idx, before=tok.text, after=replacement))
    return TokenizedUtterance(tokens=tokens, sentence_bounds=tu.sentence_bounds)


_TRIGRAM_N = 3


def embed_native(text: str) -> dict[str, float]:
    """L2-normalized character-trigram frequency vector of the lowercased text."""
    s = re.sub(r"\s+", " ", text.strip().lower())
    if not s:
        return {}
    grams: Counter[str] = Counter()
    if len(s) < _TRIGRAM_N:
        grams[s] += 1
    else:
        for i in range(len(s) - _TRIGRAM_N + 1):
            grams[s[i : i + _TRIGRAM_N]] += 1
    norm = math.sqrt(sum(v * v for v in grams.values()))
    return {g: v / norm for g, v in grams.items()}


def cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(v * b.get(g, 0.0) for g, v in a.items())


@dataclass
class GateResult:
    passed: bool
    similarity: float


def similarity_gate(
    orig_text: str, cand_text: str, cfg: AugmentationConfig, embedder=embed_native
) -> GateResult:
    sim = cosine(embedder(orig_text), embedder(cand_text))
    return GateResult(passed=sim >= cfg.similarity_threshold, similarity=sim)


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip())


@dataclass
class InstanceReport:
    parent_id: str
    emitted: int
    requested: int
    rejections: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _augment_instance(
    u: Utterance,
    cfg: AugmentationConfig,
    lex: Optional[EmotionLexicon],
    plex: Optional[PolarityLexicon],
    proposer: Proposer,
    embedder,
) -> tuple[list[AugmentedInstance], InstanceReport]:
    emitted: list[AugmentedInstance] = []
    rejections: Counter[str] = Counter()
    seen = {_normalize(u.masked_text)}
    orig_tu = tokenize(u.masked_text)
    orig_profile = polarity_profile(orig_tu, plex) if plex is not None else None

    for vi in range(cfg.variants_per_instance):
        for attempt in range(cfg.max_retries):
            rng = rng_for(cfg.seed, "augment", u.id, vi, attempt)
            try:
                tu, edits, introduced = generate_variant(u, cfg, lex, plex, proposer, rng)
                if cfg.strategy == "lexicon":
                    if lex is None:
                        raise VariantRejected("lexicon strategy requires an emotion lexicon")
                    tu = repair_lexicon(tu, edits, introduced, u.labels, lex, rng)
                if cfg.strategy == "polarity":
                    if plex is None:
                        raise VariantRejected("polarity strategy requires a polarity lexicon")
                    if not polarity_ok(orig_profile, polarity_profile(tu, plex), u.labels):
                        raise VariantRejected("polarity rule violated")
            except VariantRejected as exc:
                rejections[exc.reason] += 1
                continue
            text = detokenize(tu)
            norm = _normalize(text)
            if norm in seen:
                rejections["duplicate"] += 1
                continue
            gate = similarity_gate(u.masked_text, text, cfg, embedder)
            if not gate.passed:
                rejections["similarity below threshold"] += 1
                continue
            seen.add(norm)
            emitted.append(
                AugmentedInstance(
                    parent_id=u.id,
                    variant_index=vi,
                    text=text,
                    labels=u.labels,
                    strategy=cfg.strategy,
                    edits=edits,
                    similarity=gate.similarity,
                    attempts=attempt + 1,
                )
            )
            break
    report = InstanceReport(
        parent_id=u.id,
        emitted=len(emitted),
        requested=cfg.variants_per_instance,
        rejections=dict(sorted(rejections.items())),
    )
    return emitted, report


def augment_dataset(
    ds: Dataset,
    cfg: AugmentationConfig,
    lex: Optional[EmotionLexicon] = None,
    plex: Optional[PolarityLexicon] = None,
    proposer: Optional[Proposer] = None,
    embedder=embed_native,
    workers: int = 1,
) -> tuple[list[AugmentedInstance], dict]:
    """Generate up to variants_per_instance gate-passing variants per instance.

    Output order is canonical (dataset order, then variant index) regardless
    of the worker count.
    """
    if proposer is None:
        if lex is None:
            raise ValueError("augment_dataset needs a proposer or an emotion lexicon")
        from .operators import LexiconProposer

        proposer = LexiconProposer(lex, plex)
    if plex is not None and plex.tau != cfg.polarity_tau:
        plex = PolarityLexicon(entries=plex.entries, tau=cfg.polarity_tau)

    def work(u: Utterance):
        return _augment_instance(u, cfg, lex, plex, proposer, embedder)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, ds.instances))
    else:
        results = [work(u) for u in ds.instances]

    variants: list[AugmentedInstance] = []
    reports: list[InstanceReport] = []
    for inst_variants, report in results:
        variants.extend(inst_variants)
        reports.append(report)
    summary = {
        "strategy": cfg.strategy,
        "seed": cfg.seed,
        "instances": len(ds),
        "variants_emitted": len(variants),
        "variants_requested": len(ds) * cfg.variants_per_instance,
        "per_instance": [r.to_dict() for r in reports],
    }
    return variants, summary


def save_augmented(variants: list[AugmentedInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in variants:
            fh.write(json.dumps(v.to_record(), ensure_ascii=False) + "\n")


def augmented_to_dataset(variants: list[AugmentedInstance], provenance: str = "augmented") -> Dataset:
    """View augmented variants as a Dataset for classifier training."""
    return Dataset(
        [
            Utterance(
                id=v.id,
                raw_text=v.text,
                masked_text=v.text,
                labels=v.labels,
            )
            for v in variants
        ],
        provenance=provenance,
    )
