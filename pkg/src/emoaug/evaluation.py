"""Metrics, the n-gram baseline classifier, FN/FP overlap, and the experiment runner."""

from __future__ import annotations

import json
import pickle
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.linear_model import SGDClassifier

from .corpus import Dataset, Utterance
from .operators import PLACEHOLDER, WORD, tokenize
from .seeding import mix
from .strategies import AugmentationConfig, augment_dataset, augmented_to_dataset
from .taxonomy import BasicEmotion

EMOTIONS = list(BasicEmotion)


def precision(tp: int, fp: int) -> float:
    return tp / (tp + fp) if tp + fp else 0.0


def recall(tp: int, fn: int) -> float:
    return tp / (tp + fn) if tp + fn else 0.0


def f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class ConfusionCounts:
    per_emotion: dict[BasicEmotion, tuple[int, int, int, int]]  # tp, fp, fn, tn

    def pooled(self) -> tuple[int, int, int]:
        tp = sum(c[0] for c in self.per_emotion.values())
        fp = sum(c[1] for c in self.per_emotion.values())
        fn = sum(c[2] for c in self.per_emotion.values())
        return tp, fp, fn


@dataclass
class Metrics:
    per_emotion: dict[BasicEmotion, dict[str, float]]
    micro: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "per_emotion": {e.value: dict(v) for e, v in self.per_emotion.items()},
            "micro": dict(self.micro),
        }


def confusion_counts(
    gold: Sequence[frozenset[BasicEmotion]], pred: Sequence[frozenset[BasicEmotion]]
) -> ConfusionCounts:
    assert len(gold) == len(pred)
    per: dict[BasicEmotion, tuple[int, int, int, int]] = {}
    for e in EMOTIONS:
        tp = fp = fn = tn = 0
        for g, p in zip(gold, pred):
            has, got = e in g, e in p
            if has and got:
                tp += 1
            elif not has and got:
                fp += 1
            elif has and not got:
                fn += 1
            else:
                tn += 1
        per[e] = (tp, fp, fn, tn)
    return ConfusionCounts(per)


def micro_metrics(cc: ConfusionCounts) -> Metrics:
    """Per-emotion P/R/F1 plus micro metrics from pooled confusion counts."""
    per = {}
    for e, (tp, fp, fn, _tn) in cc.per_emotion.items():
        p, r = precision(tp, fp), recall(tp, fn)
        per[e] = {"precision": p, "recall": r, "f1": f1(p, r)}
    tp, fp, fn = cc.pooled()
    p, r = precision(tp, fp), recall(tp, fn)
    return Metrics(per_emotion=per, micro={"precision": p, "recall": r, "f1": f1(p, r)})


def _ngram_analyzer(text: str) -> list[str]:
    """Unigrams and bigrams over word and placeholder tokens, lowercased."""
    toks = [t.text.lower() for t in tokenize(text).tokens if t.kind in (WORD, PLACEHOLDER)]
    return toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]


@dataclass
class _ConstantScorer:
    """Stands in for a linear scorer when training data has a single class."""

    margin: float

    def decision_function(self, X):
        return np.full(X.shape[0], self.margin)


@dataclass
class BaselineHyper:
    epochs: int = 20
    reg: float = 1e-4
    seed: int = 0


@dataclass
class BaselineModel:
    vectorizer: CountVectorizer
    scorers: dict[BasicEmotion, Optional[SGDClassifier]]
    hyper: BaselineHyper
    warnings: list[str] = field(default_factory=list)

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            pickle.dump(self, fh)

    @staticmethod
    def load(path: str | Path) -> "BaselineModel":
        with open(path, "rb") as fh:
            model = pickle.load(fh)
        if not isinstance(model, BaselineModel):
            raise TypeError(f"{path} does not contain a baseline model")
        return model


def train_baseline(train: Dataset, hyper: BaselineHyper | None = None) -> BaselineModel:
    """One-vs-rest linear scorers over binary unigram+bigram presence features.

    Trained with seeded hinge-loss SGD and L2 regularization; an emotion with
    no positive training instance gets an always-negative scorer and a warning.
    """
    if len(train) == 0:
        raise ValueError("cannot train on an empty dataset")
    hyper = hyper or BaselineHyper()
    vectorizer = CountVectorizer(analyzer=_ngram_analyzer, binary=True)
    X = vectorizer.fit_transform([u.masked_text for u in train])
    scorers: dict[BasicEmotion, Optional[SGDClassifier]] = {}
    warns: list[str] = []
    for e in EMOTIONS:
        y = np.array([1 if e in u.labels else -1 for u in train])
        if (y == 1).sum() == 0:
            scorers[e] = None
            msg = f"no positive training instances for {e.value}; scorer is always-negative"
            warns.append(msg)
            warnings.warn(msg)
            continue
        if (y == -1).sum() == 0:
            scorers[e] = _ConstantScorer(1.0)
            msg = f"no negative training instances for {e.value}; scorer is always-positive"
            warns.append(msg)
            warnings.warn(msg)
            continue
        clf = SGDClassifier(
            loss="hinge",
            penalty="l2",
            alpha=hyper.reg,
            max_iter=hyper.epochs,
            tol=None,
            shuffle=True,
            learning_rate="optimal",
            random_state=mix(hyper.seed, "baseline", e.value) % (2**32),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            clf.fit(X, y)
        scorers[e] = clf
    return BaselineModel(vectorizer=vectorizer, scorers=scorers, hyper=hyper, warnings=warns)


def predict(model: BaselineModel, ds: Dataset) -> list[frozenset[BasicEmotion]]:
    """Multi-label prediction: emotion e iff scorer_e's margin is > 0."""
    if len(ds) == 0:
        return []
    X = model.vectorizer.transform([u.masked_text for u in ds])
    columns = {}
    for e, clf in model.scorers.items():
        if clf is None:
            columns[e] = np.full(X.shape[0], -1.0)
        else:
            columns[e] = clf.decision_function(X)
    return [
        frozenset(e for e in EMOTIONS if columns[e][i] > 0) for i in range(X.shape[0])
    ]


def evaluate(model: BaselineModel, test: Dataset) -> Metrics:
    preds = predict(model, test)
    gold = [u.labels for u in test]
    return micro_metrics(confusion_counts(gold, preds))


def save_predictions(ds: Dataset, preds: Sequence[frozenset[BasicEmotion]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, p in zip(ds, preds):
            fh.write(json.dumps({"id": u.id, "predicted": sorted(e.value for e in p)}) + "\n")


def fn_overlap(named_sets: dict[str, set]) -> dict:
    """Venn-region counts over named id sets plus the all-shared fraction."""
    if len(named_sets) < 2:
        raise ValueError("need at least two sets to compute overlaps")
    names = sorted(named_sets)
    union = set().union(*named_sets.values())
    regions: dict[str, int] = {}
    for r in range(1, len(names) + 1):
        for combo in combinations(names, r):
            inside = set.intersection(*(named_sets[n] for n in combo))
            outside = set().union(*(named_sets[n] for n in names if n not in combo), set())
            regions["&".join(combo)] = len(inside - outside)
    all_shared = set.intersection(*(named_sets[n] for n in names))
    fraction = len(all_shared) / len(union) if union else 0.0
    return {
        "sets": {n: len(s) for n, s in sorted(named_sets.items())},
        "regions": regions,
        "all_shared": len(all_shared),
        "union": len(union),
        "all_shared_fraction": fraction,
        "summary": f"{len(all_shared)}/{len(union)} ({round(100 * fraction)}%)",
    }


def fn_sets(
    gold: Dataset, predictions: dict[str, dict[str, set[BasicEmotion]]]
) -> dict[str, set[str]]:
    """Per-tool false-negative sets as 'id:emotion' pair keys."""
    out: dict[str, set[str]] = {}
    for tool, preds in predictions.items():
        misses = set()
        for u in gold:
            got = preds.get(u.id, set())
            for e in u.labels:
                if e not in got:
                    misses.add(f"{u.id}:{e.value}")
        out[tool] = misses
    return out


def fp_sets(
    gold: Dataset, predictions: dict[str, dict[str, set[BasicEmotion]]]
) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for tool, preds in predictions.items():
        extras = set()
        for u in gold:
            for e in preds.get(u.id, set()):
                if e not in u.labels:
                    extras.add(f"{u.id}:{e.value}")
        out[tool] = extras
    return out


def load_predictions(path: str | Path) -> dict[str, set[BasicEmotion]]:
    """Read a predictions JSONL dump ({"id": ..., "predicted": [...]})."""
    out: dict[str, set[BasicEmotion]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out[str(rec["id"])] = {BasicEmotion.parse(e) for e in rec["predicted"]}
    return out


def run_experiment(
    train: Dataset,
    test: Dataset,
    cfgs: Sequence[AugmentationConfig],
    hyper: BaselineHyper | None = None,
    lex=None,
    plex=None,
    proposer=None,
    embedder=None,
    workers: int = 1,
) -> dict:
    """Baseline on original vs. original-plus-augmented training data.

    Augmentation only ever runs over the training set; overlapping train/test
    ids are rejected up front.
    """
    overlap = train.ids() & test.ids()
    if overlap:
        raise ValueError(f"train and test sets overlap on ids: {sorted(overlap)[:5]}")
    hyper = hyper or BaselineHyper()

    from .strategies import embed_native

    embedder = embedder or embed_native
    rows = []
    original = evaluate(train_baseline(train, hyper), test)
    rows.append(_experiment_row("original", original, original, len(train)))
    for cfg in cfgs:
        variants, report = augment_dataset(
            train, cfg, lex=lex, plex=plex, proposer=proposer, embedder=embedder, workers=workers
        )
        combined = Dataset(
            list(train.instances) + list(augmented_to_dataset(variants).instances),
            provenance=f"{train.provenance}+{cfg.strategy}",
        )
        metrics = evaluate(train_baseline(combined, hyper), test)
        row = _experiment_row(cfg.strategy, metrics, original, len(combined))
        row["augmentation"] = {
            "variants_emitted": report["variants_emitted"],
            "variants_requested": report["variants_requested"],
        }
        rows.append(row)
    return {"model": "baseline", "hyper": vars(hyper), "rows": rows}


def _pct_change(new: float, old: float) -> Optional[float]:
    if old == 0:
        return None
    return 100.0 * (new - old) / old


def _experiment_row(strategy: str, metrics: Metrics, original: Metrics, train_size: int) -> dict:
    per = {}
    for e in EMOTIONS:
        m = dict(metrics.per_emotion[e])
        m["f1_change_pct"] = _pct_change(m["f1"], original.per_emotion[e]["f1"])
        per[e.value] = m
    micro = dict(metrics.micro)
    micro["f1_change_pct"] = _pct_change(micro["f1"], original.micro["f1"])
    return {"strategy": strategy, "train_size": train_size, "per_emotion": per, "micro": micro}


def render_experiment_table(report: dict) -> str:
    """Aligned-text table: Emotion, Strategy, Model, Precision, Recall, F1 (% change)."""
    header = ("Emotion", "Strategy", "Model", "Precision", "Recall", "F1-score")
    lines = []
    model = report.get("model", "baseline")
    for e in EMOTIONS:
        for row in report["rows"]:
            m = row["per_emotion"][e.value]
            lines.append(
                (
                    e.value,
                    row["strategy"],
                    model,
                    f"{m['precision']:.3f}",
                    f"{m['recall']:.3f}",
                    _f1_cell(m, row["strategy"]),
                )
            )
    for row in report["rows"]:
        m = row["micro"]
        lines.append(
            (
                "Overall",
                row["strategy"],
                model,
                f"{m['precision']:.3f}",
                f"{m['recall']:.3f}",
                _f1_cell(m, row["strategy"]),
            )
        )
    widths = [max(len(header[i]), *(len(l[i]) for l in lines)) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    out.extend(fmt.format(*l) for l in lines)
    return "\n".join(out)


def _f1_cell(m: dict, strategy: str) -> str:
    if strategy == "original" or m.get("f1_change_pct") is None:
        return f"{m['f1']:.3f}"
    return f"{m['f1']:.3f} ({m['f1_change_pct']:+.1f}%)"
