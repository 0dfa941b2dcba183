"""Single command-line entry point for the full workflow.

Every subcommand writes its outputs through a ``*.partial`` temp name and
renames on success, exits non-zero with a one-line ``error: ...`` message on
failure, and never mutates its input files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import corpus, evaluation, lexicon as lexmod, strategies
from .errors import EmoaugError
from .evaluation import BaselineHyper, BaselineModel
from .strategies import AugmentationConfig


def _atomic_write(path: str | Path, writer) -> None:
    """Run writer(partial_path); promote to the final name only on success."""
    path = Path(path)
    partial = path.with_name(path.name + ".partial")
    try:
        writer(partial)
        os.replace(partial, path)
    except BaseException:
        if partial.exists():
            partial.unlink()
        raise


def _write_json(path: str | Path, payload: dict) -> None:
    _atomic_write(
        path,
        lambda p: p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"),
    )


def _load_aug_config(args, strategy: str | None = None) -> AugmentationConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    if strategy:
        data["strategy"] = strategy
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return AugmentationConfig.from_dict(data)


def cmd_fetch(args) -> None:
    token = os.environ.get("EMOAUG_TOKEN")
    ds = corpus.fetch_comments(args.repo, args.kind, args.limit, auth_token=token)
    _atomic_write(args.out, lambda p: corpus.save_jsonl(ds, p))
    print(f"fetch: wrote {len(ds)} comments to {args.out}")


def cmd_preprocess(args) -> None:
    ds = corpus.ingest(args.inp)
    _atomic_write(args.out, lambda p: corpus.save_jsonl(ds, p, masked=True))
    print(f"preprocess: wrote {len(ds)} masked utterances to {args.out}")


def cmd_lexicon_build(args) -> None:
    nrc = lexmod.parse_nrc(args.nrc)
    se_words = lexmod.load_wordlist(args.se_words)
    lex = lexmod.build_emotion_lexicon(nrc, se_words)
    plex = lexmod.parse_sentiwordnet(args.sentiwordnet, tau=args.tau)
    log = lexmod.save_lexicons(lex, plex, args.out)
    print(
        f"lexicon: {log['emotion_lexicon_words']} emotion words, "
        f"{log['polarity_lexicon_words']} polarity words -> {args.out}"
    )


def cmd_split(args) -> None:
    ds = corpus.ingest(args.inp)
    result = corpus.stratified_split(ds, args.ratio, args.seed)
    stem = Path(args.inp)
    out_train = args.out_train or str(stem.with_name(stem.stem + ".train.jsonl"))
    out_test = args.out_test or str(stem.with_name(stem.stem + ".test.jsonl"))
    _atomic_write(out_train, lambda p: corpus.save_jsonl(result.train, p))
    _atomic_write(out_test, lambda p: corpus.save_jsonl(result.test, p))
    print(f"split: {len(result.train)} train -> {out_train}, {len(result.test)} test -> {out_test}")


def _load_lexicons(args):
    lex = lexmod.load_emotion_lexicon(Path(args.lexicons) / "emotion_lexicon.json")
    plex = lexmod.load_polarity_lexicon(Path(args.lexicons) / "polarity_lexicon.json")
    return lex, plex


def _build_proposer(cfg: AugmentationConfig, lex, plex):
    from .operators import ExternalProposer, FallbackProposer, LexiconProposer

    native = LexiconProposer(lex, plex)
    if cfg.proposer == "external":
        if not cfg.model_service_url:
            raise EmoaugError("proposer=external requires model_service_url")
        external = ExternalProposer(url=cfg.model_service_url)
        return FallbackProposer(external, native) if cfg.proposer_fallback else external
    return native


def cmd_augment(args) -> None:
    ds = corpus.ingest(args.inp)
    cfg = _load_aug_config(args, strategy=args.strategy)
    lex, plex = _load_lexicons(args)
    proposer = _build_proposer(cfg, lex, plex)
    variants, report = strategies.augment_dataset(
        ds, cfg, lex=lex, plex=plex, proposer=proposer, workers=args.workers
    )
    _atomic_write(args.out, lambda p: strategies.save_augmented(variants, p))
    _write_json(args.report, report)
    print(
        f"augment[{cfg.strategy}]: {report['variants_emitted']}/{report['variants_requested']} "
        f"variants -> {args.out}"
    )


def cmd_train(args) -> None:
    ds = corpus.ingest(args.inp)
    hyper = BaselineHyper(epochs=args.epochs, reg=args.reg, seed=args.seed)
    model = evaluation.train_baseline(ds, hyper)
    _atomic_write(args.out, lambda p: model.save(p))
    print(f"train: model on {len(ds)} instances -> {args.out}")


def cmd_eval(args) -> None:
    model = BaselineModel.load(args.model)
    test = corpus.ingest(args.test)
    preds = evaluation.predict(model, test)
    metrics = evaluation.micro_metrics(
        evaluation.confusion_counts([u.labels for u in test], preds)
    )
    _write_json(args.metrics_out, metrics.to_dict())
    _atomic_write(args.pred_out, lambda p: evaluation.save_predictions(test, preds, p))
    print(f"eval: micro-F1 {metrics.micro['f1']:.3f} -> {args.metrics_out}")


def cmd_experiment(args) -> None:
    train = corpus.ingest(args.train)
    test = corpus.ingest(args.test)
    lex, plex = _load_lexicons(args)
    cfgs = []
    for strategy in args.strategies:
        cfg = _load_aug_config(args, strategy=strategy)
        cfgs.append(cfg)
    hyper = BaselineHyper(epochs=args.epochs, reg=args.reg, seed=args.seed or 0)
    proposer = _build_proposer(cfgs[0], lex, plex) if cfgs else None
    report = evaluation.run_experiment(
        train, test, cfgs, hyper, lex=lex, plex=plex, proposer=proposer, workers=args.workers
    )
    _write_json(args.out, report)
    print(f"experiment: {len(report['rows'])} rows -> {args.out}")


def cmd_report(args) -> None:
    with open(args.experiment, encoding="utf-8") as fh:
        report = json.load(fh)
    table = evaluation.render_experiment_table(report)
    if args.out:
        _atomic_write(args.out, lambda p: p.write_text(table + "\n", encoding="utf-8"))
        print(f"report: table -> {args.out}")
    else:
        print(table)


def cmd_overlap(args) -> None:
    gold = corpus.ingest(args.gold)
    predictions = {Path(p).name: evaluation.load_predictions(p) for p in args.pred}
    sets = (
        evaluation.fn_sets(gold, predictions)
        if args.kind == "fn"
        else evaluation.fp_sets(gold, predictions)
    )
    report = evaluation.fn_overlap(sets)
    if args.out:
        _write_json(args.out, report)
    print(f"overlap[{args.kind}]: all-shared {report['summary']}")


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emoaug", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="fetch raw comments from a code-hosting REST API")
    p.add_argument("--repo", required=True, help="owner/name")
    p.add_argument("--kind", required=True, choices=["issues", "pulls"])
    p.add_argument("--limit", required=True, type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("preprocess", help="mask urls, mentions and code spans")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("lexicon", help="lexicon operations")
    lex_sub = p.add_subparsers(dest="lexicon_command", required=True)
    pb = lex_sub.add_parser("build", help="build emotion and polarity lexicons")
    pb.add_argument("--nrc", required=True)
    pb.add_argument("--se-words", required=True)
    pb.add_argument("--sentiwordnet", required=True)
    pb.add_argument("--out", required=True, help="output directory")
    pb.add_argument("--tau", type=float, default=lexmod.DEFAULT_POLARITY_TAU)
    pb.set_defaults(func=cmd_lexicon_build)

    p = sub.add_parser("split", help="stratified train/test split")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--ratio", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-train")
    p.add_argument("--out-test")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("augment", help="generate label-preserving variants")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--strategy", required=True, choices=list(strategies.STRATEGIES))
    p.add_argument("--config", help="JSON config mirroring the augmentation settings")
    p.add_argument("--lexicons", required=True, help="directory produced by `lexicon build`")
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train the n-gram baseline classifier")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a test set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--metrics-out", required=True)
    p.add_argument("--pred-out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="original-vs-augmented comparison run")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--strategies", nargs="+", default=list(strategies.STRATEGIES),
                   choices=list(strategies.STRATEGIES))
    p.add_argument("--config")
    p.add_argument("--lexicons", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="render an experiment JSON as an aligned table")
    p.add_argument("--experiment", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("overlap", help="FN/FP agreement regions across prediction files")
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--kind", choices=["fn", "fp"], default="fn")
    p.add_argument("--out")
    p.set_defaults(func=cmd_overlap)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (EmoaugError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
