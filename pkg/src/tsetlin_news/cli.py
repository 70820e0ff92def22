"""Command-line interface: ``tsetlin-news <command> ...``.

Every failure prints one JSON object ``{"error": ..., "message": ...}`` on
stderr and exits nonzero (2 for usage errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from tsetlin_news.credibility import (DEFAULT_K, CredibilityParams, plot_points, rank_fake,
                                      read_ranked_csv, score_documents, write_plot_csv,
                                      write_ranked_csv)
from tsetlin_news.data import FAKE, SOURCES, SplitManifest, SplitSpec, load_corpus, split
from tsetlin_news.evaluation import STABLE_EPOCHS, run_protocol, stable_mean, train_once
from tsetlin_news.explain import (explain_prediction, extract_rules, literal_frequency_table,
                                  negated_include_fraction, rules_to_json, write_rules_text)
from tsetlin_news.machine import TMConfig
from tsetlin_news.metrics import accuracy_f1
from tsetlin_news.modelfile import load_model, save_model
from tsetlin_news.textpipe import CleaningConfig, TextPipeline

logger = logging.getLogger("tsetlin_news")

PRESETS = {
    "full": {"clauses": 10_000, "threshold": 200, "s": 25.0, "epochs": 200, "features": 20_000},
    "desk": {"clauses": 2_000, "threshold": 80, "s": 25.0, "epochs": 100, "features": 5_000},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="article CSV (id,title,text,label)")
    p.add_argument("--source", choices=SOURCES, default="politifact")
    p.add_argument("--strict", action="store_true", help="fail on malformed rows instead of skipping")


def _add_hyper(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default="full",
                   help="hyperparameter bundle; explicit flags override it")
    p.add_argument("--clauses", type=int, help="clauses per class (default 10000)")
    p.add_argument("--threshold", type=int, help="vote margin T (default 200)")
    p.add_argument("--s", type=float, help="sensitivity s (default 25.0)")
    p.add_argument("--epochs", type=int, help="training epochs (default 200)")
    p.add_argument("--features", type=int, help="selected vocabulary size (default 20000)")
    p.add_argument("--selection", choices=("chi2", "frequency"), default="chi2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.75)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--cleaning-config", help="JSON file with text cleaning options")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tsetlin-news", description="Tsetlin Machine fake-news classifier")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="split, train and save a model")
    _add_data(p)
    _add_hyper(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--split-manifest", help="also write the train/test id lists here")

    p = sub.add_parser("eval", help="repeated split/train/evaluate protocol")
    _add_data(p)
    _add_hyper(p)
    p.add_argument("--model", help="take hyperparameters and pipeline settings from this model")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--stable", type=int, default=STABLE_EPOCHS, help="epochs averaged per run")
    p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("predict", help="classify articles with a saved model")
    p.add_argument("--model", required=True)
    _add_data(p)
    p.add_argument("--k", type=_positive_float, default=DEFAULT_K, help="credibility growth rate")
    p.add_argument("--out", help="CSV output (default stdout)")

    p = sub.add_parser("rank", help="rank fake predictions by credibility")
    p.add_argument("--model", required=True)
    _add_data(p)
    p.add_argument("--k", type=_positive_float, default=DEFAULT_K)
    p.add_argument("--min-credibility", type=_unit_interval, default=0.8)
    p.add_argument("--subset", choices=("all", "test"), default="all",
                   help="'test' re-derives the model's held-out split")
    p.add_argument("--out", required=True, help="ranked CSV to write")

    p = sub.add_parser("explain", help="global rule tables or a local explanation")
    p.add_argument("--model", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--doc", help="id of the article to explain (needs --data)")
    g.add_argument("--global", dest="global_", action="store_true", help="literal tables")
    _add_data(p, required=False)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--k", type=_positive_float, default=DEFAULT_K)
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.add_argument("--table-csv", help="write the literal table as CSV")
    p.add_argument("--rules", help="write every clause rule as text")
    p.add_argument("--rules-json", help="write every clause rule as JSON")

    p = sub.add_parser("export-plot-data", help="(index, Q) series from a ranked CSV")
    p.add_argument("--ranked", required=True)
    p.add_argument("--out", help="CSV output (default stdout)")
    return ap


def _hyper(args) -> dict:
    preset = PRESETS[args.preset]
    out = {k: getattr(args, k) if getattr(args, k) is not None else v for k, v in preset.items()}
    if out["features"] < 1:
        raise UsageError("--features must be >= 1")
    return out


def _config(h: dict, seed: int) -> TMConfig:
    # num_features is a placeholder until the vocabulary is selected
    return TMConfig(num_features=1, num_clauses=h["clauses"], threshold=h["threshold"],
                    s=h["s"], seed=seed, epochs=h["epochs"])


def _cleaning(args) -> CleaningConfig:
    return CleaningConfig.from_file(args.cleaning_config) if args.cleaning_config else CleaningConfig()


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _progress(args):
    if not args.verbose:
        return None
    return lambda rec: logger.info("epoch %d acc=%.4f f1=%.4f (%.2fs)",
                                   rec.epoch, rec.accuracy, rec.f1, rec.seconds)


def cmd_train(args) -> int:
    h = _hyper(args)
    corpus = load_corpus(args.data, args.source, args.strict)
    spec = SplitSpec(args.train_fraction, args.seed, args.stratified)
    cleaning = _cleaning(args)
    run = train_once(corpus.records, _config(h, args.seed), selection=args.selection,
                     n_features=h["features"], cleaning=cleaning, split_spec=spec,
                     on_epoch=_progress(args))
    settings = {"selection": args.selection, "n_features": h["features"], "source": args.source,
                "train_fraction": args.train_fraction, "stratified": args.stratified,
                "split_seed": args.seed}
    save_model(args.out, run.machine, run.pipeline.vocab, cleaning, settings)
    if args.split_manifest:
        SplitManifest.from_split(spec, run.train, run.test).write(args.split_manifest)
    summary = {"model": args.out, "n_train": len(run.train), "n_test": len(run.test),
               "n_features": run.machine.config.num_features, "epochs": len(run.trace),
               "skipped_rows": len(corpus.skipped)}
    if run.trace:
        summary["final_accuracy"] = run.trace[-1].accuracy
        summary["final_f1"] = run.trace[-1].f1
    if len(run.trace) >= STABLE_EPOCHS:
        summary["stable_accuracy"] = stable_mean([e.accuracy for e in run.trace])
        summary["stable_f1"] = stable_mean([e.f1 for e in run.trace])
    _emit(summary)
    return 0


def cmd_eval(args) -> int:
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    corpus = load_corpus(args.data, args.source, args.strict)
    if args.model:
        saved = load_model(args.model)
        cfg = saved.machine.config
        settings = saved.settings
        config = TMConfig(num_features=1, num_clauses=cfg.num_clauses, threshold=cfg.threshold,
                          s=cfg.s, n_states=cfg.n_states, seed=cfg.seed, epochs=cfg.epochs)
        selection = settings.get("selection", "chi2")
        n_features = settings.get("n_features", cfg.num_features)
        cleaning = saved.cleaning
        fraction = settings.get("train_fraction", 0.75)
        stratified = settings.get("stratified", False)
    else:
        h = _hyper(args)
        config = _config(h, args.seed)
        selection, n_features, cleaning = args.selection, h["features"], _cleaning(args)
        fraction, stratified = args.train_fraction, args.stratified
    progress = _progress(args)
    report = run_protocol(corpus.records, config, selection=selection, n_features=n_features,
                          cleaning=cleaning, repeats=args.repeats, train_fraction=fraction,
                          stratified=stratified, stable=args.stable,
                          on_epoch=None if progress is None else (lambda r, rec: progress(rec)))
    report.settings["source"] = args.source
    report.settings["counts"] = corpus.counts()
    if args.out:
        report.write(args.out)
        _emit({"report": args.out, "accuracy": report.accuracy, "f1": report.f1,
               "final_accuracy": report.final_accuracy, "final_f1": report.final_f1})
    else:
        print(report.to_json())
    return 0


def _documents(saved, records):
    pipe = TextPipeline(saved.cleaning, vocab=saved.vocab)
    tokens = pipe.tokenize(r.content for r in records)
    return pipe.transform(tokens, [r.label for r in records], [r.id for r in records])


def cmd_predict(args) -> int:
    saved = load_model(args.model)
    corpus = load_corpus(args.data, args.source, args.strict)
    docs = _documents(saved, corpus.records)
    preds = score_documents(saved.machine, docs, CredibilityParams(args.k))
    if args.out:
        write_ranked_csv(args.out, preds)
        acc, f1 = accuracy_f1([d.label for d in docs], [p.predicted for p in preds])
        _emit({"predictions": args.out, "n": len(preds), "accuracy": acc, "f1": f1})
    else:
        write_ranked_csv(sys.stdout, preds)
    return 0


def cmd_rank(args) -> int:
    saved = load_model(args.model)
    corpus = load_corpus(args.data, args.source, args.strict)
    records = corpus.records
    if args.subset == "test":
        st = saved.settings
        spec = SplitSpec(st.get("train_fraction", 0.75),
                         st.get("split_seed", saved.machine.config.seed), st.get("stratified", False))
        records = split(records, spec)[1]
    preds = score_documents(saved.machine, _documents(saved, records), CredibilityParams(args.k))
    ranked = rank_fake(preds, args.min_credibility)
    write_ranked_csv(args.out, ranked)
    n_fake = sum(p.predicted == FAKE for p in preds)
    _emit({"ranked": args.out, "documents": len(preds), "fake_predicted": n_fake,
           "above_threshold": len(ranked), "min_credibility": args.min_credibility})
    return 0


def cmd_explain(args) -> int:
    saved = load_model(args.model)
    machine, vocab = saved.machine, saved.vocab
    if args.top < 1:
        raise UsageError("--top must be >= 1")
    if args.rules or args.rules_json:
        rules = extract_rules(machine, vocab)
        if args.rules:
            write_rules_text(args.rules, rules)
        if args.rules_json:
            Path(args.rules_json).write_text(rules_to_json(rules) + "\n", encoding="utf-8")
    if args.global_:
        table = literal_frequency_table(machine, vocab, args.top)
        if args.table_csv:
            table.write_csv(args.table_csv)
        frac = negated_include_fraction(machine)
        if args.json:
            _emit({"negated_include_fraction": frac,
                   "table": {table.class_names[c]: cols for c, cols in table.columns.items()}})
        else:
            print(table.format())
            print(f"negated-include fraction: {frac:.4f}")
        return 0
    if not args.data:
        raise UsageError("explain --doc needs --data")
    corpus = load_corpus(args.data, args.source, args.strict)
    try:
        record = corpus.by_id(args.doc)
    except KeyError:
        raise KeyError(f"document id {args.doc!r} not found in {args.data}") from None
    doc = _documents(saved, [record])[0]
    exp = explain_prediction(machine, doc, vocab, args.top, args.k)
    if args.json:
        _emit({"doc_id": record.id, **exp.to_dict()})
    else:
        print(f"{record.id}: {exp.format()}")
    return 0


def cmd_export_plot_data(args) -> int:
    points = plot_points(read_ranked_csv(args.ranked))
    write_plot_csv(args.out or sys.stdout, points)
    if args.out:
        _emit({"plot_data": args.out, "points": len(points)})
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "predict": cmd_predict, "rank": cmd_rank,
            "explain": cmd_explain, "export-plot-data": cmd_export_plot_data}


def _fail(kind: str, exc: BaseException, code: int) -> int:
    err = {"error": kind, "message": str(exc).strip("'\"")}
    path = getattr(exc, "filename", None)
    if path:
        err["path"] = str(path)
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(type(exc).__name__, exc, 1)


if __name__ == "__main__":
    sys.exit(main())
