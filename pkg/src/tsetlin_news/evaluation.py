"""Accuracy/F1 scoring and the repeated split-train-evaluate protocol."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from tsetlin_news.data import FAKE, ArticleRecord, SplitSpec, split
from tsetlin_news.machine import BooleanDocument, EpochRecord, TMConfig, TsetlinMachine
from tsetlin_news.metrics import accuracy_f1
from tsetlin_news.textpipe import CleaningConfig, TextPipeline

logger = logging.getLogger(__name__)

STABLE_EPOCHS = 50


def evaluate(machine: TsetlinMachine, docs: Sequence[BooleanDocument],
             positive: int = FAKE) -> tuple[float, float]:
    """(accuracy, F1) on labeled documents, ``positive`` being the F1 class."""
    if not docs:
        raise ValueError("cannot evaluate on an empty test set")
    y = np.asarray([d.label for d in docs])
    return accuracy_f1(y, machine.predict(docs), positive)


def stable_mean(trace: Sequence[float], stable: int = STABLE_EPOCHS) -> float:
    """Mean over the last ``stable`` entries of a per-epoch trace."""
    if stable < 1:
        raise ValueError("stable window must be >= 1")
    if len(trace) < stable:
        raise ValueError(f"trace has {len(trace)} epochs, need at least {stable}")
    return float(np.mean(trace[-stable:]))


@dataclass
class RepeatResult:
    seed: int
    accuracy: list[float]
    f1: list[float]
    n_train: int = 0
    n_test: int = 0
    n_features: int = 0
    seconds: float = 0.0


@dataclass
class RunReport:
    runs: list[RepeatResult]
    stable_epochs: int
    accuracy: float
    f1: float
    final_accuracy: float
    final_f1: float
    config: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    seconds: float = 0.0

    def recompute(self) -> tuple[float, float, float, float]:
        """(accuracy, f1, final_accuracy, final_f1) recomputed from the traces."""
        acc = float(np.mean([stable_mean(r.accuracy, self.stable_epochs) for r in self.runs]))
        f1 = float(np.mean([stable_mean(r.f1, self.stable_epochs) for r in self.runs]))
        return (acc, f1, float(np.mean([r.accuracy[-1] for r in self.runs])),
                float(np.mean([r.f1[-1] for r in self.runs])))

    def consistent(self) -> bool:
        return np.allclose(self.recompute(),
                           (self.accuracy, self.f1, self.final_accuracy, self.final_f1),
                           rtol=0, atol=1e-12)

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if not timings:
            d.pop("seconds")
            for r in d["runs"]:
                r.pop("seconds")
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=1, sort_keys=True)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d["runs"] = [RepeatResult(**r) for r in d["runs"]]
        return cls(**d)

    @classmethod
    def read(cls, path: str | Path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def ensemble_report(runs: Sequence[RepeatResult], stable: int = STABLE_EPOCHS,
                    config: dict | None = None, settings: dict | None = None,
                    seconds: float = 0.0) -> RunReport:
    """Average each run over its last ``stable`` epochs, then across runs.

    Final-epoch averages are reported alongside.
    """
    if not runs:
        raise ValueError("no runs to report")
    for r in runs:
        if len(r.accuracy) != len(r.f1):
            raise ValueError(f"run seed={r.seed}: accuracy and F1 traces differ in length")
    report = RunReport(list(runs), stable, 0.0, 0.0, 0.0, 0.0,
                       dict(config or {}), dict(settings or {}), seconds)
    report.accuracy, report.f1, report.final_accuracy, report.final_f1 = report.recompute()
    return report


@dataclass
class TrainedRun:
    machine: TsetlinMachine
    pipeline: TextPipeline
    train: list[ArticleRecord]
    test: list[ArticleRecord]
    trace: list[EpochRecord]


def train_once(records: Sequence[ArticleRecord], config: TMConfig, *,
               selection: str = "chi2", n_features: int = 20_000,
               cleaning: CleaningConfig | None = None, split_spec: SplitSpec | None = None,
               tokens: dict[str, list[str]] | None = None,
               on_epoch: Callable[[EpochRecord], None] | None = None) -> TrainedRun:
    """Split, fit the text pipeline on the train side only, train, and trace
    test accuracy/F1 (fake positive) after every epoch."""
    split_spec = split_spec or SplitSpec(seed=config.seed)
    train, test = split(records, split_spec)
    pipe = TextPipeline(cleaning or CleaningConfig(), selection, n_features)
    if tokens is None:
        tokens = {r.id: toks for r, toks in zip(records, pipe.tokenize(r.content for r in records))}
    train_tok = [tokens[r.id] for r in train]
    test_tok = [tokens[r.id] for r in test]
    vocab = pipe.fit(train_tok, [r.label for r in train])
    train_docs = pipe.transform(train_tok, [r.label for r in train], [r.id for r in train])
    test_docs = pipe.transform(test_tok, [r.label for r in test], [r.id for r in test])
    machine = TsetlinMachine(config.replace(num_features=len(vocab)))
    trace = machine.fit(train_docs, eval_docs=test_docs, positive=FAKE, on_epoch=on_epoch)
    return TrainedRun(machine, pipe, train, test, trace)


def run_protocol(records: Sequence[ArticleRecord], config: TMConfig, *,
                 selection: str = "chi2", n_features: int = 20_000,
                 cleaning: CleaningConfig | None = None, repeats: int = 5,
                 train_fraction: float = 0.75, stratified: bool = False,
                 stable: int = STABLE_EPOCHS, keep_models: bool = False,
                 on_epoch: Callable[[int, EpochRecord], None] | None = None):
    """Repeat split/train/evaluate ``repeats`` times.

    Repetition ``r`` reseeds both the split and the machine with
    ``config.seed + r``.  Returns the RunReport, or ``(report, runs)`` when
    ``keep_models`` is set.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if config.epochs < stable:
        raise ValueError(f"{config.epochs} epochs is fewer than the {stable}-epoch stable window")
    cleaning = cleaning or CleaningConfig()
    t_start = time.perf_counter()
    pipe = TextPipeline(cleaning, selection, n_features)
    tokens = {r.id: toks for r, toks in zip(records, pipe.tokenize(r.content for r in records))}
    results, kept = [], []
    for r in range(repeats):
        seed = config.seed + r
        t0 = time.perf_counter()
        cb = None if on_epoch is None else (lambda rec, r=r: on_epoch(r, rec))
        run = train_once(records, config.replace(seed=seed), selection=selection,
                         n_features=n_features, cleaning=cleaning,
                         split_spec=SplitSpec(train_fraction, seed, stratified),
                         tokens=tokens, on_epoch=cb)
        res = RepeatResult(seed, [e.accuracy for e in run.trace], [e.f1 for e in run.trace],
                           len(run.train), len(run.test), run.machine.config.num_features,
                           time.perf_counter() - t0)
        logger.info("repeat %d seed=%d acc=%.4f f1=%.4f (%.1fs)", r, seed,
                    stable_mean(res.accuracy, stable), stable_mean(res.f1, stable), res.seconds)
        results.append(res)
        if keep_models:
            kept.append(run)
    settings = {"selection": selection, "n_features": n_features, "cleaning": cleaning.to_dict(),
                "repeats": repeats, "train_fraction": train_fraction, "stratified": stratified}
    report = ensemble_report(results, stable, config.to_dict(), settings,
                             time.perf_counter() - t_start)
    return (report, kept) if keep_models else report
