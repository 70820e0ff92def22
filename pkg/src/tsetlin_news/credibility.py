"""Credibility scores from the fake-class and true-class vote sums."""

from __future__ import annotations

import csv
import math
from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from tsetlin_news.data import FAKE, LABEL_NAMES, REAL

DEFAULT_K = 0.012

# keep Q inside the open interval even where float64 would round to 0 or 1
_Q_MIN = np.nextafter(0.0, 1.0)
_Q_MAX = np.nextafter(1.0, 0.0)

RANKED_COLUMNS = ("doc_id", "predicted_label", "vF", "vT", "Q")


@dataclass(frozen=True)
class CredibilityParams:
    k: float = DEFAULT_K

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError(f"logistic growth rate k must be a positive number, got {self.k}")


def credibility_score(v_fake: int, v_true: int, params: CredibilityParams | float = DEFAULT_K) -> float:
    """Q = 1 / (1 + exp(-k (vF - vT)))."""
    k = params.k if isinstance(params, CredibilityParams) else CredibilityParams(params).k
    return float(np.clip(expit(k * (v_fake - v_true)), _Q_MIN, _Q_MAX))


def credibility_scores(v_fake, v_true, params: CredibilityParams | float = DEFAULT_K) -> np.ndarray:
    k = params.k if isinstance(params, CredibilityParams) else CredibilityParams(params).k
    diff = np.asarray(v_fake, dtype=np.float64) - np.asarray(v_true, dtype=np.float64)
    return np.clip(expit(k * diff), _Q_MIN, _Q_MAX)


@dataclass(frozen=True)
class RankedPrediction:
    doc_id: str
    predicted: int
    q: float
    v_fake: int
    v_true: int

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"credibility {self.q} outside (0, 1)")

    @property
    def predicted_label(self) -> str:
        return LABEL_NAMES[self.predicted]

    @property
    def margin(self) -> int:
        return self.v_fake - self.v_true


def score_documents(machine, docs: Sequence, params: CredibilityParams | float = DEFAULT_K,
                    ids: Sequence[str] | None = None) -> list[RankedPrediction]:
    """Predict and score every document with a trained two-class machine.

    Uses raw (unclamped) inference-mode vote sums of the fake and true models.
    """
    sums = machine.class_sums(docs)
    predicted = sums.argmax(axis=1)
    q = credibility_scores(sums[:, FAKE], sums[:, REAL], params)
    if ids is None:
        ids = [d.doc_id if d.doc_id is not None else str(i) for i, d in enumerate(docs)]
    return [RankedPrediction(str(i), int(p), float(qq), int(s[FAKE]), int(s[REAL]))
            for i, p, qq, s in zip(ids, predicted, q, sums)]


def rank_fake(predictions: Iterable[RankedPrediction], threshold: float) -> list[RankedPrediction]:
    """Fake-predicted items with Q >= threshold, most credible first.

    Equal Q values are ordered by vote margin (which only differs where Q
    saturated in floating point) and then by document id.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"credibility threshold must lie in [0, 1], got {threshold}")
    kept = [p for p in predictions if p.predicted == FAKE and p.q >= threshold]
    return sorted(kept, key=lambda p: (-p.q, -p.margin, p.doc_id))


def _writer(target):
    if hasattr(target, "write"):
        return nullcontext(target)
    return open(target, "w", newline="", encoding="utf-8")


def write_ranked_csv(target, predictions: Iterable[RankedPrediction]) -> None:
    """Write to a path or an open text stream."""
    with _writer(target) as fh:
        w = csv.writer(fh)
        w.writerow(RANKED_COLUMNS)
        for p in predictions:
            w.writerow([p.doc_id, p.predicted_label, p.v_fake, p.v_true, repr(p.q)])


def read_ranked_csv(path: str | Path) -> list[RankedPrediction]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RANKED_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [RankedPrediction(row["doc_id"], LABEL_NAMES.index(row["predicted_label"]),
                                 float(row["Q"]), int(row["vF"]), int(row["vT"]))
                for row in reader]


def plot_points(predictions: Iterable[RankedPrediction]) -> list[tuple[int, float]]:
    """(sample index, Q) pairs with Q descending, for credibility curves."""
    qs = sorted((p.q for p in predictions), reverse=True)
    return list(enumerate(qs))


def write_plot_csv(target, points: Iterable[tuple[int, float]]) -> None:
    with _writer(target) as fh:
        w = csv.writer(fh)
        w.writerow(("index", "Q"))
        for i, q in points:
            w.writerow((i, repr(q)))
