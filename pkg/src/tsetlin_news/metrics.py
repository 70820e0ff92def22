from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Confusion(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        # 2TP / (2TP + FP + FN); zero when there are no true positives
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if self.tp else 0.0


def confusion(y_true, y_pred, positive: int = 1) -> Confusion:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"label/prediction shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("cannot score an empty set")
    t = y_true == positive
    p = y_pred == positive
    return Confusion(int((t & p).sum()), int((~t & p).sum()),
                     int((t & ~p).sum()), int((~t & ~p).sum()))


def accuracy_f1(y_true, y_pred, positive: int = 1) -> tuple[float, float]:
    c = confusion(y_true, y_pred, positive)
    return c.accuracy, c.f1
