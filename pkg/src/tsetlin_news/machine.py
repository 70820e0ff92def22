"""Multi-class Tsetlin Machine over booleanized documents."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from tsetlin_news import _kernels as K
from tsetlin_news.clause import DEFAULT_STATES, INFER, TRAIN, ClassModel, argmax_class
from tsetlin_news.errors import DimensionError
from tsetlin_news.metrics import accuracy_f1

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BooleanDocument:
    """Set-of-words document: indices of the features equal to 1."""

    features: tuple[int, ...]
    n_features: int
    label: int | None = None
    doc_id: str | None = None

    def __post_init__(self):
        feats = tuple(int(k) for k in self.features)
        if len(set(feats)) != len(feats):
            raise ValueError("duplicate feature indices")
        if feats and (min(feats) < 0 or max(feats) >= self.n_features):
            raise DimensionError(f"feature index outside [0, {self.n_features})")
        object.__setattr__(self, "features", tuple(sorted(feats)))

    @classmethod
    def from_dense(cls, x, label: int | None = None, doc_id: str | None = None) -> "BooleanDocument":
        x = np.asarray(x)
        return cls(tuple(np.flatnonzero(x).tolist()), x.shape[0], label, doc_id)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.n_features, dtype=np.uint8)
        x[list(self.features)] = 1
        return x


@dataclass(frozen=True)
class TMConfig:
    num_features: int
    num_clauses: int = 10_000
    threshold: int = 200
    s: float = 25.0
    n_states: int = DEFAULT_STATES
    seed: int = 0
    epochs: int = 200
    num_classes: int = 2

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if self.num_clauses < 2 or self.num_clauses % 2:
            raise ValueError("num_clauses must be even and >= 2")
        if self.threshold < 1:
            raise ValueError("threshold T must be >= 1")
        if not self.s > 1:
            raise ValueError("sensitivity s must be > 1")
        if not 1 <= self.n_states <= 127:
            raise ValueError("n_states must be in [1, 127] so 2N fits a byte")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")

    def replace(self, **changes) -> "TMConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    accuracy: float | None = None
    f1: float | None = None
    train_accuracy: float | None = None
    seconds: float = 0.0


@dataclass
class StepRecord:
    """Which clauses got feedback in one train step (0 none, 1 Type I, 2 Type II)."""

    target: int
    other: int
    target_feedback: np.ndarray
    other_feedback: np.ndarray
    target_sum: int = 0
    other_sum: int = 0


@dataclass(eq=False)
class TsetlinMachine:
    config: TMConfig
    states: np.ndarray = field(default=None, repr=False)
    epochs_trained: int = 0

    def __post_init__(self):
        cfg = self.config
        shape = (cfg.num_classes, cfg.num_clauses, 2 * cfg.num_features)
        if self.states is None:
            rng = np.random.default_rng(cfg.seed)
            self.states = np.empty(shape, dtype=np.uint8)
            for c in range(cfg.num_classes):
                self.states[c] = rng.integers(0, 2, size=shape[1:], dtype=np.uint8)
                self.states[c] += cfg.n_states
        else:
            if self.states.shape != shape:
                raise DimensionError(f"state array {self.states.shape} does not match config {shape}")
            self.states = np.ascontiguousarray(self.states, dtype=np.uint8)
        self._include = K.pack_include(
            self.states.reshape(-1, shape[2]), cfg.n_states, self.n_words
        ).reshape(cfg.num_classes, cfg.num_clauses, self.n_words)
        self._table = None

    @property
    def n_words(self) -> int:
        return (2 * self.config.num_features + 63) // 64

    @property
    def models(self) -> list[ClassModel]:
        return [ClassModel(self.states[c], c, self.config.n_states)
                for c in range(self.config.num_classes)]

    def include_mask(self) -> np.ndarray:
        return self.states <= self.config.n_states

    def copy(self) -> "TsetlinMachine":
        return TsetlinMachine(self.config, self.states.copy(), self.epochs_trained)

    def same_model(self, other: "TsetlinMachine") -> bool:
        return self.config == other.config and np.array_equal(self.states, other.states)

    def resync(self) -> None:
        """Rebuild include masks after editing ``states`` directly."""
        o2 = self.states.shape[2]
        self._include[:] = K.pack_include(
            self.states.reshape(-1, o2), self.config.n_states, self.n_words
        ).reshape(self._include.shape)

    def encode(self, docs: Sequence[BooleanDocument]) -> np.ndarray:
        o = self.config.num_features
        indptr = np.zeros(len(docs) + 1, dtype=np.int64)
        for i, d in enumerate(docs):
            if d.n_features != o:
                raise DimensionError(f"document has {d.n_features} features, model expects {o}")
            indptr[i + 1] = indptr[i] + len(d.features)
        indices = np.fromiter((k for d in docs for k in d.features), dtype=np.int64,
                              count=int(indptr[-1]))
        return K.pack_documents(indptr, indices, o, self.n_words)

    def class_sums(self, docs: Sequence[BooleanDocument] | np.ndarray, mode: str = INFER) -> np.ndarray:
        X = docs if isinstance(docs, np.ndarray) else self.encode(docs)
        return K.class_sums(self._include, X, mode == TRAIN)

    def predict(self, docs: Sequence[BooleanDocument] | np.ndarray) -> np.ndarray:
        # argmax picks the first maximum, i.e. the lowest class id on ties
        return self.class_sums(docs).argmax(axis=1)

    def predict_one(self, doc: BooleanDocument) -> tuple[int, dict[int, int]]:
        sums = {c: int(v) for c, v in enumerate(self.class_sums([doc])[0])}
        return argmax_class(sums), sums

    def clause_outputs(self, doc: BooleanDocument, cls: int, mode: str = INFER) -> np.ndarray:
        return K.clause_outputs(self._include[cls], self.encode([doc])[0], mode == TRAIN)

    def _gap_table(self) -> np.ndarray:
        if self._table is None:
            self._table = K.gap_table(1.0 / self.config.s)
        return self._table

    def _check_labels(self, docs: Sequence[BooleanDocument]) -> np.ndarray:
        labels = [d.label for d in docs]
        if any(l is None for l in labels):
            raise ValueError("training documents must be labeled")
        y = np.asarray(labels, dtype=np.int64)
        bad = (y < 0) | (y >= self.config.num_classes)
        if bad.any():
            raise ValueError(f"label {int(y[bad][0])} outside the model's {self.config.num_classes} classes")
        return y

    def train_step(self, doc: BooleanDocument, *, epoch: int = 0, index: int = 0) -> StepRecord:
        """Feedback for one labeled document.

        The target class model gets Type I on positive and Type II on negative
        clauses with probability (T - v)/2T; one other class gets the mirror
        assignment with probability (T + v)/2T, v clamped to [-T, T].
        """
        y = int(self._check_labels([doc])[0])
        cfg = self.config
        lits = self.encode([doc])[0]
        sums = K.class_sums(self._include, lits[None, :], True)[0]
        alloc = np.zeros((2, cfg.num_clauses), dtype=np.uint8)
        other = K.train_step(self.states, self._include, lits, y, cfg.n_states,
                             cfg.threshold, 1.0 / cfg.s, np.uint64(cfg.seed), epoch, index,
                             self._gap_table(), alloc)
        return StepRecord(y, int(other), alloc[0].copy(), alloc[1].copy(),
                          int(sums[y]), int(sums[other]))

    def fit(self, docs: Sequence[BooleanDocument], epochs: int | None = None, *,
            eval_docs: Sequence[BooleanDocument] | None = None,
            positive: int = 1, track_train: bool = False,
            on_epoch: Callable[[EpochRecord], None] | None = None) -> list[EpochRecord]:
        """Train for ``epochs`` passes (default: config.epochs).

        Each pass visits the corpus in an order seeded by (seed, epoch).
        When ``eval_docs`` is given, test accuracy and F1 (``positive`` as
        the positive class) are recorded after every epoch.
        """
        if not docs:
            raise ValueError("cannot fit on an empty corpus")
        cfg = self.config
        epochs = cfg.epochs if epochs is None else epochs
        y = self._check_labels(docs)
        X = self.encode(docs)
        if eval_docs is not None:
            y_eval = self._check_labels(eval_docs)
            X_eval = self.encode(eval_docs)
        table = self._gap_table()
        trace = []
        for _ in range(epochs):
            epoch = self.epochs_trained
            t0 = time.perf_counter()
            order = np.random.default_rng([cfg.seed, epoch]).permutation(len(docs))
            K.train_epoch(self.states, self._include, X, y, order, cfg.n_states,
                          cfg.threshold, 1.0 / cfg.s, np.uint64(cfg.seed), epoch, table)
            self.epochs_trained += 1
            rec = EpochRecord(epoch, seconds=time.perf_counter() - t0)
            if eval_docs is not None:
                rec.accuracy, rec.f1 = accuracy_f1(y_eval, self.predict(X_eval), positive)
            if track_train:
                rec.train_accuracy = float((self.predict(X) == y).mean())
            logger.debug("epoch %d acc=%s f1=%s %.2fs", epoch, rec.accuracy, rec.f1, rec.seconds)
            trace.append(rec)
            if on_epoch is not None:
                on_epoch(rec)
        return trace


def fit(machine: TsetlinMachine, corpus: Sequence[BooleanDocument], **kwargs) -> list[EpochRecord]:
    return machine.fit(corpus, **kwargs)


def documents_from_dense(X: Iterable, labels: Iterable | None = None) -> list[BooleanDocument]:
    X = [np.asarray(x) for x in X]
    labels = [None] * len(X) if labels is None else list(labels)
    return [BooleanDocument.from_dense(x, None if l is None else int(l)) for x, l in zip(X, labels)]
