"""Labeled article corpora: CSV ingestion, seeded splits and split manifests.

Input files are UTF-8 CSV with a header containing at least ``id``,
``title``, ``text`` and ``label`` (``real`` or ``fake``).  Extra columns are
ignored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from tsetlin_news.errors import CorpusError

REAL, FAKE = 0, 1
LABEL_NAMES = ("real", "fake")
SOURCES = ("politifact", "gossipcop")
REQUIRED_COLUMNS = ("id", "title", "text", "label")


def parse_label(value: str) -> int:
    v = value.strip().lower()
    if v not in LABEL_NAMES:
        raise ValueError(f"label must be 'real' or 'fake', got {value!r}")
    return LABEL_NAMES.index(v)


@dataclass(frozen=True)
class ArticleRecord:
    id: str
    title: str
    body: str
    label: int
    source: str = "politifact"

    @property
    def label_name(self) -> str:
        return LABEL_NAMES[self.label]

    @property
    def content(self) -> str:
        # title and body are tokenized together
        return f"{self.title}\n{self.body}" if self.title else self.body


@dataclass
class Corpus:
    records: list[ArticleRecord]
    source: str
    path: str | None = None
    data_rows: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ArticleRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(LABEL_NAMES, 0)
        for r in self.records:
            out[r.label_name] += 1
        return out

    def by_id(self, doc_id: str) -> ArticleRecord:
        for r in self.records:
            if r.id == doc_id:
                return r
        raise KeyError(doc_id)


def _check_source(source: str) -> None:
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")


def load_corpus(path: str | Path, source: str = "politifact", strict: bool = False) -> Corpus:
    """Parse an article CSV.

    Malformed rows (wrong field count, empty id, duplicate id, bad label) are
    skipped and listed in ``Corpus.skipped`` as ``(line, reason)`` with the
    1-based physical line where the row starts; ``strict=True`` raises on the
    first one instead.
    """
    _check_source(source)
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"{path}: no such file")
    records: list[ArticleRecord] = []
    skipped: list[tuple[int, str]] = []
    seen: set[str] = set()
    rows = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty file, expected a header row") from None
        header = [h.strip().lower() for h in header]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise CorpusError(f"{path}: missing required columns {missing}")
        col = {c: header.index(c) for c in REQUIRED_COLUMNS}
        start = reader.line_num + 1
        for row in reader:
            line, start = start, reader.line_num + 1
            if not row:
                continue
            rows += 1
            try:
                if len(row) != len(header):
                    raise ValueError(f"expected {len(header)} fields, found {len(row)}")
                doc_id = row[col["id"]].strip()
                if not doc_id:
                    raise ValueError("empty id")
                if "\n" in doc_id or "\r" in doc_id:
                    raise ValueError("id contains a line break")
                if doc_id in seen:
                    raise ValueError(f"duplicate id {doc_id!r}")
                label = parse_label(row[col["label"]])
            except ValueError as exc:
                if strict:
                    raise CorpusError(f"{path}:{line}: {exc}") from None
                skipped.append((line, str(exc)))
                continue
            seen.add(doc_id)
            records.append(ArticleRecord(doc_id, row[col["title"]], row[col["text"]], label, source))
    if not records:
        raise CorpusError(f"{path}: empty corpus")
    return Corpus(records, source, str(path), rows, skipped)


def write_corpus(path: str | Path, records: Sequence[ArticleRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUIRED_COLUMNS)
        for r in records:
            w.writerow([r.id, r.title, r.body, r.label_name])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train fraction must lie in (0, 1), got {self.train_fraction}")

    def train_size(self, n: int) -> int:
        # round first so that e.g. 0.29 * 100 floors to 29, not 28
        return math.floor(round(self.train_fraction * n, 9))


def _stratified_quota(counts: list[int], n_train: int) -> list[int]:
    """Largest-remainder allocation of ``n_train`` across classes."""
    n = sum(counts)
    exact = [n_train * c / n for c in counts]
    quota = [math.floor(e) for e in exact]
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - quota[i]), i))
    for i in order[: n_train - sum(quota)]:
        quota[i] += 1
    return quota


def split(records: Sequence[ArticleRecord], spec: SplitSpec = SplitSpec()
          ) -> tuple[list[ArticleRecord], list[ArticleRecord]]:
    """Seeded shuffle-and-partition; train size is floor(fraction * n)."""
    records = list(records)
    n = len(records)
    if n < 2:
        raise CorpusError(f"cannot split a corpus of {n} record(s)")
    n_train = spec.train_size(n)
    if n_train < 1 or n_train >= n:
        raise CorpusError(f"train fraction {spec.train_fraction} leaves an empty side for n={n}")
    rng = np.random.default_rng(spec.seed)
    if not spec.stratified:
        perm = rng.permutation(n)
        return [records[i] for i in perm[:n_train]], [records[i] for i in perm[n_train:]]
    labels = sorted({r.label for r in records})
    groups = [[i for i, r in enumerate(records) if r.label == c] for c in labels]
    quota = _stratified_quota([len(g) for g in groups], n_train)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for g, q in zip(groups, quota):
        g = [g[i] for i in rng.permutation(len(g))]
        train_idx += g[:q]
        test_idx += g[q:]
    train_idx = [train_idx[i] for i in rng.permutation(len(train_idx))]
    test_idx = [test_idx[i] for i in rng.permutation(len(test_idx))]
    return [records[i] for i in train_idx], [records[i] for i in test_idx]


@dataclass
class SplitManifest:
    seed: int
    train_fraction: float
    stratified: bool
    train_ids: list[str]
    test_ids: list[str]

    @classmethod
    def from_split(cls, spec: SplitSpec, train: Sequence[ArticleRecord],
                   test: Sequence[ArticleRecord]) -> "SplitManifest":
        return cls(spec.seed, spec.train_fraction, spec.stratified,
                   [r.id for r in train], [r.id for r in test])

    def write(self, path: str | Path) -> None:
        lines = [f"seed\t{self.seed}", f"train_fraction\t{self.train_fraction!r}",
                 f"stratified\t{str(self.stratified).lower()}", "[train]", *self.train_ids,
                 "[test]", *self.test_ids]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "SplitManifest":
        meta: dict[str, str] = {}
        ids: dict[str, list[str]] = {"[train]": [], "[test]": []}
        section = None
        for line in Path(path).read_text(encoding="utf-8").split("\n"):
            if not line:
                continue
            if line in ids:
                section = line
            elif section is None:
                key, _, value = line.partition("\t")
                meta[key] = value
            else:
                ids[section].append(line)
        try:
            return cls(int(meta["seed"]), float(meta["train_fraction"]),
                       meta["stratified"] == "true", ids["[train]"], ids["[test]"])
        except KeyError as exc:
            raise CorpusError(f"{path}: split manifest lacks {exc.args[0]!r}") from None
