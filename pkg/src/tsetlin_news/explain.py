"""Readable rules, literal frequency tables and per-document explanations."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from tsetlin_news.credibility import DEFAULT_K, credibility_score
from tsetlin_news.data import FAKE, LABEL_NAMES, REAL
from tsetlin_news.errors import VocabularyMismatchError
from tsetlin_news.machine import BooleanDocument, TsetlinMachine
from tsetlin_news.textpipe import Vocabulary

AND = " ∧ "
NOT = "¬"
INACTIVE = "⊤(inactive)"


@dataclass(frozen=True)
class ClauseRule:
    class_id: int
    positive: bool
    conjuncts: tuple[tuple[str, bool], ...]
    clause_index: int = 0

    @property
    def polarity(self) -> str:
        return "+" if self.positive else "-"

    @property
    def vote(self) -> int:
        return 1 if self.positive else -1

    def render(self) -> str:
        if not self.conjuncts:
            return INACTIVE
        return AND.join(f"{NOT}{tok}" if neg else tok for tok, neg in self.conjuncts)

    __str__ = render

    def literals(self) -> set[str]:
        return {f"{NOT}{tok}" if neg else tok for tok, neg in self.conjuncts}

    def to_dict(self) -> dict:
        return {"class": self.class_id, "polarity": self.polarity, "clause": self.clause_index,
                "conjuncts": [{"token": t, "negated": n} for t, n in self.conjuncts],
                "rule": self.render()}


def _check_vocab(machine: TsetlinMachine, vocab: Vocabulary) -> None:
    if len(vocab) != machine.config.num_features:
        raise VocabularyMismatchError(
            f"vocabulary has {len(vocab)} tokens, model has {machine.config.num_features} features")


def _rule(include_row: np.ndarray, vocab: Vocabulary, class_id: int, j: int, positive: bool) -> ClauseRule:
    o = len(vocab)
    conj = tuple((vocab.token(int(k) % o), bool(k >= o)) for k in np.flatnonzero(include_row))
    return ClauseRule(class_id, positive, conj, j)


def extract_rules(machine: TsetlinMachine, vocab: Vocabulary, class_id: int | None = None) -> list[ClauseRule]:
    """One rule per clause, ordered by class then clause index.

    Conjuncts follow literal order: plain words by feature index, then
    negated words by feature index.
    """
    _check_vocab(machine, vocab)
    inc = machine.include_mask()
    half = machine.config.num_clauses // 2
    classes = range(machine.config.num_classes) if class_id is None else [class_id]
    return [_rule(inc[c, j], vocab, c, j, j < half)
            for c in classes for j in range(machine.config.num_clauses)]


def write_rules_text(path: str | Path, rules: Sequence[ClauseRule], class_names=LABEL_NAMES) -> None:
    lines = [f"{class_names[r.class_id]}\t{r.polarity}\t{r.clause_index}\t{r.render()}" for r in rules]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def rules_to_json(rules: Sequence[ClauseRule]) -> str:
    return json.dumps([r.to_dict() for r in rules], ensure_ascii=False, indent=1)


def literal_counts(machine: TsetlinMachine) -> tuple[np.ndarray, np.ndarray]:
    """(plain, negated) include counts, shape (classes, o), over positive clauses."""
    o = machine.config.num_features
    half = machine.config.num_clauses // 2
    inc = machine.include_mask()[:, :half, :]
    counts = inc.sum(axis=1, dtype=np.int64)
    return counts[:, :o], counts[:, o:]


@dataclass
class LiteralTable:
    n: int
    columns: dict[int, dict[str, list[tuple[str, int]]]]
    clauses_per_class: int
    class_names: tuple[str, ...] = LABEL_NAMES

    def rows(self) -> list[tuple[str, str, str, int]]:
        out = []
        for c, cols in self.columns.items():
            for kind in ("plain", "negated"):
                out += [(self.class_names[c], kind, tok, cnt) for tok, cnt in cols[kind]]
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("class", "literal", "token", "count"))
            w.writerows(self.rows())

    def format(self) -> str:
        lines = []
        for c, cols in self.columns.items():
            lines.append(f"[{self.class_names[c]}]")
            width = max([len(t) for k in cols.values() for t, _ in k] + [5])
            for i in range(max(len(cols["plain"]), len(cols["negated"]))):
                left = cols["plain"][i] if i < len(cols["plain"]) else ("", "")
                right = cols["negated"][i] if i < len(cols["negated"]) else ("", "")
                lines.append(f"  {left[0]:<{width}} {left[1]!s:>6}   "
                             f"{NOT if right[0] else ' '}{right[0]:<{width}} {right[1]!s:>6}")
        return "\n".join(lines)


def _ranked(vocab: Vocabulary, counts: np.ndarray, n: int) -> list[tuple[str, int]]:
    nz = np.flatnonzero(counts)
    order = sorted(nz, key=lambda k: (-counts[k], vocab.token(k)))
    return [(vocab.token(k), int(counts[k])) for k in order[:n]]


def literal_frequency_table(machine: TsetlinMachine, vocab: Vocabulary, n: int = 10,
                            class_names: Sequence[str] = LABEL_NAMES) -> LiteralTable:
    """Top-``n`` plain and negated literals per class, counted over the
    class's positive clauses; ties break lexicographically and zero counts
    are left out."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_vocab(machine, vocab)
    plain, negated = literal_counts(machine)
    cols = {c: {"plain": _ranked(vocab, plain[c], n), "negated": _ranked(vocab, negated[c], n)}
            for c in range(machine.config.num_classes)}
    names = tuple(class_names) if len(class_names) >= machine.config.num_classes \
        else tuple(str(c) for c in range(machine.config.num_classes))
    return LiteralTable(n, cols, machine.config.num_clauses // 2, names)


def negated_include_fraction(machine: TsetlinMachine) -> float:
    """Share of included literals, over all clauses, that are negations."""
    o = machine.config.num_features
    inc = machine.include_mask()
    total = int(inc.sum())
    return float(inc[:, :, o:].sum()) / total if total else 0.0


@dataclass
class ActivatedClause:
    rule: ClauseRule

    @property
    def vote(self) -> int:
        return self.rule.vote


@dataclass
class Explanation:
    predicted: int
    sums: dict[int, int]
    activated: dict[int, list[ActivatedClause]]
    n_activated: dict[int, int]
    vote_totals: dict[int, int]
    q: float | None = None
    class_names: tuple[str, ...] = field(default=LABEL_NAMES)

    def to_dict(self) -> dict:
        name = self.class_names
        return {
            "predicted": name[self.predicted],
            "sums": {name[c]: v for c, v in self.sums.items()},
            "Q": self.q,
            "classes": {
                name[c]: {"activated": self.n_activated[c], "vote_total": self.vote_totals[c],
                          "top": [{"rule": a.rule.render(), "polarity": a.rule.polarity,
                                   "clause": a.rule.clause_index, "vote": a.vote}
                                  for a in self.activated[c]]}
                for c in self.activated},
        }

    def format(self) -> str:
        name = self.class_names
        head = f"predicted {name[self.predicted]}  sums " + \
            ", ".join(f"{name[c]}={v}" for c, v in self.sums.items())
        if self.q is not None:
            head += f"  Q={self.q:.4f}"
        lines = [head]
        for c, acts in self.activated.items():
            lines.append(f"[{name[c]}] {self.n_activated[c]} clauses active, net vote {self.vote_totals[c]}")
            lines += [f"  {a.rule.polarity} #{a.rule.clause_index}: {a.rule.render()}" for a in acts]
        return "\n".join(lines)


def explain_prediction(machine: TsetlinMachine, doc: BooleanDocument, vocab: Vocabulary,
                       top: int = 10, k: float = DEFAULT_K,
                       class_names: Sequence[str] = LABEL_NAMES) -> Explanation:
    """Clauses firing on ``doc`` (inference mode), per class.

    The ``top`` clauses listed per class are the longest rules (the most
    specific evidence), ties by clause index.  ``vote_totals`` sums the votes
    of every activated clause and equals the class vote sum.
    """
    _check_vocab(machine, vocab)
    if top < 0:
        raise ValueError("top must be >= 0")
    cfg = machine.config
    inc = machine.include_mask()
    half = cfg.num_clauses // 2
    activated, counts, totals = {}, {}, {}
    for c in range(cfg.num_classes):
        fired = np.flatnonzero(machine.clause_outputs(doc, c))
        rules = [_rule(inc[c, j], vocab, c, int(j), j < half) for j in fired]
        totals[c] = sum(r.vote for r in rules)
        counts[c] = len(rules)
        rules.sort(key=lambda r: (-len(r.conjuncts), r.clause_index))
        activated[c] = [ActivatedClause(r) for r in rules[:top]]
    sums = {c: int(v) for c, v in enumerate(machine.class_sums([doc])[0])}
    predicted = min(c for c, v in sums.items() if v == max(sums.values()))
    q = credibility_score(sums[FAKE], sums[REAL], k) if cfg.num_classes == 2 else None
    names = tuple(class_names) if len(class_names) >= cfg.num_classes \
        else tuple(str(c) for c in range(cfg.num_classes))
    return Explanation(predicted, sums, activated, counts, totals, q, names)
