"""Raw text -> set-of-words BooleanDocuments."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from tsetlin_news.machine import BooleanDocument

STOPWORD_LISTS = {"en-v1": "stopwords_en_v1.txt"}

_URL_RE = re.compile(r"(?:https?://|ftp://|www\.)\S+", re.IGNORECASE)
_EMOJI_RE = re.compile(
    "["
    "\U0001F000-\U0001FAFF"  # pictographs, emoticons, transport, symbols
    "\u2600-\u27BF"          # misc symbols and dingbats
    "\u2B00-\u2BFF"
    "\uFE0E\uFE0F\u200D"     # variation selectors, zero-width joiner
    "]+"
)
# words with internal periods, hyphens or apostrophes stay whole ("u.s-mexico")
_WORD_RE = re.compile(r"\w+(?:[.\-'’]\w+)*")


@dataclass(frozen=True)
class CleaningConfig:
    strip_urls: bool = True
    strip_stopwords: bool = True
    strip_punctuation: bool = True
    strip_emojis: bool = True
    lemmatize: bool = True
    stem_plurals: bool = False
    stopword_list: str = "en-v1"

    def __post_init__(self):
        if self.stopword_list not in STOPWORD_LISTS:
            raise ValueError(f"unknown stop-word list {self.stopword_list!r}; "
                             f"known: {sorted(STOPWORD_LISTS)}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CleaningConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown cleaning options: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path: str | Path) -> "CleaningConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@lru_cache(maxsize=None)
def load_stopwords(list_id: str = "en-v1") -> frozenset[str]:
    name = STOPWORD_LISTS[list_id]
    text = resources.files("tsetlin_news").joinpath(name).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines()
                     if w.strip() and not w.startswith("#"))


_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-consonant sequences (Porter's m)."""
    m, prev_vowel = 0, False
    for i in range(len(stem)):
        cons = _is_consonant(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _ends_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    n = len(stem)
    return (_is_consonant(stem, n - 3) and not _is_consonant(stem, n - 2)
            and _is_consonant(stem, n - 1) and stem[-1] not in "wxy")


def light_lemmatize(token: str, plurals: bool = False) -> str:
    """Strip -ing / -ed (and optionally plural -s / -es) from alphabetic tokens.

    Approximates a verb lemmatizer: "building" -> "build", "taking" ->
    "take", "stopped" -> "stop".  Short stems and vowel-less stems are left
    alone ("bring", "used").
    """
    if not token.isalpha():
        return token
    word = token
    if plurals and len(word) > 3:
        if word.endswith("sses"):
            word = word[:-2]
        elif word.endswith("ies"):
            word = word[:-3] + "y"
        elif word.endswith("s") and not word.endswith(("ss", "us", "is")):
            word = word[:-1]
    if word.endswith("eed"):
        return word
    for suffix in ("ing", "ed"):
        if not word.endswith(suffix):
            continue
        stem = word[: -len(suffix)]
        if len(stem) < 3 or not any(not _is_consonant(stem, i) for i in range(len(stem))):
            return word
        if stem[-1] == stem[-2] and _is_consonant(stem, len(stem) - 1) and stem[-1] not in "lsz":
            return stem[:-1]
        if _measure(stem) == 1 and _ends_cvc(stem):
            return stem + "e"
        return stem
    return word


def clean_and_tokenize(text: str, cfg: CleaningConfig = CleaningConfig()) -> list[str]:
    text = text.lower()
    if cfg.strip_urls:
        text = _URL_RE.sub(" ", text)
    if cfg.strip_emojis:
        text = _EMOJI_RE.sub(" ", text)
    tokens = _WORD_RE.findall(text) if cfg.strip_punctuation else text.split()
    if cfg.strip_stopwords:
        stop = load_stopwords(cfg.stopword_list)
        tokens = [t for t in tokens if t not in stop]
    if cfg.lemmatize:
        tokens = [light_lemmatize(t, cfg.stem_plurals) for t in tokens]
    return tokens


class Vocabulary:
    """Bijective token <-> index map with dense indices 0..o-1."""

    def __init__(self, tokens: Iterable[str]):
        self._tokens = tuple(tokens)
        self._index = {t: i for i, t in enumerate(self._tokens)}
        if len(self._index) != len(self._tokens):
            raise ValueError("vocabulary tokens must be unique")
        for t in self._tokens:
            if not t or any(ch in t for ch in "\t\n\r"):
                raise ValueError(f"invalid vocabulary token {t!r}")

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self):
        return iter(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __getitem__(self, token: str) -> int:
        return self._index[token]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def token(self, index: int) -> str:
        return self._tokens[index]

    def get(self, token: str, default=None):
        return self._index.get(token, default)

    def digest(self) -> bytes:
        return hashlib.sha256("\n".join(self._tokens).encode("utf-8")).digest()

    def to_file(self, path: str | Path) -> None:
        lines = [f"{t}\t{i}\n" for i, t in enumerate(self._tokens)]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocabulary":
        pairs = []
        for n, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
            if not line:
                continue
            token, _, idx = line.rpartition("\t")
            if not token or not idx.isdigit():
                raise ValueError(f"{path}:{n}: expected 'token<TAB>index'")
            pairs.append((int(idx), token))
        pairs.sort()
        if [i for i, _ in pairs] != list(range(len(pairs))):
            raise ValueError(f"{path}: indices are not dense 0..{len(pairs) - 1}")
        return cls(t for _, t in pairs)


def build_vocabulary(corpus: Sequence[Sequence[str]]) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(sorted({t for doc in corpus for t in doc}))


def presence_matrix(corpus: Sequence[Sequence[str]], vocab: Vocabulary) -> sparse.csr_matrix:
    """Documents x vocabulary 0/1 matrix (document-level presence)."""
    indptr = [0]
    indices: list[int] = []
    for doc in corpus:
        idx = {vocab[t] for t in doc if t in vocab}
        indices.extend(sorted(idx))
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.int64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(corpus), len(vocab)))


def chi2_scores(corpus: Sequence[Sequence[str]], labels: Sequence[int],
                vocab: Vocabulary) -> np.ndarray:
    """Pearson chi-squared of the 2x2 presence-vs-class table, per token."""
    y = np.asarray(labels)
    if len(y) != len(corpus):
        raise ValueError("labels and corpus differ in length")
    classes = set(np.unique(y).tolist())
    if not classes <= {0, 1}:
        raise ValueError(f"chi-squared selection needs binary 0/1 labels, got {sorted(classes)}")
    if len(classes) < 2:
        raise ValueError("degenerate corpus: only one class present")
    X = presence_matrix(corpus, vocab)
    pos = y == 1
    a = np.asarray(X[pos].sum(axis=0)).ravel().astype(np.float64)   # present, class 1
    b = np.asarray(X[~pos].sum(axis=0)).ravel().astype(np.float64)  # present, class 0
    n1, n0 = float(pos.sum()), float((~pos).sum())
    c, d = n1 - a, n0 - b
    n = n1 + n0
    denom = (a + b) * (c + d) * n1 * n0
    num = n * (a * d - b * c) ** 2
    out = np.zeros_like(num)
    np.divide(num, denom, out=out, where=denom > 0)
    return out


def document_frequencies(corpus: Sequence[Sequence[str]], vocab: Vocabulary) -> np.ndarray:
    return np.asarray(presence_matrix(corpus, vocab).sum(axis=0)).ravel()


def _top_k(vocab: Vocabulary, scores: np.ndarray, k: int) -> Vocabulary:
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(range(len(vocab)), key=lambda i: (-scores[i], vocab.token(i)))
    return Vocabulary(sorted(vocab.token(i) for i in ranked[:k]))


def chi2_select(corpus: Sequence[Sequence[str]], labels: Sequence[int], k: int,
                vocab: Vocabulary | None = None) -> Vocabulary:
    """Keep the ``k`` tokens with the largest chi-squared statistic."""
    vocab = build_vocabulary(corpus) if vocab is None else vocab
    return _top_k(vocab, chi2_scores(corpus, labels, vocab), k)


def frequency_select(corpus: Sequence[Sequence[str]], k: int,
                     vocab: Vocabulary | None = None) -> Vocabulary:
    """Keep the ``k`` tokens present in the most documents."""
    vocab = build_vocabulary(corpus) if vocab is None else vocab
    return _top_k(vocab, document_frequencies(corpus, vocab), k)


def booleanize(tokens: Iterable[str], vocab: Vocabulary, label: int | None = None,
               doc_id: str | None = None) -> BooleanDocument:
    idx = {vocab[t] for t in tokens if t in vocab}
    return BooleanDocument(tuple(idx), len(vocab), label, doc_id)


@dataclass
class TextPipeline:
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    selection: str = "chi2"
    k: int = 20_000
    vocab: Vocabulary | None = None

    def __post_init__(self):
        if self.selection not in ("chi2", "frequency"):
            raise ValueError(f"unknown selection method {self.selection!r}")

    def tokenize(self, texts: Iterable[str]) -> list[list[str]]:
        return [clean_and_tokenize(t, self.cleaning) for t in texts]

    def fit(self, corpus: Sequence[Sequence[str]], labels: Sequence[int]) -> Vocabulary:
        if self.selection == "chi2":
            self.vocab = chi2_select(corpus, labels, self.k)
        else:
            self.vocab = frequency_select(corpus, self.k)
        return self.vocab

    def transform(self, corpus: Sequence[Sequence[str]], labels: Sequence[int] | None = None,
                  ids: Sequence[str] | None = None) -> list[BooleanDocument]:
        if self.vocab is None:
            raise RuntimeError("pipeline has no vocabulary; call fit first")
        labels = [None] * len(corpus) if labels is None else labels
        ids = [None] * len(corpus) if ids is None else ids
        return [booleanize(toks, self.vocab, y, i) for toks, y, i in zip(corpus, labels, ids)]
