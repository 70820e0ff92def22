"""Binary model files ("TMV1").

Layout, all integers little-endian::

    b"TMV1"  u16 version
    section*: 4-byte ASCII tag, u64 payload length, payload
    b"SHA2"  32-byte sha256 of every preceding byte

Sections, in order: ``CONF`` (packed TMConfig plus epochs trained), ``VOCB``
(newline-joined tokens), ``VHSH`` (sha256 of ``VOCB``), ``PIPE`` (JSON with
cleaning options and pipeline settings) and ``STAT`` (uint8 automaton states,
C order over class, clause, literal).  Nothing time-dependent is written, so
equal models produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tsetlin_news.errors import ChecksumError, ModelFormatError, VocabularyMismatchError
from tsetlin_news.machine import TMConfig, TsetlinMachine
from tsetlin_news.textpipe import CleaningConfig, Vocabulary

MAGIC = b"TMV1"
VERSION = 1
_TRAILER = b"SHA2"
_HEADER = struct.Struct("<4sH")
_SECTION = struct.Struct("<4sQ")
# num_features, num_clauses, threshold, s, n_states, seed, epochs, num_classes, epochs_trained
_CONF = struct.Struct("<IIIdBQIHI")
_SECTION_ORDER = (b"CONF", b"VOCB", b"VHSH", b"PIPE", b"STAT")


@dataclass
class SavedModel:
    machine: TsetlinMachine
    vocab: Vocabulary
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    settings: dict = field(default_factory=dict)


def _section(tag: bytes, payload: bytes) -> bytes:
    return _SECTION.pack(tag, len(payload)) + payload


def model_bytes(machine: TsetlinMachine, vocab: Vocabulary,
                cleaning: CleaningConfig | None = None, settings: dict | None = None) -> bytes:
    cfg = machine.config
    if len(vocab) != cfg.num_features:
        raise VocabularyMismatchError(
            f"vocabulary has {len(vocab)} tokens, model has {cfg.num_features} features")
    conf = _CONF.pack(cfg.num_features, cfg.num_clauses, cfg.threshold, cfg.s, cfg.n_states,
                      cfg.seed, cfg.epochs, cfg.num_classes, machine.epochs_trained)
    vocab_bytes = "\n".join(vocab.tokens).encode("utf-8")
    pipe = {"cleaning": (cleaning or CleaningConfig()).to_dict(), "settings": settings or {}}
    body = b"".join([
        _HEADER.pack(MAGIC, VERSION),
        _section(b"CONF", conf),
        _section(b"VOCB", vocab_bytes),
        _section(b"VHSH", hashlib.sha256(vocab_bytes).digest()),
        _section(b"PIPE", json.dumps(pipe, sort_keys=True).encode("utf-8")),
        _section(b"STAT", np.ascontiguousarray(machine.states, dtype=np.uint8).tobytes()),
    ])
    return body + _TRAILER + hashlib.sha256(body).digest()


def save_model(path: str | Path, machine: TsetlinMachine, vocab: Vocabulary,
               cleaning: CleaningConfig | None = None, settings: dict | None = None) -> None:
    Path(path).write_bytes(model_bytes(machine, vocab, cleaning, settings))


def parse_model(blob: bytes, expected_vocab: Vocabulary | None = None, name: str = "<bytes>") -> SavedModel:
    if len(blob) >= 4 and blob[:4] != MAGIC:
        raise ModelFormatError(f"{name}: not a TMV1 model file")
    if len(blob) < _HEADER.size + len(_TRAILER) + 32:
        raise ChecksumError(f"{name}: truncated model file ({len(blob)} bytes)")
    body, trailer = blob[:-36], blob[-36:]
    if trailer[:4] != _TRAILER or hashlib.sha256(body).digest() != trailer[4:]:
        raise ChecksumError(f"{name}: checksum mismatch (file truncated or corrupted)")
    _, version = _HEADER.unpack_from(body)
    if version != VERSION:
        raise ModelFormatError(f"{name}: format version {version}, this reader supports {VERSION}")

    sections: dict[bytes, bytes] = {}
    pos = _HEADER.size
    while pos < len(body):
        if pos + _SECTION.size > len(body):
            raise ModelFormatError(f"{name}: dangling bytes after last section")
        tag, length = _SECTION.unpack_from(body, pos)
        pos += _SECTION.size
        if pos + length > len(body):
            raise ModelFormatError(f"{name}: section {tag!r} overruns the file")
        sections[tag] = body[pos:pos + length]
        pos += length
    missing = [t.decode() for t in _SECTION_ORDER if t not in sections]
    if missing:
        raise ModelFormatError(f"{name}: missing sections {missing}")

    if len(sections[b"CONF"]) != _CONF.size:
        raise ModelFormatError(f"{name}: bad CONF section size")
    (o, m, T, s, n_states, seed, epochs, n_classes, trained) = _CONF.unpack(sections[b"CONF"])
    cfg = TMConfig(num_features=o, num_clauses=m, threshold=T, s=s, n_states=n_states,
                   seed=seed, epochs=epochs, num_classes=n_classes)

    vocab_bytes = sections[b"VOCB"]
    if hashlib.sha256(vocab_bytes).digest() != sections[b"VHSH"]:
        raise ChecksumError(f"{name}: vocabulary hash does not match stored vocabulary")
    vocab = Vocabulary(vocab_bytes.decode("utf-8").split("\n") if vocab_bytes else [])
    if expected_vocab is not None and expected_vocab.digest() != sections[b"VHSH"]:
        raise VocabularyMismatchError(
            f"{name}: model vocabulary (sha256 {sections[b'VHSH'].hex()[:12]}) is incompatible "
            f"with the supplied vocabulary (sha256 {expected_vocab.digest().hex()[:12]})")

    shape = (n_classes, m, 2 * o)
    raw = sections[b"STAT"]
    if len(raw) != int(np.prod(shape)):
        raise ModelFormatError(f"{name}: state section has {len(raw)} bytes, expected {np.prod(shape)}")
    states = np.frombuffer(raw, dtype=np.uint8).reshape(shape).copy()
    if states.min() < 1 or states.max() > 2 * n_states:
        raise ModelFormatError(f"{name}: automaton state outside [1, {2 * n_states}]")

    pipe = json.loads(sections[b"PIPE"].decode("utf-8"))
    # include masks are rebuilt from the states by the constructor
    machine = TsetlinMachine(cfg, states, trained)
    return SavedModel(machine, vocab, CleaningConfig.from_dict(pipe.get("cleaning", {})),
                      pipe.get("settings", {}))


def load_model(path: str | Path, expected_vocab: Vocabulary | None = None) -> SavedModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such model file")
    return parse_model(path.read_bytes(), expected_vocab, str(path))
