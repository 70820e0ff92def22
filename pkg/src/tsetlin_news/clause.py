"""Reference clause semantics.

These functions implement clause evaluation, voting and the two feedback
types directly on state arrays, one literal at a time.  They are slow and
meant for small problems, walkthroughs and for checking the compiled path
in :mod:`tsetlin_news._kernels`, which must agree with them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from tsetlin_news.errors import DimensionError

DEFAULT_STATES = 127

TRAIN = "train"
INFER = "infer"


def action_is_include(state: int, n_states: int) -> bool:
    return state <= n_states


def step_toward_include(state: int, n_states: int) -> int:
    return max(state - 1, 1)


def step_toward_exclude(state: int, n_states: int) -> int:
    return min(state + 1, 2 * n_states)


@dataclass
class TsetlinAutomaton:
    """Two-action automaton with states 1..2N; Include on the lower half."""

    state: int
    n_states: int = DEFAULT_STATES

    def __post_init__(self):
        if not 1 <= self.state <= 2 * self.n_states:
            raise ValueError(f"state {self.state} outside [1, {2 * self.n_states}]")

    @property
    def include(self) -> bool:
        return action_is_include(self.state, self.n_states)

    def toward_include(self) -> None:
        self.state = step_toward_include(self.state, self.n_states)

    def toward_exclude(self) -> None:
        self.state = step_toward_exclude(self.state, self.n_states)


@dataclass
class Clause:
    """One conjunctive clause: a state per literal plus a polarity.

    ``states`` has length ``2 * o``; entry ``k < o`` decides on ``x_k`` and
    entry ``o + k`` on its negation.  It may be a view into a larger model
    array, in which case feedback mutates the model in place.
    """

    states: np.ndarray
    positive: bool = True
    n_states: int = DEFAULT_STATES

    def __post_init__(self):
        if self.states.ndim != 1 or self.states.shape[0] % 2:
            raise DimensionError("clause needs an even-length 1-D state array")

    @property
    def n_features(self) -> int:
        return self.states.shape[0] // 2

    @property
    def included(self) -> np.ndarray:
        return self.states <= self.n_states

    def included_literals(self) -> list[int]:
        return np.flatnonzero(self.included).tolist()

    @classmethod
    def from_literals(cls, n_features: int, plain: Iterable[int] = (),
                      negated: Iterable[int] = (), *, positive: bool = True,
                      n_states: int = DEFAULT_STATES,
                      include_state: int | None = None,
                      exclude_state: int | None = None) -> "Clause":
        """Clause including exactly the given plain and negated features.

        Included automata sit at ``include_state`` (default N) and the rest
        at ``exclude_state`` (default N + 1), i.e. one step from flipping.
        """
        inc = n_states if include_state is None else include_state
        exc = n_states + 1 if exclude_state is None else exclude_state
        states = np.full(2 * n_features, exc, dtype=np.uint8)
        for k in plain:
            states[k] = inc
        for k in negated:
            states[n_features + k] = inc
        return cls(states, positive, n_states)


@dataclass
class ClassModel:
    """The clauses voting for one class: first half positive, second negative."""

    states: np.ndarray
    class_id: int = 0
    n_states: int = DEFAULT_STATES

    def __post_init__(self):
        m = self.states.shape[0]
        if self.states.ndim != 2 or m < 2 or m % 2:
            raise DimensionError("class model needs an even number (>= 2) of clauses")
        if self.states.shape[1] % 2:
            raise DimensionError("literal axis must have even length")

    @property
    def n_clauses(self) -> int:
        return self.states.shape[0]

    @property
    def n_features(self) -> int:
        return self.states.shape[1] // 2

    def clause(self, j: int) -> Clause:
        return Clause(self.states[j], j < self.n_clauses // 2, self.n_states)

    @classmethod
    def from_clauses(cls, positive: Sequence[Clause], negative: Sequence[Clause],
                     class_id: int = 0) -> "ClassModel":
        if len(positive) != len(negative) or not positive:
            raise DimensionError("need the same non-zero number of positive and negative clauses")
        clauses = list(positive) + list(negative)
        widths = {c.states.shape[0] for c in clauses}
        if len(widths) != 1:
            raise DimensionError(f"clauses disagree on literal count: {sorted(widths)}")
        n_states = clauses[0].n_states
        return cls(np.stack([c.states for c in clauses]).astype(np.uint8), class_id, n_states)


def literal_values(doc, n_features: int | None = None) -> np.ndarray:
    """Literal vector ``(x_1..x_o, 1-x_1..1-x_o)`` of a BooleanDocument."""
    o = doc.n_features
    if n_features is not None and n_features != o:
        raise DimensionError(f"document has {o} features, clause expects {n_features}")
    x = np.zeros(o, dtype=np.uint8)
    x[list(doc.features)] = 1
    return np.concatenate([x, 1 - x])


def clause_eval(clause: Clause, doc, mode: str = INFER) -> int:
    """1 iff every included literal is 1; an empty clause is 1 only in training."""
    lits = literal_values(doc, clause.n_features)
    inc = clause.included
    if not inc.any():
        return 1 if mode == TRAIN else 0
    return int(lits[inc].all())


def clause_outputs(model: ClassModel, doc, mode: str = INFER) -> np.ndarray:
    lits = literal_values(doc, model.n_features).astype(bool)
    inc = model.states <= model.n_states
    fires = ~(inc & ~lits).any(axis=1)
    if mode != TRAIN:
        fires &= inc.any(axis=1)
    return fires.astype(np.uint8)


def class_sum(model: ClassModel, doc, mode: str = INFER) -> int:
    out = clause_outputs(model, doc, mode).astype(np.int64)
    half = model.n_clauses // 2
    return int(out[:half].sum() - out[half:].sum())


def unit_step(v: int) -> int:
    return 1 if v >= 0 else 0


def predict_binary(model: ClassModel, doc) -> int:
    return unit_step(class_sum(model, doc, INFER))


def argmax_class(sums: Mapping[int, int]) -> int:
    """Class with the largest vote sum; ties go to the lowest class id."""
    if not sums:
        raise ValueError("no class vote sums to choose from")
    best = max(sums.values())
    return min(c for c, v in sums.items() if v == best)


def predict_multiclass(models: Sequence[ClassModel], doc) -> tuple[int, dict[int, int]]:
    if len(models) < 2:
        raise ValueError("multiclass prediction needs at least two class models")
    widths = {m.n_features for m in models}
    if len(widths) != 1:
        raise DimensionError(f"class models disagree on feature count: {sorted(widths)}")
    sums = {m.class_id: class_sum(m, doc, INFER) for m in models}
    return argmax_class(sums), sums


def type_i_feedback(clause: Clause, doc, s: float, rng) -> None:
    """Type I feedback, drawing one ``rng.random()`` per literal.

    A draw below 1/s is an *event*.  If the clause outputs 1 (Type Ia),
    1-valued literals step toward Include on a non-event and 0-valued
    literals step toward Exclude on an event.  If it outputs 0 (Type Ib),
    every literal steps toward Exclude on an event.
    """
    lits = literal_values(doc, clause.n_features)
    output = clause_eval(clause, doc, TRAIN)
    p_event = 1.0 / s
    n = clause.n_states
    st = clause.states
    for k in range(st.shape[0]):
        event = rng.random() < p_event
        if output and lits[k]:
            if not event:
                st[k] = step_toward_include(int(st[k]), n)
        elif event:
            st[k] = step_toward_exclude(int(st[k]), n)


def type_ii_feedback(clause: Clause, doc) -> None:
    """Type II feedback: on output 1, excluded 0-valued literals step toward Include."""
    if not clause_eval(clause, doc, TRAIN):
        return
    lits = literal_values(doc, clause.n_features)
    n = clause.n_states
    st = clause.states
    for k in np.flatnonzero((lits == 0) & (st > n)):
        st[k] = step_toward_include(int(st[k]), n)
