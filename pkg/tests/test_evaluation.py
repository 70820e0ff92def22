import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsetlin_news.data import FAKE, REAL
from tsetlin_news.evaluation import (RepeatResult, RunReport, ensemble_report, evaluate,
                                     run_protocol, stable_mean, train_once)
from tsetlin_news.machine import BooleanDocument, TMConfig, TsetlinMachine
from tsetlin_news.metrics import accuracy_f1, confusion

from conftest import synthetic_records

labels_st = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60)


class TestMetrics:
    def test_all_correct(self):
        assert accuracy_f1([1, 0, 1, 0], [1, 0, 1, 0]) == (1.0, 1.0)

    def test_worked_counts(self):
        y = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
        p = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
        assert confusion(y, p) == (2, 1, 1, 6)
        acc, f1 = accuracy_f1(y, p)
        assert acc == pytest.approx(0.8) and f1 == pytest.approx(2 / 3)

    def test_majority_guess(self):
        acc, f1 = accuracy_f1([REAL, REAL, REAL, FAKE], [REAL] * 4, positive=FAKE)
        assert acc == 0.75 and f1 == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            accuracy_f1([], [])

    @given(labels_st)
    def test_brute_force_oracle(self, pairs):
        y, p = [a for a, _ in pairs], [b for _, b in pairs]
        tp = sum(1 for a, b in pairs if a == b == 1)
        fp = sum(1 for a, b in pairs if a == 0 and b == 1)
        fn = sum(1 for a, b in pairs if a == 1 and b == 0)
        acc, f1 = accuracy_f1(y, p)
        assert acc == sum(a == b for a, b in pairs) / len(pairs)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        assert f1 == pytest.approx(2 * prec * rec / (prec + rec) if prec + rec else 0.0)

    @given(labels_st, st.randoms())
    def test_permutation_invariant(self, pairs, rnd):
        shuffled = list(pairs)
        rnd.shuffle(shuffled)
        assert accuracy_f1(*zip(*pairs)) == accuracy_f1(*zip(*shuffled))


def test_evaluate_empty_rejected():
    m = TsetlinMachine(TMConfig(num_features=2, num_clauses=4))
    with pytest.raises(ValueError):
        evaluate(m, [])


def test_evaluate_fake_positive():
    o = 1
    states = np.full((2, 2, 2), 128, dtype=np.uint8)
    states[FAKE, 0, 0] = 127    # votes fake when the word is present
    m = TsetlinMachine(TMConfig(num_features=o, num_clauses=2), states)
    docs = [BooleanDocument((0,), 1, label=FAKE), BooleanDocument((), 1, label=REAL),
            BooleanDocument((0,), 1, label=REAL)]
    acc, f1 = evaluate(m, docs)
    assert acc == pytest.approx(2 / 3) and f1 == pytest.approx(2 / 3)


class TestEnsemble:
    def run(self, seed, acc, f1=None):
        return RepeatResult(seed, list(acc), list(acc if f1 is None else f1))

    def test_constant_trace(self):
        rep = ensemble_report([self.run(0, [0.7] * 60)], 50)
        assert rep.accuracy == pytest.approx(0.7) and rep.final_accuracy == pytest.approx(0.7)

    def test_across_runs(self):
        runs = [self.run(i, [0.0] * 50 + [v] * 50) for i, v in enumerate([0.85, 0.86, 0.87, 0.88, 0.89])]
        rep = ensemble_report(runs, 50)
        assert rep.accuracy == pytest.approx(0.87) and rep.f1 == pytest.approx(0.87)
        assert rep.consistent()

    def test_short_trace(self):
        with pytest.raises(ValueError):
            stable_mean([0.5] * 49, 50)
        with pytest.raises(ValueError):
            ensemble_report([self.run(0, [0.5] * 49)], 50)

    def test_only_window_counts(self):
        assert stable_mean([0.0] * 10 + [1.0] * 50, 50) == 1.0

    def test_tampered_report_inconsistent(self):
        rep = ensemble_report([self.run(0, [0.6] * 50)], 50)
        rep.accuracy = 0.9
        assert not rep.consistent()

    def test_json_roundtrip(self, tmp_path):
        rep = ensemble_report([self.run(3, [0.5, 0.75], [0.4, 0.6])], 2, {"threshold": 5}, {"k": 1}, 1.5)
        rep.write(tmp_path / "r.json")
        assert RunReport.read(tmp_path / "r.json") == rep
        assert "seconds" not in rep.to_json(timings=False)


SMALL = TMConfig(num_features=1, num_clauses=20, threshold=10, s=3.0, epochs=12, seed=11)


def test_train_once_fits_on_train_split_only():
    recs = synthetic_records(80)
    run = train_once(recs, SMALL, n_features=30)
    train_tokens = set()
    for toks in run.pipeline.tokenize(r.content for r in run.train):
        train_tokens.update(toks)
    assert set(run.pipeline.vocab) <= train_tokens
    assert len(run.trace) == 12 and run.trace[-1].accuracy is not None
    assert {r.id for r in run.train}.isdisjoint(r.id for r in run.test)


def test_run_protocol_learns_and_reproduces():
    recs = synthetic_records(120)
    kw = dict(n_features=30, repeats=2, stable=5)
    rep = run_protocol(recs, SMALL, **kw)
    assert [r.seed for r in rep.runs] == [11, 12]
    assert all(r.n_train == 90 and r.n_test == 30 for r in rep.runs)
    assert rep.accuracy > 0.85 and rep.f1 > 0.75
    assert rep.consistent()
    again = run_protocol(recs, SMALL, **kw)
    assert again.to_json(timings=False) == rep.to_json(timings=False)


def test_run_protocol_window_check():
    with pytest.raises(ValueError):
        run_protocol(synthetic_records(40), SMALL, stable=50)
    with pytest.raises(ValueError):
        run_protocol(synthetic_records(40), SMALL, repeats=0, stable=5)
