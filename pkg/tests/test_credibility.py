import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tsetlin_news.credibility import (CredibilityParams, RankedPrediction, credibility_score,
                                      credibility_scores, plot_points, rank_fake, read_ranked_csv,
                                      score_documents, write_plot_csv, write_ranked_csv)
from tsetlin_news.data import FAKE, REAL
from tsetlin_news.machine import BooleanDocument, TMConfig, TsetlinMachine

votes = st.integers(-5000, 5000)
ks = st.floats(1e-4, 1.0)


def pred(doc_id, v_fake, v_true, k=0.012):
    cls = FAKE if v_fake > v_true else REAL
    return RankedPrediction(doc_id, cls, credibility_score(v_fake, v_true, k), v_fake, v_true)


class TestScore:
    def test_worked_examples(self):
        q1 = credibility_score(43, -47, 0.012)
        q2 = credibility_score(124, -177, 0.012)
        assert q1 == pytest.approx(0.746494, abs=1e-6)
        assert q2 == pytest.approx(0.973712, abs=1e-6)
        # two-digit truncations
        assert (math.floor(q1 * 100) / 100, math.floor(q2 * 100) / 100) == (0.74, 0.97)

    def test_closed_form(self):
        assert credibility_score(43, -47) == pytest.approx(1 / (1 + math.exp(-0.012 * 90)), rel=1e-12)

    def test_midpoint(self):
        assert credibility_score(7, 7) == 0.5
        assert credibility_score(0, 0, CredibilityParams(3.0)) == 0.5

    def test_open_interval_even_when_saturated(self):
        assert 0 < credibility_score(-10**6, 10**6, 1.0) < credibility_score(10**6, -10**6, 1.0) < 1

    def test_k_must_be_positive(self):
        for bad in (0.0, -1.0, float("nan"), float("inf")):
            with pytest.raises(ValueError):
                CredibilityParams(bad)

    @given(votes, votes, ks)
    def test_antisymmetry(self, a, b, k):
        assert credibility_score(a, b, k) + credibility_score(b, a, k) == pytest.approx(1.0, abs=1e-12)

    @given(votes, votes, votes, st.floats(1e-3, 0.05))
    def test_strictly_increasing_in_margin(self, a, b, c, k):
        assume(a < b)
        qa, qb = credibility_score(a, c, k), credibility_score(b, c, k)
        assert qa <= qb
        # strict wherever float64 can still resolve the step
        if max(abs(a - c), abs(b - c)) * k <= 20:
            assert qa < qb

    def test_vectorized_agrees(self):
        vf = np.array([43, 124, 0, -300])
        vt = np.array([-47, -177, 0, 300])
        assert credibility_scores(vf, vt).tolist() == [credibility_score(a, b) for a, b in zip(vf, vt)]


class TestRanking:
    PREDS = [pred("d1", 43, -47), pred("d2", 124, -177), pred("d3", -10, 20),
             pred("d0", 43, -47), pred("d4", 5, 0)]

    def test_threshold_zero_keeps_all_fake(self):
        assert {p.doc_id for p in rank_fake(self.PREDS, 0.0)} == {"d0", "d1", "d2", "d4"}

    def test_threshold_one_is_empty(self):
        assert rank_fake(self.PREDS, 1.0) == []

    def test_order_and_tie_break(self):
        assert [p.doc_id for p in rank_fake(self.PREDS, 0.7)] == ["d2", "d0", "d1"]

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            rank_fake(self.PREDS, 1.1)

    @given(st.lists(st.tuples(st.integers(-300, 300), st.integers(-300, 300)), max_size=30),
           st.floats(0.1, 100.0))
    def test_rank_invariant_under_k_rescaling(self, sums, factor):
        base = [pred(f"d{i:02d}", a, b, 0.012) for i, (a, b) in enumerate(sums)]
        scaled = [pred(f"d{i:02d}", a, b, 0.012 * factor) for i, (a, b) in enumerate(sums)]
        ids = [p.doc_id for p in rank_fake(base, 0.0)]
        assert ids == [p.doc_id for p in rank_fake(scaled, 0.0)]

    def test_q_bounds_enforced(self):
        with pytest.raises(ValueError):
            RankedPrediction("x", FAKE, 1.0, 1, 0)


def test_csv_roundtrip(tmp_path):
    preds = TestRanking.PREDS
    path = tmp_path / "ranked.csv"
    write_ranked_csv(path, preds)
    assert path.read_text().splitlines()[0] == "doc_id,predicted_label,vF,vT,Q"
    assert read_ranked_csv(path) == preds


def test_plot_points_sorted(tmp_path):
    pts = plot_points(TestRanking.PREDS)
    assert [i for i, _ in pts] == list(range(5))
    assert [q for _, q in pts] == sorted((p.q for p in TestRanking.PREDS), reverse=True)
    write_plot_csv(tmp_path / "plot.csv", pts)
    assert (tmp_path / "plot.csv").read_text().splitlines()[0] == "index,Q"


def test_score_documents_uses_raw_sums():
    o = 3
    states = np.full((2, 4, 2 * o), 128, dtype=np.uint8)
    states[FAKE, 0, 0] = 127   # fake positive clause: x0
    states[REAL, 2, 0] = 127   # real negative clause: x0
    m = TsetlinMachine(TMConfig(num_features=o, num_clauses=4), states)
    [p] = score_documents(m, [BooleanDocument((0,), o, doc_id="a")])
    assert (p.v_fake, p.v_true, p.predicted, p.doc_id) == (1, -1, FAKE, "a")
    assert p.q == credibility_score(1, -1)
