"""Argmax, greedy, and type-constrained decoding plus prediction I/O."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arglink.corpus import Span
from arglink.decoder import (DecoderError, DocScores, LinkPrediction,
                             decode_argmax, decode_greedy,
                             decode_type_constrained, read_predictions,
                             write_predictions)
from arglink.ontology import EventType, Ontology


def _table(by_role, doc_id="d", event_id="e0"):
    ds = DocScores(doc_id)
    ds.scores[event_id] = {
        role: [(span, score) for span, score in candidates]
        for role, candidates in by_role.items()
    }
    return ds


class TestArgmax:
    def test_best_positive_span_wins(self):
        out = decode_argmax(_table({"r": [(Span(0, 0), 2.0), (Span(1, 1), 1.0)]}))
        assert [(p.role, p.span) for p in out] == [("r", Span(0, 0))]

    def test_all_negative_emits_nothing(self):
        assert decode_argmax(_table({"r": [(Span(0, 0), -0.5),
                                           (Span(1, 1), -2.0)]})) == []

    def test_epsilon_wins_tie_at_zero(self):
        assert decode_argmax(_table({"r": [(Span(0, 0), 0.0)]})) == []

    def test_span_ties_broken_by_position(self):
        out = decode_argmax(_table({"r": [(Span(3, 3), 1.0), (Span(1, 1), 1.0)]}))
        assert out[0].span == Span(1, 1)

    def test_at_most_one_per_event_role(self):
        out = decode_argmax(_table({"r1": [(Span(0, 0), 1.0), (Span(2, 2), 3.0)],
                                    "r2": [(Span(4, 4), 0.5)]}))
        seen = {(p.event_id, p.role) for p in out}
        assert len(out) == len(seen) == 2

    def test_non_finite_rejected(self):
        with pytest.raises(DecoderError):
            decode_argmax(_table({"r": [(Span(0, 0), float("nan"))]}))

    @given(st.lists(st.tuples(st.integers(0, 9),
                              st.floats(-3, 3, allow_nan=False)),
                    max_size=6))
    @settings(max_examples=200)
    def test_matches_exhaustive_max(self, raw):
        candidates = [(Span(i, i), s) for i, s in
                      {i: s for i, s in raw}.items()]
        out = decode_argmax(_table({"r": candidates}))
        best = max(candidates, key=lambda c: (c[1], -c[0].start),
                   default=(None, 0.0))
        if best[0] is not None and best[1] > 0:
            assert len(out) == 1 and out[0].span == best[0]
        else:
            assert out == []


class TestGreedy:
    def test_hand_simulated_example(self):
        out = decode_greedy(_table({"r": [(Span(0, 1), 2.0), (Span(1, 2), 1.5),
                                          (Span(4, 4), 0.5)]}))
        assert [p.span for p in out] == [Span(0, 1), Span(4, 4)]

    def test_nothing_emitted_at_or_below_zero(self):
        assert decode_greedy(_table({"r": [(Span(0, 0), 0.0),
                                           (Span(1, 1), -1.0)]})) == []

    def test_non_overlapping_positives_all_emitted(self):
        out = decode_greedy(_table({"participant": [(Span(0, 0), 1.0),
                                                    (Span(3, 4), 0.7)]}))
        assert len(out) == 2

    def test_overlap_only_checked_within_event_role(self):
        out = decode_greedy(_table({"r1": [(Span(0, 1), 2.0)],
                                    "r2": [(Span(0, 1), 1.0)]}))
        assert len(out) == 2

    @given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 2),
                              st.floats(-3, 3, allow_nan=False)),
                    max_size=6))
    @settings(max_examples=200)
    def test_matches_hand_simulation(self, raw):
        seen = set()
        candidates = []
        for start, width, score in raw:
            span = Span(start, start + width)
            if span not in seen:
                seen.add(span)
                candidates.append((span, score))
        out = decode_greedy(_table({"r": candidates}))
        expected = []
        for span, score in sorted(candidates, key=lambda c: (-c[1], c[0])):
            if score <= 0:
                break
            if not any(span.overlaps(s) for s in expected):
                expected.append(span)
        assert [p.span for p in out] == expected

    @given(st.lists(st.tuples(st.integers(0, 9),
                              st.floats(-3, 3, allow_nan=False)),
                    max_size=6))
    @settings(max_examples=150)
    def test_argmax_subset_of_greedy(self, raw):
        candidates = [(Span(i, i), s) for i, s in
                      {i: s for i, s in raw}.items()]
        table = _table({"r": candidates})
        argmax = {(p.role, p.span) for p in decode_argmax(table)}
        greedy = {(p.role, p.span) for p in decode_greedy(table)}
        assert argmax <= greedy


ONTO = Ontology([EventType("a.b.c", (("attacker", 1), ("participant", 2)))])
GOLD_TYPES = {"e0": "a.b.c"}


class TestTypeConstrained:
    def test_role_outside_type_dropped(self):
        preds = [LinkPrediction("d", "e0", "victim", Span(0, 0), 2.0),
                 LinkPrediction("d", "e0", "attacker", Span(1, 1), 1.0)]
        out = decode_type_constrained(preds, ONTO, GOLD_TYPES)
        assert [p.role for p in out] == ["attacker"]

    def test_multiplicity_cap_keeps_top_scoring(self):
        preds = [LinkPrediction("d", "e0", "attacker", Span(0, 0), 1.0),
                 LinkPrediction("d", "e0", "attacker", Span(2, 2), 3.0)]
        out = decode_type_constrained(preds, ONTO, GOLD_TYPES)
        assert [p.span for p in out] == [Span(2, 2)]

    def test_multiplicity_two_keeps_two(self):
        preds = [LinkPrediction("d", "e0", "participant", Span(0, 0), 1.0),
                 LinkPrediction("d", "e0", "participant", Span(2, 2), 3.0),
                 LinkPrediction("d", "e0", "participant", Span(4, 4), 2.0)]
        out = decode_type_constrained(preds, ONTO, GOLD_TYPES)
        assert {p.span for p in out} == {Span(2, 2), Span(4, 4)}

    def test_missing_gold_type_rejected(self):
        preds = [LinkPrediction("d", "ghost", "attacker", Span(0, 0), 1.0)]
        with pytest.raises(DecoderError):
            decode_type_constrained(preds, ONTO, GOLD_TYPES)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=150)
    def test_no_violations_and_subset_of_input(self, seed):
        rng = random.Random(seed)
        roles = ["attacker", "participant", "bogus"]
        preds = [LinkPrediction("d", "e0", rng.choice(roles),
                                Span(i, i), rng.uniform(-1, 3))
                 for i in range(rng.randint(0, 8))]
        out = decode_type_constrained(preds, ONTO, GOLD_TYPES)
        assert set(out) <= set(preds)
        assert ONTO.violations(out, GOLD_TYPES) == []


class TestPredictionIO:
    PREDS = [LinkPrediction("d1", "e0", "attacker", Span(0, 1), 1.25),
             LinkPrediction("d2", "e1", "place", Span(4, 4), -0.5)]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        write_predictions(self.PREDS, path)
        assert read_predictions(path) == self.PREDS

    def test_one_json_object_per_line(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        write_predictions(self.PREDS, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert all(line.startswith("{") for line in lines)
