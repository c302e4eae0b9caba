"""Decoding strategies: argmax, greedy, and type-constrained.

All strategies consume per-(event, role) candidate score tables. Epsilon
(no argument) is encoded by absence: a role with no emitted triple is
unfilled. A link score must exceed epsilon's fixed 0 for a span to win.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

from arglink.corpus import Span
from arglink.ontology import Ontology


class DecoderError(Exception):
    pass


@dataclass(frozen=True)
class LinkPrediction:
    doc_id: str
    event_id: str
    role: str
    span: Span
    score: float


@dataclass
class DocScores:
    """Raw link scores for one document: event_id -> role -> [(span, score)]."""
    doc_id: str
    scores: Dict[str, Dict[str, List[Tuple[Span, float]]]] = field(default_factory=dict)

    def items(self):
        for event_id, by_role in self.scores.items():
            for role, candidates in by_role.items():
                yield event_id, role, candidates


def _check_finite(candidates):
    for _, score in candidates:
        if score != score or score in (float("inf"), float("-inf")):
            raise DecoderError(f"non-finite link score {score}")


def decode_argmax(doc_scores: DocScores) -> List[LinkPrediction]:
    """At most one span per (event, role): the best of the candidates and
    epsilon. Epsilon wins ties at exactly 0."""
    preds = []
    for event_id, role, candidates in doc_scores.items():
        _check_finite(candidates)
        ranked = sorted(candidates, key=lambda c: (-c[1], c[0]))
        if ranked and ranked[0][1] > 0:
            span, score = ranked[0]
            preds.append(LinkPrediction(doc_scores.doc_id, event_id, role, span, score))
    return preds


def decode_greedy(doc_scores: DocScores) -> List[LinkPrediction]:
    """Accept candidates in descending score order while the score beats
    epsilon and the span does not overlap one already accepted for the same
    (event, role)."""
    preds = []
    for event_id, role, candidates in doc_scores.items():
        _check_finite(candidates)
        accepted: List[Span] = []
        for span, score in sorted(candidates, key=lambda c: (-c[1], c[0])):
            if score <= 0:
                break
            if any(span.overlaps(prev) for prev in accepted):
                continue
            accepted.append(span)
            preds.append(LinkPrediction(doc_scores.doc_id, event_id, role, span, score))
    return preds


def decode_type_constrained(predictions: List[LinkPrediction], ontology: Ontology,
                            gold_types: Mapping[str, str]) -> List[LinkPrediction]:
    """Filter greedy output with gold event types: drop roles outside the
    event type's role set and keep only the top m_r spans per (event, role)."""
    for pred in predictions:
        if pred.event_id not in gold_types:
            raise DecoderError(f"no gold type for event {pred.event_id}")
    out = []
    by_key: Dict[Tuple[str, str, str], List[LinkPrediction]] = {}
    for pred in predictions:
        event_type = ontology.type(gold_types[pred.event_id])
        if pred.role not in event_type.role_names:
            continue
        by_key.setdefault((pred.doc_id, pred.event_id, pred.role), []).append(pred)
    for (_, event_id, role), group in by_key.items():
        m = ontology.type(gold_types[event_id]).multiplicity(role)
        group.sort(key=lambda p: (-p.score, p.span))
        out.extend(group[:m])
    return out


def write_predictions(predictions: List[LinkPrediction], path):
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            fh.write(json.dumps({
                "doc_id": p.doc_id,
                "event_id": p.event_id,
                "role": p.role,
                "span": p.span.to_json(),
                "score": p.score,
            }, sort_keys=True))
            fh.write("\n")


def read_predictions(path) -> List[LinkPrediction]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            preds.append(LinkPrediction(
                obj["doc_id"], obj["event_id"], obj["role"],
                Span(*obj["span"]), float(obj["score"]),
            ))
    return preds
