"""Scoring: triple P/R/F1, distance breakdown, aligned role confusion,
role-embedding similarity, and string-based slot-filling match."""

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from arglink.corpus import Document, Span, sentence_distance
from arglink.decoder import LinkPrediction

logger = logging.getLogger(__name__)

Triple = Tuple[str, str, str, Span]  # (doc_id, event_id, role, span)

MISSED = "<missed>"
SPURIOUS = "<spurious>"

DISTANCE_RANGE = (-2, -1, 0, 1, 2)


def prf(n_correct: int, n_pred: int, n_gold: int) -> Tuple[float, float, float]:
    """Precision, recall, F1 as percentages; zero denominators score 0."""
    p = 100.0 * n_correct / n_pred if n_pred else 0.0
    r = 100.0 * n_correct / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def gold_triples(docs: Iterable[Document]) -> Set[Triple]:
    return {
        (doc.doc_id, link.event_id, link.role, link.argument)
        for doc in docs
        for link in doc.gold_links
    }


def prediction_triples(predictions: Iterable[LinkPrediction]) -> Set[Triple]:
    triples: Set[Triple] = set()
    seen_dup = False
    for p in predictions:
        t = (p.doc_id, p.event_id, p.role, p.span)
        if t in triples:
            seen_dup = True
        triples.add(t)
    if seen_dup:
        warnings.warn("duplicate predicted triples counted once")
    return triples


def score_triples(predictions: Iterable[LinkPrediction],
                  gold: Set[Triple]) -> Tuple[float, float, float]:
    """Exact-match trigger-role-argument triple scoring."""
    pred = prediction_triples(predictions)
    return prf(len(pred & gold), len(pred), len(gold))


@dataclass
class DistanceRow:
    distance: int
    n_gold: int
    n_pred: int
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    n_pred: int
    n_gold: int
    distance_rows: Optional[List[DistanceRow]] = None
    confusion: Optional[Dict[Tuple[str, str], int]] = None

    def to_json(self) -> dict:
        out = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_pred": self.n_pred,
            "n_gold": self.n_gold,
        }
        if self.distance_rows is not None:
            out["distance_breakdown"] = [vars(r) for r in self.distance_rows]
        if self.confusion is not None:
            out["confusion"] = [
                {"gold": g, "pred": p, "count": c}
                for (g, p), c in sorted(self.confusion.items())
            ]
        return out


def _triple_distance(triple: Triple, docs: Mapping[str, Document]) -> int:
    doc = docs[triple[0]]
    trigger = doc.event(triple[1]).trigger
    return sentence_distance(doc, trigger, triple[3])


def distance_breakdown(predictions: Iterable[LinkPrediction], gold: Set[Triple],
                       docs: Mapping[str, Document]) -> List[DistanceRow]:
    """Per-sentence-distance P/R/F1 rows (-2..+2) plus an implied totals row
    that reproduces score_triples exactly.

    A mismatched prediction is bucketed by its own span's distance; matches
    necessarily share the gold distance.
    """
    pred = prediction_triples(predictions)
    rows = []
    for d in DISTANCE_RANGE:
        gold_d = {t for t in gold if _triple_distance(t, docs) == d}
        pred_d = {t for t in pred if _triple_distance(t, docs) == d}
        p, r, f1 = prf(len(pred_d & gold_d), len(pred_d), len(gold_d))
        rows.append(DistanceRow(d, len(gold_d), len(pred_d), p, r, f1))
    return rows


def confusion_matrix(predictions: Iterable[LinkPrediction],
                     gold: Set[Triple]) -> Dict[Tuple[str, str], int]:
    """Aligned role confusion over (event, span) groups.

    Exactly matching (gold role, predicted role) pairs are removed first;
    remaining gold roles are paired with remaining predicted roles as
    errors. Unpaired gold roles land in the missed column, unpaired
    predictions in the spurious row, so every gold role is accounted for
    exactly once.
    """
    pred = prediction_triples(predictions)
    keys = {(d, e, s) for d, e, _, s in pred} | {(d, e, s) for d, e, _, s in gold}
    counts: Dict[Tuple[str, str], int] = {}

    def bump(g: str, p: str):
        counts[(g, p)] = counts.get((g, p), 0) + 1

    for doc_id, event_id, span in sorted(keys, key=lambda k: (k[0], k[1], k[2])):
        gold_roles = sorted(r for d, e, r, s in gold
                            if (d, e, s) == (doc_id, event_id, span))
        pred_roles = sorted(r for d, e, r, s in pred
                            if (d, e, s) == (doc_id, event_id, span))
        for role in list(gold_roles):
            if role in pred_roles:
                gold_roles.remove(role)
                pred_roles.remove(role)
                bump(role, role)
        for g, p in zip(gold_roles, pred_roles):
            bump(g, p)
        extra = len(gold_roles) - len(pred_roles)
        if extra > 0:
            for g in gold_roles[len(pred_roles):]:
                bump(g, MISSED)
        elif extra < 0:
            for p in pred_roles[len(gold_roles):]:
                bump(SPURIOUS, p)
    return counts


def confusion_rows(counts: Mapping[Tuple[str, str], int],
                   include_special: bool = True):
    """Row-normalized matrix form of the confusion counts.

    Rows whose role was never involved are omitted, matching how the matrix
    is rendered."""
    gold_labels = sorted({g for g, _ in counts})
    pred_labels = sorted({p for _, p in counts})
    if not include_special:
        gold_labels = [g for g in gold_labels if g != SPURIOUS]
        pred_labels = [p for p in pred_labels if p != MISSED]
    matrix = np.zeros((len(gold_labels), len(pred_labels)))
    for (g, p), c in counts.items():
        if g in gold_labels and p in pred_labels:
            matrix[gold_labels.index(g), pred_labels.index(p)] = c
    sums = matrix.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        normalized = np.where(sums > 0, matrix / sums, 0.0)
    return gold_labels, pred_labels, normalized


def write_confusion_csv(counts: Mapping[Tuple[str, str], int], path):
    gold_labels, pred_labels, normalized = confusion_rows(counts)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gold\\pred"] + pred_labels)
        for g, row in zip(gold_labels, normalized):
            writer.writerow([g] + [f"{v:.4f}" for v in row])


def role_similarity(role_embeddings: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Cosine similarity between role embeddings: symmetric with unit
    diagonal. Zero-norm rows are undefined and returned as NaN along with
    their indices."""
    table = np.asarray(role_embeddings, dtype=np.float64)
    norms = np.linalg.norm(table, axis=1)
    undefined = [int(i) for i in np.flatnonzero(norms == 0)]
    safe = np.where(norms > 0, norms, 1.0)
    unit = table / safe[:, None]
    sim = unit @ unit.T
    np.fill_diagonal(sim, 1.0)
    for i in undefined:
        sim[i, :] = np.nan
        sim[:, i] = np.nan
    return sim, undefined


def write_similarity_csv(sim: np.ndarray, labels: Sequence[str], path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role"] + list(labels))
        for label, row in zip(labels, sim):
            writer.writerow([label] + [f"{v:.4f}" for v in row])


def _string_match(pred: str, gold: str, mode: str) -> bool:
    if mode == "strict":
        return pred == gold
    if mode == "approximate":
        return pred in gold or gold in pred
    raise ValueError(f"unknown match mode {mode!r}")


def string_match_score(pred_slots: Mapping[str, Sequence[str]],
                       gold_slots: Mapping[str, Sequence[str]],
                       mode: str = "strict") -> Dict[str, Tuple[float, float, float]]:
    """Per-slot P/R/F1 over predicted vs gold strings; a strict match
    requires exact equality, an approximate match lets either string
    contain the other."""
    if mode not in ("strict", "approximate"):
        raise ValueError(f"unknown match mode {mode!r}")
    out = {}
    for slot in sorted(set(pred_slots) | set(gold_slots)):
        preds = list(pred_slots.get(slot, []))
        golds = list(gold_slots.get(slot, []))
        correct_pred = sum(
            1 for p in preds if any(_string_match(p, g, mode) for g in golds))
        matched_gold = sum(
            1 for g in golds if any(_string_match(p, g, mode) for p in preds))
        p = 100.0 * correct_pred / len(preds) if preds else 0.0
        r = 100.0 * matched_gold / len(golds) if golds else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        out[slot] = (p, r, f1)
    return out


def evaluate(predictions: Iterable[LinkPrediction], docs: Sequence[Document],
             breakdown: bool = False, confusion: bool = False) -> EvalReport:
    predictions = list(predictions)
    gold = gold_triples(docs)
    pred = prediction_triples(predictions)
    p, r, f1 = prf(len(pred & gold), len(pred), len(gold))
    report = EvalReport(p, r, f1, n_pred=len(pred), n_gold=len(gold))
    if breakdown:
        doc_map = {d.doc_id: d for d in docs}
        report.distance_rows = distance_breakdown(predictions, gold, doc_map)
    if confusion:
        report.confusion = confusion_matrix(predictions, gold)
    return report
