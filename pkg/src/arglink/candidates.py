"""Candidate argument span enumeration and the two pruning stages."""

import math
from typing import Iterable, List, Optional, Sequence, Set

import torch
from torch import nn

from arglink.corpus import Document, Span


def enumerate_spans(doc: Document, max_width: int) -> List[Span]:
    """All within-sentence spans up to max_width tokens, excluding trigger
    spans, ordered by (start, end)."""
    if max_width < 1:
        raise ValueError("max_width must be >= 1")
    triggers = {ev.trigger for ev in doc.events}
    spans = []
    for s in range(doc.n_sentences):
        first, last = doc.sentence_bounds(s)
        for start in range(first, last + 1):
            for end in range(start, min(start + max_width - 1, last) + 1):
                span = Span(start, end)
                if span not in triggers:
                    spans.append(span)
    return spans


def prune_unary(spans: Sequence[Span], scores: Sequence[float], lambda_a: float,
                n_tokens: int, keep: Optional[Set[Span]] = None) -> List[Span]:
    """Keep the top ceil(lambda_a * n_tokens) spans by unary score, ties
    broken by (start, end) ascending. `keep` spans survive regardless (gold
    spans during training)."""
    if lambda_a <= 0:
        raise ValueError("lambda_a must be positive")
    budget = math.ceil(lambda_a * n_tokens)
    order = sorted(range(len(spans)), key=lambda i: (-float(scores[i]), spans[i]))
    selected = {spans[i] for i in order[:budget]}
    if keep:
        selected |= keep & set(spans)
    return sorted(selected)


def shortlist(spans: Sequence[Span], coarse_scores: Sequence[float], k: int,
              keep: Optional[Set[Span]] = None) -> List[Span]:
    """Top-k spans for one event by coarse score, descending; ties broken by
    (start, end) ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    order = sorted(range(len(spans)), key=lambda i: (-float(coarse_scores[i]), spans[i]))
    chosen = [spans[i] for i in order[:k]]
    if keep:
        have = set(chosen)
        for span in sorted(keep & set(spans)):
            if span not in have:
                chosen.append(span)
    return chosen


class FeedForward(nn.Module):
    """Stack of ReLU layers used by every scoring head."""

    def __init__(self, input_dim: int, hidden: int, layers: int, dropout: float = 0.0):
        super().__init__()
        dims = [input_dim] + [hidden] * layers
        self.layers = nn.ModuleList(nn.Linear(a, b) for a, b in zip(dims, dims[1:]))
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for layer in self.layers:
            x = self.dropout(torch.relu(layer(x)))
        return x


class UnaryScorer(nn.Module):
    """s(x) = w^T F(x): feed-forward net plus a bias-free linear head."""

    def __init__(self, input_dim: int, hidden: int = 150, layers: int = 2,
                 dropout: float = 0.0):
        super().__init__()
        self.ffn = FeedForward(input_dim, hidden, layers, dropout)
        self.head = nn.Linear(hidden, 1, bias=False)

    def forward(self, reprs: torch.Tensor) -> torch.Tensor:
        return self.head(self.ffn(reprs)).squeeze(-1)


class CoarseScorer(nn.Module):
    """Role-agnostic event-argument compatibility:
    s_c(e, a) = e^T W_c a [+ s_A(a) + s_E(e)] + phi_c(e, a).

    The unary terms are omitted when argument spans are given gold; phi_c is
    a learned head over the bucketed trigger-argument distance embedding.
    """

    def __init__(self, event_dim: int, arg_dim: int,
                 distance_embedding: Optional[nn.Embedding] = None):
        super().__init__()
        self.bilinear = nn.Linear(arg_dim, event_dim, bias=False)
        self.distance_embedding = distance_embedding
        if distance_embedding is not None:
            self.feature_head = nn.Linear(distance_embedding.embedding_dim, 1, bias=False)

    def forward(self, e_repr: torch.Tensor, a_reprs: torch.Tensor,
                s_a: Optional[torch.Tensor] = None,
                s_e: Optional[torch.Tensor] = None,
                distance_buckets: Optional[torch.Tensor] = None) -> torch.Tensor:
        scores = self.bilinear(a_reprs) @ e_repr
        if s_a is not None:
            scores = scores + s_a
        if s_e is not None:
            scores = scores + s_e
        if self.distance_embedding is not None and distance_buckets is not None:
            feat = self.feature_head(self.distance_embedding(distance_buckets)).squeeze(-1)
            scores = scores + feat
        return scores
