"""Event-role representations, the decomposed link score, and the
epsilon-thresholded softmax.

The no-argument outcome (epsilon) has its logit fixed at exactly 0; it is
never a learned quantity and acts as the decision threshold.
"""

from typing import List, Optional, Sequence

import torch
from torch import nn

from arglink.candidates import FeedForward

# Token-distance buckets: 0, 1, 2, 3, 4, 5-7, 8-15, 16-31, 32-63, >=64
_DISTANCE_EDGES = (0, 1, 2, 3, 4, 7, 15, 31, 63)
N_DISTANCE_BUCKETS = 10


class LinkerError(Exception):
    pass


def bucket_distance(d: int) -> int:
    if d < 0:
        raise LinkerError(f"distance must be non-negative, got {d}")
    for i, edge in enumerate(_DISTANCE_EDGES):
        if d <= edge:
            return i
    return N_DISTANCE_BUCKETS - 1


class EventRoleNet(nn.Module):
    """Role embedding table plus the feed-forward net combining a trigger
    representation with a role embedding into an event-role representation."""

    def __init__(self, n_roles: int, event_dim: int, role_dim: int = 50,
                 output_dim: int = 150, layers: int = 2, dropout: float = 0.0):
        super().__init__()
        self.role_embeddings = nn.Embedding(n_roles, role_dim)
        self.ffn = FeedForward(event_dim + role_dim, output_dim, layers, dropout)
        self.output_dim = output_dim

    def forward(self, e_repr: torch.Tensor, role_index: int) -> torch.Tensor:
        role = self.role_embeddings(torch.tensor(role_index, dtype=torch.long))
        return self.ffn(torch.cat([e_repr, role]))


class LinkScorer(nn.Module):
    """Decomposed link score l(a, (e, r)) = s_ER + s_AR + s_l + s_c, each
    term individually toggleable. The s_l input is [a'; er; a' * er; phi_l]
    where a' is the argument representation projected to the event-role
    width and phi_l the distance-bucket embedding."""

    def __init__(self, arg_dim: int, event_dim: int, role_dim: int,
                 event_role_dim: int, ffn_size: int = 150, ffn_layers: int = 2,
                 feature_dim: int = 20, dropout: float = 0.0,
                 use_ser: bool = False, use_sar: bool = True,
                 use_sl: bool = True, use_sc: bool = False,
                 use_distance_feature: bool = True):
        super().__init__()
        if not (use_ser or use_sar or use_sl or use_sc):
            raise LinkerError("at least one link score component must be enabled")
        self.use_ser = use_ser
        self.use_sar = use_sar
        self.use_sl = use_sl
        self.use_sc = use_sc
        self.use_distance_feature = use_distance_feature
        self.distance_embedding = nn.Embedding(N_DISTANCE_BUCKETS, feature_dim)
        if use_ser:
            self.ffn_er = FeedForward(event_dim + role_dim, ffn_size, ffn_layers, dropout)
            self.head_er = nn.Linear(ffn_size, 1, bias=False)
        if use_sar:
            self.ffn_ar = FeedForward(arg_dim + role_dim, ffn_size, ffn_layers, dropout)
            self.head_ar = nn.Linear(ffn_size, 1, bias=False)
        if use_sl:
            # SpanRepr and event-role widths differ; project a to match for
            # the elementwise product.
            self.arg_proj = nn.Linear(arg_dim, event_role_dim)
            sl_in = 3 * event_role_dim + (feature_dim if use_distance_feature else 0)
            self.ffn_l = FeedForward(sl_in, ffn_size, ffn_layers, dropout)
            self.head_l = nn.Linear(ffn_size, 1, bias=False)

    def forward(self, a_reprs: torch.Tensor, e_repr: torch.Tensor,
                role_embedding: torch.Tensor, er_repr: torch.Tensor,
                distance_buckets: torch.Tensor,
                coarse: Optional[torch.Tensor] = None) -> torch.Tensor:
        n = a_reprs.shape[0]
        scores = a_reprs.new_zeros(n)
        if self.use_ser:
            er_in = torch.cat([e_repr, role_embedding])
            scores = scores + self.head_er(self.ffn_er(er_in)).squeeze(-1)
        if self.use_sar:
            role_rows = role_embedding.unsqueeze(0).expand(n, -1)
            ar_in = torch.cat([a_reprs, role_rows], dim=1)
            scores = scores + self.head_ar(self.ffn_ar(ar_in)).squeeze(-1)
        if self.use_sl:
            a_proj = self.arg_proj(a_reprs)
            er_rows = er_repr.unsqueeze(0).expand(n, -1)
            parts = [a_proj, er_rows, a_proj * er_rows]
            if self.use_distance_feature:
                parts.append(self.distance_embedding(distance_buckets))
            scores = scores + self.head_l(self.ffn_l(torch.cat(parts, dim=1))).squeeze(-1)
        if self.use_sc:
            if coarse is None:
                raise LinkerError("s_c enabled but no coarse scores supplied")
            scores = scores + coarse
        return scores


def link_prob(scores: Sequence[float]) -> torch.Tensor:
    """Softmax over candidates plus epsilon; the returned vector has one
    entry per candidate followed by P(epsilon). Epsilon's logit is 0."""
    t = torch.as_tensor(list(scores), dtype=torch.float64)
    if t.numel() and not torch.isfinite(t).all():
        raise LinkerError("non-finite link score")
    logits = torch.cat([t, torch.zeros(1, dtype=torch.float64)])
    return torch.softmax(logits, dim=0)


def nll_terms(logits: torch.Tensor, gold_indices: Sequence[int],
              epsilon_target: bool) -> List[torch.Tensor]:
    """Per-(event, role) negative log-likelihood terms.

    `logits` are the candidate scores for A_e (epsilon appended internally
    at logit 0). Filled roles contribute one term per gold argument; an
    unfilled role contributes one epsilon term when epsilon supervision is
    on.
    """
    full = torch.cat([logits, logits.new_zeros(1)])
    log_probs = torch.log_softmax(full, dim=0)
    terms = [-log_probs[i] for i in gold_indices]
    if not gold_indices and epsilon_target:
        terms.append(-log_probs[-1])
    return terms
