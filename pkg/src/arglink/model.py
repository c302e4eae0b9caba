"""End-to-end argument linking model: encode, prune, score, and produce
link-score tables for the decoders."""

import logging
from typing import Dict, List, Optional, Sequence, Set, Tuple

import torch
from torch import nn

from arglink.candidates import (CoarseScorer, UnaryScorer, enumerate_spans,
                                prune_unary, shortlist)
from arglink.config import ModelConfig
from arglink.corpus import Document, Span, trigger_arg_distance
from arglink.decoder import DocScores
from arglink.encoder import SentenceEncoder, SpanEncoder, TokenEmbedder
from arglink.linker import (EventRoleNet, LinkScorer, bucket_distance,
                            nll_terms)
from arglink.ontology import Ontology

logger = logging.getLogger(__name__)


class ArgLinkingModel(nn.Module):
    def __init__(self, config: ModelConfig, ontology: Ontology,
                 vocab: Dict[str, int], char_vocab: Dict[str, int],
                 pretrained=None):
        super().__init__()
        self.config = config
        self.ontology = ontology
        self.embedder = TokenEmbedder(
            vocab, char_vocab, config.word_dim,
            lexical_dropout=config.lexical_dropout,
            pretrained=pretrained,
            use_char_cnn=config.use_char_cnn,
            char_dim=config.char_dim, char_filters=config.char_filters,
            contextual_layers=config.contextual_layers,
            contextual_dim=config.contextual_dim,
        )
        self.sentence_encoder = SentenceEncoder(
            self.embedder.output_dim, hidden=config.lstm_size,
            layers=config.lstm_layers, dropout=config.lstm_dropout,
        )
        self.span_encoder = SpanEncoder(
            self.sentence_encoder.output_dim, self.embedder.output_dim,
            width_dim=config.feature_dim,
        )
        span_dim = self.span_encoder.output_dim
        self.arg_scorer = UnaryScorer(span_dim, config.ffn_size,
                                      config.ffn_layers, config.ffn_dropout)
        self.event_scorer = UnaryScorer(span_dim, config.ffn_size,
                                        config.ffn_layers, config.ffn_dropout)
        self.event_role = EventRoleNet(
            len(ontology.all_roles), span_dim, role_dim=config.role_dim,
            output_dim=config.event_role_dim, layers=config.ffn_layers,
            dropout=config.ffn_dropout,
        )
        self.link_scorer = LinkScorer(
            span_dim, span_dim, config.role_dim, config.event_role_dim,
            ffn_size=config.ffn_size, ffn_layers=config.ffn_layers,
            feature_dim=config.feature_dim, dropout=config.ffn_dropout,
            use_ser=config.use_ser, use_sar=config.use_sar,
            use_sl=config.use_sl, use_sc=config.use_sc,
            use_distance_feature=config.use_distance_feature,
        )
        self.coarse_scorer = CoarseScorer(
            span_dim, span_dim,
            distance_embedding=self.link_scorer.distance_embedding,
        )

    def _event_roles(self, event) -> List[Tuple[str, int]]:
        if self.config.restrict_roles_to_type and event.gold_type:
            roles = [r for r, _ in self.ontology.roles_for(event.gold_type)]
        else:
            roles = list(self.ontology.all_roles)
        return [(r, self.ontology.role_index[r]) for r in roles]

    def _candidates(self, doc: Document, keep: Set[Span]):
        """Candidate spans after first-stage pruning plus their unary scores.

        With given argument spans the first pruning pass is skipped and
        unary scores are excluded from the coarse score.
        """
        if doc.given_arguments is not None:
            return sorted(set(doc.given_arguments)), False
        spans = enumerate_spans(doc, self.config.max_span_width)
        return spans, True

    def score_document(self, doc: Document,
                       contextual: Optional[torch.Tensor] = None,
                       keep_gold: bool = False):
        """Score all (event, role, candidate) combinations.

        Returns (table, aux) where table maps (event_id, role) to a list of
        candidate spans with their link-score tensor, and aux carries the
        shortlist per event for inspection.
        """
        x = self.embedder(list(doc.tokens), contextual=contextual)
        h = self.sentence_encoder(x, doc.sentence_starts)

        gold_by_event: Dict[str, Set[Span]] = {}
        if keep_gold:
            for link in doc.gold_links:
                gold_by_event.setdefault(link.event_id, set()).add(link.argument)
        all_gold: Set[Span] = set().union(*gold_by_event.values()) if gold_by_event else set()

        cand_spans, score_unaries = self._candidates(doc, all_gold)
        cand_reprs = self.span_encoder(h, x, cand_spans)
        if score_unaries:
            unary = self.arg_scorer(cand_reprs)
            pruned = prune_unary(cand_spans, unary.detach().tolist(), self.config.lambda_a,
                                 len(doc.tokens), keep=all_gold if keep_gold else None)
            index = {s: i for i, s in enumerate(cand_spans)}
            keep_idx = [index[s] for s in pruned]
            cand_spans = pruned
            cand_reprs = cand_reprs[keep_idx]
            unary = unary[keep_idx]
        else:
            unary = None

        trigger_reprs = self.span_encoder(h, x, [ev.trigger for ev in doc.events])

        table: Dict[Tuple[str, str], Tuple[List[Span], torch.Tensor]] = {}
        shortlists: Dict[str, List[Span]] = {}
        for ei, event in enumerate(doc.events):
            e_repr = trigger_reprs[ei]
            dists = torch.tensor(
                [bucket_distance(trigger_arg_distance(event.trigger, s))
                 for s in cand_spans],
                dtype=torch.long,
            )
            s_e = self.event_scorer(e_repr.unsqueeze(0)).squeeze(0) if unary is not None else None
            coarse = self.coarse_scorer(
                e_repr, cand_reprs,
                s_a=unary, s_e=s_e,
                distance_buckets=dists,
            ) if len(cand_spans) else cand_reprs.new_zeros(0)
            keep = gold_by_event.get(event.event_id) if keep_gold else None
            a_e = shortlist(cand_spans, coarse.detach().tolist(), self.config.top_k,
                            keep=keep) if cand_spans else []
            shortlists[event.event_id] = a_e
            index = {s: i for i, s in enumerate(cand_spans)}
            sel = [index[s] for s in a_e]
            sel_reprs = cand_reprs[sel] if sel else cand_reprs.new_zeros(0, cand_reprs.shape[-1] if cand_reprs.dim() > 1 else self.span_encoder.output_dim)
            sel_dists = dists[sel] if sel else dists.new_zeros(0)
            sel_coarse = coarse[sel] if sel else coarse.new_zeros(0)
            for role, role_idx in self._event_roles(event):
                role_emb = self.event_role.role_embeddings(
                    torch.tensor(role_idx, dtype=torch.long))
                er_repr = self.event_role(e_repr, role_idx)
                if sel:
                    scores = self.link_scorer(
                        sel_reprs, e_repr, role_emb, er_repr, sel_dists,
                        coarse=sel_coarse if self.config.use_sc else None,
                    )
                else:
                    scores = cand_reprs.new_zeros(0)
                table[(event.event_id, role)] = (list(a_e), scores)
        return table, shortlists

    def loss(self, doc: Document,
             contextual: Optional[torch.Tensor] = None) -> Optional[torch.Tensor]:
        """Mean NLL over (event, role) supervision terms, or None when a
        gold span cannot be reached by candidate enumeration (the example is
        reported and skipped)."""
        table, _ = self.score_document(doc, contextual=contextual, keep_gold=True)
        gold: Dict[Tuple[str, str], List[Span]] = {}
        for link in doc.gold_links:
            gold.setdefault((link.event_id, link.role), []).append(link.argument)
        terms: List[torch.Tensor] = []
        for key, (spans, scores) in table.items():
            targets = gold.get(key, [])
            index = {s: i for i, s in enumerate(spans)}
            gold_idx = []
            for span in targets:
                if span not in index:
                    logger.warning(
                        "%s: gold span [%d, %d] for %s/%s not reachable by "
                        "candidate enumeration; example skipped",
                        doc.doc_id, span.start, span.end, key[0], key[1])
                    return None
                gold_idx.append(index[span])
            terms.extend(nll_terms(scores, gold_idx,
                                   self.config.epsilon_supervision))
        if not terms:
            return None
        return torch.stack(terms).mean()

    @torch.no_grad()
    def predict(self, doc: Document,
                contextual: Optional[torch.Tensor] = None) -> DocScores:
        was_training = self.training
        self.eval()
        try:
            table, _ = self.score_document(doc, contextual=contextual)
        finally:
            self.train(was_training)
        out = DocScores(doc.doc_id)
        for (event_id, role), (spans, scores) in table.items():
            out.scores.setdefault(event_id, {})[role] = [
                (span, float(score)) for span, score in zip(spans, scores)
            ]
        return out
