"""Event-role representations, the decomposed link score, and the
epsilon-thresholded softmax / NLL."""

import math

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from arglink.linker import (EventRoleNet, LinkScorer, LinkerError,
                            bucket_distance, link_prob, nll_terms)


class TestBucketDistance:
    def test_exact_buckets(self):
        assert [bucket_distance(d) for d in (0, 1, 2, 3, 4)] == [0, 1, 2, 3, 4]

    def test_ranges(self):
        assert bucket_distance(5) == bucket_distance(6) == bucket_distance(7) == 5
        assert bucket_distance(8) == bucket_distance(15) == 6
        assert bucket_distance(16) == bucket_distance(31) == 7
        assert bucket_distance(32) == bucket_distance(63) == 8
        assert bucket_distance(64) == bucket_distance(100) == 9

    def test_negative_rejected(self):
        with pytest.raises(LinkerError):
            bucket_distance(-1)

    @given(st.integers(0, 500))
    @settings(max_examples=100)
    def test_table_lookup_oracle(self, d):
        table = {**{i: i for i in range(5)},
                 **{i: 5 for i in range(5, 8)},
                 **{i: 6 for i in range(8, 16)},
                 **{i: 7 for i in range(16, 32)},
                 **{i: 8 for i in range(32, 64)}}
        assert bucket_distance(d) == table.get(d, 9)


class TestEventRoleNet:
    def test_output_dim_150_default(self):
        net = EventRoleNet(n_roles=5, event_dim=20)
        assert net(torch.randn(20), 0).shape == (150,)
        assert net.role_embeddings.embedding_dim == 50

    def test_zero_params_zero_output(self):
        net = EventRoleNet(n_roles=5, event_dim=8, role_dim=4, output_dim=6)
        with torch.no_grad():
            for p in net.parameters():
                p.zero_()
        torch.testing.assert_close(net(torch.randn(8), 2), torch.zeros(6))

    def test_distinct_roles_distinct_inputs(self):
        torch.manual_seed(0)
        net = EventRoleNet(n_roles=5, event_dim=8, role_dim=4, output_dim=6)
        e = torch.randn(8)
        assert not torch.allclose(net.role_embeddings.weight[0],
                                  net.role_embeddings.weight[1])
        # distinct embeddings almost surely yield distinct representations
        assert not torch.allclose(net(e, 0), net(e, 1))


def _scorer(**toggles):
    torch.manual_seed(0)
    return LinkScorer(arg_dim=7, event_dim=5, role_dim=4, event_role_dim=6,
                      ffn_size=8, ffn_layers=2, feature_dim=3, **toggles)


def _inputs(n=3):
    torch.manual_seed(1)
    return dict(a_reprs=torch.randn(n, 7), e_repr=torch.randn(5),
                role_embedding=torch.randn(4), er_repr=torch.randn(6),
                distance_buckets=torch.randint(0, 10, (n,)))


class TestLinkScorer:
    def test_all_zero_params_score_zero(self):
        scorer = _scorer(use_ser=True, use_sar=True, use_sl=True)
        with torch.no_grad():
            for p in scorer.parameters():
                p.zero_()
        torch.testing.assert_close(scorer(**_inputs()), torch.zeros(3))

    def test_all_components_disabled_rejected(self):
        with pytest.raises(LinkerError):
            _scorer(use_ser=False, use_sar=False, use_sl=False, use_sc=False)

    def test_term_sum_oracle(self):
        """Each enabled component contributes exactly its own term."""
        scorer = _scorer(use_ser=True, use_sar=True, use_sl=True)
        inputs = _inputs()
        total = scorer(**inputs)
        n = inputs["a_reprs"].shape[0]
        er = scorer.head_er(scorer.ffn_er(
            torch.cat([inputs["e_repr"], inputs["role_embedding"]]))).squeeze(-1)
        ar = scorer.head_ar(scorer.ffn_ar(torch.cat(
            [inputs["a_reprs"],
             inputs["role_embedding"].unsqueeze(0).expand(n, -1)],
            dim=1))).squeeze(-1)
        a_proj = scorer.arg_proj(inputs["a_reprs"])
        er_rows = inputs["er_repr"].unsqueeze(0).expand(n, -1)
        sl_in = torch.cat([a_proj, er_rows, a_proj * er_rows,
                           scorer.distance_embedding(inputs["distance_buckets"])],
                          dim=1)
        sl = scorer.head_l(scorer.ffn_l(sl_in)).squeeze(-1)
        torch.testing.assert_close(total, er + ar + sl)

    def test_coarse_term_added_when_enabled(self):
        scorer = _scorer(use_sar=True, use_sl=False, use_sc=True)
        inputs = _inputs()
        coarse = torch.randn(3)
        without = _scorer(use_sar=True, use_sl=False, use_sc=False)
        with torch.no_grad():  # same s_AR weights in both scorers
            without.ffn_ar.load_state_dict(scorer.ffn_ar.state_dict())
            without.head_ar.load_state_dict(scorer.head_ar.state_dict())
        torch.testing.assert_close(scorer(**inputs, coarse=coarse),
                                   without(**inputs) + coarse)

    def test_coarse_required_when_enabled(self):
        scorer = _scorer(use_sar=True, use_sc=True)
        with pytest.raises(LinkerError):
            scorer(**_inputs())


class TestLinkProb:
    def test_empty_candidates_epsilon_one(self):
        probs = link_prob([])
        assert probs.shape == (1,)
        assert probs[0].item() == pytest.approx(1.0)

    def test_uniform_at_zero_scores(self):
        probs = link_prob([0.0, 0.0, 0.0])
        torch.testing.assert_close(probs, torch.full((4,), 0.25,
                                                     dtype=torch.float64))

    def test_frozen_softmax_values(self):
        probs = link_prob([2.0, -1.0])
        assert probs[0].item() == pytest.approx(0.8438, abs=1e-4)
        assert probs[1].item() == pytest.approx(0.0420, abs=1e-4)
        assert probs[2].item() == pytest.approx(0.1142, abs=1e-4)

    def test_non_finite_rejected(self):
        with pytest.raises(LinkerError):
            link_prob([float("nan"), 0.0])

    @given(st.lists(st.floats(-20, 20, allow_nan=False), max_size=10))
    @settings(max_examples=200)
    def test_sums_to_one(self, scores):
        probs = link_prob(scores)
        assert probs.shape == (len(scores) + 1,)
        assert probs.sum().item() == pytest.approx(1.0, abs=1e-6)

    @given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1,
                    max_size=8),
           st.floats(0.01, 5, allow_nan=False))
    @settings(max_examples=100)
    def test_epsilon_logit_stays_fixed_under_shift(self, scores, c):
        """Shifting all candidate scores changes P(epsilon): epsilon's logit
        is pinned at 0 rather than shifting with the candidates."""
        base = link_prob(scores)[-1].item()
        shifted = link_prob([s + c for s in scores])[-1].item()
        assert shifted < base

    @given(st.lists(st.floats(-10, 10, allow_nan=False), max_size=8))
    @settings(max_examples=100)
    def test_argmax_matches_raw_scores_with_zero_inserted(self, scores):
        probs = link_prob(scores)
        raw = scores + [0.0]
        oracle = max(range(len(raw)), key=lambda i: (raw[i], -i))
        assert probs[oracle].item() == pytest.approx(probs.max().item(),
                                                     abs=1e-12)


class TestNllTerms:
    def test_certain_gold_loss_zero(self):
        logits = torch.tensor([50.0, -50.0])
        (term,) = nll_terms(logits, [0], epsilon_target=True)
        assert term.item() == pytest.approx(0.0, abs=1e-6)

    def test_uniform_four_outcomes_ln4(self):
        logits = torch.zeros(3)
        (term,) = nll_terms(logits, [1], epsilon_target=True)
        assert term.item() == pytest.approx(math.log(4), abs=1e-6)

    def test_unfilled_role_epsilon_term(self):
        logits = torch.zeros(3)
        terms = nll_terms(logits, [], epsilon_target=True)
        assert len(terms) == 1
        assert terms[0].item() == pytest.approx(math.log(4), abs=1e-6)

    def test_epsilon_supervision_off_skips_unfilled(self):
        assert nll_terms(torch.zeros(3), [], epsilon_target=False) == []

    def test_multiple_gold_fillers_independent_terms(self):
        terms = nll_terms(torch.zeros(3), [0, 2], epsilon_target=True)
        assert len(terms) == 2

    def test_gradient_matches_finite_differences(self):
        logits = torch.randn(4, dtype=torch.float64, requires_grad=True)
        loss = torch.stack(nll_terms(logits, [1], True)).sum()
        loss.backward()
        h = 1e-5
        for i in range(4):
            with torch.no_grad():
                up = logits.clone()
                up[i] += h
                down = logits.clone()
                down[i] -= h
            lu = torch.stack(nll_terms(up, [1], True)).sum().item()
            ld = torch.stack(nll_terms(down, [1], True)).sum().item()
            numeric = (lu - ld) / (2 * h)
            assert numeric == pytest.approx(logits.grad[i].item(), abs=1e-5)
