import pytest
import torch

from arglink.config import ModelConfig
from arglink.corpus import Document, EventMention, GoldLink, Span
from arglink.ontology import EventType, Ontology
from arglink.synth import SynthConfig, generate_synthetic, synthetic_ontology


@pytest.fixture
def tiny_ontology():
    return Ontology([
        EventType("conflict.attack.airstrikemissilestrike",
                  (("attacker", 1), ("target", 1), ("instrument", 1), ("place", 1))),
        EventType("contact.meet.unspecified",
                  (("participant", 2), ("place", 1))),
        EventType("life.die.unspecified",
                  (("victim", 1), ("killer", 1), ("place", 1))),
    ])


@pytest.fixture
def tiny_doc():
    # two sentences: "the raid hit the town . rebels fled the area ."
    return Document(
        doc_id="d0",
        tokens=("the", "raid", "hit", "the", "town", ".",
                "rebels", "fled", "the", "area", "."),
        sentence_starts=(0, 6),
        events=(EventMention("e0", Span(1, 1), "conflict.attack.airstrikemissilestrike"),),
        gold_links=(
            GoldLink("e0", "target", Span(3, 4)),
            GoldLink("e0", "attacker", Span(6, 6)),
        ),
    )


@pytest.fixture
def small_config():
    return ModelConfig(word_dim=12, lstm_size=8, lstm_layers=1, ffn_size=16,
                       event_role_dim=16, role_dim=8, feature_dim=6,
                       max_span_width=3, top_k=5, lexical_dropout=0.0,
                       ffn_dropout=0.0, seed=0)


@pytest.fixture(scope="session")
def synth_setup():
    config = SynthConfig(n_docs=12, n_event_types=3, roles_per_type=2, seed=5)
    docs = generate_synthetic(config)
    return config, docs, synthetic_ontology(config)


@pytest.fixture
def small_model(small_config, synth_setup):
    from arglink.encoder import build_char_vocab, build_vocab
    from arglink.model import ArgLinkingModel
    _, docs, onto = synth_setup
    torch.manual_seed(0)
    return ArgLinkingModel(small_config, onto, build_vocab(docs),
                           build_char_vocab(docs))
