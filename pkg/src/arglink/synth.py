"""Deterministic synthetic corpus generation for desk-scale experiments.

Each document gets one trigger whose word uniquely identifies its event
type; each role of that type is filled by a marker-word + entity bigram
placed at a sampled sentence offset from the trigger. Offset 0 carries
roughly 82% of the mass, mirroring the same-sentence skew of naturally
occurring argument annotations.
"""

import random
from dataclasses import dataclass
from typing import List, Tuple

from arglink.corpus import Document, EventMention, GoldLink, Span
from arglink.ontology import EventType, Ontology

N_SENTENCES = 5
TRIGGER_SENTENCE = 2
FILLERS_PER_SENTENCE = 5

# P(offset): same sentence dominates, symmetric tails out to +/-2.
OFFSET_WEIGHTS = {0: 0.82, -1: 0.06, 1: 0.06, -2: 0.03, 2: 0.03}


class SynthError(Exception):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_docs: int = 50
    n_event_types: int = 5
    roles_per_type: int = 2
    sentence_offset_range: Tuple[int, int] = (-2, 2)
    vocab_size: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n_docs < 1 or self.n_event_types < 1 or self.roles_per_type < 0:
            raise SynthError("counts must be positive")
        lo, hi = self.sentence_offset_range
        if lo < -TRIGGER_SENTENCE or hi > N_SENTENCES - 1 - TRIGGER_SENTENCE or lo > hi:
            raise SynthError(
                f"offset range {self.sentence_offset_range} exceeds the "
                f"{N_SENTENCES}-sentence window radius")
        if self.vocab_size < 1:
            raise SynthError("vocab_size must be positive")


def type_name(t: int) -> str:
    return f"synth.type{t}.sub"


def role_name(t: int, j: int) -> str:
    return f"role_{t}_{j}"


def trigger_word(t: int) -> str:
    return f"TRIG{t}"


def marker_word(t: int, j: int) -> str:
    return f"MARK_{t}_{j}"


def synthetic_ontology(config: SynthConfig) -> Ontology:
    types = []
    for t in range(config.n_event_types):
        roles = tuple((role_name(t, j), 1) for j in range(config.roles_per_type))
        types.append(EventType(type_name(t), roles))
    return Ontology(types)


def write_ontology_tsv(config: SynthConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# synthetic ontology\n")
        for t in range(config.n_event_types):
            roles = "\t".join(role_name(t, j) for j in range(config.roles_per_type))
            line = type_name(t) if not roles else f"{type_name(t)}\t{roles}"
            fh.write(line + "\n")


def _sample_offset(rng: random.Random, config: SynthConfig) -> int:
    lo, hi = config.sentence_offset_range
    offsets = [o for o in OFFSET_WEIGHTS if lo <= o <= hi]
    weights = [OFFSET_WEIGHTS[o] for o in offsets]
    return rng.choices(offsets, weights=weights, k=1)[0]


def generate_synthetic(config: SynthConfig) -> List[Document]:
    """Pure function of the config: identical configs yield identical
    corpora, byte-for-byte after serialization."""
    rng = random.Random(config.seed)
    docs = []
    for i in range(config.n_docs):
        t = rng.randrange(config.n_event_types)
        sentences = [
            [f"w{rng.randrange(config.vocab_size)}" for _ in range(FILLERS_PER_SENTENCE)]
            for _ in range(N_SENTENCES)
        ]
        # Trigger and role bigrams are inserted at random slots; the marker
        # words are unique within a document, so spans are recovered by
        # token lookup afterwards.
        pos = rng.randrange(len(sentences[TRIGGER_SENTENCE]) + 1)
        sentences[TRIGGER_SENTENCE][pos:pos] = [trigger_word(t)]
        for j in range(config.roles_per_type):
            sent = TRIGGER_SENTENCE + _sample_offset(rng, config)
            entity = f"ent{rng.randrange(config.vocab_size)}"
            pos = rng.randrange(len(sentences[sent]) + 1)
            sentences[sent][pos:pos] = [marker_word(t, j), entity]

        tokens: List[str] = []
        starts: List[int] = []
        for sent in sentences:
            starts.append(len(tokens))
            tokens.extend(sent)

        event_id = f"synth-{i:05d}-e0"
        ti = tokens.index(trigger_word(t))
        trigger = Span(ti, ti)
        links = []
        for j in range(config.roles_per_type):
            mi = tokens.index(marker_word(t, j))
            links.append(GoldLink(event_id, role_name(t, j), Span(mi, mi + 1)))
        links.sort(key=lambda g: (g.role, g.argument))
        docs.append(Document(
            doc_id=f"synth-{i:05d}",
            tokens=tuple(tokens),
            sentence_starts=tuple(starts),
            events=(EventMention(event_id, trigger, type_name(t)),),
            gold_links=tuple(links),
        ))
    return docs
