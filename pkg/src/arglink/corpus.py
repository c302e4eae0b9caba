"""Data model and I/O for documents, triggers, argument spans, and gold links.

Spans are inclusive token-index pairs [start, end] and never cross sentence
boundaries. Documents are immutable after load.
"""

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from arglink.ontology import Ontology


class CorpusError(Exception):
    """Raised on malformed or invariant-violating corpus data."""


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise CorpusError(f"invalid span [{self.start}, {self.end}]")

    @property
    def width(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end

    def to_json(self) -> list:
        return [self.start, self.end]


@dataclass(frozen=True)
class EventMention:
    event_id: str
    trigger: Span
    gold_type: Optional[str] = None


@dataclass(frozen=True)
class GoldLink:
    event_id: str
    role: str
    argument: Span


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple
    sentence_starts: tuple
    events: tuple
    gold_links: tuple = ()
    given_arguments: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "sentence_starts", tuple(self.sentence_starts))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "gold_links", tuple(self.gold_links))
        if self.given_arguments is not None:
            object.__setattr__(self, "given_arguments", tuple(self.given_arguments))
        self._validate()

    def _validate(self):
        n = len(self.tokens)
        if n == 0:
            raise CorpusError(f"{self.doc_id}: empty document")
        starts = self.sentence_starts
        if not starts or starts[0] != 0:
            raise CorpusError(f"{self.doc_id}: sentence_starts must begin at 0")
        if any(b <= a for a, b in zip(starts, starts[1:])) or starts[-1] >= n:
            raise CorpusError(f"{self.doc_id}: sentence_starts not a partition of tokens")
        ids = [e.event_id for e in self.events]
        if len(set(ids)) != len(ids):
            raise CorpusError(f"{self.doc_id}: duplicate event_id")
        for ev in self.events:
            self._check_span(ev.trigger, f"trigger of {ev.event_id}")
        for link in self.gold_links:
            if link.event_id not in ids:
                raise CorpusError(f"{self.doc_id}: gold link references unknown event {link.event_id}")
            self._check_span(link.argument, f"argument of {link.event_id}/{link.role}")
        for span in self.given_arguments or ():
            self._check_span(span, "given argument")

    def _check_span(self, span: Span, what: str):
        if span.end >= len(self.tokens):
            raise CorpusError(f"{self.doc_id}: {what} [{span.start}, {span.end}] out of bounds")
        if self.sentence_index(span.start) != self.sentence_index(span.end):
            raise CorpusError(f"{self.doc_id}: {what} crosses a sentence boundary")

    @property
    def n_sentences(self) -> int:
        return len(self.sentence_starts)

    def sentence_index(self, token_index: int) -> int:
        if not 0 <= token_index < len(self.tokens):
            raise CorpusError(f"{self.doc_id}: token index {token_index} out of bounds")
        idx = 0
        for i, start in enumerate(self.sentence_starts):
            if start <= token_index:
                idx = i
            else:
                break
        return idx

    def sentence_bounds(self, sentence_index: int) -> tuple:
        """Inclusive token range [first, last] of a sentence."""
        first = self.sentence_starts[sentence_index]
        if sentence_index + 1 < len(self.sentence_starts):
            last = self.sentence_starts[sentence_index + 1] - 1
        else:
            last = len(self.tokens) - 1
        return first, last

    def span_text(self, span: Span) -> str:
        return " ".join(self.tokens[span.start:span.end + 1])

    def event(self, event_id: str) -> EventMention:
        for ev in self.events:
            if ev.event_id == event_id:
                return ev
        raise CorpusError(f"{self.doc_id}: unknown event {event_id}")

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "tokens": list(self.tokens),
            "sentence_starts": list(self.sentence_starts),
            "events": [
                {"event_id": e.event_id, "trigger": e.trigger.to_json(), "type": e.gold_type}
                for e in self.events
            ],
            "given_arguments": (
                None if self.given_arguments is None
                else [s.to_json() for s in self.given_arguments]
            ),
            "gold_links": [
                {"event_id": g.event_id, "role": g.role, "span": g.argument.to_json()}
                for g in self.gold_links
            ],
        }


def document_from_json(obj: dict) -> Document:
    events = tuple(
        EventMention(e["event_id"], Span(*e["trigger"]), e.get("type"))
        for e in obj["events"]
    )
    links = tuple(
        GoldLink(g["event_id"], g["role"], Span(*g["span"]))
        for g in obj.get("gold_links", [])
    )
    given = obj.get("given_arguments")
    return Document(
        doc_id=obj["doc_id"],
        tokens=tuple(obj["tokens"]),
        sentence_starts=tuple(obj["sentence_starts"]),
        events=events,
        gold_links=links,
        given_arguments=None if given is None else tuple(Span(*s) for s in given),
    )


def load_jsonl(path, ontology: Optional[Ontology] = None) -> list:
    """Load documents from canonical JSONL; errors name the offending line.

    When an ontology is supplied, gold-link roles are checked against the
    global role set.
    """
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = document_from_json(json.loads(line))
                if ontology is not None:
                    for link in doc.gold_links:
                        if link.role not in ontology.role_index:
                            raise CorpusError(f"unknown role {link.role!r}")
            except (CorpusError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from exc
            docs.append(doc)
    return docs


def write_jsonl(docs: Iterable[Document], path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def context_window(doc: Document, trigger: Span) -> tuple:
    """Sentence-index window [s-2, s+2] around the trigger, clipped to the doc."""
    s = doc.sentence_index(trigger.start)
    return max(0, s - 2), min(doc.n_sentences - 1, s + 2)


def trigger_arg_distance(trigger: Span, arg: Span) -> int:
    """Token distance max(e_start - a_end, a_start - e_end), clamped at 0."""
    return max(0, trigger.start - arg.end, arg.start - trigger.end)


def sentence_distance(doc: Document, trigger: Span, arg: Span) -> int:
    """Signed sentence offset of the argument relative to the trigger."""
    lo, hi = context_window(doc, trigger)
    arg_sent = doc.sentence_index(arg.start)
    if not lo <= arg_sent <= hi:
        raise CorpusError(
            f"{doc.doc_id}: argument sentence {arg_sent} outside context window [{lo}, {hi}]"
        )
    return arg_sent - doc.sentence_index(trigger.start)


_RAMS_ROLE_PREFIX = re.compile(r"^evt\d+arg\d+")


def _rams_role(raw: str) -> str:
    return _RAMS_ROLE_PREFIX.sub("", raw)


def import_rams(path, ontology: Optional[Ontology] = None) -> list:
    """Import a RAMS-release split file into canonical documents.

    Each example retains its 5-sentence annotation window as-is; one event
    per example in the public release.
    """
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            try:
                docs.append(_rams_example(obj, ontology))
            except KeyError as exc:
                raise CorpusError(
                    f"{path}: line {lineno}: missing RAMS field {exc}"
                ) from exc
            except CorpusError as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from exc
    return docs


def _rams_example(obj: dict, ontology: Optional[Ontology]) -> Document:
    sentences = obj["sentences"]
    tokens = [tok for sent in sentences for tok in sent]
    starts = []
    offset = 0
    for sent in sentences:
        starts.append(offset)
        offset += len(sent)
    events = []
    for i, trig in enumerate(obj["evt_triggers"]):
        t_start, t_end, type_info = trig[0], trig[1], trig[2]
        gold_type = type_info[0][0] if type_info else None
        events.append(EventMention(f"{obj['doc_key']}-e{i}", Span(t_start, t_end), gold_type))
    if not events:
        raise CorpusError("example has no event trigger")
    links = []
    for link in obj.get("gold_evt_links", []):
        trig_span, arg_span, raw_role = link[0], link[1], link[2]
        event_id = None
        for ev in events:
            if (ev.trigger.start, ev.trigger.end) == tuple(trig_span):
                event_id = ev.event_id
                break
        if event_id is None:
            raise CorpusError(f"gold link trigger {trig_span} matches no evt_trigger")
        role = _rams_role(raw_role)
        if ontology is not None and role not in ontology.role_index:
            raise CorpusError(f"unknown role {role!r} (raw {raw_role!r})")
        links.append(GoldLink(event_id, role, Span(*arg_span)))
    given = None
    if obj.get("ent_spans"):
        given = tuple(Span(s[0], s[1]) for s in obj["ent_spans"])
    return Document(
        doc_id=obj["doc_key"],
        tokens=tuple(tokens),
        sentence_starts=tuple(starts),
        events=tuple(events),
        gold_links=tuple(links),
        given_arguments=given,
    )
