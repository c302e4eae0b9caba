"""Event ontology: type hierarchy, per-type role sets, and role multiplicities.

Immutable after load; safe for concurrent reads. Role indices are assigned
lexicographically so checkpoints survive reordering of the ontology file.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Tuple


class OntologyError(Exception):
    """Raised on malformed ontology files or unknown lookups."""


@dataclass(frozen=True)
class EventType:
    name: str
    roles: Tuple[Tuple[str, int], ...]  # (role name, multiplicity), declared order

    def __post_init__(self):
        levels = self.name.split(".")
        if not 1 <= len(levels) <= 3 or not all(levels):
            raise OntologyError(f"type name {self.name!r} must have 1-3 dot-separated levels")
        names = [r for r, _ in self.roles]
        if len(set(names)) != len(names):
            raise OntologyError(f"{self.name}: duplicate role names")
        if any(m < 1 for _, m in self.roles):
            raise OntologyError(f"{self.name}: multiplicities must be >= 1")

    @property
    def role_names(self) -> Tuple[str, ...]:
        return tuple(r for r, _ in self.roles)

    def multiplicity(self, role: str) -> int:
        for r, m in self.roles:
            if r == role:
                return m
        raise OntologyError(f"role {role!r} not declared for type {self.name}")


@dataclass(frozen=True)
class Violation:
    event_id: str
    role: str
    kind: str  # "role_not_in_type" or "multiplicity_exceeded"
    detail: str = ""


class Ontology:
    def __init__(self, types: Iterable[EventType]):
        self.types: Dict[str, EventType] = {}
        for et in types:
            if et.name in self.types:
                raise OntologyError(f"duplicate type name {et.name!r}")
            self.types[et.name] = et
        roles = sorted({r for et in self.types.values() for r in et.role_names})
        self.all_roles: Tuple[str, ...] = tuple(roles)
        self.role_index: Dict[str, int] = {r: i for i, r in enumerate(roles)}

    def __len__(self) -> int:
        return len(self.types)

    def type(self, name: str) -> EventType:
        try:
            return self.types[name]
        except KeyError:
            raise OntologyError(f"unknown event type {name!r}") from None

    def roles_for(self, type_name: str) -> List[Tuple[str, int]]:
        """Declared (role, multiplicity) list for an event type."""
        return list(self.type(type_name).roles)

    def violations(self, predictions, gold_types: Mapping[str, str]) -> List[Violation]:
        """Ontology violations in a prediction set, given gold event types.

        A violation is a predicted role outside the event type's role set, or
        more than m_r distinct spans predicted for one (event, role).
        """
        out: List[Violation] = []
        by_event_role: Dict[Tuple[str, str], set] = {}
        for pred in predictions:
            et = self.type(gold_types[pred.event_id])
            if pred.role not in et.role_names:
                out.append(Violation(pred.event_id, pred.role, "role_not_in_type",
                                     f"not declared for {et.name}"))
                continue
            by_event_role.setdefault((pred.event_id, pred.role), set()).add(pred.span)
        for (event_id, role), spans in by_event_role.items():
            m = self.type(gold_types[event_id]).multiplicity(role)
            if len(spans) > m:
                out.append(Violation(event_id, role, "multiplicity_exceeded",
                                     f"{len(spans)} spans, m_r={m}"))
        return out


def _parse_role_token(token: str) -> Tuple[str, int]:
    if ":" in token:
        role, _, mult = token.partition(":")
        if not mult.isdigit() or int(mult) < 1:
            raise OntologyError(f"bad multiplicity token {token!r}")
        return role, int(mult)
    return token, 1


def load_ontology(path) -> Ontology:
    """Load an ontology TSV: `type_name<TAB>role[:m]...`, default m=1."""
    types = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            try:
                roles = tuple(_parse_role_token(tok) for tok in fields[1:] if tok)
                types.append(EventType(fields[0], roles))
            except OntologyError as exc:
                raise OntologyError(f"{path}: line {lineno}: {exc}") from exc
    try:
        return Ontology(types)
    except OntologyError as exc:
        raise OntologyError(f"{path}: {exc}") from exc
