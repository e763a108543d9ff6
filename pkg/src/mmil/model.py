"""In-memory MMIL components: entities, relations and data-category values.

Everything here is immutable. Operations that "modify" a component return a
new one, so components can be shared freely between pipeline stages.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Union


class MmilError(Exception):
    """Base class for all toolkit errors."""


class DuplicateId(MmilError):
    pass


class DanglingEndpoint(MmilError):
    pass


class Kind(str, Enum):
    EVENT = "event"
    PARTICIPANT = "participant"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TempSpan:
    """Temporal anchoring of an event.

    The raw lexical forms are what gets serialized and compared; the parsed
    instants (epoch milliseconds) are derived and may be absent.
    """

    start_raw: str
    end_raw: str
    start_instant: int | None = field(default=None, compare=False)
    end_instant: int | None = field(default=None, compare=False)

    @classmethod
    def from_raw(cls, start_raw: str, end_raw: str) -> TempSpan:
        from mmil.timestamps import parse_timestamp

        return cls(start_raw, end_raw, parse_timestamp(start_raw), parse_timestamp(end_raw))

    @property
    def is_ordered(self) -> bool:
        if self.start_instant is None or self.end_instant is None:
            return True
        return self.start_instant <= self.end_instant


Value = Union[str, int, TempSpan]


@dataclass(frozen=True)
class CategoryValue:
    """One data-category value on an entity.

    ``tag`` remembers the element name as written when it differs from the
    canonical category name (``mmilId`` vs ``MMILId``); it never takes part in
    equality.
    """

    category: str
    value: Value
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.category:
            raise ValueError("category name must be non-empty")
        if isinstance(self.value, bool) or not isinstance(self.value, (str, int, TempSpan)):
            raise TypeError(f"unsupported value for {self.category!r}: {self.value!r}")
        if isinstance(self.value, str) and self.value != self.value.strip():
            # surrounding whitespace is not significant on the wire
            object.__setattr__(self, "value", self.value.strip())

    @property
    def element_name(self) -> str:
        return self.tag or self.category


@dataclass(frozen=True)
class Entity:
    id: str
    kind: Kind
    categories: tuple[CategoryValue, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("entity id must be non-empty")
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "categories", tuple(self.categories))

    @classmethod
    def event(cls, id: str, **values: Value) -> Entity:
        return cls(id, Kind.EVENT, tuple(CategoryValue(k, v) for k, v in values.items()))

    @classmethod
    def participant(cls, id: str, **values: Value) -> Entity:
        return cls(id, Kind.PARTICIPANT, tuple(CategoryValue(k, v) for k, v in values.items()))

    @property
    def is_event(self) -> bool:
        return self.kind is Kind.EVENT

    @property
    def is_participant(self) -> bool:
        return self.kind is Kind.PARTICIPANT

    def get(self, category: str) -> Value | None:
        found = get_category(self, category)
        return None if found is None else found.value

    def has(self, category: str) -> bool:
        return get_category(self, category) is not None

    def with_category(self, category: str, value: Value) -> Entity:
        """Set *category* to *value*, replacing the first existing value in place."""
        cats = list(self.categories)
        for i, cv in enumerate(cats):
            if cv.category == category:
                cats[i] = CategoryValue(category, value, cv.tag)
                return replace(self, categories=tuple(cats))
        cats.append(CategoryValue(category, value))
        return replace(self, categories=tuple(cats))

    def without_category(self, category: str) -> Entity:
        return replace(self, categories=tuple(c for c in self.categories if c.category != category))


@dataclass(frozen=True)
class Relation:
    source: str
    target: str
    rel_type: str


@dataclass(frozen=True)
class MmilComponent:
    """A self-contained graph of events, participants and typed relations.

    Direct construction performs no checks so that invalid components can be
    represented (and diagnosed by the validator). Use :func:`add_entity` and
    :func:`add_relation` to build components that are valid by construction.
    """

    entities: tuple[Entity, ...] = ()
    relations: tuple[Relation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "relations", tuple(self.relations))

    def __iter__(self) -> Iterator[Entity]:
        return iter(self.entities)

    def __len__(self) -> int:
        return len(self.entities)

    def __contains__(self, entity_id: object) -> bool:
        return any(e.id == entity_id for e in self.entities)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.entities]

    @property
    def events(self) -> list[Entity]:
        return [e for e in self.entities if e.is_event]

    @property
    def participants(self) -> list[Entity]:
        return [e for e in self.entities if e.is_participant]

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def find(self, entity_id: str) -> Entity | None:
        for e in self.entities:
            if e.id == entity_id:
                return e
        return None

    def replace_entity(self, entity: Entity) -> MmilComponent:
        """Swap in *entity* for the one with the same id, keeping its position."""
        if entity.id not in self:
            raise KeyError(entity.id)
        return replace(
            self,
            entities=tuple(entity if e.id == entity.id else e for e in self.entities),
        )

    def dangling_relations(self) -> list[int]:
        known = set(self.ids)
        return [
            i for i, r in enumerate(self.relations)
            if r.source not in known or r.target not in known
        ]

    def neighbours(self, entity_id: str) -> list[str]:
        """Ids linked to *entity_id* by a relation in either direction."""
        out: list[str] = []
        for r in self.relations:
            if r.source == entity_id:
                out.append(r.target)
            elif r.target == entity_id:
                out.append(r.source)
        return out


def create_component() -> MmilComponent:
    return MmilComponent()


def add_entity(component: MmilComponent, entity: Entity) -> MmilComponent:
    if entity.id in component:
        raise DuplicateId(f"entity id {entity.id!r} already used")
    return replace(component, entities=component.entities + (entity,))


def add_relation(
    component: MmilComponent, source: str, target: str, rel_type: str
) -> MmilComponent:
    for end in (source, target):
        if end not in component:
            raise DanglingEndpoint(f"unknown entity id {end!r}")
    if not rel_type:
        raise ValueError("relation type must be non-empty")
    return replace(component, relations=component.relations + (Relation(source, target, rel_type),))


def build_component(
    entities: Iterable[Entity], relations: Iterable[tuple[str, str, str]] = ()
) -> MmilComponent:
    """Convenience wrapper: add every entity, then every (source, target, type)."""
    comp = create_component()
    for e in entities:
        comp = add_entity(comp, e)
    for src, tgt, typ in relations:
        comp = add_relation(comp, src, tgt, typ)
    return comp


def get_category(entity: Entity, category: str) -> CategoryValue | None:
    for cv in entity.categories:
        if cv.category == category:
            return cv
    return None


def _entity_key(e: Entity) -> tuple:
    values = Counter((cv.category, type(cv.value).__name__, cv.value) for cv in e.categories)
    return (e.kind.value, frozenset(values.items()))


def _structure(c: MmilComponent) -> tuple[Counter, Counter]:
    ents = Counter((e.id, _entity_key(e)) for e in c.entities)
    rels = Counter((r.source, r.target, r.rel_type) for r in c.relations)
    return ents, rels


def structural_equals(a: MmilComponent, b: MmilComponent) -> bool:
    """Order-insensitive comparison of entities (id, kind, category multiset) and relations."""
    return _structure(a) == _structure(b)


def structural_diff(a: MmilComponent, b: MmilComponent) -> list[str]:
    """Human-readable differences between two components; empty when structurally equal."""
    lines: list[str] = []
    ea = {e.id: e for e in a.entities}
    eb = {e.id: e for e in b.entities}
    for eid in ea.keys() - eb.keys():
        lines.append(f"- entity {eid}")
    for eid in eb.keys() - ea.keys():
        lines.append(f"+ entity {eid}")
    for eid in [i for i in ea if i in eb]:
        x, y = ea[eid], eb[eid]
        if x.kind is not y.kind:
            lines.append(f"~ entity {eid}: kind {x.kind} != {y.kind}")
        cx = Counter((cv.category, repr(cv.value)) for cv in x.categories)
        cy = Counter((cv.category, repr(cv.value)) for cv in y.categories)
        for (cat, val), n in sorted((cx - cy).items()):
            lines.append(f"- {eid}.{cat} = {val}" + (f" (x{n})" if n > 1 else ""))
        for (cat, val), n in sorted((cy - cx).items()):
            lines.append(f"+ {eid}.{cat} = {val}" + (f" (x{n})" if n > 1 else ""))
    ra = Counter((r.source, r.target, r.rel_type) for r in a.relations)
    rb = Counter((r.source, r.target, r.rel_type) for r in b.relations)
    for rel in sorted((ra - rb).elements()):
        lines.append("- relation {} -> {} ({})".format(*rel))
    for rel in sorted((rb - ra).elements()):
        lines.append("+ relation {} -> {} ({})".format(*rel))
    return lines
