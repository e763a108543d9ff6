"""Data-category and relation-type registry.

A registry says which categories exist, which entity kind may carry them and
what values they accept. It is loaded from a small line-oriented text format::

    # comment
    category salience scope=participant kind=integer min=0
    category dialogueAct scope=event kind=enum closed values=open,close,inform
    relation subject source=participant target=event
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from mmil.model import Kind, MmilError, TempSpan, Value


class Scope(str, Enum):
    EVENT = "event"
    PARTICIPANT = "participant"
    BOTH = "both"

    def admits(self, kind: Kind) -> bool:
        return self is Scope.BOTH or self.value == kind.value


class ValueKind(str, Enum):
    STRING = "string"
    INTEGER = "integer"
    LANGUAGE_CODE = "languageCode"
    TIMESPAN = "timespan"
    ENUM = "enum"


class EndpointKind(str, Enum):
    EVENT = "event"
    PARTICIPANT = "participant"
    ANY = "any"

    def admits(self, kind: Kind) -> bool:
        return self is EndpointKind.ANY or self.value == kind.value


class RegistrySyntaxError(MmilError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateDeclaration(RegistrySyntaxError):
    pass


@dataclass(frozen=True)
class CategoryDescriptor:
    name: str
    scope: Scope
    kind: ValueKind
    closed: bool = False
    allowed_values: tuple[str, ...] = ()
    min_integer: int | None = None
    multi: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", Scope(self.scope))
        object.__setattr__(self, "kind", ValueKind(self.kind))
        object.__setattr__(self, "allowed_values", tuple(self.allowed_values))
        if self.closed and self.kind is not ValueKind.ENUM:
            raise ValueError(f"{self.name}: only enum categories can be closed")
        if self.closed and not self.allowed_values:
            raise ValueError(f"{self.name}: closed enum needs allowed values")


@dataclass(frozen=True)
class RelationDescriptor:
    name: str
    source: EndpointKind = EndpointKind.ANY
    target: EndpointKind = EndpointKind.ANY

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", EndpointKind(self.source))
        object.__setattr__(self, "target", EndpointKind(self.target))


@dataclass(frozen=True)
class Registry:
    categories: Mapping[str, CategoryDescriptor] = field(default_factory=dict)
    relations: Mapping[str, RelationDescriptor] = field(default_factory=dict)

    def category(self, name: str) -> CategoryDescriptor | None:
        return self.categories.get(name)

    def relation(self, name: str) -> RelationDescriptor | None:
        return self.relations.get(name)

    def is_integer(self, name: str) -> bool:
        desc = self.categories.get(name)
        return desc is not None and desc.kind is ValueKind.INTEGER

    def is_timespan(self, name: str) -> bool:
        desc = self.categories.get(name)
        return desc is not None and desc.kind is ValueKind.TIMESPAN


# Alternative element spellings accepted on input.
CATEGORY_ALIASES = {"mmilId": "MMILId"}

DIALOGUE_ACTS = ("open", "close", "inform", "request", "accept", "reject")

_DEFAULT_TEXT = f"""\
# event-scope categories
category evtType scope=event kind=string
category dialogueAct scope=event kind=enum closed values={",".join(DIALOGUE_ACTS)}
category actionStatus scope=event kind=string
category tempSpan scope=event kind=timespan
category speaker scope=event kind=enum closed values=user,system
category addressee scope=event kind=enum closed values=user,system
category spokenLanguage scope=event kind=languageCode
category mode scope=event kind=string
category tense scope=event kind=string
category modal scope=event kind=string
# participant-scope categories
category lex scope=participant kind=string
category objType scope=participant kind=string
category refType scope=participant kind=string
category MMILId scope=participant kind=string
category salience scope=participant kind=integer min=0
category attentionStatus scope=participant kind=string
category question scope=participant kind=string
# relation types
relation propContent source=event target=event
relation description source=participant target=event
relation subject source=participant target=event
relation object source=any target=event
relation destination source=participant target=event
relation mean source=participant target=event
"""


def default_registry() -> Registry:
    return parse_registry(_DEFAULT_TEXT)


def _enum_token(cls: type[Enum], token: str, what: str, lineno: int):
    try:
        return cls(token)
    except ValueError:
        allowed = "|".join(m.value for m in cls)
        raise RegistrySyntaxError(lineno, f"invalid {what} {token!r} (expected {allowed})") from None


_NAME = re.compile(r"^[A-Za-z_][\w.-]*$")


def _options(tokens: list[str], lineno: int) -> tuple[dict[str, str], set[str]]:
    opts: dict[str, str] = {}
    flags: set[str] = set()
    for tok in tokens:
        if "=" in tok:
            key, _, val = tok.partition("=")
            if key in opts:
                raise RegistrySyntaxError(lineno, f"option {key!r} given twice")
            opts[key] = val
        else:
            flags.add(tok)
    return opts, flags


def _parse_category(name: str, tokens: list[str], lineno: int) -> CategoryDescriptor:
    opts, flags = _options(tokens, lineno)
    unknown = (opts.keys() - {"scope", "kind", "values", "min"}) | (flags - {"closed", "multi"})
    if unknown:
        raise RegistrySyntaxError(lineno, f"unknown option(s): {', '.join(sorted(unknown))}")
    for required in ("scope", "kind"):
        if required not in opts:
            raise RegistrySyntaxError(lineno, f"missing {required}=")
    scope = _enum_token(Scope, opts["scope"], "scope", lineno)
    kind = _enum_token(ValueKind, opts["kind"], "kind", lineno)
    values: tuple[str, ...] = ()
    if "values" in opts:
        values = tuple(opts["values"].split(","))
        if kind is not ValueKind.ENUM or any(not v for v in values):
            raise RegistrySyntaxError(lineno, "values= needs kind=enum and non-empty items")
    minimum = None
    if "min" in opts:
        if kind is not ValueKind.INTEGER:
            raise RegistrySyntaxError(lineno, "min= needs kind=integer")
        try:
            minimum = int(opts["min"])
        except ValueError:
            raise RegistrySyntaxError(lineno, f"min= is not an integer: {opts['min']!r}") from None
    closed = "closed" in flags
    if closed and (kind is not ValueKind.ENUM or not values):
        raise RegistrySyntaxError(lineno, "closed requires kind=enum and values=")
    return CategoryDescriptor(
        name=name,
        scope=scope,
        kind=kind,
        closed=closed,
        allowed_values=values,
        min_integer=minimum,
        multi="multi" in flags,
    )


def _parse_relation(name: str, tokens: list[str], lineno: int) -> RelationDescriptor:
    opts, flags = _options(tokens, lineno)
    unknown = (opts.keys() - {"source", "target"}) | flags
    if unknown:
        raise RegistrySyntaxError(lineno, f"unknown option(s): {', '.join(sorted(unknown))}")
    return RelationDescriptor(
        name=name,
        source=_enum_token(EndpointKind, opts.get("source", "any"), "source", lineno),
        target=_enum_token(EndpointKind, opts.get("target", "any"), "target", lineno),
    )


def parse_registry(text: str) -> Registry:
    categories: dict[str, CategoryDescriptor] = {}
    relations: dict[str, RelationDescriptor] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *rest = line.split()
        if keyword not in ("category", "relation"):
            raise RegistrySyntaxError(lineno, f"unknown declaration {keyword!r}")
        if not rest or not _NAME.match(rest[0]):
            raise RegistrySyntaxError(lineno, f"{keyword} needs a name")
        name, tokens = rest[0], rest[1:]
        if keyword == "category":
            if name in categories:
                raise DuplicateDeclaration(lineno, f"category {name!r} declared twice")
            categories[name] = _parse_category(name, tokens, lineno)
        else:
            if name in relations:
                raise DuplicateDeclaration(lineno, f"relation {name!r} declared twice")
            relations[name] = _parse_relation(name, tokens, lineno)
    return Registry(categories, relations)


def load_registry(path: str | Path) -> Registry:
    return parse_registry(Path(path).read_text(encoding="utf-8"))


def serialize_registry(registry: Registry) -> str:
    lines = []
    for d in registry.categories.values():
        parts = ["category", d.name, f"scope={d.scope.value}", f"kind={d.kind.value}"]
        if d.closed:
            parts.append("closed")
        if d.allowed_values:
            parts.append("values=" + ",".join(d.allowed_values))
        if d.min_integer is not None:
            parts.append(f"min={d.min_integer}")
        if d.multi:
            parts.append("multi")
        lines.append(" ".join(parts))
    for r in registry.relations.values():
        lines.append(f"relation {r.name} source={r.source.value} target={r.target.value}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Violation:
    code: str  # UnknownCategory | ScopeMismatch | KindMismatch | EnumViolation | RangeViolation
    message: str


_LANG = re.compile(r"^[A-Za-z]{2,3}(-[A-Za-z0-9]{1,8})*$")


def check_value(registry: Registry, entity_kind: Kind, category: str, value: Value) -> Violation | None:
    """Check one category value against the registry; None means ok."""
    entity_kind = Kind(entity_kind)
    desc = registry.category(category)
    if desc is None:
        return Violation("UnknownCategory", f"category {category!r} is not declared")
    if not desc.scope.admits(entity_kind):
        return Violation(
            "ScopeMismatch", f"{category!r} is {desc.scope.value}-scoped, found on {entity_kind.value}"
        )
    kind = desc.kind
    if kind is ValueKind.TIMESPAN:
        ok = isinstance(value, TempSpan)
    elif kind is ValueKind.INTEGER:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, str)
        if ok and kind is ValueKind.LANGUAGE_CODE:
            ok = bool(_LANG.match(value))
    if not ok:
        return Violation("KindMismatch", f"{category!r} expects {kind.value}, got {value!r}")
    if kind is ValueKind.ENUM and desc.closed and value not in desc.allowed_values:
        return Violation(
            "EnumViolation",
            f"{value!r} is not one of {', '.join(desc.allowed_values)} for {category!r}",
        )
    if kind is ValueKind.INTEGER and desc.min_integer is not None and value < desc.min_integer:
        return Violation("RangeViolation", f"{category!r} must be >= {desc.min_integer}, got {value}")
    return None
