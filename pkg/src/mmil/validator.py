"""Structural and registry-driven validation of MMIL components."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator

from mmil.model import MmilComponent, TempSpan
from mmil.registry import Registry, check_value

DEFAULT = "default"
STRICT = "strict"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "info"
    code: str
    target: str | None
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def render(self) -> str:
        return f"{self.severity.upper()} {self.code} at {self.target or 'component'}: {self.message}"

    __str__ = render


def _relation_label(index: int) -> str:
    return f"relation[{index}]"


def _unique_ids(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    seen: set[str] = set()
    for e in component.entities:
        if e.id in seen:
            yield Diagnostic("error", "DuplicateId", e.id, f"id {e.id!r} is used by more than one entity")
        seen.add(e.id)


def _closure(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    known = set(component.ids)
    for i, r in enumerate(component.relations):
        missing = [end for end in (r.source, r.target) if end not in known]
        if missing:
            yield Diagnostic(
                "error", "DanglingEndpoint", _relation_label(i),
                f"{r.rel_type} {r.source} -> {r.target} refers to undefined {', '.join(map(repr, missing))}",
            )


def _categories(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    unknown_severity = "error" if mode == STRICT else "warning"
    for e in component.entities:
        for cv in e.categories:
            violation = check_value(registry, e.kind, cv.category, cv.value)
            if violation is None:
                continue
            severity = unknown_severity if violation.code == "UnknownCategory" else "error"
            yield Diagnostic(severity, violation.code, e.id, violation.message)
        counts = Counter(cv.category for cv in e.categories)
        for name, n in counts.items():
            desc = registry.category(name)
            if n > 1 and desc is not None and not desc.multi:
                yield Diagnostic("error", "RepeatedCategory", e.id, f"{name!r} given {n} times but is single-valued")


def _relation_kinds(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    kinds: dict[str, object] = {}
    for e in component.entities:
        kinds.setdefault(e.id, e.kind)
    for i, r in enumerate(component.relations):
        desc = registry.relation(r.rel_type)
        if desc is None:
            yield Diagnostic(
                "error" if mode == STRICT else "warning", "UnknownRelationType", _relation_label(i),
                f"relation type {r.rel_type!r} is not declared",
            )
            continue
        if r.source not in kinds or r.target not in kinds:
            continue  # already reported by the closure rule
        for end, expected, actual in (
            ("source", desc.source, kinds[r.source]),
            ("target", desc.target, kinds[r.target]),
        ):
            if not expected.admits(actual):
                yield Diagnostic(
                    "error", "RelationEndpointKind", _relation_label(i),
                    f"{r.rel_type} {end} must be {expected.value}, found {actual.value}",
                )


def _tempspans(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    for e in component.entities:
        for cv in e.categories:
            if isinstance(cv.value, TempSpan) and not cv.value.is_ordered:
                yield Diagnostic(
                    "error", "TempSpanOrder", e.id,
                    f"{cv.category} starts after it ends ({cv.value.start_raw} > {cv.value.end_raw})",
                )


def _has_events(component: MmilComponent, registry: Registry, mode: str) -> Iterator[Diagnostic]:
    if component.entities and not component.events:
        yield Diagnostic("info", "NoEvents", None, "component holds participants only")


Rule = Callable[[MmilComponent, Registry, str], Iterator[Diagnostic]]

RULES: tuple[Rule, ...] = (
    _unique_ids,
    _closure,
    _categories,
    _relation_kinds,
    _tempspans,
    _has_events,
)


def validate(component: MmilComponent, registry: Registry, mode: str = DEFAULT) -> list[Diagnostic]:
    """Run every rule in order; an empty list means the component is valid.

    In strict mode unknown categories and relation types are errors, otherwise
    they are warnings.
    """
    if mode not in (DEFAULT, STRICT):
        raise ValueError(f"unknown validation mode {mode!r}")
    found: list[Diagnostic] = []
    for rule in RULES:
        found.extend(rule(component, registry, mode))
    return found


def errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.is_error]
