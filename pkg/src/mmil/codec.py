"""MMIL XML wire format: parsing with diagnostics and order-stable serialization."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from xml.parsers import expat
from xml.sax.saxutils import escape

from mmil.model import (
    CategoryValue,
    Entity,
    Kind,
    MmilComponent,
    MmilError,
    Relation,
    TempSpan,
)
from mmil.registry import CATEGORY_ALIASES, Registry, default_registry
from mmil.timestamps import parse_timestamp

__all__ = [
    "LAF_NS",
    "MMIL_NS",
    "ClosureViolation",
    "MmilParseError",
    "ParseDiagnostic",
    "parse_component",
    "parse_timestamp",
    "read_component",
    "serialize_component",
]

MMIL_NS = "http://www.miamm.org/mmil"
LAF_NS = "http://www.tc37sc4.org/laf"

_INTEGER = re.compile(r"^[+-]?\d+$")
# XML 1.0 Char production, minus what we can't emit even as a character reference
_ILLEGAL_XML = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff￾￿]")


class ClosureViolation(MmilError):
    pass


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    line: int = 0
    column: int = 0

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.code} at {self.line}:{self.column}: {self.message}"


class MmilParseError(MmilError):
    """Raised by :func:`read_component` when parsing yields error diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic]) -> None:
        self.diagnostics = diagnostics
        errors = [str(d) for d in diagnostics if d.severity == "error"]
        super().__init__("; ".join(errors) or "parse failed")


@dataclass
class _Node:
    uri: str | None
    local: str
    attrs: dict[tuple[str | None, str], str]
    line: int
    column: int
    children: list[_Node] = field(default_factory=list)
    text: list[str] = field(default_factory=list)


def _split(name: str) -> tuple[str | None, str]:
    uri, sep, local = name.rpartition(" ")
    return (uri, local) if sep else (None, name)


def _normalize_uri(uri: str) -> str:
    uri = uri.strip().lower().rstrip("/")
    return re.sub(r"^https?://(www\.)?", "", uri)


def _build_tree(text: str) -> _Node:
    parser = expat.ParserCreate(namespace_separator=" ")
    stack: list[_Node] = []
    root: list[_Node] = []

    def start(name: str, attrs: dict[str, str]) -> None:
        uri, local = _split(name)
        node = _Node(
            uri, local, {_split(k): v for k, v in attrs.items()},
            parser.CurrentLineNumber, parser.CurrentColumnNumber + 1,
        )
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(name: str) -> None:
        stack.pop()

    def chars(data: str) -> None:
        if stack:
            stack[-1].text.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.Parse(text, True)
    return root[0]


class _Reader:
    def __init__(self, registry: Registry) -> None:
        self.registry = registry
        self.diagnostics: list[ParseDiagnostic] = []
        self._variant_reported: set[str] = set()

    def report(self, severity: str, code: str, message: str, node: _Node | None = None) -> None:
        line, col = (node.line, node.column) if node else (0, 0)
        self.diagnostics.append(ParseDiagnostic(severity, code, message, line, col))

    def in_ns(self, uri: str | None, expected: str, node: _Node) -> bool:
        """True when *uri* is *expected* or a near-miss of it (the latter warns once)."""
        if uri == expected:
            return True
        if uri is not None and _normalize_uri(uri) == _normalize_uri(expected):
            if uri not in self._variant_reported:
                self._variant_reported.add(uri)
                self.report(
                    "warning", "NamespaceVariant",
                    f"namespace {uri!r} treated as {expected!r}", node,
                )
            return True
        return False

    def attr(self, node: _Node, local: str, ns: str | None) -> str | None:
        for (uri, name), value in node.attrs.items():
            if name != local:
                continue
            if ns is None and uri is None:
                return value
            if ns is not None and uri is not None and self.in_ns(uri, ns, node):
                return value
        if ns is not None and (None, local) in node.attrs:
            self.report("warning", "UnqualifiedAttribute", f"attribute {local!r} has no namespace", node)
            return node.attrs[(None, local)]
        return None

    def is_mmil(self, node: _Node, local: str) -> bool:
        return node.local == local and self.in_ns(node.uri, MMIL_NS, node)

    def category(self, node: _Node, owner: str) -> CategoryValue:
        if not self.in_ns(node.uri, MMIL_NS, node):
            self.report(
                "warning", "ForeignElement",
                f"{node.local!r} on {owner} is not in the mmil namespace", node,
            )
        name = CATEGORY_ALIASES.get(node.local, node.local)
        tag = node.local if name != node.local else None
        if self.registry.category(name) is None:
            self.report("warning", "UnknownCategory", f"unknown category {name!r} on {owner}", node)
        if name == "tempSpan" or self.registry.is_timespan(name):
            return CategoryValue(name, self.tempspan(node), tag)
        text = "".join(node.text).strip()
        if node.children:
            self.report("warning", "NestedMarkup", f"markup inside {name!r} ignored", node)
        value: str | int = text
        if self.registry.is_integer(name) and _INTEGER.match(text):
            value = int(text)
        return CategoryValue(name, value, tag)

    def tempspan(self, node: _Node) -> TempSpan:
        start = self.attr(node, "startPoint", MMIL_NS)
        end = self.attr(node, "endPoint", MMIL_NS)
        if start is None or end is None:
            self.report("warning", "IncompleteTempSpan", "tempSpan lacks startPoint or endPoint", node)
        span = TempSpan.from_raw(start or "", end or "")
        for raw, parsed, which in ((start, span.start_instant, "startPoint"), (end, span.end_instant, "endPoint")):
            if raw and parsed is None:
                self.report("warning", "UnparsedTimestamp", f"{which} {raw!r} kept verbatim", node)
        return span

    def entity(self, node: _Node, kind: Kind) -> Entity | None:
        eid = self.attr(node, "id", None)
        if not eid:
            self.report("error", "MissingId", f"{kind.value} without id", node)
            return None
        cats = tuple(self.category(child, eid) for child in node.children)
        return Entity(eid, kind, cats)

    def component(self, root: _Node) -> MmilComponent | None:
        if root.local != "mmilComponent" or not self.in_ns(root.uri, MMIL_NS, root):
            self.report(
                "error", "WrongRoot",
                f"root must be mmil:mmilComponent, found {root.local!r}"
                + (f" in {root.uri!r}" if root.uri else ""),
                root,
            )
            return None
        entities: list[Entity] = []
        relations: list[tuple[str, str, str, _Node]] = []
        ok = True
        for child in root.children:
            if self.is_mmil(child, "event") or self.is_mmil(child, "participant"):
                ent = self.entity(child, Kind(child.local))
                if ent is None:
                    ok = False
                else:
                    entities.append(ent)
            elif self.is_mmil(child, "relation"):
                src = self.attr(child, "source", LAF_NS)
                tgt = self.attr(child, "target", LAF_NS)
                typ = self.attr(child, "type", None)
                missing = [n for n, v in (("laf:source", src), ("laf:target", tgt), ("type", typ)) if not v]
                if missing:
                    self.report("error", "MissingAttribute", f"relation lacks {', '.join(missing)}", child)
                    ok = False
                else:
                    relations.append((src, tgt, typ, child))
            else:
                self.report("warning", "UnknownElement", f"element {child.local!r} ignored", child)
        known = {e.id for e in entities}
        for src, tgt, typ, node in relations:
            for end in (src, tgt):
                if end not in known:
                    self.report("error", "DanglingEndpoint", f"relation {typ!r} refers to unknown id {end!r}", node)
                    ok = False
        if not ok:
            return None
        return MmilComponent(tuple(entities), tuple(Relation(s, t, y) for s, t, y, _ in relations))


def parse_component(
    text: str, registry: Registry | None = None
) -> tuple[MmilComponent | None, list[ParseDiagnostic]]:
    """Parse an MMIL document.

    Returns the component (None whenever an error diagnostic was produced)
    together with all diagnostics in document order.
    """
    reader = _Reader(registry or default_registry())
    try:
        root = _build_tree(text)
    except expat.ExpatError as exc:
        msg = expat.errors.messages.get(exc.code, str(exc)) if hasattr(exc, "code") else str(exc)
        return None, [ParseDiagnostic("error", "MalformedXml", msg, exc.lineno, exc.offset + 1)]
    component = reader.component(root)
    if any(d.severity == "error" for d in reader.diagnostics):
        component = None
    return component, reader.diagnostics


def read_component(path: str | Path, registry: Registry | None = None) -> MmilComponent:
    """Parse a file, raising :class:`MmilParseError` on error diagnostics."""
    component, diags = parse_component(Path(path).read_text(encoding="utf-8"), registry)
    if component is None:
        raise MmilParseError(diags)
    return component


def _check_chars(text: str) -> str:
    if _ILLEGAL_XML.search(text):
        raise ValueError(f"value contains characters not representable in XML: {text!r}")
    return text


def _text(value: str) -> str:
    return escape(_check_chars(value), {"\r": "&#13;"})


def _attr(value: str) -> str:
    return '"' + escape(_check_chars(value), {'"': "&quot;", "\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}) + '"'


def serialize_component(component: MmilComponent) -> str:
    """Render *component* in canonical layout: entities, then relations, insertion order."""
    dangling = component.dangling_relations()
    if dangling:
        r = component.relations[dangling[0]]
        raise ClosureViolation(f"relation {r.source} -> {r.target} ({r.rel_type}) has a dangling endpoint")
    head = f'<mmil:mmilComponent xmlns:laf="{LAF_NS}" xmlns:mmil="{MMIL_NS}"'
    if not component.entities and not component.relations:
        return head + "/>\n"
    out = [head + ">"]
    for e in component.entities:
        out.append(f"<mmil:{e.kind.value} id={_attr(e.id)}>")
        for cv in e.categories:
            tag = "mmil:" + cv.element_name
            if isinstance(cv.value, TempSpan):
                span = cv.value
                out.append(
                    f"  <{tag} mmil:startPoint={_attr(span.start_raw)} mmil:endPoint={_attr(span.end_raw)}/>"
                )
            else:
                out.append(f"  <{tag}>{_text(str(cv.value))}</{tag}>")
        out.append(f"</mmil:{e.kind.value}>")
    for r in component.relations:
        out.append(
            f"<mmil:relation laf:source={_attr(r.source)} laf:target={_attr(r.target)} type={_attr(r.rel_type)}/>"
        )
    out.append("</mmil:mmilComponent>")
    return "\n".join(out) + "\n"
