"""Event structure and pragmatics of an utterance component.

The communication event is the one carrying ``dialogueAct``; the main event is
linked to it by ``propContent``; secondary events hang off the main event.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from mmil.model import Entity, MmilComponent, MmilError, add_entity, add_relation
from mmil.registry import DIALOGUE_ACTS, RegistrySyntaxError


class SpeechActError(MmilError):
    pass


class NoCommunicationEvent(SpeechActError):
    pass


class MultipleCommunicationEvents(SpeechActError):
    pass


class NoPropContent(SpeechActError):
    pass


class MultiplePropContent(SpeechActError):
    pass


class UtteranceForm(str, Enum):
    SAYING = "saying"
    TELLING = "telling"
    ASKING = "asking"

    def __str__(self) -> str:
        return self.value


WH_WORDS = ("what", "who", "where", "why", "how", "when", "which")


@dataclass(frozen=True)
class PropositionalContent:
    main_event_id: str
    member_ids: frozenset[str]


def communication_event(component: MmilComponent) -> str:
    found = [e.id for e in component.events if e.has("dialogueAct")]
    if not found:
        raise NoCommunicationEvent("no event carries a dialogueAct")
    if len(found) > 1:
        raise MultipleCommunicationEvents(f"dialogueAct on several events: {', '.join(found)}")
    return found[0]


def main_event(component: MmilComponent) -> str:
    comm = communication_event(component)
    sources = [
        r.source for r in component.relations
        if r.rel_type == "propContent" and r.target == comm
        and (ent := component.find(r.source)) is not None and ent.is_event
    ]
    if not sources:
        raise NoPropContent(f"no event is the propContent of {comm}")
    if len(set(sources)) > 1:
        raise MultiplePropContent(f"several propContent events for {comm}: {', '.join(sources)}")
    return sources[0]


def _reachable(component: MmilComponent, start: str, excluded: str) -> set[str]:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in component.neighbours(node):
            if nxt != excluded and nxt not in seen and nxt in component:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def secondary_events(component: MmilComponent) -> list[str]:
    """Events reachable from the main event (either direction), bar it and the communication event."""
    comm = communication_event(component)
    main = main_event(component)
    reach = _reachable(component, main, comm)
    return [e.id for e in component.events if e.id in reach and e.id != main]


def propositional_content(component: MmilComponent) -> PropositionalContent:
    comm = communication_event(component)
    main = main_event(component)
    return PropositionalContent(main, frozenset(_reachable(component, main, comm)))


def classify_form(component: MmilComponent) -> UtteranceForm:
    content = propositional_content(component)
    members = [e for e in component.entities if e.id in content.member_ids]
    if any(e.has("question") for e in members):
        return UtteranceForm.ASKING
    if component.entity(content.main_event_id).get("mode") == "imperative":
        return UtteranceForm.TELLING
    return UtteranceForm.SAYING


@dataclass(frozen=True)
class DialogueActPolicy:
    name: str
    mapping: Mapping[UtteranceForm, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        table = {UtteranceForm(k): v for k, v in dict(self.mapping).items()}
        missing = [f.value for f in UtteranceForm if f not in table]
        if missing:
            raise ValueError(f"policy {self.name!r} lacks {', '.join(missing)}")
        bad = [v for v in table.values() if v not in DIALOGUE_ACTS]
        if bad:
            raise ValueError(f"policy {self.name!r} maps to unknown act(s) {', '.join(bad)}")
        object.__setattr__(self, "mapping", MappingProxyType(table))

    def __hash__(self) -> int:
        return hash((self.name, tuple(sorted(self.mapping.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DialogueActPolicy):
            return NotImplemented
        return self.name == other.name and dict(self.mapping) == dict(other.mapping)


MIAMM = DialogueActPolicy("miamm", {"saying": "request", "telling": "request", "asking": "request"})
OZONE_DEFAULT = DialogueActPolicy(
    "ozone-default", {"saying": "inform", "telling": "request", "asking": "request"}
)
BUILTIN_POLICIES = {p.name: p for p in (MIAMM, OZONE_DEFAULT)}


def assign_dialogue_act(form: UtteranceForm, policy: DialogueActPolicy) -> str:
    return policy.mapping[UtteranceForm(form)]


def get_policy(name: str) -> DialogueActPolicy:
    try:
        return BUILTIN_POLICIES[name]
    except KeyError:
        raise KeyError(f"unknown policy {name!r} (built in: {', '.join(BUILTIN_POLICIES)})") from None


def parse_policies(text: str) -> dict[str, DialogueActPolicy]:
    """Read ``policy <name> saying=<act> telling=<act> asking=<act>`` lines."""
    policies: dict[str, DialogueActPolicy] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *rest = line.split()
        if keyword != "policy" or not rest:
            raise RegistrySyntaxError(lineno, "expected 'policy <name> saying=... telling=... asking=...'")
        name, tokens = rest[0], rest[1:]
        if name in policies:
            raise RegistrySyntaxError(lineno, f"policy {name!r} declared twice")
        table: dict[str, str] = {}
        for tok in tokens:
            key, sep, val = tok.partition("=")
            if not sep or key not in {f.value for f in UtteranceForm} or key in table:
                raise RegistrySyntaxError(lineno, f"bad policy entry {tok!r}")
            table[key] = val
        try:
            policies[name] = DialogueActPolicy(name, table)
        except ValueError as exc:
            raise RegistrySyntaxError(lineno, str(exc)) from None
    return policies


def serialize_policies(policies) -> str:
    if isinstance(policies, DialogueActPolicy):
        policies = [policies]
    elif isinstance(policies, Mapping):
        policies = list(policies.values())
    return "".join(
        f"policy {p.name} " + " ".join(f"{f.value}={p.mapping[f]}" for f in UtteranceForm) + "\n"
        for p in policies
    )


def load_policies(path: str | Path) -> dict[str, DialogueActPolicy]:
    return parse_policies(Path(path).read_text(encoding="utf-8"))


def _fresh_id(component: MmilComponent) -> str:
    ids = set(component.ids)
    if ids and all(i.isdigit() for i in ids):
        n = 0
        while str(n) in ids:
            n += 1
        return str(n)
    n = 0
    while f"p{n}" in ids:
        n += 1
    return f"p{n}"


def normalize_wh_question(
    declarative: MmilComponent, wh_word: str, role: str, new_id: str | None = None
) -> MmilComponent:
    """Turn a declarative skeleton into a wh-question.

    Adds one participant carrying only ``question=wh_word`` and links it to
    the main event with *role*. New ids follow the component's style: the
    smallest free numeral when all ids are numerals, else ``p<n>``.
    """
    if not wh_word or not wh_word.strip():
        raise ValueError("wh-word must be non-empty")
    main = main_event(declarative)
    pid = new_id or _fresh_id(declarative)
    out = add_entity(declarative, Entity.participant(pid, question=wh_word))
    return add_relation(out, pid, main, role)


@dataclass(frozen=True)
class EventStructure:
    communication: str
    main: str
    secondary: tuple[str, ...]
    form: UtteranceForm
    act: str

    def render(self) -> str:
        secondary = ",".join(self.secondary) or "(none)"
        return (
            f"comm={self.communication} main={self.main} secondary={secondary} "
            f"form={self.form.value} act={self.act}"
        )


def analyze(component: MmilComponent, policy: DialogueActPolicy = MIAMM) -> EventStructure:
    form = classify_form(component)
    return EventStructure(
        communication_event(component),
        main_event(component),
        tuple(secondary_events(component)),
        form,
        assign_dialogue_act(form, policy),
    )
