"""Multimodal fusion: resolve speech references against a gesture and the dialogue history.

Gesture participants carry bottom-up ``salience`` scores and, when the user
explicitly selected them, ``attentionStatus=inSelection``. Resolution runs a
fixed filter pipeline: type compatibility, then attention, then salience
ranking, then a recency fallback over the dialogue history.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from mmil.model import MmilComponent, MmilError
from mmil.speech_acts import communication_event

IN_SELECTION = "inSelection"
DEIXIS = frozenset({"1PPDeixis", "2PPDeixis"})


class TurnOrderViolation(MmilError):
    pass


class HistorySyntaxError(MmilError):
    pass


@dataclass(frozen=True)
class Candidate:
    participant_id: str
    mmil_id: str | None
    obj_type: str | None
    salience: int
    in_selection: bool = False

    def __post_init__(self) -> None:
        if self.salience < 0:
            raise ValueError("salience must be non-negative")


@dataclass(frozen=True)
class ReferenceConstraint:
    source_participant_id: str
    required_obj_type: str | None = None
    required_lex: str | None = None
    ref_type: str | None = None


class Outcome(str, Enum):
    RESOLVED = "resolved"
    AMBIGUOUS = "ambiguous"
    UNRESOLVED = "unresolved"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Winner:
    participant_id: str | None  # None when the referent came from the history
    mmil_id: str | None
    salience: int | None = None


@dataclass(frozen=True)
class ResolutionResult:
    outcome: Outcome
    winner: Winner | None = None
    tied: tuple[Candidate, ...] = ()
    source_participant_id: str | None = None

    def summary(self) -> str:
        who = self.source_participant_id or "?"
        if self.outcome is Outcome.RESOLVED:
            via = "history" if self.winner.participant_id is None else self.winner.participant_id
            return f"resolved {who} -> {self.winner.mmil_id} (via {via})"
        if self.outcome is Outcome.AMBIGUOUS:
            names = ",".join(c.mmil_id or c.participant_id for c in self.tied)
            return f"ambiguous {who}: {names}"
        return f"unresolved {who}"


class Origin(str, Enum):
    SELECTED = "selected"
    MENTIONED = "mentioned"


@dataclass(frozen=True)
class HistoryItem:
    turn: int
    mmil_id: str
    obj_type: str | None
    origin: Origin

    def render(self) -> str:
        parts = [f"turn={self.turn}", f"id={self.mmil_id}"]
        if self.obj_type is not None:
            parts.append(f"objType={self.obj_type}")
        parts.append(f"origin={self.origin.value}")
        return " ".join(parts)


@dataclass(frozen=True)
class DialogueHistory:
    items: tuple[HistoryItem, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        turns = [i.turn for i in self.items]
        if turns != sorted(turns):
            raise TurnOrderViolation("history items must be in non-decreasing turn order")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def last_turn(self) -> int | None:
        return self.items[-1].turn if self.items else None

    def ids(self) -> list[str]:
        return [i.mmil_id for i in self.items]


def parse_history(text: str) -> DialogueHistory:
    items = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields: dict[str, str] = {}
        for tok in line.split():
            key, sep, val = tok.partition("=")
            if not sep or key not in {"turn", "id", "objType", "origin"} or key in fields:
                raise HistorySyntaxError(f"line {lineno}: bad token {tok!r}")
            fields[key] = val
        try:
            items.append(HistoryItem(
                int(fields["turn"]), fields["id"], fields.get("objType"), Origin(fields["origin"]),
            ))
        except (KeyError, ValueError) as exc:
            raise HistorySyntaxError(f"line {lineno}: {exc}") from None
    return DialogueHistory(tuple(items))


def serialize_history(history: DialogueHistory) -> str:
    return "".join(item.render() + "\n" for item in history.items)


def load_history(path: str | Path) -> DialogueHistory:
    return parse_history(Path(path).read_text(encoding="utf-8"))


def candidate_set(gesture: MmilComponent) -> list[Candidate]:
    """Salient participants, highest salience first; ties keep document order."""
    found = []
    for p in gesture.participants:
        salience = p.get("salience")
        if not isinstance(salience, int) or salience < 0:
            continue
        found.append(Candidate(
            p.id,
            _str_or_none(p.get("MMILId")),
            _str_or_none(p.get("objType")),
            salience,
            p.get("attentionStatus") == IN_SELECTION,
        ))
    return sorted(found, key=lambda c: -c.salience)


def _str_or_none(value) -> str | None:
    return value if isinstance(value, str) else None


def _type_ok(required: str | None, actual: str | None) -> bool:
    return required is None or actual is None or required == actual


def resolve_reference(
    constraint: ReferenceConstraint, candidates: list[Candidate], history: DialogueHistory
) -> ResolutionResult:
    src = constraint.source_participant_id
    survivors = [c for c in candidates if _type_ok(constraint.required_obj_type, c.obj_type)]
    selected = [c for c in survivors if c.in_selection]
    if selected:
        survivors = selected
    if survivors:
        top = max(c.salience for c in survivors)
        best = [c for c in survivors if c.salience == top]
        if len(best) == 1:
            w = best[0]
            return ResolutionResult(Outcome.RESOLVED, Winner(w.participant_id, w.mmil_id, w.salience), (), src)
        return ResolutionResult(Outcome.AMBIGUOUS, None, tuple(best), src)
    for item in reversed(history.items):
        # unlike gesture candidates, an untyped history item never satisfies a typed constraint
        if constraint.required_obj_type in (None, item.obj_type):
            return ResolutionResult(Outcome.RESOLVED, Winner(None, item.mmil_id), (), src)
    return ResolutionResult(Outcome.UNRESOLVED, None, (), src)


def constraints_for(speech: MmilComponent) -> list[ReferenceConstraint]:
    """One constraint per speech participant that still needs a referent."""
    out = []
    for p in speech.participants:
        if p.has("MMILId") or p.get("refType") in DEIXIS:
            continue
        out.append(ReferenceConstraint(
            p.id,
            _str_or_none(p.get("objType")),
            _str_or_none(p.get("lex")),
            _str_or_none(p.get("refType")),
        ))
    return out


def update_history(history: DialogueHistory, fused: MmilComponent, turn_index: int) -> DialogueHistory:
    """Append this turn's referents; one entry per MMILId, ``selected`` beating ``mentioned``."""
    if history.last_turn is not None and turn_index < history.last_turn:
        raise TurnOrderViolation(f"turn {turn_index} comes after turn {history.last_turn}")
    kept = [i for i in history.items if i.turn != turn_index]
    this_turn: dict[str, HistoryItem] = {i.mmil_id: i for i in history.items if i.turn == turn_index}
    for p in fused.participants:
        mmil_id = p.get("MMILId")
        if not isinstance(mmil_id, str) or not mmil_id:
            continue
        origin = Origin.SELECTED if p.get("attentionStatus") == IN_SELECTION else Origin.MENTIONED
        item = HistoryItem(turn_index, mmil_id, _str_or_none(p.get("objType")), origin)
        prev = this_turn.get(mmil_id)
        if prev is None:
            this_turn[mmil_id] = item
        elif prev.origin is Origin.MENTIONED and origin is Origin.SELECTED:
            this_turn[mmil_id] = HistoryItem(turn_index, mmil_id, prev.obj_type or item.obj_type, origin)
    return DialogueHistory(tuple(kept) + tuple(this_turn.values()))


@dataclass(frozen=True)
class FusionOutput:
    fused: MmilComponent
    history: DialogueHistory
    results: tuple[ResolutionResult, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter((self.fused, self.history, list(self.results)))

    @property
    def all_resolved(self) -> bool:
        return all(r.outcome is Outcome.RESOLVED for r in self.results)


def fuse(
    speech: MmilComponent,
    gesture: MmilComponent,
    history: DialogueHistory,
    turn_index: int | None = None,
) -> FusionOutput:
    """Resolve the speech participants' referents and copy the winners' ids onto them.

    *turn_index* defaults to one past the last turn in *history*. Unpacks as
    ``(fused, history, results)``.
    """
    communication_event(speech)  # NoCommunicationEvent / MultipleCommunicationEvents
    if turn_index is None:
        turn_index = 1 if history.last_turn is None else history.last_turn + 1
    candidates = candidate_set(gesture)
    fused = speech
    results = []
    for constraint in constraints_for(speech):
        result = resolve_reference(constraint, candidates, history)
        results.append(result)
        if result.outcome is not Outcome.RESOLVED or result.winner.mmil_id is None:
            continue
        participant = fused.entity(constraint.source_participant_id)
        participant = participant.with_category("MMILId", result.winner.mmil_id)
        if result.winner.salience is not None:
            participant = participant.with_category("salience", result.winner.salience)
        fused = fused.replace_entity(participant)
    return FusionOutput(fused, update_history(history, fused, turn_index), tuple(results))
