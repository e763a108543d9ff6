"""Scripted replay of the dialogue-system agent chain.

Each turn reads file-based gesture and speech interpretations, fuses them,
asks a stub action planner for a response and a stub modality adviser for an
output channel. Every value handed from one stage to the next is an MMIL
component and is validated strictly against the active registry.

Manifest format::

    registry path/to/registry.txt     # optional
    policy miamm                      # optional
    turn 1 gesture=meudon.xml
    turn 2 speech=want_to_go.xml
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from mmil.codec import MmilParseError, read_component, serialize_component
from mmil.fusion import DialogueHistory, ResolutionResult, fuse, serialize_history, update_history
from mmil.model import Entity, MmilComponent, MmilError, add_entity, add_relation, create_component
from mmil.registry import Registry, default_registry, load_registry
from mmil.speech_acts import (
    MIAMM,
    DialogueActPolicy,
    analyze,
    communication_event,
    get_policy,
    propositional_content,
)
from mmil.validator import STRICT, errors, validate


class ManifestError(MmilError):
    pass


class TurnError(MmilError):
    def __init__(self, turn_index: int, stage: str, cause: Exception | str) -> None:
        super().__init__(f"turn {turn_index} ({stage}): {cause}")
        self.turn_index = turn_index
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class TurnInput:
    turn_index: int
    speech_file: Path | None = None
    gesture_file: Path | None = None

    def __post_init__(self) -> None:
        if self.speech_file is None and self.gesture_file is None:
            raise ValueError(f"turn {self.turn_index} names neither a speech nor a gesture file")


@dataclass(frozen=True)
class TurnRecord:
    turn_index: int
    fused_component: MmilComponent
    resolutions: tuple[ResolutionResult, ...]
    planned_act: str | None
    chosen_modality: str | None
    response_text: str
    user_act: str | None = None
    gesture_only: bool = False


@dataclass(frozen=True)
class PipelineState:
    history: DialogueHistory = field(default_factory=DialogueHistory)
    transcript: tuple[TurnRecord, ...] = ()

    @property
    def last_turn(self) -> int | None:
        return self.transcript[-1].turn_index if self.transcript else None


@dataclass(frozen=True)
class Manifest:
    turns: tuple[TurnInput, ...] = ()
    registry_path: Path | None = None
    policy: str = MIAMM.name


def _fresh(component: MmilComponent, stem: str) -> str:
    n = 0
    while f"{stem}{n}" in component:
        n += 1
    return f"{stem}{n}"


def plan_response(fused: MmilComponent) -> MmilComponent:
    """Stub action planner: report back the propositional content as performed.

    Mirrors the system-side report layout (a communication event with
    ``dialogueAct=inform`` whose propContent is a ``report`` event with
    ``actionStatus=performed``), with the fused content attached to the report
    by an ``object`` relation from its main event.
    """
    content = propositional_content(fused)
    response = create_component()
    for e in fused.entities:
        if e.id in content.member_ids:
            response = add_entity(response, e)
    for r in fused.relations:
        if r.source in content.member_ids and r.target in content.member_ids:
            response = add_relation(response, r.source, r.target, r.rel_type)
    comm = _fresh(response, "s")
    response = add_entity(response, Entity.event(
        comm, evtType="speak", speaker="system", addressee="user", dialogueAct="inform"
    ))
    report = _fresh(response, "s")
    response = add_entity(response, Entity.event(report, evtType="report", actionStatus="performed"))
    response = add_relation(response, report, comm, "propContent")
    return add_relation(response, content.main_event_id, report, "object")


def advise_modality(response: MmilComponent) -> str:
    """Stub modality adviser."""
    return "speech"


def _check(component: MmilComponent, registry: Registry, turn: int, stage: str) -> None:
    found = errors(validate(component, registry, STRICT))
    if found:
        raise TurnError(turn, stage, "; ".join(d.render() for d in found))


def _load(path: Path, registry: Registry, turn: int, stage: str) -> MmilComponent:
    try:
        component = read_component(path, registry)
    except MmilParseError as exc:
        raise TurnError(turn, stage, exc) from exc
    except OSError as exc:
        raise TurnError(turn, stage, f"cannot read {path}: {exc.strerror or exc}") from exc
    _check(component, registry, turn, stage)
    return component


def run_turn(
    state: PipelineState,
    turn: TurnInput,
    registry: Registry | None = None,
    policy: DialogueActPolicy = MIAMM,
) -> PipelineState:
    """Advance *state* by one turn. The input state is never modified."""
    registry = registry or default_registry()
    idx = turn.turn_index
    if state.last_turn is not None and idx <= state.last_turn:
        raise TurnError(idx, "input", f"turn index must exceed {state.last_turn}")
    gesture = _load(turn.gesture_file, registry, idx, "gesture") if turn.gesture_file else create_component()

    if turn.speech_file is None:
        history = update_history(state.history, gesture, idx)
        record = TurnRecord(
            idx, gesture, (), None, None, serialize_component(create_component()), gesture_only=True,
        )
        return replace(state, history=history, transcript=state.transcript + (record,))

    speech = _load(turn.speech_file, registry, idx, "speech")
    try:
        user_act = analyze(speech, policy).act
        fused, history, results = fuse(speech, gesture, state.history, idx)
        _check(fused, registry, idx, "fusion")
        communication_event(fused)
        response = plan_response(fused)
    except MmilError as exc:
        if isinstance(exc, TurnError):
            raise
        raise TurnError(idx, "fusion", exc) from exc
    _check(response, registry, idx, "planner")
    record = TurnRecord(
        idx,
        fused,
        tuple(results),
        planned_act=response.entity(communication_event(response)).get("dialogueAct"),
        chosen_modality=advise_modality(response),
        response_text=serialize_component(response),
        user_act=user_act,
    )
    return replace(state, history=history, transcript=state.transcript + (record,))


def parse_manifest(text: str, base: Path | None = None) -> Manifest:
    base = base or Path(".")
    turns: list[TurnInput] = []
    registry_path = None
    policy = MIAMM.name
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *rest = line.split()
        if keyword == "registry" and len(rest) == 1:
            registry_path = base / rest[0]
        elif keyword == "policy" and len(rest) == 1:
            policy = rest[0]
        elif keyword == "turn" and rest:
            try:
                idx = int(rest[0])
            except ValueError:
                raise ManifestError(f"line {lineno}: turn index {rest[0]!r} is not an integer") from None
            files: dict[str, Path] = {}
            for tok in rest[1:]:
                key, sep, val = tok.partition("=")
                if not sep or key not in ("speech", "gesture") or key in files or not val:
                    raise ManifestError(f"line {lineno}: bad turn option {tok!r}")
                files[key] = base / val
            if not files:
                raise ManifestError(f"line {lineno}: turn {idx} names no input file")
            if turns and idx <= turns[-1].turn_index:
                raise ManifestError(f"line {lineno}: turn {idx} is not after turn {turns[-1].turn_index}")
            turns.append(TurnInput(idx, files.get("speech"), files.get("gesture")))
        else:
            raise ManifestError(f"line {lineno}: cannot parse {line!r}")
    return Manifest(tuple(turns), registry_path, policy)


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
    manifest = parse_manifest(text, path.parent)
    for turn in manifest.turns:
        for f in (turn.speech_file, turn.gesture_file):
            if f is not None and not f.is_file():
                raise ManifestError(f"turn {turn.turn_index}: missing input file {f}")
    if manifest.registry_path is not None and not manifest.registry_path.is_file():
        raise ManifestError(f"missing registry file {manifest.registry_path}")
    try:
        get_policy(manifest.policy)
    except KeyError as exc:
        raise ManifestError(str(exc.args[0])) from None
    return manifest


def write_outputs(state: PipelineState, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for rec in state.transcript:
        (out_dir / f"turn{rec.turn_index}.fused.xml").write_text(
            serialize_component(rec.fused_component), encoding="utf-8"
        )
        (out_dir / f"turn{rec.turn_index}.response.xml").write_text(rec.response_text, encoding="utf-8")
    (out_dir / "history.txt").write_text(serialize_history(state.history), encoding="utf-8")


def run_scenario(manifest_path: str | Path, out_dir: str | Path | None = None) -> PipelineState:
    """Replay every turn of a manifest from an empty state; write outputs if *out_dir* is given."""
    manifest = load_manifest(manifest_path)
    try:
        registry = load_registry(manifest.registry_path) if manifest.registry_path else default_registry()
    except MmilError as exc:
        raise ManifestError(f"registry {manifest.registry_path}: {exc}") from exc
    policy = get_policy(manifest.policy)
    state = PipelineState()
    for turn in manifest.turns:
        state = run_turn(state, turn, registry, policy)
    if out_dir is not None:
        write_outputs(state, Path(out_dir))
    return state
