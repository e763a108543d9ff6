from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from conftest import paris_scene
from mmil.codec import parse_component, serialize_component
from mmil.corpus import corpus_path
from mmil.fusion import HistoryItem, Origin, parse_history
from mmil.model import structural_equals
from mmil.pipeline import (
    ManifestError,
    PipelineState,
    TurnError,
    TurnInput,
    load_manifest,
    parse_manifest,
    plan_response,
    run_scenario,
    run_turn,
)
from mmil.speech_acts import communication_event, main_event, propositional_content
from mmil.validator import STRICT, validate


@pytest.fixture
def scenario_dir(tmp_path):
    d = tmp_path / "scenario"
    d.mkdir()
    shutil.copy(corpus_path("meudon_gesture"), d / "meudon.xml")
    shutil.copy(corpus_path("want_to_go"), d / "want_to_go.xml")
    (d / "paris.xml").write_text(serialize_component(paris_scene()))
    (d / "two.txt").write_text("turn 1 gesture=meudon.xml\nturn 2 speech=want_to_go.xml\n")
    return d


def test_speech_turn_without_gesture(want_to_go, registry):
    state = run_turn(PipelineState(), TurnInput(1, speech_file=corpus_path("want_to_go")), registry)
    rec = state.transcript[0]
    assert rec.fused_component == want_to_go
    assert rec.planned_act == "inform" and rec.chosen_modality == "speech"
    response, diags = parse_component(rec.response_text)
    assert diags == [] and validate(response, registry, STRICT) == []
    report = main_event(response)
    assert response.entity(report).get("evtType") == "report"
    assert response.entity(report).get("actionStatus") == "performed"
    assert response.entity(communication_event(response)).get("dialogueAct") == "inform"
    assert rec.user_act == "request"


def test_response_carries_fused_content(want_to_go):
    response = plan_response(want_to_go)
    content = propositional_content(want_to_go).member_ids
    assert content <= set(response.ids)
    assert "e0" not in response.ids


def test_gesture_only_turn(registry):
    state = run_turn(PipelineState(), TurnInput(4, gesture_file=corpus_path("meudon_gesture")), registry)
    rec = state.transcript[0]
    assert rec.gesture_only and rec.planned_act is None
    assert state.history.items == (HistoryItem(4, "MEUDON", None, Origin.SELECTED),)


def test_speech_with_gesture(scenario_dir, registry):
    state = run_turn(PipelineState(), TurnInput(1, scenario_dir / "want_to_go.xml", scenario_dir / "paris.xml"), registry)
    assert state.transcript[0].fused_component.entity("p1").get("MMILId") == "PARIS-STATION"


def test_malformed_speech_tagged_with_turn(tmp_path, registry):
    bad = tmp_path / "bad.xml"
    bad.write_text("<mmil:mmilComponent")
    start = PipelineState()
    with pytest.raises(TurnError) as exc:
        run_turn(start, TurnInput(7, speech_file=bad), registry)
    assert exc.value.turn_index == 7 and exc.value.stage == "speech"
    assert start == PipelineState()


def test_invalid_input_rejected(tmp_path, meudon, registry):
    e0 = meudon.entity("e0").with_category("salience", 3)
    path = tmp_path / "bad.xml"
    path.write_text(serialize_component(meudon.replace_entity(e0)))
    with pytest.raises(TurnError, match="ScopeMismatch"):
        run_turn(PipelineState(), TurnInput(1, gesture_file=path), registry)


def test_speech_without_communication_event(tmp_path, registry):
    path = tmp_path / "noact.xml"
    path.write_text(corpus_path("want_to_go").read_text().replace("<mmil:dialogueAct>request</mmil:dialogueAct>", ""))
    with pytest.raises(TurnError) as exc:
        run_turn(PipelineState(), TurnInput(2, speech_file=path), registry)
    assert exc.value.turn_index == 2


def test_turn_indexes_must_increase(registry):
    state = run_turn(PipelineState(), TurnInput(2, gesture_file=corpus_path("meudon_gesture")), registry)
    with pytest.raises(TurnError):
        run_turn(state, TurnInput(2, gesture_file=corpus_path("meudon_gesture")), registry)


def test_turn_input_needs_a_file():
    with pytest.raises(ValueError):
        TurnInput(1)


def test_two_turn_scenario(scenario_dir, tmp_path):
    out = tmp_path / "out"
    state = run_scenario(scenario_dir / "two.txt", out)
    assert [r.turn_index for r in state.transcript] == [1, 2]
    assert "MEUDON" in state.history.ids()
    assert sorted(p.name for p in out.iterdir()) == [
        "history.txt", "turn1.fused.xml", "turn1.response.xml", "turn2.fused.xml", "turn2.response.xml",
    ]
    assert parse_history((out / "history.txt").read_text()) == state.history
    fused2, _ = parse_component((out / "turn2.fused.xml").read_text())
    assert structural_equals(fused2, state.transcript[1].fused_component)


def test_replay_is_byte_identical(scenario_dir, tmp_path):
    run_scenario(scenario_dir / "two.txt", tmp_path / "a")
    run_scenario(scenario_dir / "two.txt", tmp_path / "b")
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_history_never_shrinks(scenario_dir, registry):
    turns = parse_manifest(
        "turn 1 gesture=meudon.xml\nturn 2 speech=want_to_go.xml\nturn 3 speech=want_to_go.xml gesture=paris.xml\nturn 4 gesture=meudon.xml",
        scenario_dir,
    ).turns
    state, sizes = PipelineState(), []
    for t in turns:
        state = run_turn(state, t, registry)
        sizes.append(len(state.history))
    assert sizes == sorted(sizes) and sizes[-1] == 3


def test_empty_manifest(tmp_path):
    (tmp_path / "m.txt").write_text("# nothing\n")
    state = run_scenario(tmp_path / "m.txt", tmp_path / "out")
    assert state.transcript == ()
    assert (tmp_path / "out" / "history.txt").read_text() == ""


def test_manifest_missing_file_names_turn(tmp_path):
    (tmp_path / "m.txt").write_text("turn 3 speech=nowhere.xml\n")
    with pytest.raises(ManifestError, match="turn 3"):
        run_scenario(tmp_path / "m.txt")


def test_manifest_headers(tmp_path):
    m = parse_manifest("registry reg.txt\npolicy ozone-default\nturn 1 speech=a.xml gesture=b.xml\n", tmp_path)
    assert m.registry_path == tmp_path / "reg.txt" and m.policy == "ozone-default"
    assert m.turns == (TurnInput(1, tmp_path / "a.xml", tmp_path / "b.xml"),)


@pytest.mark.parametrize("text", [
    "turn x speech=a.xml",
    "turn 1",
    "turn 1 audio=a.xml",
    "turn 2 speech=a.xml\nturn 1 speech=a.xml",
    "frobnicate",
    "policy",
])
def test_manifest_syntax_errors(text):
    with pytest.raises(ManifestError):
        parse_manifest(text, Path("."))


def test_unknown_policy_is_manifest_error(tmp_path):
    (tmp_path / "m.txt").write_text("policy shouty\n")
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "m.txt")


def test_custom_registry_in_manifest(scenario_dir, tmp_path):
    (scenario_dir / "reg.txt").write_text("relation propContent\n")
    (scenario_dir / "m.txt").write_text("registry reg.txt\nturn 1 gesture=meudon.xml\n")
    with pytest.raises(TurnError, match="UnknownCategory"):
        run_scenario(scenario_dir / "m.txt")


def test_shipped_scenario(tmp_path):
    manifest = Path(__file__).parents[1] / "scenarios" / "meudon" / "manifest.txt"
    state = run_scenario(manifest, tmp_path)
    assert state.history.ids() == ["MEUDON", "PARIS-STATION"]
