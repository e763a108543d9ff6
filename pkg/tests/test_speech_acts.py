from __future__ import annotations

import pytest

from mmil.model import Entity, MmilComponent, build_component, structural_equals
from mmil.registry import RegistrySyntaxError
from mmil.speech_acts import (
    MIAMM,
    OZONE_DEFAULT,
    DialogueActPolicy,
    MultipleCommunicationEvents,
    MultiplePropContent,
    NoCommunicationEvent,
    NoPropContent,
    UtteranceForm,
    analyze,
    assign_dialogue_act,
    classify_form,
    communication_event,
    main_event,
    normalize_wh_question,
    parse_policies,
    propositional_content,
    secondary_events,
    serialize_policies,
)

SPEAK = dict(speaker="user", evtType="speak", addressee="system", dialogueAct="request", spokenLanguage="en")


def must_go_to_paris():
    """'I must go to Paris': a single content event carrying the modal."""
    return build_component(
        [
            Entity.event("e0", **SPEAK),
            Entity.event("e1", evtType="go", mode="indicative", tense="present", modal="must"),
            Entity.participant("p0", lex="i", objType="PERSON", refType="1PPDeixis"),
            Entity.participant("p1", lex="paris", objType="PLACE"),
        ],
        [("e1", "e0", "propContent"), ("p0", "e1", "subject"), ("p1", "e1", "destination")],
    )


def play_rap_imperative():
    """'Please play rap from the 90's'."""
    return build_component(
        [
            Entity.event("e0", **SPEAK),
            Entity.event("e1", evtType="play", mode="imperative"),
            Entity.participant("p0", lex="rap", objType="GENRE"),
        ],
        [("e1", "e0", "propContent"), ("p0", "e1", "object")],
    )


def can_go_to_paris_by_x(how_can_i_go):
    """Declarative skeleton of the how-question: everything but the questioned participant."""
    return MmilComponent(
        tuple(e for e in how_can_i_go.entities if e.id != "2"),
        tuple(r for r in how_can_i_go.relations if r.source != "2"),
    )


def test_communication_event(meudon, want_to_go, how_can_i_go):
    assert communication_event(want_to_go) == "e0"
    assert communication_event(meudon) == "e0"
    assert communication_event(how_can_i_go) == "4"


def test_no_communication_event():
    with pytest.raises(NoCommunicationEvent):
        communication_event(MmilComponent())


def test_multiple_communication_events(want_to_go):
    c = want_to_go.replace_entity(want_to_go.entity("e1").with_category("dialogueAct", "inform"))
    with pytest.raises(MultipleCommunicationEvents):
        communication_event(c)


def test_main_event(want_to_go, how_can_i_go):
    assert main_event(want_to_go) == "e1"
    assert main_event(how_can_i_go) == "3"
    assert main_event(must_go_to_paris()) == "e1"


def test_main_event_errors(want_to_go):
    no_prop = MmilComponent(want_to_go.entities, want_to_go.relations[1:])
    with pytest.raises(NoPropContent):
        main_event(no_prop)
    from mmil.model import Relation

    two = MmilComponent(want_to_go.entities, want_to_go.relations + (Relation("e2", "e0", "propContent"),))
    with pytest.raises(MultiplePropContent):
        main_event(two)


def test_secondary_events(want_to_go, how_can_i_go):
    assert secondary_events(want_to_go) == ["e2"]
    assert secondary_events(how_can_i_go) == []
    assert secondary_events(must_go_to_paris()) == []


@pytest.mark.parametrize("fixture", ["meudon", "want_to_go", "how_can_i_go"])
def test_events_partition(fixture, request):
    c = request.getfixturevalue(fixture)
    parts = [communication_event(c), main_event(c), *secondary_events(c)]
    assert sorted(parts) == sorted(e.id for e in c.events)
    assert len(set(parts)) == len(parts)


def test_propositional_content(meudon, want_to_go):
    assert propositional_content(want_to_go).member_ids == {"e1", "e2", "p0", "p1"}
    assert propositional_content(meudon).member_ids == {"e1", "p0"}
    minimal = build_component([Entity.event("c", dialogueAct="inform"), Entity.event("m")], [("m", "c", "propContent")])
    content = propositional_content(minimal)
    assert content.member_ids == {"m"} and content.main_event_id == "m"


def test_classify_form(want_to_go, how_can_i_go):
    assert classify_form(how_can_i_go) is UtteranceForm.ASKING
    assert classify_form(want_to_go) is UtteranceForm.SAYING
    assert classify_form(play_rap_imperative()) is UtteranceForm.TELLING


def test_question_outside_content_does_not_count(want_to_go):
    from mmil.model import add_entity

    stray = add_entity(want_to_go, Entity.participant("q", question="what"))
    assert classify_form(stray) is UtteranceForm.SAYING


@pytest.mark.parametrize("form", list(UtteranceForm))
def test_miamm_always_request(form):
    assert assign_dialogue_act(form, MIAMM) == "request"


def test_ozone_default():
    assert assign_dialogue_act(UtteranceForm.SAYING, OZONE_DEFAULT) == "inform"
    assert assign_dialogue_act(UtteranceForm.TELLING, OZONE_DEFAULT) == "request"
    assert assign_dialogue_act(UtteranceForm.ASKING, OZONE_DEFAULT) == "request"


def test_policy_validation():
    with pytest.raises(ValueError):
        DialogueActPolicy("x", {"saying": "inform"})
    with pytest.raises(ValueError):
        DialogueActPolicy("x", {"saying": "inform", "telling": "order", "asking": "request"})


def test_policy_file_roundtrip():
    text = serialize_policies([MIAMM, OZONE_DEFAULT])
    assert text == (
        "policy miamm saying=request telling=request asking=request\n"
        "policy ozone-default saying=inform telling=request asking=request\n"
    )
    assert parse_policies(text) == {"miamm": MIAMM, "ozone-default": OZONE_DEFAULT}


@pytest.mark.parametrize("text", [
    "policy p saying=inform telling=request",
    "policy p saying=inform telling=request asking=negotiate",
    "policy p saying=inform telling=request asking=request shouting=open",
    "rule p saying=inform",
    "policy a saying=inform telling=request asking=request\npolicy a saying=inform telling=request asking=request",
])
def test_policy_file_errors(text):
    with pytest.raises(RegistrySyntaxError):
        parse_policies(text)


def test_normalize_wh_question_rebuilds_how_can_i_go(how_can_i_go):
    skeleton = can_go_to_paris_by_x(how_can_i_go)
    assert classify_form(skeleton) is UtteranceForm.SAYING
    question = normalize_wh_question(skeleton, "how", "mean")
    assert structural_equals(question, how_can_i_go)
    assert classify_form(question) is UtteranceForm.ASKING


@pytest.mark.parametrize("builder", [must_go_to_paris, play_rap_imperative])
def test_normalize_wh_question_is_size_two_diff(builder):
    c = builder()
    q = normalize_wh_question(c, "what", "object")
    assert q.entities[:-1] == c.entities and q.relations[:-1] == c.relations
    new = q.entities[-1]
    assert new.is_participant and [(cv.category, cv.value) for cv in new.categories] == [("question", "what")]
    assert q.relations[-1].source == new.id and q.relations[-1].target == main_event(c)
    assert classify_form(q) is UtteranceForm.ASKING


def test_normalize_twice(want_to_go):
    q = normalize_wh_question(normalize_wh_question(want_to_go, "where", "destination"), "when", "mean")
    assert len(q.entities) == len(want_to_go.entities) + 2
    assert classify_form(q) is UtteranceForm.ASKING


def test_normalize_needs_main_event():
    with pytest.raises(NoCommunicationEvent):
        normalize_wh_question(MmilComponent(), "how", "mean")


def test_analyze_render(want_to_go, how_can_i_go):
    assert analyze(want_to_go, MIAMM).render() == "comm=e0 main=e1 secondary=e2 form=saying act=request"
    assert analyze(how_can_i_go, MIAMM).render() == "comm=4 main=3 secondary=(none) form=asking act=request"
