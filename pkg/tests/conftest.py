from __future__ import annotations

import time

import pytest

from mmil.codec import parse_component
from mmil.corpus import corpus_path, corpus_text
from mmil.model import Entity, build_component
from mmil.registry import default_registry

_CRITERIA: list[tuple[str, bool, float, str]] = []


@pytest.fixture(scope="session")
def registry():
    return default_registry()


def _parsed(name: str):
    component, diags = parse_component(corpus_text(name))
    assert component is not None, diags
    return component


@pytest.fixture
def meudon():
    return _parsed("meudon_gesture")


@pytest.fixture
def want_to_go():
    return _parsed("want_to_go")


@pytest.fixture
def how_can_i_go():
    return _parsed("how_can_i_go")


@pytest.fixture
def corpus_file():
    return corpus_path


def meudon_scene(order=None):
    """Gesture circling Meudon (26) and four routes to it with lower saliences."""
    specs = [
        ("p0", "MEUDON", "STATION", 26, True),
        ("p1", "WAY1", "ROUTE", 12, False),
        ("p2", "WAY2", "ROUTE", 9, False),
        ("p3", "WAY3", "ROUTE", 9, False),
        ("p4", "WAY4", "ROUTE", 4, False),
    ]
    if order is not None:
        specs = [specs[i] for i in order]
    entities = [Entity.event("e0", evtType="VTState", dialogueAct="inform")]
    for pid, mid, typ, sal, sel in specs:
        values = dict(MMILId=mid, objType=typ, salience=sal)
        if sel:
            values["attentionStatus"] = "inSelection"
        entities.append(Entity.participant(pid, **values))
    return build_component(entities, [(s[0], "e0", "description") for s in specs])


def paris_scene():
    return build_component(
        [
            Entity.event("e0", evtType="VTState", dialogueAct="inform"),
            Entity.participant("p0", MMILId="PARIS-STATION", objType="PLACE", salience=18),
        ],
        [("p0", "e0", "description")],
    )


@pytest.fixture
def criterion():
    """Record one acceptance line: call with (label, passed, detail)."""
    start = time.perf_counter()

    def record(label: str, passed: bool, detail: str = "") -> None:
        _CRITERIA.append((label, passed, time.perf_counter() - start, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, elapsed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} {label} ({elapsed:.2f}s) {detail}".rstrip())
