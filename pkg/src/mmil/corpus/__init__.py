"""Reference MMIL documents.

``meudon_gesture``
    gesture interpretation circling the Meudon station
``want_to_go``
    "I want to go to Paris"
``how_can_i_go``
    "How can I go to Paris?"
"""

from pathlib import Path

CORPUS_DIR = Path(__file__).parent

NAMES = ("meudon_gesture", "want_to_go", "how_can_i_go")


def corpus_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(name)
    return CORPUS_DIR / f"{name}.xml"


def corpus_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")
