"""Timestamp parsing for tempSpan endpoints."""

from __future__ import annotations

import re
from datetime import datetime, timedelta, timezone

ZONE_OFFSETS = {
    "UTC": timedelta(0),
    "GMT": timedelta(0),
    "CET": timedelta(hours=1),
    "CEST": timedelta(hours=2),
}

# e.g. "Tue Oct 28 13:19:04 CET 2003" (java.util.Date.toString layout)
_LEGACY = re.compile(
    r"^(?P<dow>Mon|Tue|Wed|Thu|Fri|Sat|Sun)\s+(?P<mon>[A-Z][a-z]{2})\s+(?P<day>\d{1,2})\s+"
    r"(?P<h>\d{2}):(?P<m>\d{2}):(?P<s>\d{2})\s+(?P<zone>[A-Z]{3,4})\s+(?P<year>\d{4})$"
)
_MONTHS = "Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec".split()
_DAYS = "Mon Tue Wed Thu Fri Sat Sun".split()
_ISO = re.compile(r"^\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})$")

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def _to_millis(dt: datetime) -> int:
    delta = dt - _EPOCH
    return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000


def _parse_legacy(text: str) -> int | None:
    m = _LEGACY.match(text)
    if not m or m["mon"] not in _MONTHS or m["zone"] not in ZONE_OFFSETS:
        return None
    try:
        local = datetime(
            int(m["year"]), _MONTHS.index(m["mon"]) + 1, int(m["day"]),
            int(m["h"]), int(m["m"]), int(m["s"]),
        )
    except ValueError:
        return None
    if _DAYS[local.weekday()] != m["dow"]:
        return None
    return _to_millis(local.replace(tzinfo=timezone(ZONE_OFFSETS[m["zone"]])))


def _parse_iso(text: str) -> int | None:
    if not _ISO.match(text):
        return None
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    elif text[-5] in "+-" and text[-3] != ":":
        text = text[:-2] + ":" + text[-2:]
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        return None
    if dt.tzinfo is None:
        return None
    return _to_millis(dt)


def parse_timestamp(text: str) -> int | None:
    """Return epoch milliseconds for a legacy or ISO 8601 timestamp, else None.

    Whitespace runs are collapsed first, since attribute values wrapped across
    lines arrive with embedded newlines.
    """
    text = " ".join(text.split())
    if not text:
        return None
    return _parse_legacy(text) if text[0].isalpha() else _parse_iso(text)
