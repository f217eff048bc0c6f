"""Whole-day calendar arithmetic on integer day numbers.

All internal date handling uses the proleptic-Gregorian ordinal
(``datetime.date.toordinal``), so date differences are plain integer
subtraction and a day range is ``range(start, end + 1)``.
"""

from __future__ import annotations

import datetime as _dt
import re

_MDY_RE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{2,4})$")


def from_date(d: _dt.date) -> int:
    return d.toordinal()


def to_date(day: int) -> _dt.date:
    return _dt.date.fromordinal(day)


def parse_iso(text: str) -> int:
    """Parse an ISO-8601 date (``2020-03-22``) to a day number."""
    return _dt.date.fromisoformat(text.strip()).toordinal()


def parse_mdy(text: str) -> int:
    """Parse a US-style header date (``3/22/20`` or ``3/22/2020``)."""
    m = _MDY_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not an M/D/YY date: {text!r}")
    month, day, year = (int(g) for g in m.groups())
    if year < 100:
        year += 2000
    return _dt.date(year, month, day).toordinal()


def iso(day: int) -> str:
    return _dt.date.fromordinal(day).isoformat()


def mdy(day: int) -> str:
    d = _dt.date.fromordinal(day)
    return f"{d.month}/{d.day}/{d.year % 100:02d}"
