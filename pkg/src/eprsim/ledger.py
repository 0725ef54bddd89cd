"""Which spin values of an EPRB pair are defined when, and from when they are knowable.

The electron ``e`` is measured along ``a`` at ``t0``; the positron ``p`` along
``b`` at ``t1 > t0``. Entries produced by :func:`build_ledger`:

* ``e`` along ``a``: the reading, defined from ``t0`` on.
* ``p`` along ``a``: minus the electron reading (zero total spin is
  conserved), defined on ``(t0, t1)`` and knowable from ``t0``.
* ``p`` along ``b``: the positron reading held just before ``t1``. It is
  defined on ``(t0, t1)`` but knowable only from ``t1``. This is the
  double-knowledge entry: on ``(t0, t1)`` the positron carries values along
  both ``a`` and ``b``. It needs space-like separated measurements.
* ``p`` along ``b``: the reading itself, from ``t1`` on. The ``a`` value is
  gone after ``t1``.

The "just before t1" instant is any point after ``t0``, so the union of
its admissible positions, the open interval ``(t0, t1)``, is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError
from .sequential import PairSample
from .state import UnitVector3

INF = math.inf


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    start_closed: bool = False
    end_closed: bool = False

    def __post_init__(self):
        if self.start > self.end or (self.start == self.end and not (self.start_closed and self.end_closed)):
            raise ValidationError(f"empty interval {self}")

    def contains(self, t: float) -> bool:
        lo = t >= self.start if self.start_closed else t > self.start
        hi = t <= self.end if self.end_closed else t < self.end
        return lo and hi

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        if self.start > other.start:
            start, sc = self.start, self.start_closed
        elif other.start > self.start:
            start, sc = other.start, other.start_closed
        else:
            start, sc = self.start, self.start_closed and other.start_closed
        if self.end < other.end:
            end, ec = self.end, self.end_closed
        elif other.end < self.end:
            end, ec = other.end, other.end_closed
        else:
            end, ec = self.end, self.end_closed and other.end_closed
        if start < end or (start == end and sc and ec):
            return Interval(start, end, sc, ec)
        return None

    def __str__(self):
        return f"{'[' if self.start_closed else '('}{self.start:g}, {self.end:g}{']' if self.end_closed else ')'}"


@dataclass(frozen=True)
class EventTimeline:
    t0: Optional[float] = None
    t1: Optional[float] = None
    separation: bool = True

    def __post_init__(self):
        if self.t0 is None and self.t1 is not None:
            raise ValidationError("the electron is always measured first: t1 needs t0")
        if self.t0 is not None and self.t1 is not None and not self.t0 < self.t1:
            raise ValidationError(f"need t0 < t1, got t0={self.t0}, t1={self.t1}")


@dataclass(frozen=True)
class LedgerEntry:
    particle: str  # "e" or "p"
    axis: str  # label of the measurement choice, "a" or "b"
    direction: UnitVector3
    value: int
    defined_on: Interval
    knowable_from: Optional[float]  # None: never knowable
    source: str  # measured | conservation | retrodicted
    note: str = ""


@dataclass(frozen=True)
class KnowledgeLedger:
    entries: tuple[LedgerEntry, ...] = ()
    diagnostics: tuple[str, ...] = field(default=())

    def __post_init__(self):
        es = self.entries
        for i, x in enumerate(es):
            if x.value not in (-1, 1):
                raise ValidationError(f"ledger value must be +/-1, got {x.value}")
            if x.knowable_from is not None and x.knowable_from < x.defined_on.start:
                raise ValidationError(f"{x.particle}/{x.axis}: knowable before it is defined")
            for y in es[i + 1 :]:
                same = x.particle == y.particle and (x.axis == y.axis or x.direction == y.direction)
                if same and x.value != y.value and x.defined_on.intersect(y.defined_on):
                    raise ValidationError(f"conflicting values for {x.particle} along {x.axis}")

    def values_at(self, particle: str, t: float) -> dict[str, int]:
        """Defined values by axis label for ``particle`` at time ``t``."""
        return {e.axis: e.value for e in self.entries if e.particle == particle and e.defined_on.contains(t)}

    def query(self, particle: str, axis: str, t: float) -> Optional[int]:
        return self.values_at(particle, t).get(axis)

    def knowable_at(self, particle: str, t: float, when: float) -> dict[str, int]:
        """Values holding at ``t`` that an observer can know at time ``when``."""
        return {
            e.axis: e.value
            for e in self.entries
            if e.particle == particle
            and e.defined_on.contains(t)
            and e.knowable_from is not None
            and e.knowable_from <= when
        }

    def double_knowledge(self, particle: str) -> list[tuple[Interval, LedgerEntry, LedgerEntry]]:
        """Intervals on which ``particle`` has values along two different axis choices."""
        mine = [e for e in self.entries if e.particle == particle]
        out = []
        for i, x in enumerate(mine):
            for y in mine[i + 1 :]:
                if x.axis != y.axis:
                    overlap = x.defined_on.intersect(y.defined_on)
                    if overlap is not None:
                        out.append((overlap, x, y))
        return out


def build_ledger(
    timeline: EventTimeline, a: UnitVector3, b: UnitVector3, outcomes: Optional[PairSample]
) -> KnowledgeLedger:
    t0, t1 = timeline.t0, timeline.t1
    if t0 is None:
        return KnowledgeLedger()
    if outcomes is None:
        raise ValidationError("outcomes are required once a measurement is scheduled")
    s_e, s_p = outcomes.s_e, outcomes.s_p
    p_a_end = INF if t1 is None else t1
    entries = [
        LedgerEntry("e", "a", a, s_e, Interval(t0, INF, True, False), t0, "measured", "reading of e along a"),
        LedgerEntry(
            "p", "a", a, -s_e, Interval(t0, p_a_end), t0, "conservation",
            "total spin v0 = 0 is conserved: value(p) = v0 - value(e)",
        ),
    ]
    diagnostics = []
    if t1 is not None:
        if timeline.separation:
            entries.append(
                LedgerEntry(
                    "p", "b", b, s_p, Interval(t0, t1), t1, "retrodicted",
                    "value held just before t1, read out at t1",
                )
            )
        else:
            diagnostics.append("measurements not flagged space-like separated: double-knowledge entry withheld")
        entries.append(LedgerEntry("p", "b", b, s_p, Interval(t1, INF, True, False), t1, "measured", "reading of p along b"))
    return KnowledgeLedger(tuple(entries), tuple(diagnostics))
