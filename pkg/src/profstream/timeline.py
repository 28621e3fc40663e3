"""Per-thread on-CPU/off-CPU activity derived from scheduler switch events.

On-CPU time is the exact complement of the traced off-CPU intervals
within the thread lifetime, so per-thread durations conserve exactly:
sum(on) + sum(off) = exit_t - spawn_t.
"""

from __future__ import annotations

from dataclasses import dataclass

ON = "on"
OFF = "off"

NESTED_SWITCH_OUT = "NestedSwitchOut"


class TimelineError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True, slots=True)
class OffInterval:
    start: int
    end: int  # half-open [start, end)
    sid: int
    synthetic: bool  # closed by finalization, not by a switch-in


@dataclass(frozen=True, slots=True)
class ActivitySegment:
    start: int
    end: int
    state: str  # ON | OFF
    sid: int | None = None  # present iff state == OFF
    synthetic: bool = False


class SwitchPairer:
    """Incremental switch_out/switch_in matcher for one thread.

    Events must be fed in non-decreasing t. In strict mode a second
    switch_out without an intervening switch_in raises; in lenient mode
    the first interval is closed at the second out's timestamp.
    """

    def __init__(self, strict: bool = True):
        self.strict = strict
        self.pending: tuple[int, int] | None = None  # (t, sid)
        self.intervals: list[OffInterval] = []
        self.orphan_switch_in = 0
        self.nested_switch_out = 0

    def feed_out(self, t: int, sid: int) -> None:
        if self.pending is not None:
            if self.strict:
                raise TimelineError(NESTED_SWITCH_OUT,
                                    f"switch_out at {t} while already off since {self.pending[0]}")
            self.nested_switch_out += 1
            self._close(t, synthetic=True)
        self.pending = (t, sid)

    def feed_in(self, t: int) -> None:
        if self.pending is None:
            self.orphan_switch_in += 1
            return
        self._close(t, synthetic=False)

    def finish(self, exit_t: int) -> list[OffInterval]:
        if self.pending is not None:
            self._close(exit_t, synthetic=True)
        return self.intervals

    def _close(self, end: int, synthetic: bool) -> None:
        start, sid = self.pending  # type: ignore[misc]
        self.pending = None
        if end > start:  # zero-length blocks carry no mass
            self.intervals.append(OffInterval(start, end, sid, synthetic))

    def counters(self) -> dict[str, int]:
        out = {}
        if self.orphan_switch_in:
            out["orphan_switch_in"] = self.orphan_switch_in
        if self.nested_switch_out:
            out["nested_switch_out"] = self.nested_switch_out
        return out


def pair_switches(events, lifetime: tuple[int, int],
                  strict: bool = True) -> tuple[list[OffInterval], dict[str, int]]:
    """Match switch events (sorted by t, within lifetime) into off intervals.

    events: iterable of ("out", t, sid) / ("in", t) tuples.
    """
    pairer = SwitchPairer(strict=strict)
    for ev in events:
        if ev[0] == "out":
            pairer.feed_out(ev[1], ev[2])
        else:
            pairer.feed_in(ev[1])
    intervals = pairer.finish(lifetime[1])
    return intervals, pairer.counters()


def normalize_off(intervals: list[OffInterval],
                  lifetime: tuple[int, int]) -> list[OffInterval]:
    """Clip to the lifetime, sort, and merge overlaps.

    Identity for well-formed input; only flagged (reorder-overflow)
    streams ever produce overlapping or out-of-lifetime intervals.
    """
    lo, hi = lifetime
    clipped = [OffInterval(max(iv.start, lo), min(iv.end, hi), iv.sid, iv.synthetic)
               for iv in intervals if max(iv.start, lo) < min(iv.end, hi)]
    clipped.sort(key=lambda iv: (iv.start, iv.end))
    out: list[OffInterval] = []
    for iv in clipped:
        if out and iv.start < out[-1].end:
            prev = out[-1]
            out[-1] = OffInterval(prev.start, max(prev.end, iv.end), prev.sid,
                                  prev.synthetic or iv.synthetic)
        else:
            out.append(iv)
    return out


def drop_short_off(intervals: list[OffInterval], min_off_ns: int) -> list[OffInterval]:
    """Optional display filter: off blocks shorter than min_off_ns melt into on time."""
    if min_off_ns <= 0:
        return intervals
    return [iv for iv in intervals if iv.end - iv.start >= min_off_ns]


def build_segments(off: list[OffInterval],
                   lifetime: tuple[int, int]) -> list[ActivitySegment]:
    """Tile the lifetime exactly: on-CPU fills the complement of off intervals.

    Pre: off intervals disjoint, sorted, within the lifetime.
    """
    lo, hi = lifetime
    segments: list[ActivitySegment] = []
    cursor = lo
    for iv in off:
        if iv.start > cursor:
            segments.append(ActivitySegment(cursor, iv.start, ON))
        segments.append(ActivitySegment(iv.start, iv.end, OFF, iv.sid, iv.synthetic))
        cursor = iv.end
    if cursor < hi:
        segments.append(ActivitySegment(cursor, hi, ON))
    return segments


def downsample(segments: list[ActivitySegment],
               bucket_ns: int) -> list[tuple[int, str, int, int]]:
    """Per-bucket (index, dominant state, on_ns, off_ns) on a grid anchored at t=0.

    Coverage conserves mass: per bucket on_ns + off_ns equals the overlap
    of the lifetime with the bucket. Dominance ties go to off.
    """
    if bucket_ns <= 0:
        raise ValueError("bucket_ns must be positive")
    acc: dict[int, list[int]] = {}
    for seg in segments:
        t = seg.start
        while t < seg.end:
            idx = t // bucket_ns
            upto = min(seg.end, (idx + 1) * bucket_ns)
            cell = acc.get(idx)
            if cell is None:
                cell = acc[idx] = [0, 0]
            cell[0 if seg.state == ON else 1] += upto - t
            t = upto
    return [(idx, ON if on > off else OFF, on, off)
            for idx, (on, off) in sorted(acc.items())]
