"""Flame graph tries, chronological flame charts, and regex search.

One trie per thread carries every channel: per-metric inclusive values,
hot (on-CPU) and cold (off-CPU) nanoseconds, and a per-line histogram at
leaf frames. Trie identity is (function, file, module); line numbers are
kept out of the key so the per-line breakdown does not split nodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .model import FrameDef, WALLTIME

UNRESOLVABLE_STACK = "UnresolvableStack"
INVALID_PATTERN = "InvalidPattern"
UNKNOWN_METRIC = "UnknownMetric"

HOT = "hot"
COLD = "cold"

ROOT_FUNCTION = "(all)"


class FlameError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class FrameKey(NamedTuple):
    function: str
    file: str | None
    module: str | None


ROOT_KEY = FrameKey(ROOT_FUNCTION, None, None)


def _key_order(key: FrameKey):
    # Total order even with optional fields; None sorts before any string.
    return (key.function, key.file is not None, key.file or "",
            key.module is not None, key.module or "")


class FlameNode:
    """Trie node; values are inclusive (own + all descendants)."""

    __slots__ = ("key", "values", "hot_ns", "cold_ns", "line_hist", "children")

    def __init__(self, key: FrameKey):
        self.key = key
        self.values: dict[str, int] = {}
        self.hot_ns = 0
        self.cold_ns = 0
        self.line_hist: dict[str, dict[int, int]] = {}
        self.children: dict[FrameKey, FlameNode] = {}

    def child_list(self) -> list["FlameNode"]:
        return [self.children[k] for k in sorted(self.children, key=_key_order)]

    def channels(self) -> dict[str, int]:
        return {"hot_ns": self.hot_ns, "cold_ns": self.cold_ns, **self.values}


class FlameBuilder:
    """Streaming trie construction for one thread.

    resolve_stack maps sid -> leaf-first FrameDef list; resolved paths are
    cached per sid, so repeated samples on hot stacks cost one dict walk.
    """

    def __init__(self, resolve_stack: Callable[[int], list[FrameDef]]):
        self.root = FlameNode(ROOT_KEY)
        self._resolve = resolve_stack
        self._paths: dict[int, tuple[tuple[FlameNode, ...], int | None]] = {}

    def _path(self, sid: int) -> tuple[tuple[FlameNode, ...], int | None]:
        cached = self._paths.get(sid)
        if cached is not None:
            return cached
        try:
            frames = self._resolve(sid)
        except KeyError:
            raise FlameError(UNRESOLVABLE_STACK, f"sid {sid} not defined") from None
        node = self.root
        nodes = [node]
        for f in reversed(frames):  # leaf-first on the wire, root-first in the trie
            key = FrameKey(f.function, f.file, f.module)
            nxt = node.children.get(key)
            if nxt is None:
                nxt = node.children[key] = FlameNode(key)
            node = nxt
            nodes.append(node)
        leaf_line = frames[0].line if frames else None
        entry = (tuple(nodes), leaf_line)
        self._paths[sid] = entry
        return entry

    def add_sample(self, sid: int, metric_id: str, period: int) -> None:
        nodes, leaf_line = self._path(sid)
        hot = metric_id == WALLTIME
        for node in nodes:
            vals = node.values
            vals[metric_id] = vals.get(metric_id, 0) + period
            if hot:
                node.hot_ns += period
        if leaf_line is not None:
            hist = nodes[-1].line_hist.setdefault(metric_id, {})
            hist[leaf_line] = hist.get(leaf_line, 0) + period

    def add_off(self, sid: int, duration_ns: int) -> None:
        nodes, _ = self._path(sid)
        for node in nodes:
            node.cold_ns += duration_ns


def aggregate(samples: Iterable[tuple[int, str, int]],
              off: Iterable[tuple[int, int]],
              resolve_stack: Callable[[int], list[FrameDef]]) -> FlameNode:
    """Fold (sid, metric_id, period) samples and (sid, duration_ns) off
    intervals into a fresh trie; returns the root."""
    b = FlameBuilder(resolve_stack)
    for sid, metric_id, period in samples:
        b.add_sample(sid, metric_id, period)
    for sid, duration in off:
        b.add_off(sid, duration)
    return b.root


def line_breakdown(node: FlameNode, metric_id: str) -> list[tuple[int, int]]:
    """(line, value) pairs, largest value first, ties by ascending line."""
    hist = node.line_hist.get(metric_id, {})
    return sorted(hist.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True, slots=True)
class ChartSpan:
    t_start: int
    duration_ns: int
    sid: int
    channel: str  # HOT | COLD


class ChartBuilder:
    """Chronological flame chart for one thread.

    Hot spans come from walltime samples ([t, t+period)), cold spans from
    off intervals. Consecutive same-channel spans with equal sid merge
    when the gap is within merge_slack_ns; merging sums durations, so
    total span duration always equals total input duration. A span that
    cannot merge but would overlap its predecessor is laid end-to-end.
    """

    def __init__(self, merge_slack_ns: int = 0):
        self.slack = merge_slack_ns
        self._per_channel: dict[str, list[list[int]]] = {HOT: [], COLD: []}

    def add(self, channel: str, t_start: int, duration_ns: int, sid: int) -> None:
        if duration_ns <= 0:
            return
        spans = self._per_channel[channel]
        if spans:
            last = spans[-1]
            last_end = last[0] + last[1]
            if sid == last[2] and t_start <= last_end + self.slack:
                last[1] += duration_ns
                return
            if t_start < last_end:
                t_start = last_end
        spans.append([t_start, duration_ns, sid])

    def finish(self) -> list[ChartSpan]:
        out = [ChartSpan(s[0], s[1], s[2], ch)
               for ch in (HOT, COLD) for s in self._per_channel[ch]]
        out.sort(key=lambda s: (s.t_start, s.channel))
        return out


def chronological(walltime_samples: Iterable[tuple[int, int, int]],
                  off: Iterable[tuple[int, int, int]],
                  merge_slack_ns: int = 0) -> list[ChartSpan]:
    """Spans for (t, period, sid) samples and (start, end, sid) off intervals,
    each iterable sorted by time."""
    b = ChartBuilder(merge_slack_ns)
    for t, period, sid in walltime_samples:
        b.add(HOT, t, period, sid)
    for start, end, sid in off:
        b.add(COLD, start, end - start, sid)
    return b.finish()


@dataclass
class SearchResult:
    paths: list[tuple[str, ...]]  # maximal matched subtree roots, DFS order
    fractions: dict[str, float]  # per channel: matched inclusive / root inclusive


def _compile(pattern: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise FlameError(INVALID_PATTERN, f"bad pattern {pattern!r}: {exc}") from None


def _search_walk(root, children_of, function_of, channels_of, rx) -> SearchResult:
    totals = channels_of(root)
    matched = {ch: 0 for ch in totals}
    paths: list[tuple[str, ...]] = []

    def walk(node, path):
        # A match claims the whole subtree; nothing below adds extra mass.
        if rx.search(function_of(node)):
            paths.append(path)
            for ch, v in channels_of(node).items():
                if ch in matched:
                    matched[ch] += v
            return
        for child in children_of(node):
            walk(child, path + (function_of(child),))

    for child in children_of(root):
        walk(child, (function_of(child),))
    fractions = {ch: (matched[ch] / total if total else 0.0)
                 for ch, total in totals.items()}
    return SearchResult(paths=paths, fractions=fractions)


def search(root: FlameNode, pattern: str) -> SearchResult:
    """Unanchored regex match over function names; the synthetic root never
    matches. Fractions are per channel (hot_ns, cold_ns, each metric)."""
    rx = _compile(pattern)
    return _search_walk(root, FlameNode.child_list,
                        lambda n: n.key.function, FlameNode.channels, rx)


def search_view(root_obj: dict, pattern: str,
                channel_keys: tuple[str, ...]) -> SearchResult:
    """Same search over a serialized trie object (see store)."""
    rx = _compile(pattern)
    return _search_walk(
        root_obj,
        lambda n: n["children"],
        lambda n: n["function"],
        lambda n: {ch: n[ch] for ch in channel_keys},
        rx,
    )
