"""Independent brute-force oracles the pipeline implementations are checked
against. These stay deliberately naive: plain per-prefix folds over event
lists, never touching the trie/segment code they verify."""

from __future__ import annotations

import re
from collections import defaultdict


def frame_key(frame) -> tuple:
    return (frame.function, frame.file, frame.module)


def rootward_path(sid: int, stacks: dict, frames: dict) -> tuple:
    """Root-first tuple of frame keys for a dictionary-encoded stack."""
    leaf_first = stacks[sid].frames
    return tuple(frame_key(frames[fid]) for fid in reversed(leaf_first))


def naive_inclusive(samples, off, stacks, frames):
    """Per-prefix fold: {path: {channel: value}} plus root totals.

    samples: (sid, metric_id, period); off: (sid, duration_ns).
    Channels are metric ids plus "hot_ns"/"cold_ns".
    """
    table: dict[tuple, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    totals: dict[str, int] = defaultdict(int)
    for sid, metric_id, period in samples:
        path = rootward_path(sid, stacks, frames)
        totals[metric_id] += period
        if metric_id == "walltime":
            totals["hot_ns"] += period
        for i in range(1, len(path) + 1):
            cell = table[path[:i]]
            cell[metric_id] += period
            if metric_id == "walltime":
                cell["hot_ns"] += period
    for sid, duration in off:
        path = rootward_path(sid, stacks, frames)
        totals["cold_ns"] += duration
        for i in range(1, len(path) + 1):
            table[path[:i]]["cold_ns"] += duration
    return {p: dict(v) for p, v in table.items()}, dict(totals)


def flatten_trie(root) -> dict[tuple, dict[str, int]]:
    """FlameNode trie -> {path of frame keys: non-zero channels}."""
    out: dict[tuple, dict[str, int]] = {}

    def walk(node, path):
        for child in node.child_list():
            p = path + (tuple(child.key),)
            channels = {}
            for metric, value in child.values.items():
                if value:
                    channels[metric] = value
            if child.hot_ns:
                channels["hot_ns"] = child.hot_ns
            if child.cold_ns:
                channels["cold_ns"] = child.cold_ns
            out[p] = channels
            walk(child, p)

    walk(root, ())
    return out


def naive_search_fraction(table: dict[tuple, dict[str, int]],
                          totals: dict[str, int], pattern: str) -> dict[str, float]:
    """Maximal-matched-subtree fractions by full enumeration of path prefixes."""
    rx = re.compile(pattern)

    def matched(path: tuple) -> bool:
        return rx.search(path[-1][0]) is not None  # key[0] is the function name

    maximal = [p for p in table
               if matched(p) and not any(matched(p[:i]) for i in range(1, len(p)))]
    sums: dict[str, int] = {ch: 0 for ch in totals}
    for p in maximal:
        for ch, v in table[p].items():
            if ch in sums:
                sums[ch] += v
    return {ch: (sums[ch] / total if total else 0.0)
            for ch, total in totals.items()}


def naive_bucket_coverage(segments, bucket_ns: int):
    """Brute-force interval intersection of segments with the bucket grid."""
    acc: dict[int, dict[str, int]] = defaultdict(lambda: {"on": 0, "off": 0})
    for seg in segments:
        lo_bucket = seg.start // bucket_ns
        hi_bucket = (seg.end - 1) // bucket_ns
        for idx in range(lo_bucket, hi_bucket + 1):
            b_lo, b_hi = idx * bucket_ns, (idx + 1) * bucket_ns
            overlap = min(seg.end, b_hi) - max(seg.start, b_lo)
            if overlap > 0:
                acc[idx][seg.state] += overlap
    return dict(acc)
