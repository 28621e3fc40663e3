#!/usr/bin/env python3
"""Ingest throughput experiment: synthesize an N-event stream with a fixed
dictionary, run it through the full wire + pipeline + finalize path, and
report events/s plus peak traced memory.

    python3 scripts/bench_ingest.py [N_EVENTS] [--trace-memory]
"""

from __future__ import annotations

import sys
import tempfile
import time
import tracemalloc
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from profstream import ingest, store  # noqa: E402
from profstream.model import (  # noqa: E402
    End, Exit, FrameDef, MetricDesc, Sample, SessionHeader, Spawn, StackDef,
)
from profstream.protocol import encode_event  # noqa: E402

THREADS = 4
STACKS = 24
DEPTH = 6
RUN = 500  # samples on one stack before rotating


def lines(n_events: int):
    yield encode_event(SessionHeader(
        version=1, session_id="bench", wall_start=0, command="bench",
        hostname="bench", metrics=(MetricDesc("walltime", "time", "ns"),)))
    for fid in range(1, STACKS * DEPTH + 1):
        yield encode_event(FrameDef(fid=fid, function=f"fn{fid:03d}",
                                    file=f"f{fid % 9}.c", line=fid % 400,
                                    module="bench"))
    for sid in range(1, STACKS + 1):
        base = (sid - 1) * DEPTH
        yield encode_event(StackDef(sid=sid,
                                    frames=tuple(range(base + 1, base + DEPTH + 1))))
    tids = list(range(10, 10 + THREADS))
    for tid in tids:
        yield encode_event(Spawn(parent_tid=0 if tid == 10 else 10, pid=10,
                                 tid=tid, t=tid - 10, name=f"w{tid}", sid=1))
    cursors = {tid: 1000 + i for i, tid in enumerate(tids)}
    sid_of = {tid: (i % STACKS) + 1 for i, tid in enumerate(tids)}
    left = {tid: RUN for tid in tids}
    emitted = THREADS
    i = 0
    while emitted < n_events - THREADS - 1:
        tid = tids[i % THREADS]
        i += 1
        t = cursors[tid]
        yield encode_event(Sample(tid=tid, pid=10, t=t, metric_id="walltime",
                                  period=1000, sid=sid_of[tid]))
        cursors[tid] = t + 1000
        left[tid] -= 1
        if left[tid] == 0:
            sid_of[tid] = (sid_of[tid] % STACKS) + 1
            left[tid] = RUN
        emitted += 1
    for tid in tids:
        yield encode_event(Exit(tid=tid, t=cursors[tid]))
    yield encode_event(End(t=max(cursors.values()) + 10))


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 and sys.argv[1].isdigit() else 1_000_000
    trace = "--trace-memory" in sys.argv
    if trace:
        tracemalloc.start()
    with tempfile.TemporaryDirectory() as tmp:
        started = time.perf_counter()
        result = ingest.consume_stream(lines(n))
        ingested = time.perf_counter() - started
        path = store.finalize(result.bundle_objects(), tmp, result.session_id)
        total = time.perf_counter() - started
        print(f"{n} events: ingest {ingested:.2f}s "
              f"({n / ingested / 1e3:.0f}k events/s), finalize+ingest {total:.2f}s")
        print(f"bundle files: {sum(1 for _ in path.rglob('*') if _.is_file())}, "
              f"threads: {result.forest.node_count()}")
    if trace:
        _, peak = tracemalloc.get_traced_memory()
        print(f"peak traced memory: {peak / 1e6:.1f} MB")
    return 0


if __name__ == "__main__":
    sys.exit(main())
