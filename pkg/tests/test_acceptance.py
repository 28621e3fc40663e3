"""Acceptance gate: every criterion runs here at its stated tolerance and
prints one [PASS]/[FAIL] line (visible with pytest -s)."""

from __future__ import annotations

import json
import random
import resource
import socket
import threading
import time
import tracemalloc
from contextlib import contextmanager
from pathlib import Path

import pytest

import generators
import oracles
from conftest import DATA, http_get, wire_lines
from profstream import collector, envcheck, flame, ingest, protocol, store
from profstream.model import (
    End,
    Exit,
    FrameDef,
    MetricDesc,
    Sample,
    SessionHeader,
    Spawn,
    StackDef,
    WALLTIME,
)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


# -- 1. conservation ---------------------------------------------------------

def test_conservation_over_random_sessions():
    with criterion("conservation: sum(on)+sum(off) = lifetime; root channels = "
                   "summed periods (200 random sessions)"):
        started = time.perf_counter()
        for seed in range(200):
            rng = random.Random(seed)
            gen = generators.generate_session(rng, max_threads=50, max_events=10_000)
            result = ingest.consume_stream(gen.wire_lines())
            assert not result.truncated and result.error_log == [], seed

            for tid, node in result.forest.nodes.items():
                segments = result.timelines[tid]["segments"]
                on = sum(s["end"] - s["start"] for s in segments
                         if s["state"] == "on")
                off = sum(s["end"] - s["start"] for s in segments
                          if s["state"] == "off")
                assert on + off == node.exit_t - node.spawn_t, (seed, tid)

                sums = gen.period_sums.get(tid, {})
                hotcold = result.flames[tid]["walltime_hotcold"]
                assert hotcold["hot_ns"] == sums.get(WALLTIME, 0), (seed, tid)
                for metric in sums:
                    if metric == WALLTIME:
                        continue
                    assert result.flames[tid][metric]["value"] == sums[metric], \
                        (seed, tid, metric)
        elapsed = time.perf_counter() - started
        assert elapsed < 60, f"conservation suite took {elapsed:.1f}s"


# -- 2. oracle equivalence ---------------------------------------------------

def test_oracle_equivalence_trie_and_search():
    with criterion("oracle equivalence: trie fold and search fractions match "
                   "brute force exactly"):
        rng = random.Random(20_250)
        frames = {fid: FrameDef(fid=fid, function=f"fn{fid:02d}",
                                file=f"f{fid % 5}.c" if fid % 3 else None,
                                line=fid if fid % 2 else None,
                                module="m" if fid % 4 == 0 else None)
                  for fid in range(1, 60)}
        fids = list(frames)
        stacks = {sid: StackDef(sid=sid, frames=tuple(
            rng.choice(fids) for _ in range(rng.randrange(1, 33))))
            for sid in range(1, 120)}
        sids = list(stacks)

        def resolve(sid):
            return [frames[fid] for fid in stacks[sid].frames]

        samples = [(rng.choice(sids), rng.choice(["walltime", "page-faults"]),
                    rng.randrange(1, 10_000)) for _ in range(10_000)]
        off = [(rng.choice(sids), rng.randrange(1, 100_000)) for _ in range(1_000)]
        root = flame.aggregate(samples, off, resolve)
        table, totals = oracles.naive_inclusive(samples, off, stacks, frames)
        assert oracles.flatten_trie(root) == table
        assert root.hot_ns == totals["hot_ns"]
        assert root.cold_ns == totals["cold_ns"]
        assert root.values["walltime"] == totals["walltime"]

        # Search equivalence runs on its own trie, kept under 1e3 nodes.
        small_frames = {fid: FrameDef(fid=fid, function=f"fn{fid:02d}",
                                      file="s.c" if fid % 2 else None, line=fid)
                        for fid in range(1, 20)}
        small_stacks = {sid: StackDef(sid=sid, frames=tuple(
            rng.choice(list(small_frames)) for _ in range(rng.randrange(1, 8))))
            for sid in range(1, 50)}

        def resolve_small(sid):
            return [small_frames[fid] for fid in small_stacks[sid].frames]

        small_samples = [(rng.choice(list(small_stacks)),
                          rng.choice(["walltime", "page-faults"]),
                          rng.randrange(1, 10_000)) for _ in range(3_000)]
        small_off = [(rng.choice(list(small_stacks)), rng.randrange(1, 100_000))
                     for _ in range(300)]
        root = flame.aggregate(small_samples, small_off, resolve_small)
        table, totals = oracles.naive_inclusive(small_samples, small_off,
                                                small_stacks, small_frames)
        assert oracles.flatten_trie(root) == table
        assert len(table) <= 1_000, "search oracle is specified for tries <= 1e3 nodes"
        for pattern in ["fn0", "fn1$", "fn(2|3)", "fn[0-2]5", "zzz", ".*", "fn05"]:
            got = flame.search(root, pattern).fractions
            want = oracles.naive_search_fraction(table, totals, pattern)
            for channel, value in want.items():
                assert got[channel] == value, (pattern, channel)


# -- 3. determinism and reorder invariance -----------------------------------

def bundle_bytes(path: Path) -> dict[str, bytes]:
    return {str(p.relative_to(path)): p.read_bytes()
            for p in sorted(path.rglob("*")) if p.is_file()}


def _run_session_over_tcp(lines: list[bytes], out_root: Path) -> Path:
    server = ingest.SessionServer(("127.0.0.1", 0), out_root)
    done = threading.Event()
    paths: list[Path] = []
    server.on_bundle = lambda path, result: (paths.append(path), done.set())
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        with socket.create_connection(server.bound_address) as sock:
            sock.sendall(b"".join(lines))
        assert done.wait(timeout=30)
    finally:
        server.shutdown()
        server.server_close()
    return paths[0]


def test_determinism_and_reorder_invariance(tmp_path, golden_script):
    with criterion("determinism: golden replay x2 and displacement<=1000 shuffle "
                   "give byte-identical bundles"):
        lines = wire_lines(golden_script.stream())
        a = _run_session_over_tcp(lines, tmp_path / "a")
        b = _run_session_over_tcp(lines, tmp_path / "b")

        header, *rest = golden_script.stream()
        dict_events = [e for e in rest if isinstance(e, (FrameDef, StackDef))]
        timed = [e for e in rest if not isinstance(e, (FrameDef, StackDef, End))]
        shuffled = generators.bounded_shuffle(timed, 1000, random.Random(3))
        assert shuffled != timed  # the permutation actually moved something
        shuffled_lines = wire_lines([header, *dict_events, *shuffled,
                                     golden_script.events[-1]])
        c = _run_session_over_tcp(shuffled_lines, tmp_path / "c")

        ba, bb, bc = bundle_bytes(a), bundle_bytes(b), bundle_bytes(c)
        assert ba == bb
        assert ba == bc


# -- 4. wire fuzzing -----------------------------------------------------------

KNOWN_CODES = {"MalformedSyntax", "UnknownEventType", "MissingField",
               "WrongFieldType", "OversizeRecord"}

VALID_LINES = [
    b'{"type":"end","t":12}',
    b'{"type":"exit","tid":4,"t":9}',
    b'{"type":"frame","fid":2,"function":"f","file":"a.c","line":3,"module":"m"}',
    b'{"type":"stack","sid":3,"frames":[2]}',
    b'{"type":"sample","tid":1,"pid":1,"t":5,"metric_id":"walltime","period":2,"sid":3}',
    b'{"type":"spawn","parent_tid":0,"pid":1,"tid":1,"t":0,"name":"x","sid":3}',
]


def test_wire_fuzzing_never_crashes():
    with criterion("wire fuzzing: 1e5 random byte-lines all classified, "
                   "zero crashes"):
        rng = random.Random(0xF022)
        started = time.perf_counter()
        classified = 0
        decoded = 0
        for i in range(100_000):
            mode = rng.randrange(4)
            if mode == 0:
                line = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 80)))
            elif mode == 1:
                line = bytes(rng.choice(b'{}[]",:truefalsenull0123456789abc \t')
                             for _ in range(rng.randrange(0, 120)))
            elif mode == 2:
                base = bytearray(rng.choice(VALID_LINES))
                for _ in range(rng.randrange(0, 6)):
                    pos = rng.randrange(len(base))
                    base[pos] = rng.randrange(256)
                line = bytes(base)
            else:
                line = rng.choice(VALID_LINES)
            try:
                protocol.decode_event(line)
                decoded += 1
            except protocol.ProtocolError as exc:
                assert exc.code in KNOWN_CODES, (exc.code, line[:60])
                classified += 1
        elapsed = time.perf_counter() - started
        assert decoded + classified == 100_000
        assert decoded > 0 and classified > 0
        assert elapsed < 30, f"fuzzing took {elapsed:.1f}s"


# -- 5. round-trips ------------------------------------------------------------

def test_round_trips_encode_decode_and_store():
    with criterion("round-trips: encode/decode identity and store "
                   "finalize/load identity"):
        for seed in range(25):
            gen = generators.generate_session(random.Random(5000 + seed),
                                              max_threads=10, max_events=600)
            for event in gen.stream():
                assert protocol.decode_event(protocol.encode_event(event)) == event

        import tempfile
        for seed in range(8):
            gen = generators.generate_session(random.Random(7000 + seed),
                                              max_threads=8, max_events=400)
            result = ingest.consume_stream(gen.wire_lines())
            objects = result.bundle_objects()
            with tempfile.TemporaryDirectory() as tmp:
                path = store.finalize(objects, tmp, result.session_id)
                loaded = store.load(path)
                assert loaded.objects == json.loads(json.dumps(objects))


# -- 6. environment checks -----------------------------------------------------

ENV_GRID = [
    ("127", "0", ["fail", "pass"], 1),
    ("127", "1", ["fail", "fail"], 1),
    ("127", None, ["fail", "unknown"], 1),
    ("1024", "0", ["pass", "pass"], 0),
    ("1024", "1", ["pass", "fail"], 1),
    ("1024", None, ["pass", "unknown"], 0),
    (None, "0", ["unknown", "pass"], 0),
    (None, "1", ["unknown", "fail"], 1),
    (None, None, ["unknown", "unknown"], 0),
]


def test_env_check_grid_and_exit_codes(monkeypatch, capsys):
    from profstream import cli

    with criterion("env checks: 3x3 fixture grid statuses and check exit "
                   "codes 0/1/2"):
        for max_stack, numa, expected, plain_code in ENV_GRID:
            values = {}
            if max_stack is not None:
                values[envcheck.MAX_STACK_KNOB] = max_stack
            if numa is not None:
                values[envcheck.NUMA_BALANCING_KNOB] = numa
            reader = envcheck.FixtureReader(values)
            results = envcheck.run_all(reader, policy=envcheck.WARN)
            assert [r.status for r in results] == expected, (max_stack, numa)

            monkeypatch.setattr(envcheck, "KnobReader", lambda v=values: (
                envcheck.FixtureReader(v)))
            assert cli.main(["check"]) == plain_code, (max_stack, numa)
            strict_code = cli.main(["check", "--strict-unknown"])
            has_fail = "fail" in expected
            has_unknown = "unknown" in expected
            assert strict_code == (1 if has_fail else (2 if has_unknown else 0))
        capsys.readouterr()  # swallow the report prints


# -- 7. API contract -----------------------------------------------------------

def test_api_contract_matches_committed_snapshots(api_server):
    with criterion("API contract: committed snapshot bodies, 400 on bad regex, "
                   "404 on unknown tid"):
        index = json.loads((DATA / "snapshots" / "index.json").read_text())
        assert len(index) >= 10
        for name, entry in index.items():
            status, body = http_get(api_server, entry["path"])
            assert status == 200, (name, status)
            expected = (DATA / "snapshots" / entry["file"]).read_bytes()
            assert body == expected, f"snapshot drift: {name}"

        status, body = http_get(
            api_server, "/api/v1/sessions/golden/threads/101/flame/search?q=%28")
        assert status == 400
        assert json.loads(body)["error_code"] == "InvalidPattern"

        status, _ = http_get(api_server,
                             "/api/v1/sessions/golden/threads/424242/timeline")
        assert status == 404


# -- 8. throughput sanity ------------------------------------------------------

N_THREADS = 4
N_STACKS = 24
STACK_DEPTH = 6
RUN_LENGTH = 500  # samples per (thread, stack) run; keeps chart spans merged


def _bulk_lines(n_events: int):
    """Deterministic high-volume stream with a fixed-size dictionary."""
    metrics = (MetricDesc(WALLTIME, "time", "ns"), MetricDesc("page-faults", "count", "f"))
    yield protocol.encode_event(SessionHeader(
        version=1, session_id=f"bulk-{n_events}", wall_start=7, command="bulk",
        hostname="bench", metrics=metrics))
    for fid in range(1, N_STACKS * STACK_DEPTH + 1):
        yield protocol.encode_event(FrameDef(
            fid=fid, function=f"fn{fid:03d}", file=f"f{fid % 9}.c", line=fid % 400,
            module="bulk"))
    for sid in range(1, N_STACKS + 1):
        base = (sid - 1) * STACK_DEPTH
        yield protocol.encode_event(StackDef(
            sid=sid, frames=tuple(range(base + 1, base + STACK_DEPTH + 1))))
    tids = list(range(10, 10 + N_THREADS))
    for tid in tids:
        yield protocol.encode_event(Spawn(parent_tid=0 if tid == 10 else 10,
                                          pid=10, tid=tid, t=tid - 10,
                                          name=f"w{tid}", sid=1))
    emitted = N_THREADS
    cursors = {tid: 1000 + i for i, tid in enumerate(tids)}
    sid_run = {tid: (i % N_STACKS) + 1 for i, tid in enumerate(tids)}
    run_left = {tid: RUN_LENGTH for tid in tids}
    i = 0
    while emitted < n_events - (N_THREADS + 1):
        tid = tids[i % N_THREADS]
        i += 1
        period = 1000
        t = cursors[tid]
        yield protocol.encode_event(Sample(tid=tid, pid=10, t=t,
                                           metric_id=WALLTIME, period=period,
                                           sid=sid_run[tid]))
        cursors[tid] = t + period  # contiguous: chart spans merge
        run_left[tid] -= 1
        if run_left[tid] == 0:
            sid_run[tid] = (sid_run[tid] % N_STACKS) + 1
            run_left[tid] = RUN_LENGTH
        emitted += 1
    end_t = max(cursors.values()) + 10
    for tid in tids:
        yield protocol.encode_event(Exit(tid=tid, t=cursors[tid]))
        emitted += 1
    yield protocol.encode_event(End(t=end_t))


def _ingest_bulk(n_events: int, out_root: Path) -> tuple[float, Path]:
    started = time.perf_counter()
    result = ingest.consume_stream(_bulk_lines(n_events))
    path = store.finalize(result.bundle_objects(), out_root, result.session_id)
    return time.perf_counter() - started, path


def test_throughput_and_memory_shape(tmp_path):
    with criterion("throughput: 1e6-event ingest+finalize < 30 s, < 1 GiB peak, "
                   "memory tracks dictionary+trie size not event count"):
        elapsed, path = _ingest_bulk(1_000_000, tmp_path / "big")
        assert elapsed < 30, f"1e6-event ingest took {elapsed:.1f}s"
        manifest = json.loads((path / "manifest.json").read_text())
        assert manifest["event_counts"]["sample"] > 990_000
        assert manifest["truncated"] is False

        peak_rss_bytes = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
        assert peak_rss_bytes < 1 << 30, f"peak rss {peak_rss_bytes / 1e9:.2f} GB"

        tracemalloc.start()
        _ingest_bulk(100_000, tmp_path / "small-traced")
        _, small_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()

        tracemalloc.start()
        _ingest_bulk(1_000_000, tmp_path / "big-traced")
        _, big_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()

        # Ten times the events of identical shape must not cost ten times
        # the memory; the live state is the dictionary, tries, and the
        # bounded reorder buffer.
        assert big_peak < small_peak * 3 + (32 << 20), (small_peak, big_peak)
        print(f"  (1e6 events in {elapsed:.1f}s; traced peaks "
              f"{small_peak / 1e6:.0f} MB vs {big_peak / 1e6:.0f} MB)")
