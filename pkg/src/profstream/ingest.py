"""TCP listener and per-session assembly.

One session per connection: handshake, then a reorder buffer feeds the
tree/timeline/flame builders event by event, and `end` (or EOF, then
flagged truncated) triggers finalization into a bundle on disk. Strict
mode (default) aborts a session on the first bad line or invalid
reference; lenient mode drops and counts them.
"""

from __future__ import annotations

import heapq
import logging
import socketserver
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import flame, protocol, store, timeline
from .model import (
    DictState,
    End,
    EventRecord,
    Exec,
    Exit,
    FrameDef,
    Sample,
    SessionHeader,
    Spawn,
    StackDef,
    SwitchIn,
    SwitchOut,
    ValidationError,
    WALLTIME,
    resolve_stack,
    timestamp_of,
    validate_record,
)
from .tree import Forest, TreeError
from .timeline import SwitchPairer, TimelineError

log = logging.getLogger("profstream.ingest")

DEFAULT_LISTEN = ("127.0.0.1", 5971)
DEFAULT_REORDER_CAPACITY = 65536
ERROR_LOG_CAP = 100  # manifest keeps the first errors, flags keep the count


@dataclass
class IngestConfig:
    strict: bool = True
    reorder_capacity: int = DEFAULT_REORDER_CAPACITY
    merge_slack_ns: int = 0
    min_off_ns: int = 0


class HandshakeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class SessionAbort(Exception):
    """Raised internally to stop consuming a stream in strict mode."""


class _ThreadData:
    __slots__ = ("pairer", "flame", "chart")

    def __init__(self, strict: bool, merge_slack_ns: int, resolver):
        self.pairer = SwitchPairer(strict=strict)
        self.flame = flame.FlameBuilder(resolver)
        self.chart = flame.ChartBuilder(merge_slack_ns)


@dataclass
class SessionResult:
    """Finalized in-memory session, ready to persist or serve."""

    header: SessionHeader
    session_end: int
    truncated: bool
    forest: Forest
    timelines: dict[int, dict]  # tid -> timeline file object
    flames: dict[int, dict[str, dict]]  # tid -> {file name -> trie object}
    chrons: dict[int, dict]  # tid -> chron file object
    event_counts: dict[str, int]
    error_log: list[dict]
    flags: dict[str, int]
    check_report: list[dict] | None = None
    roofline: dict | None = None
    spawn_resolver: object = None  # sid -> resolved frame objects, or None

    @property
    def session_id(self) -> str:
        return self.header.session_id

    def manifest_obj(self) -> dict:
        return {
            "format_version": store.FORMAT_VERSION,
            "session_id": self.header.session_id,
            "wall_start": self.header.wall_start,
            "command": self.header.command,
            "hostname": self.header.hostname,
            "metrics": [{"id": m.id, "kind": m.kind, "unit": m.unit}
                        for m in self.header.metrics],
            "duration_ns": self.session_end,
            "thread_count": self.forest.node_count(),
            "truncated": self.truncated,
            "error_log": self.error_log,
            "event_counts": self.event_counts,
            "flags": self.flags,
            "check_report": self.check_report,
        }

    def bundle_objects(self) -> dict[str, object]:
        objects: dict[str, object] = {
            "manifest.json": self.manifest_obj(),
            "tree.json": self.tree_obj(),
        }
        for tid in sorted(self.timelines):
            objects[f"timeline/{tid}.json"] = self.timelines[tid]
            objects[f"chron/{tid}.json"] = self.chrons[tid]
            for name, obj in self.flames[tid].items():
                objects[f"flame/{tid}/{name}.json"] = obj
        if self.roofline is not None:
            objects["roofline.json"] = self.roofline
        return objects

    def tree_obj(self) -> dict:
        return self.forest.as_obj(self.spawn_resolver)


class SessionPipeline:
    """Single-writer assembly of one session (see module docstring)."""

    def __init__(self, config: IngestConfig | None = None,
                 check_report: list[dict] | None = None,
                 roofline: dict | None = None):
        self.config = config or IngestConfig()
        self.check_report = check_report
        self.roofline = roofline
        self.state = DictState()
        self.header: SessionHeader | None = None
        self.forest = Forest()
        self.threads: dict[int, _ThreadData] = {}
        self.event_counts: dict[str, int] = {}
        self.error_log: list[dict] = []
        self.flags: dict[str, int] = {}
        self.ended = False
        self.end_t = 0
        self._heap: list[tuple[int, int, EventRecord]] = []
        self._seq = 0
        self._last_emitted_t = 0
        self._max_t = 0
        self._metric_kinds: dict[str, str] = {}

    # -- error bookkeeping ------------------------------------------------

    def _flag(self, name: str, n: int = 1) -> None:
        self.flags[name] = self.flags.get(name, 0) + n

    def _record_error(self, position: int | None, code: str, detail: str) -> None:
        self._flag("errors")
        if len(self.error_log) < ERROR_LOG_CAP:
            self.error_log.append({"position": position, "error": code,
                                   "detail": detail})

    def _error(self, position: int | None, code: str, detail: str) -> None:
        """Strict: record and abort. Lenient: record and continue."""
        self._record_error(position, code, detail)
        if self.config.strict:
            self._flag("strict_abort")
            raise SessionAbort(f"{code}: {detail}")

    # -- stream entry points ----------------------------------------------

    def feed_line(self, raw: bytes, position: int) -> bool:
        """Consume one wire line; returns False once the stream ended."""
        if self.ended:
            return False
        try:
            event = protocol.decode_event(raw)
        except protocol.ProtocolError as exc:
            if self.header is None:
                raise HandshakeError(exc.code, exc.message) from None
            self._error(position, exc.code, exc.message)
            return True
        return self.feed_event(event, position)

    def feed_event(self, event: EventRecord, position: int) -> bool:
        if self.ended:
            return False
        if self.header is None:
            if not isinstance(event, SessionHeader):
                raise HandshakeError(protocol.HEADER_MISPLACED,
                                     "first record must be the session header")
            if event.version != protocol.WIRE_VERSION:
                raise HandshakeError(protocol.UNSUPPORTED_VERSION,
                                     f"wire version {event.version} not supported")
            self.header = event
            self.state.header_seen = True
            self.state.metric_ids = frozenset(m.id for m in event.metrics)
            self._metric_kinds = {m.id: m.kind for m in event.metrics}
            self._count("header")
            return True

        t = timestamp_of(event)
        if t is not None and type(event) is not End:
            # Timestamped events pass through the reorder buffer.
            if t > self._max_t:
                self._max_t = t
            if t < self._last_emitted_t:
                self._flag("reorder_overflow")
                self._emit(event, position, t)
                return True
            self._seq += 1
            heapq.heappush(self._heap, (t, self._seq, position, event))
            if len(self._heap) > self.config.reorder_capacity:
                et, _, pos, ev = heapq.heappop(self._heap)
                self._emit(ev, pos, et)
            return True

        if isinstance(event, SessionHeader):
            self._error(position, protocol.HEADER_MISPLACED, "second session header")
            return True
        if isinstance(event, (FrameDef, StackDef)):
            # Dictionary records carry no t and take effect immediately.
            try:
                validate_record(event, self.state)
            except ValidationError as exc:
                self._error(position, exc.code, exc.message)
                return True
            if isinstance(event, FrameDef):
                self.state.frames[event.fid] = event
                self._count("frame")
            else:
                self.state.stacks[event.sid] = event
                self._count("stack")
            return True
        assert isinstance(event, End)
        self._count("end")
        self.ended = True
        self.end_t = event.t
        self._drain()
        return False

    def _drain(self) -> None:
        while self._heap:
            t, _, pos, ev = heapq.heappop(self._heap)
            self._emit(ev, pos, t)

    # -- per-event processing (post-reorder, non-decreasing t) -------------

    def _count(self, kind: str) -> None:
        self.event_counts[kind] = self.event_counts.get(kind, 0) + 1

    def _thread(self, tid: int) -> _ThreadData:
        td = self.threads.get(tid)
        if td is None:
            td = _ThreadData(self.config.strict, self.config.merge_slack_ns,
                             self._resolve_sid)
            self.threads[tid] = td
        return td

    def _resolve_sid(self, sid: int):
        return resolve_stack(sid, self.state)

    def _emit(self, event: EventRecord, position: int, t: int) -> None:
        if t > self._last_emitted_t:
            self._last_emitted_t = t
        try:
            validate_record(event, self.state)
        except ValidationError as exc:
            self._flag("dropped_events")
            self._error(position, exc.code, exc.message)
            return
        try:
            self._dispatch(event, position)
        except TreeError as exc:
            self._flag("dropped_events")
            self._error(position, exc.code, exc.message)
        except TimelineError as exc:
            self._error(position, exc.code, exc.message)

    def _dispatch(self, event: EventRecord, position: int) -> None:
        forest = self.forest
        if isinstance(event, Sample):
            self._count("sample")
            forest.check_live(event.tid, event.t)
            forest.touch(event.tid, event.t, pid=event.pid)
            td = self._thread(event.tid)
            td.flame.add_sample(event.sid, event.metric_id, event.period)
            if event.metric_id == WALLTIME:
                td.chart.add(flame.HOT, event.t, event.period, event.sid)
        elif isinstance(event, SwitchOut):
            self._count("switch_out")
            forest.check_live(event.tid, event.t)
            forest.touch(event.tid, event.t)
            self._thread(event.tid).pairer.feed_out(event.t, event.sid)
        elif isinstance(event, SwitchIn):
            self._count("switch_in")
            forest.check_live(event.tid, event.t)
            forest.touch(event.tid, event.t)
            self._thread(event.tid).pairer.feed_in(event.t)
        elif isinstance(event, Spawn):
            self._count("spawn")
            forest.apply_spawn(event.parent_tid, event.pid, event.tid,
                               event.t, event.name, event.sid)
        elif isinstance(event, Exec):
            self._count("exec")
            forest.check_live(event.tid, event.t)
            forest.apply_exec(event.tid, event.t, event.name)
        elif isinstance(event, Exit):
            self._count("exit")
            forest.check_live(event.tid, event.t)
            forest.apply_exit(event.tid, event.t)

    # -- finalization -------------------------------------------------------

    def finish(self, truncated: bool = False) -> SessionResult:
        if self.header is None:
            raise HandshakeError("HandshakeFailed", "stream ended before the header")
        if not self.ended:
            truncated = True
            self._drain()
        session_end = max(self.end_t, self._max_t)
        self.forest.finalize(session_end)

        timelines: dict[int, dict] = {}
        flames: dict[int, dict[str, dict]] = {}
        chrons: dict[int, dict] = {}
        counted_metrics = [m.id for m in self.header.metrics if m.id != WALLTIME]
        for tid in sorted(self.forest.nodes):
            node = self.forest.nodes[tid]
            lifetime = (node.spawn_t, node.exit_t)
            td = self.threads.get(tid)
            if td is None:
                td = _ThreadData(False, self.config.merge_slack_ns, self._resolve_sid)
            off = td.pairer.finish(node.exit_t)
            counters = td.pairer.counters()
            off = timeline.normalize_off(off, lifetime)
            off = timeline.drop_short_off(off, self.config.min_off_ns)
            for iv in off:
                td.flame.add_off(iv.sid, iv.end - iv.start)
                td.chart.add(flame.COLD, iv.start, iv.end - iv.start, iv.sid)
            segments = timeline.build_segments(off, lifetime)
            timelines[tid] = store.segments_obj(tid, lifetime, segments, counters)
            spans = td.chart.finish()
            chrons[tid] = self._chron_obj(tid, spans)
            files = {"walltime_hotcold": store.trie_hotcold_obj(td.flame.root)}
            for metric in counted_metrics:
                files[metric] = store.trie_metric_obj(td.flame.root, metric)
            flames[tid] = files

        result = SessionResult(
            header=self.header,
            session_end=session_end,
            truncated=truncated,
            forest=self.forest,
            timelines=timelines,
            flames=flames,
            chrons=chrons,
            event_counts=self.event_counts,
            error_log=self.error_log,
            flags=self.flags,
            check_report=self.check_report,
            roofline=self.roofline,
            spawn_resolver=self._frames_for_sid,
        )
        return result

    def _frames_for_sid(self, sid: int):
        if sid not in self.state.stacks:
            return None
        return [store.frame_obj(f) for f in self._resolve_sid(sid)]

    def _chron_obj(self, tid: int, spans: list[flame.ChartSpan]) -> dict:
        sids = sorted({s.sid for s in spans})
        return {
            "tid": tid,
            "spans": [{"t_start": s.t_start, "duration_ns": s.duration_ns,
                       "sid": s.sid, "channel": s.channel} for s in spans],
            "stacks": {str(sid): self._frames_for_sid(sid) for sid in sids},
        }


def iter_wire_lines(stream) -> Iterator[bytes]:
    """Lines off a binary stream, tolerating an unterminated final line.

    Oversized lines (beyond the protocol cap) are yielded as one oversize
    chunk so the decoder classifies them, then skipped to the next LF.
    """
    cap = protocol.MAX_LINE_BYTES + 2
    while True:
        chunk = stream.readline(cap)
        if not chunk:
            return
        if len(chunk) >= cap and not chunk.endswith(b"\n"):
            while True:  # discard the rest of the oversized line
                rest = stream.readline(cap)
                if not rest or rest.endswith(b"\n"):
                    break
        yield chunk


def consume_stream(lines: Iterable[bytes], config: IngestConfig | None = None,
                   check_report: list[dict] | None = None,
                   roofline: dict | None = None) -> SessionResult:
    """Run a whole wire stream through a fresh pipeline.

    Raises HandshakeError if the first line is unusable; any later failure
    still produces a finalized (possibly truncated/flagged) result.
    """
    pipe = SessionPipeline(config, check_report=check_report, roofline=roofline)
    position = 0
    truncated = True
    try:
        for raw in lines:
            position += 1
            if not pipe.feed_line(raw, position):
                truncated = False
                break
    except SessionAbort:
        truncated = True
    return pipe.finish(truncated)


class SessionServer(socketserver.ThreadingTCPServer):
    """One profiling session per TCP connection; bundles under output_root.

    Handler threads are joined on server_close, so shutting down via
    close_active() lets in-flight sessions finalize (as truncated) first.
    """

    daemon_threads = False
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], output_root: str | Path,
                 config: IngestConfig | None = None, on_bundle=None):
        self.output_root = Path(output_root)
        self.config = config or IngestConfig()
        self.on_bundle = on_bundle
        self.session_extras: dict = {}  # check_report/roofline for embedded runs
        self._conn_lock = threading.Lock()
        self._open_conns: set = set()
        super().__init__(address, _SessionHandler)

    @property
    def bound_address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def track(self, conn, add: bool) -> None:
        with self._conn_lock:
            if add:
                self._open_conns.add(conn)
            else:
                self._open_conns.discard(conn)

    def close_active(self) -> None:
        """Force EOF on in-flight sessions so they finalize as truncated."""
        with self._conn_lock:
            conns = list(self._open_conns)
        for conn in conns:
            try:
                conn.shutdown(2)
            except OSError:
                pass


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: SessionServer = self.server  # type: ignore[assignment]
        server.track(self.connection, True)
        try:
            extras = dict(server.session_extras)
            result = consume_stream(iter_wire_lines(self.rfile), server.config,
                                    check_report=extras.get("check_report"),
                                    roofline=extras.get("roofline"))
        except HandshakeError as exc:
            log.warning("handshake failed: %s", exc)
            return
        finally:
            server.track(self.connection, False)
        path = store.finalize(result.bundle_objects(), server.output_root,
                              result.session_id)
        log.info("session %s finalized at %s%s", result.session_id, path,
                 " (truncated)" if result.truncated else "")
        if server.on_bundle is not None:
            server.on_bundle(path, result)
