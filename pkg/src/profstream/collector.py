"""Collector-side adapters: producers of the event stream for a session.

The replay adapter turns a human-writable trace script into a full wire
stream, deterministically, so the whole pipeline runs on any platform
with no kernel sampler. A thin live adapter can wrap an external sampler
that already emits trace-script text (the sampler does all symbolication).

Trace script format (one directive per line, '#' comments, shlex quoting):

    session <session_id> <wall_start> <hostname> <command...>
    metric <id> <time|count> <unit>
    frame <fid> <function> [file|-] [line|-] [module|-]
    stack <sid> <fid;fid;...>              # leaf-first
    spawn <parent_tid> <pid> <tid> <t> <name> [sid]
    exec <tid> <t> <name>
    exit <tid> <t>
    sample <tid> <pid> <t> <metric_id> <period> <sid>
    switch_out <tid> <t> <sid>
    switch_in <tid> <t>
    end <t>

The walltime metric is implicit; `session` and `end` are optional
(defaults: script stem, wall_start 0, end at the latest timestamp).
"""

from __future__ import annotations

import shlex
import socket
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import protocol
from .model import (
    DictState,
    End,
    EventRecord,
    Exec,
    Exit,
    FrameDef,
    KIND_COUNT,
    KIND_TIME,
    MetricDesc,
    Sample,
    SessionHeader,
    Spawn,
    StackDef,
    SwitchIn,
    SwitchOut,
    ValidationError,
    WALLTIME,
    timestamp_of,
    validate_record,
)

AS_FAST_AS_POSSIBLE = "fast"
REAL_TIME = "realtime"


class ScriptParseError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ServerUnreachable(Exception):
    pass


class AdapterUnavailable(Exception):
    pass


@dataclass
class TraceScript:
    header: SessionHeader
    events: list[EventRecord]  # dictionary + timestamped events, script order

    def stream(self) -> list[EventRecord]:
        return [self.header, *self.events]


def _opt(fields: list[str], idx: int) -> str | None:
    if idx >= len(fields) or fields[idx] == "-":
        return None
    return fields[idx]


def _num(fields: list[str], idx: int, what: str, line_no: int) -> int:
    try:
        value = int(fields[idx])
    except (IndexError, ValueError):
        raise ScriptParseError(line_no, f"expected integer {what}") from None
    if value < 0:
        raise ScriptParseError(line_no, f"{what} must be non-negative")
    return value


def parse_script(text: str, default_session_id: str = "replay") -> TraceScript:
    """Parse and validate a trace script; errors carry the line number."""
    session_id = default_session_id
    wall_start = 0
    hostname = "replay"
    command = ""
    metrics: list[MetricDesc] = [MetricDesc(WALLTIME, KIND_TIME, "ns")]
    events: list[EventRecord] = []
    end_t: int | None = None
    state = DictState(metric_ids=frozenset({WALLTIME}), header_seen=True)
    max_t = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        try:
            fields = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScriptParseError(line_no, str(exc)) from None
        if not fields:
            continue
        directive, args = fields[0], fields[1:]
        if directive == "session":
            if len(args) < 3:
                raise ScriptParseError(line_no, "session needs id, wall_start, hostname")
            session_id = args[0]
            wall_start = _num(args, 1, "wall_start", line_no)
            hostname = args[2]
            command = " ".join(args[3:])
            continue
        if directive == "metric":
            if len(args) != 3:
                raise ScriptParseError(line_no, "metric needs id, kind, unit")
            mid, kind, unit = args
            if kind not in (KIND_TIME, KIND_COUNT):
                raise ScriptParseError(line_no, f"metric kind {kind!r} unknown")
            if mid == WALLTIME:
                continue  # implicit
            if any(m.id == mid for m in metrics):
                raise ScriptParseError(line_no, f"metric {mid!r} declared twice")
            metrics.append(MetricDesc(mid, kind, unit))
            state.metric_ids = frozenset(m.id for m in metrics)
            continue
        if directive == "end":
            end_t = _num(args, 0, "t", line_no)
            continue

        event: EventRecord
        if directive == "frame":
            if len(args) < 2:
                raise ScriptParseError(line_no, "frame needs fid and function")
            line_val = _opt(args, 3)
            try:
                frame_line = int(line_val) if line_val is not None else None
            except ValueError:
                raise ScriptParseError(line_no, "frame line must be an integer") from None
            event = FrameDef(
                fid=_num(args, 0, "fid", line_no),
                function=args[1],
                file=_opt(args, 2),
                line=frame_line,
                module=_opt(args, 4),
            )
        elif directive == "stack":
            if len(args) != 2:
                raise ScriptParseError(line_no, "stack needs sid and fid;fid;...")
            try:
                fids = tuple(int(f) for f in args[1].split(";") if f)
            except ValueError:
                raise ScriptParseError(line_no, "stack frames must be integers") from None
            if not fids:
                raise ScriptParseError(line_no, "stack needs at least one frame")
            event = StackDef(sid=_num(args, 0, "sid", line_no), frames=fids)
        elif directive == "spawn":
            if len(args) < 5:
                raise ScriptParseError(line_no,
                                       "spawn needs parent_tid, pid, tid, t, name")
            event = Spawn(parent_tid=_num(args, 0, "parent_tid", line_no),
                          pid=_num(args, 1, "pid", line_no),
                          tid=_num(args, 2, "tid", line_no),
                          t=_num(args, 3, "t", line_no),
                          name=args[4],
                          sid=_num(args, 5, "sid", line_no) if len(args) > 5 else None)
        elif directive == "exec":
            if len(args) != 3:
                raise ScriptParseError(line_no, "exec needs tid, t, name")
            event = Exec(tid=_num(args, 0, "tid", line_no),
                         t=_num(args, 1, "t", line_no), name=args[2])
        elif directive == "exit":
            if len(args) != 2:
                raise ScriptParseError(line_no, "exit needs tid and t")
            event = Exit(tid=_num(args, 0, "tid", line_no), t=_num(args, 1, "t", line_no))
        elif directive == "sample":
            if len(args) != 6:
                raise ScriptParseError(
                    line_no, "sample needs tid, pid, t, metric_id, period, sid")
            event = Sample(tid=_num(args, 0, "tid", line_no),
                           pid=_num(args, 1, "pid", line_no),
                           t=_num(args, 2, "t", line_no),
                           metric_id=args[3],
                           period=_num(args, 4, "period", line_no),
                           sid=_num(args, 5, "sid", line_no))
        elif directive == "switch_out":
            if len(args) != 3:
                raise ScriptParseError(line_no, "switch_out needs tid, t, sid")
            event = SwitchOut(tid=_num(args, 0, "tid", line_no),
                              t=_num(args, 1, "t", line_no),
                              sid=_num(args, 2, "sid", line_no))
        elif directive == "switch_in":
            if len(args) != 2:
                raise ScriptParseError(line_no, "switch_in needs tid and t")
            event = SwitchIn(tid=_num(args, 0, "tid", line_no),
                             t=_num(args, 1, "t", line_no))
        else:
            raise ScriptParseError(line_no, f"unknown directive {directive!r}")

        try:
            validate_record(event, state)
        except ValidationError as exc:
            raise ScriptParseError(line_no, exc.message) from None
        if isinstance(event, FrameDef):
            state.frames[event.fid] = event
        elif isinstance(event, StackDef):
            state.stacks[event.sid] = event
        t = timestamp_of(event)
        if t is not None and t > max_t:
            max_t = t
        events.append(event)

    header = SessionHeader(version=protocol.WIRE_VERSION, session_id=session_id,
                           wall_start=wall_start, command=command,
                           hostname=hostname, metrics=tuple(metrics))
    events.append(End(t=end_t if end_t is not None else max_t))
    return TraceScript(header=header, events=events)


def load_script(path: str | Path) -> TraceScript:
    p = Path(path)
    return parse_script(p.read_text(encoding="utf-8"), default_session_id=p.stem)


def replay(script: TraceScript, sink, speed: str = AS_FAST_AS_POSSIBLE) -> dict[str, int]:
    """Deliver the script's events to sink(event) in order.

    Timestamps always come from the script, so realtime pacing changes
    delivery timing only, never the produced data.
    """
    report: dict[str, int] = {}
    last_t: int | None = None
    for event in script.stream():
        if speed == REAL_TIME:
            t = timestamp_of(event)
            if t is not None:
                if last_t is not None and t > last_t:
                    time.sleep((t - last_t) / 1e9)
                last_t = t
        sink(event)
        kind = protocol.event_type_tag(event)
        report[kind] = report.get(kind, 0) + 1
    return report


class SocketSink:
    """Encodes events onto a TCP connection to the processing server."""

    def __init__(self, address: tuple[str, int], timeout: float = 10.0):
        try:
            self.sock = socket.create_connection(address, timeout=timeout)
        except OSError as exc:
            raise ServerUnreachable(f"cannot reach {address[0]}:{address[1]}: {exc}") from None

    def __call__(self, event: EventRecord) -> None:
        self.sock.sendall(protocol.encode_event(event))

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


@dataclass
class ProfileOutcome:
    session_id: str
    exit_status: int
    report: dict[str, int] = field(default_factory=dict)


def run_profile(command: list[str] | None, server_address: tuple[str, int],
                adapter: str = "replay", script_path: str | Path | None = None,
                speed: str = AS_FAST_AS_POSSIBLE,
                sampler_cmd: list[str] | None = None) -> ProfileOutcome:
    """Stream a session to the server while (optionally) running a command.

    The profiled command's exit status is propagated. The connection is
    established first so an unreachable server fails before launch.
    """
    if adapter == "replay":
        if script_path is None:
            raise AdapterUnavailable("the replay adapter needs --script")
        script = load_script(script_path)
    elif adapter == "live":
        if not sampler_cmd:
            raise AdapterUnavailable(
                "the live adapter needs --sampler-cmd (an external sampler "
                "emitting trace-script text)")
        script = None
    else:
        raise AdapterUnavailable(f"unknown adapter {adapter!r}")

    sink = SocketSink(server_address)
    try:
        exit_status = 0
        if adapter == "live":
            proc = subprocess.run(sampler_cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                raise AdapterUnavailable(
                    f"sampler exited with {proc.returncode}: {proc.stderr.strip()}")
            script = parse_script(proc.stdout, default_session_id="live")
        assert script is not None
        if command:
            runner = subprocess.Popen(command)
            report = replay(script, sink, speed)
            exit_status = runner.wait()
        else:
            report = replay(script, sink, speed)
        return ProfileOutcome(session_id=script.header.session_id,
                              exit_status=exit_status, report=report)
    finally:
        sink.close()
