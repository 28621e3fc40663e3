"""Wire format v1 for the collector-to-server stream.

One UTF-8 JSON object per line, LF-terminated, at most 1 MiB of payload
per line. The encoder is canonical: fixed key order per record type, no
insignificant whitespace, so equal records encode to equal bytes. The
decoder is total: any byte string up to the size cap either decodes to an
EventRecord or raises a classified ProtocolError, never anything else.
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    U32_MAX,
    U64_MAX,
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
    WALLTIME,
)

WIRE_VERSION = 1
MAX_LINE_BYTES = 1 << 20  # payload cap, excluding the LF terminator

# Error codes.
MALFORMED_SYNTAX = "MalformedSyntax"
UNKNOWN_EVENT_TYPE = "UnknownEventType"
MISSING_FIELD = "MissingField"
WRONG_FIELD_TYPE = "WrongFieldType"
OVERSIZE_RECORD = "OversizeRecord"
UNSUPPORTED_VERSION = "UnsupportedVersion"
HEADER_MISPLACED = "HeaderMisplaced"


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


_TYPE_TAGS = {
    SessionHeader: "header", FrameDef: "frame", StackDef: "stack",
    Sample: "sample", SwitchOut: "switch_out", SwitchIn: "switch_in",
    Spawn: "spawn", Exec: "exec", Exit: "exit", End: "end",
}


def event_type_tag(e: EventRecord) -> str:
    return _TYPE_TAGS[type(e)]


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def encode_event(e: EventRecord) -> bytes:
    """Canonical wire line for a valid record, including the LF terminator."""
    if isinstance(e, SessionHeader):
        obj: dict[str, Any] = {
            "type": "header",
            "version": e.version,
            "session_id": e.session_id,
            "wall_start": e.wall_start,
            "command": e.command,
            "hostname": e.hostname,
            "metrics": [{"id": m.id, "kind": m.kind, "unit": m.unit} for m in e.metrics],
        }
    elif isinstance(e, FrameDef):
        obj = {"type": "frame", "fid": e.fid, "function": e.function}
        if e.file is not None:
            obj["file"] = e.file
        if e.line is not None:
            obj["line"] = e.line
        if e.module is not None:
            obj["module"] = e.module
    elif isinstance(e, StackDef):
        obj = {"type": "stack", "sid": e.sid, "frames": list(e.frames)}
    elif isinstance(e, Sample):
        obj = {"type": "sample", "tid": e.tid, "pid": e.pid, "t": e.t,
               "metric_id": e.metric_id, "period": e.period, "sid": e.sid}
    elif isinstance(e, SwitchOut):
        obj = {"type": "switch_out", "tid": e.tid, "t": e.t, "sid": e.sid}
    elif isinstance(e, SwitchIn):
        obj = {"type": "switch_in", "tid": e.tid, "t": e.t}
    elif isinstance(e, Spawn):
        obj = {"type": "spawn", "parent_tid": e.parent_tid, "pid": e.pid,
               "tid": e.tid, "t": e.t, "name": e.name}
        if e.sid is not None:
            obj["sid"] = e.sid
    elif isinstance(e, Exec):
        obj = {"type": "exec", "tid": e.tid, "t": e.t, "name": e.name}
    elif isinstance(e, Exit):
        obj = {"type": "exit", "tid": e.tid, "t": e.t}
    elif isinstance(e, End):
        obj = {"type": "end", "t": e.t}
    else:
        raise TypeError(f"not an EventRecord: {e!r}")
    payload = _dumps(obj).encode("utf-8")
    if len(payload) > MAX_LINE_BYTES:
        raise ProtocolError(OVERSIZE_RECORD,
                            f"encoded record is {len(payload)} bytes (cap {MAX_LINE_BYTES})")
    return payload + b"\n"


def _u64(obj: dict, key: str) -> int:
    try:
        v = obj[key]
    except KeyError:
        raise ProtocolError(MISSING_FIELD, f"missing field {key!r}") from None
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= U64_MAX:
        raise ProtocolError(WRONG_FIELD_TYPE, f"field {key!r} must be a u64")
    return v


def _ident(obj: dict, key: str) -> int:
    v = _u64(obj, key)
    if v == 0:
        raise ProtocolError(WRONG_FIELD_TYPE, f"field {key!r} must be positive")
    return v


def _string(obj: dict, key: str, allow_empty: bool = True) -> str:
    try:
        v = obj[key]
    except KeyError:
        raise ProtocolError(MISSING_FIELD, f"missing field {key!r}") from None
    if not isinstance(v, str):
        raise ProtocolError(WRONG_FIELD_TYPE, f"field {key!r} must be a string")
    if not allow_empty and not v:
        raise ProtocolError(WRONG_FIELD_TYPE, f"field {key!r} must be non-empty")
    return v


def _metrics(obj: dict) -> tuple[MetricDesc, ...]:
    try:
        raw = obj["metrics"]
    except KeyError:
        raise ProtocolError(MISSING_FIELD, "missing field 'metrics'") from None
    if not isinstance(raw, list):
        raise ProtocolError(WRONG_FIELD_TYPE, "field 'metrics' must be a list")
    out = []
    for m in raw:
        if not isinstance(m, dict):
            raise ProtocolError(WRONG_FIELD_TYPE, "metric entries must be objects")
        mid = _string(m, "id", allow_empty=False)
        kind = _string(m, "kind")
        if kind not in (KIND_TIME, KIND_COUNT):
            raise ProtocolError(WRONG_FIELD_TYPE, f"metric kind {kind!r} unknown")
        out.append(MetricDesc(id=mid, kind=kind, unit=_string(m, "unit")))
    ids = [m.id for m in out]
    if len(set(ids)) != len(ids):
        raise ProtocolError(WRONG_FIELD_TYPE, "metric ids must be unique")
    time_ids = [m.id for m in out if m.kind == KIND_TIME]
    if time_ids != [WALLTIME]:
        raise ProtocolError(WRONG_FIELD_TYPE,
                            "exactly one time metric named 'walltime' is required")
    return tuple(out)


def decode_event(line: bytes | str) -> EventRecord:
    """Parse one wire line; raises ProtocolError for anything unparseable."""
    if isinstance(line, str):
        line = line.encode("utf-8", errors="surrogateescape")
    line = line.rstrip(b"\n")
    if len(line) > MAX_LINE_BYTES:
        raise ProtocolError(MALFORMED_SYNTAX, "line exceeds 1 MiB")
    try:
        text = line.decode("utf-8")
    except UnicodeDecodeError:
        raise ProtocolError(MALFORMED_SYNTAX, "line is not valid UTF-8") from None
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, RecursionError):
        raise ProtocolError(MALFORMED_SYNTAX, "line is not a JSON object") from None
    if not isinstance(obj, dict):
        raise ProtocolError(MALFORMED_SYNTAX, "line is not a JSON object")
    kind = obj.get("type")
    if kind is None:
        raise ProtocolError(MISSING_FIELD, "missing field 'type'")
    if not isinstance(kind, str):
        raise ProtocolError(WRONG_FIELD_TYPE, "field 'type' must be a string")

    if kind == "header":
        return SessionHeader(
            version=_u64(obj, "version"),
            session_id=_string(obj, "session_id", allow_empty=False),
            wall_start=_u64(obj, "wall_start"),
            command=_string(obj, "command"),
            hostname=_string(obj, "hostname"),
            metrics=_metrics(obj),
        )
    if kind == "frame":
        line_no = None
        if "line" in obj:
            line_no = _u64(obj, "line")
            if line_no > U32_MAX:
                raise ProtocolError(WRONG_FIELD_TYPE, "field 'line' must be a u32")
        return FrameDef(
            fid=_ident(obj, "fid"),
            function=_string(obj, "function", allow_empty=False),
            file=_string(obj, "file") if "file" in obj else None,
            line=line_no,
            module=_string(obj, "module") if "module" in obj else None,
        )
    if kind == "stack":
        frames = obj.get("frames")
        if frames is None:
            raise ProtocolError(MISSING_FIELD, "missing field 'frames'")
        if (not isinstance(frames, list) or not frames
                or any(isinstance(f, bool) or not isinstance(f, int) or f <= 0
                       or f > U64_MAX for f in frames)):
            raise ProtocolError(WRONG_FIELD_TYPE,
                                "field 'frames' must be a non-empty list of fids")
        return StackDef(sid=_ident(obj, "sid"), frames=tuple(frames))
    if kind == "sample":
        # Samples dominate real streams; take one cheap combined check and
        # fall back to the per-field path only to classify failures.
        try:
            tid = obj["tid"]
            pid = obj["pid"]
            t = obj["t"]
            metric_id = obj["metric_id"]
            period = obj["period"]
            sid = obj["sid"]
            if (type(tid) is int and type(pid) is int and type(t) is int
                    and type(period) is int and type(sid) is int
                    and type(metric_id) is str and metric_id
                    and 0 <= tid <= U64_MAX and 0 <= pid <= U64_MAX
                    and 0 <= t <= U64_MAX and 0 <= period <= U64_MAX
                    and 1 <= sid <= U64_MAX):
                return Sample(tid, pid, t, metric_id, period, sid)
        except KeyError:
            pass
        return Sample(tid=_u64(obj, "tid"), pid=_u64(obj, "pid"), t=_u64(obj, "t"),
                      metric_id=_string(obj, "metric_id", allow_empty=False),
                      period=_u64(obj, "period"), sid=_ident(obj, "sid"))
    if kind == "switch_out":
        return SwitchOut(tid=_u64(obj, "tid"), t=_u64(obj, "t"), sid=_ident(obj, "sid"))
    if kind == "switch_in":
        return SwitchIn(tid=_u64(obj, "tid"), t=_u64(obj, "t"))
    if kind == "spawn":
        return Spawn(parent_tid=_u64(obj, "parent_tid"), pid=_u64(obj, "pid"),
                     tid=_u64(obj, "tid"), t=_u64(obj, "t"),
                     name=_string(obj, "name"),
                     sid=_ident(obj, "sid") if "sid" in obj else None)
    if kind == "exec":
        return Exec(tid=_u64(obj, "tid"), t=_u64(obj, "t"), name=_string(obj, "name"))
    if kind == "exit":
        return Exit(tid=_u64(obj, "tid"), t=_u64(obj, "t"))
    if kind == "end":
        return End(t=_u64(obj, "t"))
    raise ProtocolError(UNKNOWN_EVENT_TYPE, f"unknown event type {kind!r}")


def handshake(greeting: bytes | str) -> SessionHeader:
    """Validate the first line of a connection; version 1 only."""
    e = decode_event(greeting)
    if not isinstance(e, SessionHeader):
        raise ProtocolError(HEADER_MISPLACED, "first line must be the session header")
    if e.version != WIRE_VERSION:
        raise ProtocolError(UNSUPPORTED_VERSION, f"wire version {e.version} not supported")
    return e
