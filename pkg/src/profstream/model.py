"""Shared vocabulary for profiling sessions: events, frames, stacks, metrics.

Timestamps are unsigned 64-bit nanoseconds since session start (t = 0).
Stacks are dictionary-encoded: frames and stacks are announced once with
integer ids, then referenced from samples and switch events.
"""

from __future__ import annotations

from dataclasses import dataclass, field

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1

KIND_TIME = "time"
KIND_COUNT = "count"

WALLTIME = "walltime"


@dataclass(frozen=True, slots=True)
class MetricDesc:
    """One metric channel; exactly one time-kind metric ("walltime") per session."""

    id: str
    kind: str  # "time" | "count"
    unit: str


@dataclass(frozen=True, slots=True)
class SessionHeader:
    version: int
    session_id: str
    wall_start: int
    command: str
    hostname: str
    metrics: tuple[MetricDesc, ...]


@dataclass(frozen=True, slots=True)
class FrameDef:
    """A pre-symbolicated frame; the server never sees raw addresses or binaries."""

    fid: int
    function: str
    file: str | None = None
    line: int | None = None
    module: str | None = None


@dataclass(frozen=True, slots=True)
class StackDef:
    """A call stack as fids, leaf-first (frames[0] is the innermost frame)."""

    sid: int
    frames: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Sample:
    tid: int
    pid: int
    t: int
    metric_id: str
    period: int  # nanoseconds for time metrics, event count otherwise
    sid: int


@dataclass(frozen=True, slots=True)
class SwitchOut:
    """Thread descheduled at t; sid is the stack at the blocking point."""

    tid: int
    t: int
    sid: int


@dataclass(frozen=True, slots=True)
class SwitchIn:
    tid: int
    t: int


@dataclass(frozen=True, slots=True)
class Spawn:
    """New thread/process; parent_tid = 0 denotes the profiled root command."""

    parent_tid: int
    pid: int
    tid: int
    t: int
    name: str
    sid: int | None = None  # spawning stack of the parent, if captured


@dataclass(frozen=True, slots=True)
class Exec:
    tid: int
    t: int
    name: str


@dataclass(frozen=True, slots=True)
class Exit:
    tid: int
    t: int


@dataclass(frozen=True, slots=True)
class End:
    t: int


EventRecord = (
    SessionHeader
    | FrameDef
    | StackDef
    | Sample
    | SwitchOut
    | SwitchIn
    | Spawn
    | Exec
    | Exit
    | End
)

# Validation error codes.
UNDEFINED_FRAME = "UndefinedFrame"
UNDEFINED_STACK = "UndefinedStack"
UNKNOWN_METRIC = "UnknownMetric"
DUPLICATE_DEFINITION = "DuplicateDefinition"
HEADER_MISPLACED = "HeaderMisplaced"


class ValidationError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass
class DictState:
    """The per-session dictionary state validate_record checks against."""

    frames: dict[int, FrameDef] = field(default_factory=dict)
    stacks: dict[int, StackDef] = field(default_factory=dict)
    metric_ids: frozenset[str] = frozenset()
    header_seen: bool = False


def timestamp_of(e: EventRecord) -> int | None:
    """The event's position on the session clock; None for dictionary records."""
    if isinstance(e, (Sample, SwitchOut, SwitchIn, Spawn, Exec, Exit, End)):
        return e.t
    return None


TIMESTAMP_OUT_OF_RANGE = "TimestampOutOfRange"


def validate_record(e: EventRecord, state: DictState) -> None:
    """Check e against the session dictionaries; raises ValidationError.

    Pure function of (e, state): never mutates state. Idempotent
    re-definition of an identical frame/stack is accepted; a conflicting
    redefinition is a DuplicateDefinition.
    """
    if isinstance(e, SessionHeader):
        if state.header_seen:
            raise ValidationError(HEADER_MISPLACED, "second session header")
        return
    if not state.header_seen:
        raise ValidationError(HEADER_MISPLACED, "event before session header")

    t = timestamp_of(e)
    if t is not None and not 0 <= t <= U64_MAX:
        raise ValidationError(TIMESTAMP_OUT_OF_RANGE, f"t={t} not a u64")

    if isinstance(e, Sample):  # the hot case, checked first
        if e.metric_id not in state.metric_ids:
            raise ValidationError(UNKNOWN_METRIC, f"metric {e.metric_id!r}")
        if e.sid not in state.stacks:
            raise ValidationError(UNDEFINED_STACK, f"sample references sid {e.sid}")
        return
    if isinstance(e, FrameDef):
        prev = state.frames.get(e.fid)
        if prev is not None and prev != e:
            raise ValidationError(
                DUPLICATE_DEFINITION, f"fid {e.fid} redefined with different content")
        return
    if isinstance(e, StackDef):
        prev = state.stacks.get(e.sid)
        if prev is not None and prev != e:
            raise ValidationError(
                DUPLICATE_DEFINITION, f"sid {e.sid} redefined with different content")
        for fid in e.frames:
            if fid not in state.frames:
                raise ValidationError(UNDEFINED_FRAME, f"stack {e.sid} references fid {fid}")
        return
    if isinstance(e, SwitchOut):
        if e.sid not in state.stacks:
            raise ValidationError(UNDEFINED_STACK, f"switch_out references sid {e.sid}")
        return
    if isinstance(e, Spawn):
        if e.sid is not None and e.sid not in state.stacks:
            raise ValidationError(UNDEFINED_STACK, f"spawn references sid {e.sid}")
        return
    # SwitchIn / Exec / Exit / End carry no dictionary references.


def resolve_stack(sid: int, state: DictState) -> list[FrameDef]:
    """Concrete leaf-first frame list for a defined sid."""
    return [state.frames[fid] for fid in state.stacks[sid].frames]
