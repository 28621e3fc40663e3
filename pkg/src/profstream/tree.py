"""Thread/process hierarchy reconstruction from spawn/exec/exit events.

Same pid as the parent means a thread, a new pid means a process; both
live in one forest. Events naming a tid that was never spawned create an
implicit node so no data is silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DUPLICATE_TID = "DuplicateTid"
EXIT_BEFORE_SPAWN = "ExitBeforeSpawn"
EVENT_AFTER_EXIT = "EventAfterExit"


class TreeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass
class ProcessNode:
    tid: int
    pid: int
    names: list[tuple[int, str]] = field(default_factory=list)
    spawn_t: int | None = None
    exit_t: int | None = None
    spawn_sid: int | None = None
    children: list["ProcessNode"] = field(default_factory=list)
    implicit: bool = False
    open_ended: bool = False
    first_event_t: int | None = None

    def note_event(self, t: int) -> None:
        if self.first_event_t is None or t < self.first_event_t:
            self.first_event_t = t


class Forest:
    """All nodes of one session, keyed by tid; roots in spawn order."""

    def __init__(self) -> None:
        self.nodes: dict[int, ProcessNode] = {}
        self.roots: list[ProcessNode] = []
        self.finalized = False

    def __len__(self) -> int:
        return len(self.nodes)

    def touch(self, tid: int, t: int, pid: int = 0) -> ProcessNode:
        """Node for tid, synthesizing an implicit root when unknown."""
        node = self.nodes.get(tid)
        if node is None:
            node = ProcessNode(tid=tid, pid=pid, implicit=True)
            self.nodes[tid] = node
            self.roots.append(node)
        node.note_event(t)
        return node

    def apply_spawn(self, parent_tid: int, pid: int, tid: int, t: int,
                    name: str, sid: int | None) -> ProcessNode:
        if tid in self.nodes:
            raise TreeError(DUPLICATE_TID, f"tid {tid} spawned twice")
        node = ProcessNode(tid=tid, pid=pid, names=[(t, name)], spawn_t=t,
                           spawn_sid=sid, first_event_t=t)
        self.nodes[tid] = node
        if parent_tid == 0:
            self.roots.append(node)
        else:
            self.touch(parent_tid, t).children.append(node)
        return node

    def apply_exec(self, tid: int, t: int, name: str) -> None:
        self.touch(tid, t, pid=0).names.append((t, name))

    def apply_exit(self, tid: int, t: int) -> None:
        node = self.touch(tid, t)
        if node.spawn_t is not None and t < node.spawn_t:
            raise TreeError(EXIT_BEFORE_SPAWN,
                            f"tid {tid} exits at {t} before spawn at {node.spawn_t}")
        node.exit_t = t

    def check_live(self, tid: int, t: int) -> None:
        """Raises when a timestamped event lands past the node's exit."""
        node = self.nodes.get(tid)
        if node is not None and node.exit_t is not None and t >= node.exit_t:
            raise TreeError(EVENT_AFTER_EXIT,
                            f"tid {tid} event at {t} after exit at {node.exit_t}")

    def finalize(self, session_end: int) -> None:
        """Close open lifetimes and fix the display order; idempotent."""
        for node in self.nodes.values():
            if node.spawn_t is None:
                node.spawn_t = node.first_event_t if node.first_event_t is not None else 0
            if node.exit_t is None:
                node.exit_t = max(session_end, node.spawn_t)
                node.open_ended = True
        order = lambda n: (n.spawn_t, n.tid)
        self.roots.sort(key=order)
        for node in self.nodes.values():
            node.children.sort(key=order)
        self.finalized = True

    def node_count(self) -> int:
        return len(self.nodes)

    def as_obj(self, resolve_sid=None) -> dict:
        """JSON-ready form; resolve_sid maps a sid to a frame-object list."""

        def conv(node: ProcessNode) -> dict:
            spawn_stack = None
            if node.spawn_sid is not None and resolve_sid is not None:
                spawn_stack = resolve_sid(node.spawn_sid)
            return {
                "tid": node.tid,
                "pid": node.pid,
                "names": [[t, name] for t, name in node.names],
                "spawn_t": node.spawn_t,
                "exit_t": node.exit_t,
                "implicit": node.implicit,
                "open_ended": node.open_ended,
                "spawn_sid": node.spawn_sid,
                "spawn_stack": spawn_stack,
                "children": [conv(c) for c in node.children],
            }

        return {"roots": [conv(r) for r in self.roots]}
