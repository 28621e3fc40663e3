"""The persisted session bundle: a plain directory of human-readable JSON.

Layout:
    <output_root>/<session_id>/
        manifest.json
        tree.json
        timeline/<tid>.json
        flame/<tid>/walltime_hotcold.json
        flame/<tid>/<metric_id>.json
        chron/<tid>.json
        roofline.json            (optional pass-through)

Bundles are written to a staging directory and renamed into place, so a
crash never leaves a partial bundle visible. Serialization is
deterministic: identical session content produces identical bytes.
"""

from __future__ import annotations

import errno
import json
import os
import re
import shutil
import tempfile
from pathlib import Path

from .flame import FlameNode
from .model import FrameDef
from .timeline import ActivitySegment

FORMAT_VERSION = 1

MISSING_MANIFEST = "MissingManifest"
VERSION_MISMATCH = "VersionMismatch"
CORRUPT_FILE = "CorruptFile"


class LoadError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def frame_obj(f: FrameDef) -> dict:
    return {"function": f.function, "file": f.file, "line": f.line, "module": f.module}


def segments_obj(tid: int, lifetime: tuple[int, int],
                 segments: list[ActivitySegment], counters: dict[str, int]) -> dict:
    return {
        "tid": tid,
        "spawn_t": lifetime[0],
        "exit_t": lifetime[1],
        "segments": [{"start": s.start, "end": s.end, "state": s.state,
                      "sid": s.sid, "synthetic": s.synthetic} for s in segments],
        "counters": counters,
    }


def _lines_obj(hist: dict[int, int]) -> dict[str, int]:
    return {str(line): value for line, value in hist.items()}


def trie_hotcold_obj(node: FlameNode) -> dict:
    """Hot-and-cold projection; subtrees with no walltime/off mass are pruned."""
    children = [trie_hotcold_obj(c) for c in node.child_list()
                if c.hot_ns > 0 or c.cold_ns > 0]
    return {
        "function": node.key.function,
        "file": node.key.file,
        "module": node.key.module,
        "hot_ns": node.hot_ns,
        "cold_ns": node.cold_ns,
        "lines": _lines_obj(node.line_hist.get("walltime", {})),
        "children": children,
    }


def trie_metric_obj(node: FlameNode, metric_id: str) -> dict:
    children = [trie_metric_obj(c, metric_id) for c in node.child_list()
                if c.values.get(metric_id, 0) > 0]
    return {
        "function": node.key.function,
        "file": node.key.file,
        "module": node.key.module,
        "value": node.values.get(metric_id, 0),
        "lines": _lines_obj(node.line_hist.get(metric_id, {})),
        "children": children,
    }


def validate_roofline(obj) -> dict:
    """Schema check for the pass-through roofline data file."""
    if not isinstance(obj, dict):
        raise ValueError("roofline data must be an object")
    machine = obj.get("machine")
    if not isinstance(machine, str):
        raise ValueError("roofline 'machine' must be a string")
    out = {"machine": machine, "compute": [], "memory": []}
    for kind, rate_key in (("compute", "ops_per_sec"), ("memory", "bytes_per_sec")):
        entries = obj.get(kind, [])
        if not isinstance(entries, list):
            raise ValueError(f"roofline '{kind}' must be a list")
        for entry in entries:
            if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
                raise ValueError(f"roofline '{kind}' entries need a 'name'")
            rate = entry.get(rate_key)
            if isinstance(rate, bool) or not isinstance(rate, (int, float)) or rate <= 0:
                raise ValueError(f"roofline '{kind}' entries need a positive {rate_key!r}")
            out[kind].append({"name": entry["name"], rate_key: rate})
    return out


_SAFE_ID = re.compile(r"[^A-Za-z0-9._-]")


def safe_bundle_name(session_id: str) -> str:
    """Filesystem-safe directory name; session ids come off the wire."""
    name = _SAFE_ID.sub("_", session_id).lstrip(".")
    return name or "session"


def finalize(objects: dict[str, object], output_root: str | Path,
             session_id: str) -> Path:
    """Write a bundle atomically; collisions get a numeric suffix.

    objects maps bundle-relative paths to JSON-ready values.
    """
    root = Path(output_root)
    root.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=root))
    try:
        for rel, obj in objects.items():
            target = staging / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(dumps(obj), encoding="utf-8")
        base = safe_bundle_name(session_id)
        candidate = root / base
        n = 1
        while True:
            try:
                if candidate.exists():
                    raise FileExistsError(str(candidate))
                os.rename(staging, candidate)
                return candidate
            except OSError as exc:
                if isinstance(exc, (FileExistsError, NotADirectoryError)) or \
                        exc.errno in (errno.EEXIST, errno.ENOTEMPTY):
                    n += 1
                    candidate = root / f"{base}-{n}"
                    continue
                raise
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


class SessionBundle:
    """A loaded bundle: the manifest plus every serialized file as objects."""

    def __init__(self, path: Path, objects: dict[str, object]):
        self.path = path
        self.id = path.name
        self.objects = objects

    @property
    def manifest(self) -> dict:
        return self.objects["manifest.json"]  # type: ignore[return-value]


def _read_json(path: Path, rel: str):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise LoadError(CORRUPT_FILE, f"{rel}: {exc}") from None


def _tree_tids(tree_obj: dict) -> list[int]:
    tids: list[int] = []

    def walk(node):
        tids.append(node["tid"])
        for child in node["children"]:
            walk(child)

    for r in tree_obj.get("roots", []):
        walk(r)
    return tids


def load(bundle_path: str | Path) -> SessionBundle:
    """Read a bundle back; load(finalize(s)) equals s's objects exactly."""
    path = Path(bundle_path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise LoadError(MISSING_MANIFEST, f"no manifest.json under {path}")
    manifest = _read_json(manifest_path, "manifest.json")
    if not isinstance(manifest, dict) or manifest.get("format_version") != FORMAT_VERSION:
        raise LoadError(VERSION_MISMATCH,
                        f"format_version {manifest.get('format_version')!r}, "
                        f"expected {FORMAT_VERSION}")
    objects: dict[str, object] = {"manifest.json": manifest}
    tree_obj = _read_json(path / "tree.json", "tree.json")
    objects["tree.json"] = tree_obj

    tids = _tree_tids(tree_obj)
    if manifest.get("thread_count") != len(tids):
        raise LoadError(CORRUPT_FILE,
                        f"tree.json: {len(tids)} nodes but manifest says "
                        f"{manifest.get('thread_count')}")
    metric_ids = [m["id"] for m in manifest.get("metrics", [])]
    for tid in tids:
        for rel in (f"timeline/{tid}.json", f"chron/{tid}.json",
                    f"flame/{tid}/walltime_hotcold.json"):
            objects[rel] = _read_json(path / rel, rel)
        for metric in metric_ids:
            if metric == "walltime":
                continue
            rel = f"flame/{tid}/{metric}.json"
            objects[rel] = _read_json(path / rel, rel)
    if (path / "roofline.json").exists():
        objects["roofline.json"] = _read_json(path / "roofline.json", "roofline.json")
    return SessionBundle(path, objects)


def list_sessions(output_root: str | Path) -> tuple[list[dict], list[str]]:
    """Manifests (with an added "id" key) sorted by wall_start, plus a report
    of bundle directories that failed to load."""
    root = Path(output_root)
    manifests: list[dict] = []
    skipped: list[str] = []
    if not root.is_dir():
        return manifests, skipped
    for entry in sorted(root.iterdir()):
        if not entry.is_dir() or entry.name.startswith("."):
            continue
        try:
            manifest = _read_json(entry / "manifest.json", "manifest.json")
            if not isinstance(manifest, dict) or \
                    manifest.get("format_version") != FORMAT_VERSION:
                raise LoadError(VERSION_MISMATCH, entry.name)
        except LoadError as exc:
            skipped.append(f"{entry.name}: {exc}")
            continue
        entry_obj = dict(manifest)
        entry_obj["id"] = entry.name
        manifests.append(entry_obj)
    manifests.sort(key=lambda m: (m.get("wall_start", 0), m["id"]))
    return manifests, skipped
