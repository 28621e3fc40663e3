"""Read-only HTTP API over finalized bundles, plus static UI serving.

Every view the analyser renders is reachable here; responses are
deterministic for a fixed bundle (stable key order, stable formatting).
"""

from __future__ import annotations

import json
import logging
import re
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import flame, sourcemap, store, timeline

log = logging.getLogger("profstream.service")

API_PREFIX = "/api/v1"
DEFAULT_EXACT_SEGMENT_LIMIT = 10000

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".map": "application/json; charset=utf-8",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>profstream</title></head>
<body><h1>profstream analyser</h1>
<p>No UI assets were found; the JSON API is live under <code>/api/v1</code>.</p>
<ul id="sessions"></ul>
<script>
fetch('/api/v1/sessions').then(r => r.json()).then(list => {
  const ul = document.getElementById('sessions');
  for (const m of list) {
    const li = document.createElement('li');
    li.textContent = m.id + ' (' + m.thread_count + ' threads)';
    ul.appendChild(li);
  }
});
</script></body></html>
"""


class ApiError(Exception):
    def __init__(self, status: int, error_code: str, message: str):
        super().__init__(message)
        self.status = status
        self.error_code = error_code
        self.message = message


def _not_found(message: str) -> ApiError:
    return ApiError(404, "NotFound", message)


class BundleCache:
    """Loaded bundles are immutable; cache them forever by directory name."""

    def __init__(self, results_root: Path):
        self.results_root = results_root
        self._lock = threading.Lock()
        self._cache: dict[str, store.SessionBundle] = {}

    def get(self, session_id: str) -> store.SessionBundle:
        with self._lock:
            bundle = self._cache.get(session_id)
        if bundle is not None:
            return bundle
        if "/" in session_id or session_id.startswith("."):
            raise _not_found(f"no session {session_id!r}")
        path = self.results_root / session_id
        if not path.is_dir():
            raise _not_found(f"no session {session_id!r}")
        try:
            bundle = store.load(path)
        except store.LoadError as exc:
            raise ApiError(404, exc.code, str(exc)) from None
        with self._lock:
            self._cache[session_id] = bundle
        return bundle


def _find_tree_node(tree_obj: dict, tid: int) -> dict | None:
    stack = list(tree_obj.get("roots", []))
    while stack:
        node = stack.pop()
        if node["tid"] == tid:
            return node
        stack.extend(node["children"])
    return None


def _decode_node_path(raw: str) -> list[str]:
    """Slash-joined, percent-encoded function names; "" means the root."""
    if raw == "":
        return []
    segments = []
    for part in raw.split("/"):
        if part == "":
            raise ApiError(422, "MalformedNodePath", "empty path segment")
        try:
            segments.append(urllib.parse.unquote(part, errors="strict"))
        except UnicodeDecodeError:
            raise ApiError(422, "MalformedNodePath",
                           f"undecodable segment {part!r}") from None
    return segments


def encode_node_path(path: tuple[str, ...] | list[str]) -> str:
    return "/".join(urllib.parse.quote(seg, safe="") for seg in path)


def _walk_trie(root_obj: dict, path: list[str]) -> dict:
    node = root_obj
    for name in path:
        nxt = next((c for c in node["children"] if c["function"] == name), None)
        if nxt is None:
            raise _not_found(f"no flame node at {'/'.join(path)!r}")
        node = nxt
    return node


class Api:
    """Pure request handling over loaded bundles; the HTTP layer stays thin."""

    def __init__(self, results_root: str | Path,
                 source_root: sourcemap.SourceRoot | None = None,
                 exact_segment_limit: int = DEFAULT_EXACT_SEGMENT_LIMIT):
        self.results_root = Path(results_root)
        self.cache = BundleCache(self.results_root)
        self.source_root = source_root
        self.exact_segment_limit = exact_segment_limit

    # -- endpoint implementations ------------------------------------------

    def sessions(self) -> list[dict]:
        manifests, skipped = store.list_sessions(self.results_root)
        for report in skipped:
            log.warning("skipping unreadable bundle: %s", report)
        return manifests

    def tree(self, session_id: str) -> dict:
        return self.cache.get(session_id).objects["tree.json"]  # type: ignore

    def _bundle_file(self, session_id: str, rel: str) -> dict:
        bundle = self.cache.get(session_id)
        obj = bundle.objects.get(rel)
        if obj is None:
            raise _not_found(f"no {rel} in session {session_id!r}")
        return obj  # type: ignore[return-value]

    def timeline(self, session_id: str, tid: int, bucket_ns: int | None) -> dict:
        obj = self._bundle_file(session_id, f"timeline/{tid}.json")
        segments = obj["segments"]
        if len(segments) <= self.exact_segment_limit:
            return {"mode": "segments", **obj}
        spawn_t, exit_t = obj["spawn_t"], obj["exit_t"]
        if bucket_ns is None:
            bucket_ns = max(1, (exit_t - spawn_t) // self.exact_segment_limit)
        if bucket_ns <= 0:
            raise ApiError(400, "BadRequest", "bucket_ns must be positive")
        if (exit_t - spawn_t) // bucket_ns > 1_000_000:
            raise ApiError(400, "BadRequest", "bucket_ns too small for this lifetime")
        segs = [timeline.ActivitySegment(s["start"], s["end"], s["state"],
                                         s["sid"], s["synthetic"]) for s in segments]
        buckets = [{"index": idx, "dominant": dom, "on_ns": on, "off_ns": off}
                   for idx, dom, on, off in timeline.downsample(segs, bucket_ns)]
        return {"mode": "buckets", "tid": tid, "spawn_t": spawn_t, "exit_t": exit_t,
                "bucket_ns": bucket_ns, "buckets": buckets,
                "counters": obj["counters"]}

    def _declared_metrics(self, session_id: str) -> list[str]:
        manifest = self.cache.get(session_id).manifest
        return [m["id"] for m in manifest.get("metrics", [])]

    def _flame_file(self, session_id: str, tid: int, metric: str) -> tuple[dict, tuple[str, ...]]:
        if metric not in self._declared_metrics(session_id):
            raise _not_found(f"metric {metric!r} not in session {session_id!r}")
        if metric == "walltime":
            return (self._bundle_file(session_id, f"flame/{tid}/walltime_hotcold.json"),
                    ("hot_ns", "cold_ns"))
        return (self._bundle_file(session_id, f"flame/{tid}/{metric}.json"), ("value",))

    def flame(self, session_id: str, tid: int, metric: str, mode: str) -> dict:
        if mode == "chronological":
            if metric != "walltime":
                raise ApiError(400, "BadRequest",
                               "chronological mode exists for walltime only")
            return self._bundle_file(session_id, f"chron/{tid}.json")
        if mode != "aggregated":
            raise ApiError(400, "BadRequest", f"unknown mode {mode!r}")
        obj, _ = self._flame_file(session_id, tid, metric)
        return obj

    def flame_search(self, session_id: str, tid: int, metric: str, pattern: str) -> dict:
        obj, channels = self._flame_file(session_id, tid, metric)
        try:
            result = flame.search_view(obj, pattern, channels)
        except flame.FlameError as exc:
            raise ApiError(400, exc.code, exc.message) from None
        return {
            "pattern": pattern,
            "matches": [{"path": list(p), "node": encode_node_path(p)}
                        for p in result.paths],
            "fractions": result.fractions,
        }

    def spawnstack(self, session_id: str, tid: int) -> dict:
        tree_obj = self.tree(session_id)
        node = _find_tree_node(tree_obj, tid)
        if node is None:
            raise _not_found(f"no thread {tid} in session {session_id!r}")
        if not node.get("spawn_stack"):
            raise _not_found(f"thread {tid} has no spawning stack")
        return {"tid": tid, "spawn_sid": node["spawn_sid"],
                "frames": node["spawn_stack"]}

    def lines(self, session_id: str, tid: int, metric: str, node_path_raw: str) -> dict:
        obj, _ = self._flame_file(session_id, tid, metric)
        path = _decode_node_path(node_path_raw)
        node = _walk_trie(obj, path)
        entries = sorted(((int(line), value) for line, value in node["lines"].items()),
                         key=lambda kv: (-kv[1], kv[0]))
        return {"node": node_path_raw, "metric": metric, "function": node["function"],
                "file": node["file"], "lines": [[line, value] for line, value in entries]}

    def source(self, session_id: str, file: str) -> dict:
        self.cache.get(session_id)  # 404 for unknown sessions first
        if self.source_root is None:
            raise _not_found("no source root configured (--source-root)")
        try:
            path = sourcemap.resolve(self.source_root, file)
            lines, count, lossy = sourcemap.fetch(path)
        except sourcemap.ResolveError as exc:
            status = 404 if exc.code in (sourcemap.NOT_FOUND, sourcemap.NOT_A_FILE) else 400
            raise ApiError(status, exc.code, exc.message) from None
        return {"file": file, "line_count": count, "lossy": lossy, "lines": lines}

    def roofline(self, session_id: str) -> dict:
        obj = self.cache.get(session_id).objects.get("roofline.json")
        if obj is None:
            raise _not_found(f"session {session_id!r} has no roofline data")
        return obj  # type: ignore[return-value]


_ROUTES: list[tuple[re.Pattern, str]] = [
    (re.compile(r"^/sessions$"), "sessions"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/tree$"), "tree"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/threads/(?P<tid>\d+)/timeline$"), "timeline"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/threads/(?P<tid>\d+)/flame$"), "flame"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/threads/(?P<tid>\d+)/flame/search$"), "search"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/threads/(?P<tid>\d+)/spawnstack$"), "spawnstack"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/threads/(?P<tid>\d+)/lines$"), "lines"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/source$"), "source"),
    (re.compile(r"^/sessions/(?P<sid>[^/]+)/roofline$"), "roofline"),
]


def dispatch_api(api: Api, path: str, query: dict[str, str]) -> dict | list:
    """Route an /api/v1 request path (prefix stripped) to its handler."""
    for rx, name in _ROUTES:
        m = rx.match(path)
        if m is None:
            continue
        groups = m.groupdict()
        sid_raw = groups.get("sid")
        session_id = urllib.parse.unquote(sid_raw) if sid_raw is not None else None
        tid = int(groups["tid"]) if "tid" in groups else None
        if name == "sessions":
            return api.sessions()
        if name == "tree":
            return api.tree(session_id)
        if name == "timeline":
            bucket = query.get("bucket_ns")
            try:
                bucket_ns = int(bucket) if bucket is not None else None
            except ValueError:
                raise ApiError(400, "BadRequest", "bucket_ns must be an integer") from None
            return api.timeline(session_id, tid, bucket_ns)
        if name == "flame":
            return api.flame(session_id, tid, query.get("metric", "walltime"),
                             query.get("mode", "aggregated"))
        if name == "search":
            if "q" not in query:
                raise ApiError(400, "BadRequest", "missing query parameter q")
            return api.flame_search(session_id, tid,
                                    query.get("metric", "walltime"), query["q"])
        if name == "spawnstack":
            return api.spawnstack(session_id, tid)
        if name == "lines":
            if "node" not in query:
                raise ApiError(400, "BadRequest", "missing query parameter node")
            return api.lines(session_id, tid, query.get("metric", "walltime"),
                             query["node"])
        if name == "source":
            if "file" not in query:
                raise ApiError(400, "BadRequest", "missing query parameter file")
            return api.source(session_id, query["file"])
        if name == "roofline":
            return api.roofline(session_id)
    raise _not_found(f"no such endpoint: {API_PREFIX}{path}")


def render_json(body) -> bytes:
    return (json.dumps(body, sort_keys=True, indent=1) + "\n").encode("utf-8")


class AnalyserServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], api: Api, ui_dir: Path | None = None):
        self.api = api
        self.ui_dir = ui_dir
        super().__init__(address, _ApiHandler)

    @property
    def bound_address(self) -> tuple[str, int]:
        return self.server_address[:2]


class _ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-cache")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, body) -> None:
        self._send(status, render_json(body), "application/json; charset=utf-8")

    def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
        server: AnalyserServer = self.server  # type: ignore[assignment]
        parsed = urllib.parse.urlsplit(self.path)
        query = {k: v[0] for k, v in
                 urllib.parse.parse_qs(parsed.query, keep_blank_values=True).items()}
        path = parsed.path
        try:
            if path.startswith(API_PREFIX):
                body = dispatch_api(server.api, path[len(API_PREFIX):], query)
                self._send_json(200, body)
                return
            self._serve_static(server, path)
        except ApiError as exc:
            self._send_json(exc.status,
                            {"error_code": exc.error_code, "message": exc.message})
        except Exception:
            log.exception("request failed: %s", self.path)
            self._send_json(500, {"error_code": "Internal", "message": "internal error"})

    def _serve_static(self, server: AnalyserServer, path: str) -> None:
        if path == "/":
            path = "/index.html"
        if server.ui_dir is None:
            if path == "/index.html":
                self._send(200, _FALLBACK_PAGE.encode("utf-8"),
                           "text/html; charset=utf-8")
                return
            raise _not_found("no UI assets configured")
        root = sourcemap.SourceRoot(root_path=server.ui_dir)
        try:
            target = sourcemap.resolve(root, path.lstrip("/"))
        except sourcemap.ResolveError as exc:
            raise _not_found(exc.message) from None
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)
