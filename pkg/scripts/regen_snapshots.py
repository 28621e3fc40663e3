#!/usr/bin/env python3
"""Regenerate the committed API snapshot bodies from the golden trace.

Run from the repo root after an intentional output-format change:

    python3 scripts/regen_snapshots.py

The snapshot test fails on any drift, so regenerating is a conscious act;
review the diff before committing.
"""

from __future__ import annotations

import json
import sys
import tempfile
import urllib.parse
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from profstream import collector, ingest, service, sourcemap, store  # noqa: E402
from profstream.protocol import encode_event  # noqa: E402

SNAPSHOT_ENDPOINTS = {
    "sessions": "/api/v1/sessions",
    "tree": "/api/v1/sessions/golden/tree",
    "timeline_101": "/api/v1/sessions/golden/threads/101/timeline",
    "timeline_300": "/api/v1/sessions/golden/threads/300/timeline",
    "flame_walltime_101":
        "/api/v1/sessions/golden/threads/101/flame?metric=walltime&mode=aggregated",
    "flame_pagefaults_102":
        "/api/v1/sessions/golden/threads/102/flame?metric=page-faults&mode=aggregated",
    "chron_101":
        "/api/v1/sessions/golden/threads/101/flame?metric=walltime&mode=chronological",
    "search_b_101":
        "/api/v1/sessions/golden/threads/101/flame/search?metric=walltime&q=b",
    "spawnstack_101": "/api/v1/sessions/golden/threads/101/spawnstack",
    "lines_b_101":
        "/api/v1/sessions/golden/threads/101/lines?metric=walltime&node=main/a/b",
    "source_spawn": "/api/v1/sessions/golden/source?file=spawn.c",
}


def main() -> int:
    script = collector.load_script(REPO / "tests" / "data" / "golden.trace")
    result = ingest.consume_stream([encode_event(e) for e in script.stream()])
    out_dir = REPO / "tests" / "data" / "snapshots"
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store.finalize(result.bundle_objects(), tmp, result.session_id)
        api = service.Api(tmp, source_root=sourcemap.SourceRoot(
            root_path=REPO / "tests" / "data" / "src"))
        index = {}
        for name, endpoint in SNAPSHOT_ENDPOINTS.items():
            split = urllib.parse.urlsplit(endpoint)
            query = {k: v[0] for k, v in
                     urllib.parse.parse_qs(split.query, keep_blank_values=True).items()}
            body = service.dispatch_api(api, split.path[len(service.API_PREFIX):], query)
            payload = service.render_json(body)
            (out_dir / f"{name}.json").write_bytes(payload)
            index[name] = {"path": endpoint, "file": f"{name}.json"}
            print(f"{name}: {len(payload)} bytes")
        (out_dir / "index.json").write_text(
            json.dumps(index, indent=1, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
