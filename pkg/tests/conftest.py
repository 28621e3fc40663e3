from __future__ import annotations

import threading
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from profstream import collector, ingest, service, sourcemap, store

DATA = Path(__file__).parent / "data"


def wire_lines(events) -> list[bytes]:
    from profstream import protocol
    return [protocol.encode_event(e) for e in events]


@pytest.fixture(scope="session")
def golden_script() -> collector.TraceScript:
    return collector.load_script(DATA / "golden.trace")


@pytest.fixture(scope="session")
def golden_result(golden_script):
    return ingest.consume_stream(wire_lines(golden_script.stream()))


@pytest.fixture(scope="session")
def golden_bundle_dir(tmp_path_factory, golden_result) -> Path:
    root = tmp_path_factory.mktemp("golden-results")
    return store.finalize(golden_result.bundle_objects(), root, golden_result.session_id)


@pytest.fixture(scope="session")
def golden_bundle(golden_bundle_dir) -> store.SessionBundle:
    return store.load(golden_bundle_dir)


@pytest.fixture(scope="session")
def api_server(golden_bundle_dir):
    source_root = sourcemap.SourceRoot(root_path=DATA / "src")
    api = service.Api(golden_bundle_dir.parent, source_root=source_root)
    server = service.AnalyserServer(("127.0.0.1", 0), api)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.bound_address
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()


def http_get(base: str, path: str) -> tuple[int, bytes]:
    try:
        with urllib.request.urlopen(base + path) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()
