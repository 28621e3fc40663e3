import json
import threading

import pytest

from conftest import http_get
from profstream import service, sourcemap, store
from profstream.service import Api, ApiError, dispatch_api


def get_json(base, path):
    status, body = http_get(base, path)
    return status, json.loads(body)


def test_sessions_lists_golden(api_server):
    status, body = get_json(api_server, "/api/v1/sessions")
    assert status == 200
    assert [m["id"] for m in body] == ["golden"]
    assert body[0]["thread_count"] == 5


def test_tree_node_count_matches_manifest(api_server):
    status, tree = get_json(api_server, "/api/v1/sessions/golden/tree")
    assert status == 200

    def count(nodes):
        return sum(1 + count(n["children"]) for n in nodes)

    assert count(tree["roots"]) == 5


def test_unknown_session_404(api_server):
    status, body = get_json(api_server, "/api/v1/sessions/nope/tree")
    assert status == 404 and body["error_code"] == "NotFound"


def test_unknown_tid_404(api_server):
    status, body = get_json(api_server,
                            "/api/v1/sessions/golden/threads/777/timeline")
    assert status == 404


def test_timeline_exact_segments(api_server):
    status, body = get_json(api_server,
                            "/api/v1/sessions/golden/threads/101/timeline")
    assert status == 200
    assert body["mode"] == "segments"
    states = [(s["start"], s["end"], s["state"]) for s in body["segments"]]
    assert states == [(1000, 3000, "on"), (3000, 3400, "off"), (3400, 5000, "on"),
                      (5000, 5300, "off"), (5300, 6000, "on")]


def test_timeline_downsamples_past_limit(golden_bundle_dir):
    api = Api(golden_bundle_dir.parent, exact_segment_limit=2)
    body = api.timeline("golden", 101, 2500)
    assert body["mode"] == "buckets"
    assert body["bucket_ns"] == 2500
    total = sum(b["on_ns"] + b["off_ns"] for b in body["buckets"])
    assert total == 5000  # conservation across buckets
    assert body["buckets"][0]["index"] == 0


def test_timeline_bad_bucket_ns(api_server):
    status, body = get_json(
        api_server, "/api/v1/sessions/golden/threads/101/timeline?bucket_ns=x")
    assert status == 400


def test_flame_aggregated_walltime(api_server):
    status, trie = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/flame?metric=walltime&mode=aggregated")
    assert status == 200
    assert trie["hot_ns"] == 25 and trie["cold_ns"] == 700


def test_flame_unknown_metric_404(api_server):
    status, _ = get_json(
        api_server, "/api/v1/sessions/golden/threads/101/flame?metric=cycles")
    assert status == 404


def test_flame_chronological(api_server):
    status, body = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/flame?metric=walltime&mode=chronological")
    assert status == 200
    assert len(body["spans"]) == 5
    assert body["stacks"]["4"][0]["function"] == "io_wait"


def test_chronological_for_counted_metric_is_400(api_server):
    status, body = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/102/flame?metric=page-faults&mode=chronological")
    assert status == 400


def test_search_fraction_endpoint(api_server):
    status, body = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/flame/search?metric=walltime&q=b")
    assert status == 200
    assert body["fractions"]["hot_ns"] == 0.8
    assert body["matches"][0]["path"] == ["main", "a", "b"]
    assert body["matches"][0]["node"] == "main/a/b"


def test_search_bad_regex_400(api_server):
    status, body = get_json(
        api_server, "/api/v1/sessions/golden/threads/101/flame/search?q=%28")
    assert status == 400 and body["error_code"] == "InvalidPattern"


def test_spawnstack_resolved_frames(api_server):
    status, body = get_json(api_server,
                            "/api/v1/sessions/golden/threads/101/spawnstack")
    assert status == 200
    assert body["frames"][0] == {"function": "spawn_worker", "file": "spawn.c",
                                 "line": 7, "module": "workload"}


def test_spawnstack_absent_404(api_server):
    # tid 100 is the root command: no spawning stack was captured.
    status, _ = get_json(api_server, "/api/v1/sessions/golden/threads/100/spawnstack")
    assert status == 404


def test_lines_breakdown(api_server):
    status, body = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/lines?metric=walltime&node=main/a/b")
    assert status == 200
    assert body["lines"] == [[20, 20]]
    assert body["file"] == "main.c"


def test_lines_on_unknown_node_404(api_server):
    status, _ = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/lines?metric=walltime&node=main/zzz")
    assert status == 404


def test_malformed_node_path_422(api_server):
    status, body = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/lines?metric=walltime&node=main//a")
    assert status == 422 and body["error_code"] == "MalformedNodePath"
    status, _ = get_json(
        api_server,
        "/api/v1/sessions/golden/threads/101/lines?metric=walltime&node=%25ff")
    assert status == 422


def test_source_fetch(api_server):
    status, body = get_json(api_server, "/api/v1/sessions/golden/source?file=spawn.c")
    assert status == 200
    assert body["line_count"] == 9
    assert body["lines"][6].strip().startswith("pthread_create")


def test_source_traversal_rejected(api_server):
    status, body = get_json(
        api_server, "/api/v1/sessions/golden/source?file=../../etc/passwd")
    assert status == 400 and body["error_code"] == "EscapesRoot"


def test_source_missing_404(api_server):
    status, body = get_json(api_server, "/api/v1/sessions/golden/source?file=nope.c")
    assert status == 404 and body["error_code"] == "NotFound"


def test_roofline_404_when_absent(api_server):
    status, body = get_json(api_server, "/api/v1/sessions/golden/roofline")
    assert status == 404


def test_roofline_served_when_present(tmp_path, golden_script):
    from conftest import wire_lines
    from profstream import ingest
    roofline = {"machine": "laptop",
                "compute": [{"name": "fp64", "ops_per_sec": 1.2e11}],
                "memory": [{"name": "L1", "bytes_per_sec": 8.0e11},
                           {"name": "DRAM", "bytes_per_sec": 4.2e10}]}
    result = ingest.consume_stream(wire_lines(golden_script.stream()),
                                   roofline=store.validate_roofline(roofline))
    store.finalize(result.bundle_objects(), tmp_path, "withroof")
    api = Api(tmp_path)
    body = api.roofline("withroof")
    assert body["machine"] == "laptop"
    assert len(body["memory"]) == 2


def test_check_report_lands_in_manifest(tmp_path, golden_script):
    from conftest import wire_lines
    from profstream import envcheck, ingest
    reader = envcheck.FixtureReader({envcheck.MAX_STACK_KNOB: "2048",
                                     envcheck.NUMA_BALANCING_KNOB: "0"})
    report = [r.as_obj() for r in envcheck.run_all(reader)]
    result = ingest.consume_stream(wire_lines(golden_script.stream()),
                                   check_report=report)
    assert result.manifest_obj()["check_report"][0]["status"] == "pass"


def test_fallback_index_page(api_server):
    status, body = http_get(api_server, "/")
    assert status == 200
    assert b"profstream" in body


def test_api_is_read_only_and_stable(api_server):
    a = http_get(api_server, "/api/v1/sessions/golden/tree")
    b = http_get(api_server, "/api/v1/sessions/golden/tree")
    assert a == b


def test_dispatch_unknown_endpoint():
    api = Api(".")
    with pytest.raises(ApiError) as err:
        dispatch_api(api, "/sessions/x/unknown", {})
    assert err.value.status == 404
