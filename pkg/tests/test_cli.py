import json
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

from profstream import cli, envcheck, ingest

GOLDEN = Path(__file__).parent / "data" / "golden.trace"


@pytest.fixture
def passing_env(monkeypatch):
    values = {envcheck.MAX_STACK_KNOB: "2048", envcheck.NUMA_BALANCING_KNOB: "0"}
    monkeypatch.setattr(envcheck, "KnobReader", lambda: envcheck.FixtureReader(values))


def test_profile_replay_embedded_writes_bundle(tmp_path, passing_env, capsys):
    code = cli.main(["profile", "--adapter", "replay", "--script", str(GOLDEN),
                     "--out", str(tmp_path), "--", "sleep", "0.05"])
    assert code == 0
    out = capsys.readouterr().out
    assert "session golden" in out
    assert "bundle:" in out
    bundle = tmp_path / "golden"
    assert (bundle / "manifest.json").is_file()
    manifest = json.loads((bundle / "manifest.json").read_text())
    assert manifest["truncated"] is False
    assert manifest["check_report"][0]["status"] == "pass"


def test_profile_four_dash_separator(tmp_path, passing_env, capsys):
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path),
                     "----", "true"])
    assert code == 0


def test_profile_without_command_or_script_is_usage_error(capsys):
    assert cli.main(["profile"]) == 64


def test_profile_propagates_command_failure(tmp_path, passing_env):
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path),
                     "--", "sh", "-c", "exit 7"])
    assert code == 7


def test_profile_unreachable_server(passing_env, capsys):
    code = cli.main(["profile", "--script", str(GOLDEN),
                     "--server", "127.0.0.1:1", "--", "true"])
    assert code == 1
    assert "cannot reach" in capsys.readouterr().err


def test_profile_env_check_failure_aborts(tmp_path, monkeypatch, capsys):
    values = {envcheck.MAX_STACK_KNOB: "63", envcheck.NUMA_BALANCING_KNOB: "1"}
    monkeypatch.setattr(envcheck, "KnobReader", lambda: envcheck.FixtureReader(values))
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path),
                     "--", "true"])
    assert code == 1
    assert "environment checks failed" in capsys.readouterr().err
    # --force proceeds and records the failing report in the manifest.
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path),
                     "--force", "--", "true"])
    assert code == 0
    manifest = json.loads((tmp_path / "golden" / "manifest.json").read_text())
    assert {r["status"] for r in manifest["check_report"]} == {"fail"}


def test_profile_with_roofline(tmp_path, passing_env, capsys):
    roofline = tmp_path / "roof.json"
    roofline.write_text(json.dumps({
        "machine": "bench", "compute": [{"name": "fp32", "ops_per_sec": 2e11}],
        "memory": [{"name": "DRAM", "bytes_per_sec": 5e10}]}))
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path),
                     "--roofline", str(roofline)])
    assert code == 0
    assert (tmp_path / "golden" / "roofline.json").is_file()


def test_serve_rejects_bound_port(tmp_path, capsys):
    placeholder = socket.socket()
    placeholder.bind(("127.0.0.1", 0))
    port = placeholder.getsockname()[1]
    code = cli.main(["serve", "--listen", f"127.0.0.1:{port}",
                     "--out", str(tmp_path)])
    placeholder.close()
    assert code == 1
    assert "cannot bind" in capsys.readouterr().err


def test_analyse_missing_path(capsys):
    assert cli.main(["analyse", "/definitely/not/here"]) == 66


def test_replay_subcommand_streams(tmp_path, capsys):
    import threading
    server = ingest.SessionServer(("127.0.0.1", 0), tmp_path)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    done = threading.Event()
    server.on_bundle = lambda path, result: done.set()
    try:
        host, port = server.bound_address
        code = cli.main(["replay", "--script", str(GOLDEN),
                         "--server", f"{host}:{port}"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["sample"] == 10
        assert done.wait(timeout=10)
    finally:
        server.shutdown()
        server.server_close()


def test_serve_interrupt_finalizes_active_session_truncated(tmp_path):
    from profstream import protocol, store
    from profstream.model import MetricDesc, SessionHeader, Spawn

    proc = subprocess.Popen(
        [sys.executable, "-m", "profstream.cli", "serve",
         "--listen", "127.0.0.1:0", "--out", str(tmp_path)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        banner = proc.stdout.readline()
        address = banner.split()[2]  # "listening on HOST:PORT, ..."
        host, port = address.rstrip(",").split(":")
        header = SessionHeader(version=1, session_id="interrupted", wall_start=1,
                               command="c", hostname="h",
                               metrics=(MetricDesc("walltime", "time", "ns"),))
        spawn = Spawn(parent_tid=0, pid=5, tid=5, t=0, name="w", sid=None)
        sock = socket.create_connection((host, int(port)))
        sock.sendall(protocol.encode_event(header) + protocol.encode_event(spawn))
        time.sleep(0.5)  # let the server consume the partial stream
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=15)
        sock.close()
        manifests, _ = store.list_sessions(tmp_path)
        assert len(manifests) == 1
        assert manifests[0]["session_id"] == "interrupted"
        assert manifests[0]["truncated"] is True
    finally:
        if proc.poll() is None:
            proc.kill()


def test_analyse_subprocess_serves_api(tmp_path, passing_env):
    # End to end through the real console entry point.
    code = cli.main(["profile", "--script", str(GOLDEN), "--out", str(tmp_path)])
    assert code == 0
    proc = subprocess.Popen(
        [sys.executable, "-m", "profstream.cli", "analyse", str(tmp_path),
         "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        url = proc.stdout.readline().strip()
        assert url.startswith("http://")
        with urllib.request.urlopen(url + "api/v1/sessions", timeout=10) as resp:
            sessions = json.loads(resp.read())
        assert sessions[0]["session_id"] == "golden"
        with urllib.request.urlopen(url, timeout=10) as resp:
            assert b"profstream" in resp.read()
    finally:
        proc.send_signal(signal.SIGINT)
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
