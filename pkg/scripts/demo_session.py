#!/usr/bin/env python3
"""End-to-end demo: replay the golden trace through a local TCP server,
finalize a bundle, and print what to run next to browse it.

    python3 scripts/demo_session.py [output_root]
"""

from __future__ import annotations

import sys
import threading
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from profstream import collector, ingest  # noqa: E402


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else REPO / "profstream-results"
    server = ingest.SessionServer(("127.0.0.1", 0), out)
    done = threading.Event()
    bundles = []
    server.on_bundle = lambda path, result: (bundles.append(path), done.set())
    threading.Thread(target=server.serve_forever, daemon=True).start()

    sink = collector.SocketSink(server.bound_address)
    script = collector.load_script(REPO / "tests" / "data" / "golden.trace")
    report = collector.replay(script, sink)
    sink.close()
    if not done.wait(timeout=30):
        print("server did not finalize the session", file=sys.stderr)
        return 1
    server.shutdown()
    server.server_close()

    print(f"streamed {sum(report.values())} events: {report}")
    print(f"bundle: {bundles[0]}")
    print(f"\nbrowse it with:\n  profstream analyse {out} "
          f"--source-root {REPO / 'tests' / 'data' / 'src'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
