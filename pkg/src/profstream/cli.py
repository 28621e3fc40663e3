"""Command-line entry points: profile, serve, analyse, check, replay."""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
from pathlib import Path

from . import collector, envcheck, ingest, service, sourcemap, store

EX_OK = 0
EX_FAIL = 1
EX_USAGE = 64
EX_NOINPUT = 66

LISTEN_ENV = "PROFSTREAM_LISTEN"
DEFAULT_LISTEN = "127.0.0.1:5971"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def _split_command(argv: list[str]) -> tuple[list[str], list[str]]:
    """Arguments before and after the profiled-command separator (-- or ----)."""
    for sep in ("----", "--"):
        if sep in argv:
            i = argv.index(sep)
            return argv[:i], argv[i + 1:]
    return argv, []


def _ingest_config(args) -> ingest.IngestConfig:
    return ingest.IngestConfig(
        strict=not args.lenient,
        reorder_capacity=args.reorder_capacity,
        merge_slack_ns=args.merge_slack_ns,
        min_off_ns=args.min_off_ns,
    )


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lenient", action="store_true",
                   help="skip and count bad lines instead of aborting the session")
    p.add_argument("--reorder-capacity", type=int, default=ingest.DEFAULT_REORDER_CAPACITY)
    p.add_argument("--merge-slack-ns", type=int, default=0)
    p.add_argument("--min-off-ns", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="profstream")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("profile", help="profile a command (or replay a script) "
                                       "into a session bundle")
    p.add_argument("--adapter", choices=["replay", "live"], default="replay")
    p.add_argument("--script", help="trace script for the replay adapter")
    p.add_argument("--sampler-cmd", help="external sampler command (live adapter)")
    p.add_argument("--server", help="use a remote processing server at HOST:PORT "
                                    "instead of the embedded one")
    p.add_argument("--out", default="./profstream-results",
                   help="bundle output root for the embedded server")
    p.add_argument("--speed", choices=[collector.AS_FAST_AS_POSSIBLE,
                                       collector.REAL_TIME],
                   default=collector.AS_FAST_AS_POSSIBLE)
    p.add_argument("--roofline", help="roofline data file to store with the bundle")
    p.add_argument("--force", action="store_true",
                   help="profile even when environment checks fail")
    p.add_argument("--required-depth", type=int,
                   default=envcheck.DEFAULT_REQUIRED_DEPTH)
    _add_ingest_flags(p)

    p = sub.add_parser("serve", help="run the processing server")
    p.add_argument("--listen", default=None, help=f"HOST:PORT (default {DEFAULT_LISTEN}, "
                                                  f"or ${LISTEN_ENV})")
    p.add_argument("--out", default="./profstream-results")
    _add_ingest_flags(p)

    p = sub.add_parser("analyse", help="serve the analyser UI/API over results")
    p.add_argument("results", help="results root containing session bundles")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8590)
    p.add_argument("--source-root", help="directory source files are served from")
    p.add_argument("--path-strip", help="prefix stripped from recorded source paths")
    p.add_argument("--allow-absolute-sources", action="store_true")
    p.add_argument("--ui-dir", help="static UI assets directory")
    p.add_argument("--segment-limit", type=int,
                   default=service.DEFAULT_EXACT_SEGMENT_LIMIT)

    p = sub.add_parser("check", help="check kernel/CPU configuration for profiling")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--required-depth", type=int,
                   default=envcheck.DEFAULT_REQUIRED_DEPTH)
    p.add_argument("--strict-unknown", action="store_true",
                   help="exit 2 when any knob was unreadable")

    p = sub.add_parser("replay", help="stream a trace script to a server")
    p.add_argument("--script", required=True)
    p.add_argument("--server", required=True, help="HOST:PORT")
    p.add_argument("--speed", choices=[collector.AS_FAST_AS_POSSIBLE,
                                       collector.REAL_TIME],
                   default=collector.AS_FAST_AS_POSSIBLE)
    return parser


def cmd_check(args) -> int:
    results = envcheck.run_all(envcheck.KnobReader(), policy=envcheck.WARN,
                               checks=envcheck.default_registry(args.required_depth))
    if args.as_json:
        print(json.dumps([r.as_obj() for r in results], indent=1, sort_keys=True))
    else:
        print(envcheck.report_text(results))
    if any(r.status == envcheck.FAIL for r in results):
        return EX_FAIL
    if args.strict_unknown and any(r.status == envcheck.UNKNOWN for r in results):
        return 2
    return EX_OK


def cmd_serve(args) -> int:
    listen = args.listen or os.environ.get(LISTEN_ENV) or DEFAULT_LISTEN
    try:
        address = _parse_address(listen)
    except ValueError as exc:
        print(f"profstream serve: {exc}", file=sys.stderr)
        return EX_USAGE
    try:
        server = ingest.SessionServer(address, args.out, _ingest_config(args))
    except OSError as exc:
        print(f"profstream serve: cannot bind {listen}: {exc}", file=sys.stderr)
        return EX_FAIL
    host, port = server.bound_address
    print(f"listening on {host}:{port}, writing bundles under {args.out}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("interrupted; finalizing active sessions", file=sys.stderr)
    finally:
        server.close_active()
        server.shutdown()
        server.server_close()
    return EX_OK


def cmd_analyse(args) -> int:
    results = Path(args.results)
    if not results.is_dir():
        print(f"profstream analyse: no such results path: {results}", file=sys.stderr)
        return EX_NOINPUT
    source_root = None
    if args.source_root:
        source_root = sourcemap.SourceRoot(
            root_path=Path(args.source_root).resolve(),
            allow_absolute=args.allow_absolute_sources,
            path_strip=args.path_strip)
    ui_dir = Path(args.ui_dir).resolve() if args.ui_dir else _default_ui_dir()
    api = service.Api(results, source_root=source_root,
                      exact_segment_limit=args.segment_limit)
    server = service.AnalyserServer((args.host, args.port), api, ui_dir=ui_dir)
    host, port = server.bound_address
    print(f"http://{host}:{port}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return EX_OK


def _default_ui_dir() -> Path | None:
    # A built frontend sitting in this checkout is picked up automatically
    # (src/profstream/cli.py -> repo root -> frontend/dist).
    repo_root = Path(__file__).resolve().parent.parent.parent
    candidate = repo_root / "frontend" / "dist"
    return candidate if (candidate / "index.html").is_file() else None


def cmd_replay(args) -> int:
    try:
        address = _parse_address(args.server)
        script = collector.load_script(args.script)
        sink = collector.SocketSink(address)
    except (ValueError, OSError, collector.ScriptParseError,
            collector.ServerUnreachable) as exc:
        print(f"profstream replay: {exc}", file=sys.stderr)
        return EX_FAIL
    try:
        report = collector.replay(script, sink, args.speed)
    finally:
        sink.close()
    print(json.dumps(report, sort_keys=True))
    return EX_OK


def cmd_profile(args, command: list[str]) -> int:
    if not command and not args.script:
        print("profstream profile: need a command after -- or a --script to replay",
              file=sys.stderr)
        return EX_USAGE

    check_report = None
    if args.force:
        results = envcheck.run_all(envcheck.KnobReader(), policy=envcheck.WARN,
                                   checks=envcheck.default_registry(args.required_depth))
        check_report = [r.as_obj() for r in results]
    else:
        try:
            results = envcheck.run_all(envcheck.KnobReader(), policy=envcheck.ABORT,
                                       checks=envcheck.default_registry(args.required_depth))
            check_report = [r.as_obj() for r in results]
        except envcheck.AbortProfiling as exc:
            print("profstream profile: refusing to start, environment checks failed "
                  "(--force to override):", file=sys.stderr)
            print(envcheck.report_text(exc.failures), file=sys.stderr)
            return EX_FAIL

    roofline_obj = None
    if args.roofline:
        try:
            roofline_obj = store.validate_roofline(
                json.loads(Path(args.roofline).read_text(encoding="utf-8")))
        except (OSError, ValueError) as exc:
            print(f"profstream profile: bad roofline file: {exc}", file=sys.stderr)
            return EX_FAIL

    sampler_cmd = args.sampler_cmd.split() if args.sampler_cmd else None

    embedded = None
    bundle_done = threading.Event()
    bundle_path: list[Path] = []
    if args.server:
        try:
            address = _parse_address(args.server)
        except ValueError as exc:
            print(f"profstream profile: {exc}", file=sys.stderr)
            return EX_USAGE
        if roofline_obj is not None or check_report is not None:
            print("note: check report/roofline are stored by the embedded server "
                  "only; the wire format does not carry them", file=sys.stderr)
    else:
        embedded = ingest.SessionServer(("127.0.0.1", 0), args.out,
                                        _ingest_config(args),
                                        on_bundle=lambda path, result:
                                        (bundle_path.append(path), bundle_done.set()))
        embedded.session_extras = {"check_report": check_report,
                                   "roofline": roofline_obj}
        threading.Thread(target=embedded.serve_forever, daemon=True).start()
        address = embedded.bound_address

    try:
        outcome = collector.run_profile(command or None, address,
                                        adapter=args.adapter,
                                        script_path=args.script,
                                        speed=args.speed,
                                        sampler_cmd=sampler_cmd)
    except (collector.ServerUnreachable, collector.AdapterUnavailable,
            collector.ScriptParseError) as exc:
        print(f"profstream profile: {exc}", file=sys.stderr)
        return EX_FAIL
    finally:
        if embedded is not None:
            bundle_done.wait(timeout=30)
            embedded.shutdown()
            embedded.server_close()

    print(f"session {outcome.session_id} streamed "
          f"({sum(outcome.report.values())} events)")
    if bundle_path:
        print(f"bundle: {bundle_path[0]}")
    return outcome.exit_status


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    own, command = _split_command(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(own)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    if args.subcommand == "profile":
        return cmd_profile(args, command)
    if args.subcommand == "serve":
        return cmd_serve(args)
    if args.subcommand == "analyse":
        return cmd_analyse(args)
    if args.subcommand == "check":
        return cmd_check(args)
    if args.subcommand == "replay":
        return cmd_replay(args)
    return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
