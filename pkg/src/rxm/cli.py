"""Command line: batch runs, an interactive loop, and a serve mode.

``run`` executes a script and writes the trace (newline-delimited JSON).
``repl`` is a manual play-out loop. ``serve`` speaks the same commands
as NDJSON over stdio or a local TCP port, pushing a snapshot delta after
every state change; that protocol is what the console consumes.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import time

from .coordinator import Coordinator, TraceEntry
from .errors import InjectError, RunError
from .modeltext import ParseFailure, parse_files, try_parse_script
from .script import InjectStep, TickStep
from .values import value_from_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rxm",
        description="Execute reactive models: scenario charts plus statecharts "
                    "over one shared object store.")
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("--model", action="append", required=True, metavar="PATH",
                       help="model file (.rxm); repeatable")
        p.add_argument("--strict", action="store_true",
                       help="halt the run on a hot or forbidden violation")
        p.add_argument("--step-bound", type=int, default=10000, metavar="N",
                       help="max events per super-step (default 10000)")

    run = sub.add_parser("run", help="execute a script and write the trace")
    common(run)
    run.add_argument("--script", required=True, metavar="PATH",
                     help="script file (.rxs)")
    run.add_argument("--trace", metavar="PATH",
                     help="trace output path (default: stdout)")

    repl = sub.add_parser("repl", help="interactive play-out")
    common(repl)
    repl.add_argument("--wall", action="store_true",
                      help="advance the clock with real elapsed time")

    serve = sub.add_parser("serve", help="NDJSON session for the console")
    common(serve)
    serve.add_argument("--port", type=int, metavar="N",
                       help="serve one session on this TCP port "
                            "(default: stdio)")
    serve.add_argument("--wall", action="store_true",
                       help="advance the clock with real elapsed time")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        bundle = parse_files(args.model)
    except ParseFailure as exc:
        for error in exc.errors:
            print(error, file=sys.stderr)
        return 2
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 2
    if args.mode == "run":
        return cmd_run(args, bundle)
    if args.mode == "repl":
        return cmd_repl(args, bundle)
    return cmd_serve(args, bundle)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args, bundle) -> int:
    try:
        with open(args.script, encoding="utf-8") as fh:
            script_text = fh.read()
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 2
    script, errors = try_parse_script(script_text, bundle, args.script)
    if errors:
        for error in errors:
            print(error, file=sys.stderr)
        return 2
    coordinator = Coordinator(bundle, strict=args.strict,
                              step_bound=args.step_bound)
    result = coordinator.run_script(script)
    text = result.trace_text()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for outcome in result.assertions:
        print(outcome.describe(), file=sys.stderr)
    for error in result.errors:
        print(f"error: {error}", file=sys.stderr)
    failed = not result.assertions_ok
    strict_failed = args.strict and (result.halted or result.violations)
    return 1 if failed or strict_failed else 0


# ---------------------------------------------------------------------------
# repl
# ---------------------------------------------------------------------------

REPL_USAGE = """commands:
  inject <src> <dst>.<event>(<args>)   deliver an environment event
  tick <duration>                      advance the clock (e.g. 1s, 500ms)
  state <object>                       show a machine's configuration
  charts                               show running chart copies
  trace                                show the trace so far
  quit                                 leave"""


def _entry_line(entry: TraceEntry) -> str:
    args = ", ".join(repr(a) for a in entry.event.args)
    line = (f"  [{entry.seq}] clock={entry.clock} {entry.event.origin}: "
            f"{entry.event.src} -> {entry.event.dst} "
            f"{entry.event.name}({args})")
    for violation in entry.violations:
        line += f"\n      violation: {violation.kind} in {violation.chart}"
    return line


class _WallClock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.t0 = time.monotonic()

    def sync(self, coordinator: Coordinator) -> None:
        if not self.enabled:
            return
        elapsed = int((time.monotonic() - self.t0) * 1000)
        if elapsed > coordinator.clock.now:
            coordinator.tick(elapsed - coordinator.clock.now)


def cmd_repl(args, bundle, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    coordinator = Coordinator(bundle, strict=args.strict,
                              step_bound=args.step_bound)
    wall = _WallClock(getattr(args, "wall", False))
    for entry in coordinator.start():
        print(_entry_line(entry), file=stdout)
    print("ready; 'help' lists commands", file=stdout)
    while True:
        print("> ", end="", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            return 0
        line = line.strip()
        if not line:
            continue
        if line in ("quit", "exit"):
            return 0
        if line == "help":
            print(REPL_USAGE, file=stdout)
            continue
        if line == "charts":
            copies = coordinator.playout.running()
            if not copies:
                print("  no running copies", file=stdout)
            for copy in copies:
                bindings = ", ".join(f"{k}={v}" for k, v in
                                     copy.bindings_view().items())
                cut = ", ".join(f"{k}:{v}" for k, v in sorted(copy.cut.items()))
                print(f"  {copy.spec.name}#{copy.copy_id} "
                      f"bindings[{bindings}] cut[{cut}]", file=stdout)
            continue
        if line == "trace":
            for entry in coordinator.trace:
                print(_entry_line(entry), file=stdout)
            continue
        if line.startswith("state "):
            owner = line.split(None, 1)[1].strip()
            machine = coordinator.machines.get(owner)
            if machine is None:
                print(f"  no machine on '{owner}'", file=stdout)
            else:
                config = ", ".join(sorted(machine.configuration()))
                print(f"  configuration {{{config}}}", file=stdout)
            continue
        if line.startswith("inject") or line.startswith("tick"):
            script, errors = try_parse_script(line.rstrip(";") + ";", bundle,
                                              "<repl>")
            if errors or not script.steps:
                for error in errors:
                    print(f"  {error.message}", file=stdout)
                print(REPL_USAGE, file=stdout)
                continue
            step = script.steps[0]
            wall.sync(coordinator)
            try:
                if isinstance(step, InjectStep):
                    entries = coordinator.inject(step.src, step.dst, step.event,
                                                 tuple(step.args))
                elif isinstance(step, TickStep):
                    entries = coordinator.tick(step.ms)
                else:
                    print(REPL_USAGE, file=stdout)
                    continue
            except (InjectError, RunError) as exc:
                print(f"  error: {exc}", file=stdout)
                continue
            for entry in entries:
                print(_entry_line(entry), file=stdout)
            if not entries:
                print(f"  quiescent, clock={coordinator.clock.now}", file=stdout)
            continue
        print(REPL_USAGE, file=stdout)


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def _handle_request(coordinator: Coordinator, bundle, request: dict,
                    make_coordinator) -> tuple[dict, dict | None, Coordinator]:
    """Returns (response, optional delta push, possibly new coordinator)."""
    cmd = request.get("cmd")
    if cmd == "inject":
        try:
            args = tuple(value_from_json(a) for a in request.get("args", []))
            entries = coordinator.inject(request.get("src", "env"),
                                         request.get("dst", ""),
                                         request.get("event", ""), args)
        except (InjectError, RunError, ValueError) as exc:
            return {"ok": False, "error": str(exc)}, None, coordinator
        payload = [e.to_json_obj() for e in entries]
        delta = {"type": "delta", "entries": payload,
                 "snapshot": coordinator.snapshot()}
        return {"ok": True, "entries": payload}, delta, coordinator
    if cmd == "tick":
        ms = request.get("ms")
        if not isinstance(ms, int) or ms < 0:
            return {"ok": False, "error": "tick needs ms >= 0"}, None, coordinator
        try:
            entries = coordinator.tick(ms)
        except RunError as exc:
            return {"ok": False, "error": str(exc)}, None, coordinator
        payload = [e.to_json_obj() for e in entries]
        delta = {"type": "delta", "entries": payload,
                 "snapshot": coordinator.snapshot()}
        return {"ok": True, "entries": payload}, delta, coordinator
    if cmd == "snapshot":
        return {"ok": True, "snapshot": coordinator.snapshot()}, None, coordinator
    if cmd == "reset":
        coordinator = make_coordinator()
        coordinator.start()
        delta = {"type": "delta", "entries": [],
                 "snapshot": coordinator.snapshot()}
        return {"ok": True}, delta, coordinator
    return {"ok": False, "error": "unknown-command"}, None, coordinator


def _serve_session(reader, writer, args, bundle) -> None:
    def make_coordinator() -> Coordinator:
        return Coordinator(bundle, strict=args.strict,
                           step_bound=args.step_bound)

    coordinator = make_coordinator()
    coordinator.start()
    wall = _WallClock(getattr(args, "wall", False))

    def send(obj: dict) -> None:
        writer.write(json.dumps(obj, separators=(",", ":")) + "\n")
        writer.flush()

    for line in reader:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("not an object")
        except ValueError:
            send({"ok": False, "error": "parse"})
            continue
        if request.get("cmd") in ("inject", "tick"):
            wall.sync(coordinator)
        response, delta, coordinator = _handle_request(
            coordinator, bundle, request, make_coordinator)
        send(response)
        if delta is not None:
            send(delta)


def cmd_serve(args, bundle) -> int:
    if args.port:
        server = socket.create_server(("127.0.0.1", args.port))
        print(f"listening on 127.0.0.1:{args.port}", file=sys.stderr)
        conn, _addr = server.accept()
        with conn:
            reader = conn.makefile("r", encoding="utf-8")
            writer = conn.makefile("w", encoding="utf-8")
            try:
                _serve_session(reader, writer, args, bundle)
            except (BrokenPipeError, ConnectionResetError):
                pass
        server.close()
        return 0
    _serve_session(sys.stdin, sys.stdout, args, bundle)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
