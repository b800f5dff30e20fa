"""Batch front-end: run problems, emit replayable traces, re-verify traces.

Exit codes: 0 success, 2 schema error, 3 algorithm error (a partial trace
is still written), 4 trace mismatch during verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import SchemaError, TraceMismatchError
from .game import DEFAULT_BUDGET
from .trace import run_problem, verify_trace

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_ALGORITHM = 3
EXIT_MISMATCH = 4


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _run_one(args) -> dict:
    problem, budget, auto_ind = args
    return run_problem(problem, budget, auto_ind)


def cmd_run(args) -> int:
    try:
        payload = _load_json(args.file)
        auto_ind = args.auto_independence == "on"
        batch = isinstance(payload, list)
        problems = payload if batch else [payload]
        work = [(p, args.budget, auto_ind) for p in problems]
        if args.jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                traces = list(pool.map(_run_one, work))
        else:
            traces = [_run_one(w) for w in work]
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    _emit(traces if batch else traces[0], args.out)
    failed = [t for t in traces if not t["verdict"]["ok"]]
    for t in failed:
        print(f"error: {t['verdict'].get('message') or t['verdict']['code']}", file=sys.stderr)
    return EXIT_ALGORITHM if failed else EXIT_OK


def cmd_verify(args) -> int:
    try:
        payload = _load_json(args.trace)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    traces = payload if isinstance(payload, list) else [payload]
    for idx, trace in enumerate(traces):
        try:
            verify_trace(trace)
        except TraceMismatchError as exc:
            print(f"trace {idx}: {exc}", file=sys.stderr)
            return EXIT_MISMATCH
        except SchemaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valmono",
        description="Framed blow-up sequences, key-polynomial chains and "
        "monomialization, with replayable JSON traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a problem file and emit a trace")
    run_p.add_argument("file", help="problem JSON (object or array for batch)")
    run_p.add_argument("--out", help="write the trace(s) to this path")
    run_p.add_argument(
        "--budget", type=int, default=DEFAULT_BUDGET, help="step budget per run"
    )
    run_p.add_argument(
        "--auto-independence",
        choices=("on", "off"),
        default="on",
        help="declare the maximal untouched variable set on each sequence",
    )
    run_p.add_argument(
        "--jobs", type=int, default=1, help="worker processes for batch input"
    )
    run_p.set_defaults(func=cmd_run)

    ver_p = sub.add_parser("verify", help="replay a trace and check every witness")
    ver_p.add_argument("trace", help="trace JSON produced by `valmono run`")
    ver_p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
