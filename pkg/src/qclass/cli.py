"""Command-line front end.

    qclass run <manifest> [--out report.json] [--parallel] [--max-order N]
    qclass check <manifest>
    qclass explain-conventions

Exit codes: 0 success, 1 residual/verdict failure inside a task, 2 load or
parse error.
"""

from __future__ import annotations

import argparse
import sys

from .conventions import HANDBOOK
from .manifest import (
    DEFAULT_MAX_ORDER,
    ManifestError,
    load_manifest,
    report_to_text,
    run_tasks,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qclass",
        description="Exact symbolic engine for homological vector fields: "
                    "structure checks, universal cocycles, and their classes.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="load a manifest and execute its tasks")
    run_p.add_argument("manifest")
    run_p.add_argument("--out", help="write the JSON report here instead of stdout")
    run_p.add_argument("--parallel", action="store_true",
                       help="run independent tasks on a thread pool")
    run_p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER,
                       help="refuse series orders above this cap "
                            f"(default {DEFAULT_MAX_ORDER})")

    check_p = sub.add_parser("check", help="load a manifest and certify q only")
    check_p.add_argument("manifest")

    sub.add_parser("explain-conventions",
                   help="print the sign-convention handbook")

    args = parser.parse_args(argv)

    if args.command == "explain-conventions":
        print(HANDBOOK, end="")
        return 0

    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "check":
        names = ", ".join(
            f"{n}({'odd' if p else 'even'})"
            for n, p in manifest.chart.coordinates)
        print(f"chart: {names}")
        print("q: certified homological ([Q,Q] = 0 exactly)")
        return 0

    report = run_tasks(manifest, max_order=args.max_order,
                       parallel=args.parallel)
    text = report_to_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
