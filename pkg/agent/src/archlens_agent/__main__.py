"""Run a Python script under instrumentation.

    python -m archlens_agent --policy rules.json --log out.trace script.py args...

Both options fall back to environment variables, so an unmodified launch
command can be instrumented by exporting ARCHLENS_AGENT_POLICY and
ARCHLENS_AGENT_LOG and prefixing the interpreter with `-m archlens_agent`.
"""

from __future__ import annotations

import argparse
import os
import runpy
import sys

from archlens_agent import InstrumentationPolicy, install


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m archlens_agent")
    parser.add_argument(
        "--policy",
        default=os.environ.get("ARCHLENS_AGENT_POLICY"),
        metavar="FILE",
        help="policy JSON (default: $ARCHLENS_AGENT_POLICY)",
    )
    parser.add_argument(
        "--log",
        default=os.environ.get("ARCHLENS_AGENT_LOG"),
        metavar="FILE",
        help="trace log to write (default: $ARCHLENS_AGENT_LOG)",
    )
    parser.add_argument("script", help="script to run")
    parser.add_argument("args", nargs=argparse.REMAINDER)
    args = parser.parse_args(argv)
    if not args.policy or not args.log:
        parser.error(
            "need --policy and --log (or ARCHLENS_AGENT_POLICY / "
            "ARCHLENS_AGENT_LOG in the environment)"
        )

    handle = install(InstrumentationPolicy.from_file(args.policy), args.log)
    sys.argv = [args.script, *args.args]
    # mimic `python script.py`: the script's directory leads sys.path
    sys.path.insert(0, os.path.dirname(os.path.abspath(args.script)))
    try:
        runpy.run_path(args.script, run_name="__main__")
    finally:
        handle.uninstall()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
