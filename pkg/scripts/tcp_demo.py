"""Run a .swirl system as one TCP process per location on localhost and merge the reports."""

from __future__ import annotations

import argparse
import json
import socket
import subprocess
import sys
import tempfile
from pathlib import Path

from swirl.runtime import merge_reports, parse_report
from swirl.syntax import parse_swirl


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("swirl", type=Path)
    ap.add_argument("--timeout", type=float, default=60.0)
    args = ap.parse_args()

    locs = parse_swirl(args.swirl.read_text()).locations
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        meta = work / "meta.json"
        meta.write_text(
            json.dumps({"locations": {l: {"host": "127.0.0.1", "port": free_port()} for l in locs}})
        )
        procs = [
            (l, subprocess.Popen(
                [sys.executable, "-m", "swirl.cli", "run", str(args.swirl), str(meta),
                 "--tcp", "--loc", l, "-o", str(work / f"{l}.report")]
            ))
            for l in locs
        ]
        codes = {l: p.wait(args.timeout) for l, p in procs}
        if any(codes.values()):
            print(f"failed: {codes}", file=sys.stderr)
            raise SystemExit(1)
        merged = merge_reports(parse_report((work / f"{l}.report").read_text()) for l in locs)
    sys.stdout.write(merged.text())


if __name__ == "__main__":
    main()
