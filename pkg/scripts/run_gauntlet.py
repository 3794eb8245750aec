#!/usr/bin/env python3
"""Classify every gauntlet fixture and compare against its expected label."""
import argparse
import json
import sys
import time
from pathlib import Path

from hiddenlinks.detector import classify_page

DEFAULT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "gauntlet"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", type=Path, default=DEFAULT_DIR)
    args = ap.parse_args(argv)
    manifest = json.loads((args.directory / "manifest.json").read_text())
    start = time.perf_counter()
    bad = 0
    for name, expected in sorted(manifest.items()):
        found = {}
        for f in classify_page((args.directory / name).read_bytes()).findings:
            found.setdefault(f.link.href_raw, set()).add(f.technique)
        ok = found == {expected["href"]: {expected["label"]}}
        bad += not ok
        print(f"{'OK ' if ok else 'BAD'} {name:28} {expected['label']}  {sorted((h, sorted(l)) for h, l in found.items())}")
    print(f"{len(manifest) - bad}/{len(manifest)} exact in {time.perf_counter() - start:.3f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
