#!/usr/bin/env python3
"""Generate a labelled corpus, scan it at several worker counts and report recall."""
import argparse
import sys
import tempfile
import time
from pathlib import Path

from hiddenlinks.corpus import CONTROL, TECHNIQUES, closure_stats, generate_corpus
from hiddenlinks.detector import Config
from hiddenlinks.report import emit_report, labels_by_page, scan_paths


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2009)
    ap.add_argument("--per-technique", type=int, default=100)
    ap.add_argument("--controls", type=int, default=400)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    ap.add_argument("--keep", type=Path, help="write the corpus here instead of a temporary directory")
    args = ap.parse_args(argv)

    counts = {t: args.per_technique for t in TECHNIQUES}
    counts[CONTROL] = args.controls
    with tempfile.TemporaryDirectory() as tmp:
        root = args.keep or Path(tmp)
        records = generate_corpus(counts, args.seed, root)
        outputs = set()
        report = None
        for w in args.workers:
            t0 = time.perf_counter()
            report = scan_paths([str(root)], Config(workers=w))
            outputs.add(emit_report(report))
            print(f"workers={w}: {time.perf_counter() - t0:.2f}s")
        stats = closure_stats(records, labels_by_page(report, relative_to=root))

    for t in TECHNIQUES:
        print(f"{t}  planted={stats.planted[t]:4d}  recovered={stats.recovered[t]:4d}  recall={stats.recall(t):.3f}")
    print(f"control findings: {stats.control_findings}")
    print(f"mismatched pages: {len(stats.mismatches)}")
    print(f"identical output across worker counts: {len(outputs) == 1}")
    return 0 if stats.exact and len(outputs) == 1 else 1


if __name__ == "__main__":
    sys.exit(main())
