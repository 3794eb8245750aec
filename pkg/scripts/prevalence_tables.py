#!/usr/bin/env python3
"""Print the prevalence table for published per-technique counts, plus occurrence rates.

With report files as arguments the table is built from those scans instead.
"""
import argparse
import sys

from hiddenlinks.report import aggregate_prevalence, merge, percentage_occurrence, read_report, synthetic_report

PAGE_COUNTS = dict(A=6, B=3, C=8, D=19, E=8, F=68, G=30, H=111, I=5, J=9, K=15, L=3)
LINK_COUNTS = dict(A=39, B=29, C=33, D=21, E=117, F=4333, G=1876, H=3210, I=122, J=31, K=15, L=47)
# title-only K pages share pages with H, and a few F/G links carry both labels
OVERLAPS = [("H", "K", 0)] * 5 + [("F", "G", 5), ("F", "G", 4)]
OCCURRENCE = [(994, 41405, 1), (81765, 5542046, 2)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("reports", nargs="*")
    ap.add_argument("--spam-pages", type=int, default=278)
    args = ap.parse_args(argv)
    if args.reports:
        with_files = [read_report(open(p, "rb").read()) for p in args.reports]
        report = merge(*with_files)
    else:
        report = synthetic_report(args.spam_pages, PAGE_COUNTS, LINK_COUNTS, OVERLAPS)
    print(aggregate_prevalence(report).render())
    print()
    for spam, total, decimals in OCCURRENCE:
        _, pct, recip = percentage_occurrence(spam, total, decimals)
        print(f"{spam}/{total} = {pct} = {recip}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
