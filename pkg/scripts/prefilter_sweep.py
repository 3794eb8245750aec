#!/usr/bin/env python3
"""Train the prefilter on generated pages and sweep the false-negative cost."""
import argparse
import random
import sys
from collections import Counter

from hiddenlinks.corpus import CONTROL, TECHNIQUES, generate_case
from hiddenlinks.nb import NORMAL, SPAM, nb_filter, nb_train, page_tokens


def pages(labels, seed):
    return [page_tokens(generate_case(t, seed + i).page_bytes) for i, t in enumerate(labels)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spam", type=int, default=63)
    ap.add_argument("--normal", type=int, default=181)
    ap.add_argument("--max-cost", type=int, default=100)
    ap.add_argument("--fragments", type=int, default=2, help="short token samples per held-out page")
    args = ap.parse_args(argv)

    spam_labels = [TECHNIQUES[i % len(TECHNIQUES)] for i in range(args.spam)]
    training = [(d, SPAM) for d in pages(spam_labels, 100)] + [(d, NORMAL) for d in pages([CONTROL] * args.normal, 1000)]
    model = nb_train(training, cost_fp=1, cost_fn=1)
    held_out = pages(list(TECHNIQUES) * 4, 5000) + pages([CONTROL] * 48, 7000)
    rng = random.Random(5)
    held_out += [Counter(rng.sample(sorted(d), rng.randint(1, 3))) for d in list(held_out) for _ in range(args.fragments)]
    keyed = list(enumerate(held_out))

    print("cost_fn\tthreshold\tflagged")
    previous, nested = set(), True
    for cost_fn in range(1, args.max_cost + 1):
        m = model.with_costs(1, cost_fn)
        flagged = set(nb_filter(m, keyed))
        nested &= previous <= flagged
        previous = flagged
        print(f"{cost_fn}\t{m.threshold:.6f}\t{len(flagged)}")
    print(f"# {len(training)} training docs, {len(keyed)} scored, nested={nested}", file=sys.stderr)
    return 0 if nested else 1


if __name__ == "__main__":
    sys.exit(main())
