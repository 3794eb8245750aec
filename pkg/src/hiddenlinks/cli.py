"""Command-line entry point.

Exit codes: 0 success (findings or not), 1 usage error, 2 internal error.
Global options may appear before or after the subcommand; precedence is
built-in defaults, then ``--config`` file, then explicit flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import CONTROL, TECHNIQUES, generate_corpus
from .detector import Config, PageResult, compare_snapshots
from .nb import NORMAL, SPAM, NBModel, nb_score, nb_train, page_tokens
from .report import (
    FORMATS,
    ScanReport,
    UsageError,
    aggregate_prevalence,
    anchor_term_frequencies,
    config_echo,
    emit_report,
    merge,
    percentage_occurrence,
    read_report,
    scan_paths,
)

log = logging.getLogger("hiddenlinks")

_THRESHOLDS = ("tau_color", "tau_tiny_font", "tau_tiny_px", "tau_scroll", "tau_menu", "tau_title", "clip_cutoff", "step_budget")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _viewport(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")


def _global_options() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g.add_argument("--config", metavar="FILE", default=S, help="key=value settings file")
    g.add_argument("--viewport", type=_viewport, metavar="WxH", default=S)
    g.add_argument("--format", choices=FORMATS, default=S, help="report format (default json)")
    g.add_argument("--workers", type=int, default=S, help="parallel scan workers")
    g.add_argument("-v", "--verbose", action="count", default=S)
    for name in _THRESHOLDS:
        kind = int if name in ("tau_menu", "tau_title", "step_budget") else float
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=S)
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = _Parser(prog="hiddenlinks", description="Find hidden hyperlinks in HTML pages.", parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("scan", parents=[common], help="classify pages and write a report")
    p.add_argument("paths", nargs="+", help="files or directories; - reads standard input")
    p.add_argument("-o", "--output", help="report file (default standard output)")
    p.add_argument("--base-url", help="base URL for resolving relative links")

    p = sub.add_parser("gen", parents=[common], help="generate a ground-truth corpus")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-technique", type=int, default=10)
    p.add_argument("--controls", type=int, default=50)
    p.add_argument("--count", action="append", default=[], metavar="T=N", help="override one technique's count")

    p = sub.add_parser("aggregate", parents=[common], help="prevalence table from one or more reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--top", type=int, default=0, help="also list the K most frequent anchor terms")
    p.add_argument("--total-pages", type=int, help="crawl size for the percentage-occurrence line")
    p.add_argument("--decimals", type=int, default=1)

    p = sub.add_parser("prefilter", help="naive Bayes triage")
    pre = p.add_subparsers(dest="action", metavar="ACTION", parser_class=_Parser)
    pre.required = True
    t = pre.add_parser("train", parents=[common], help="train a model from labelled pages")
    t.add_argument("--spam", nargs="+", required=True, help="pages (or directories) with hidden links")
    t.add_argument("--normal", nargs="+", required=True, help="normal pages (or directories)")
    t.add_argument("-o", "--model", required=True)
    t.add_argument("--cost-fp", type=float, default=1.0)
    t.add_argument("--cost-fn", type=float, default=10.0)
    t.add_argument("--alpha", type=float, default=1.0)
    s = pre.add_parser("score", parents=[common], help="posterior per page; flagged pages marked")
    s.add_argument("--model", required=True)
    s.add_argument("paths", nargs="+")
    s.add_argument("--cost-fp", type=float)
    s.add_argument("--cost-fn", type=float)
    s.add_argument("--flagged-only", action="store_true")

    p = sub.add_parser("diff", parents=[common], help="links present for the spider but absent for the browser")
    p.add_argument("spider")
    p.add_argument("browser")
    p.add_argument("--base-url")
    p.add_argument("-o", "--output")
    return parser


def resolve_config(args: argparse.Namespace) -> Config:
    config = Config()
    if getattr(args, "config", None):
        try:
            config = Config.load(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror or exc}")
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}")
    changes = {name: getattr(args, name, None) for name in _THRESHOLDS}
    if getattr(args, "viewport", None):
        changes["viewport_width"], changes["viewport_height"] = args.viewport
    changes["workers"] = getattr(args, "workers", None)
    if changes["workers"] is not None and changes["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    return config.replace(**changes)


def _write(data: bytes, output: Optional[str]) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _html_files(paths: Sequence[str]) -> list[Path]:
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(q for q in p.rglob("*") if q.suffix.lower() in (".html", ".htm") and q.is_file()))
        elif p.is_file():
            out.append(p)
        else:
            raise UsageError(f"not found: {raw}")
    return out


def cmd_scan(args, config: Config) -> int:
    report = scan_paths(args.paths, config, base_url=args.base_url)
    for note in report.notes:
        log.warning(note)
    _write(emit_report(report, getattr(args, "format", "json")), args.output)
    return 0


def cmd_gen(args, config: Config) -> int:
    counts = {t: args.per_technique for t in TECHNIQUES}
    counts[CONTROL] = args.controls
    for item in args.count:
        key, sep, val = item.partition("=")
        if not sep or (key not in counts):
            raise UsageError(f"bad --count {item!r}; expected T=N with T in A..L or control")
        try:
            counts[key] = int(val)
        except ValueError:
            raise UsageError(f"bad --count {item!r}")
    if any(n < 0 for n in counts.values()):
        raise UsageError("counts must be non-negative")
    # only non-default thresholds reach the generator, so defaults give the canonical bytes
    defaults = Config()
    params = {
        name: getattr(config, name)
        for name in ("tau_color", "tau_scroll", "tau_menu", "tau_title", "viewport_width")
        if getattr(config, name) != getattr(defaults, name)
    }
    records = generate_corpus(counts, args.seed, args.out_dir, params)
    print(f"wrote {len(records)} cases to {args.out_dir}", file=sys.stderr)
    return 0


def cmd_aggregate(args, config: Config) -> int:
    reports = []
    for path in args.reports:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror or exc}")
        try:
            reports.append(read_report(data))
        except (ValueError, KeyError, IndexError) as exc:
            raise UsageError(f"{path}: not a report ({exc})")
    merged = merge(*reports)
    table = aggregate_prevalence(merged)
    terms = anchor_term_frequencies(merged, args.top)
    occurrence = None
    if args.total_pages is not None:
        try:
            occurrence = percentage_occurrence(table.spam_pages, args.total_pages, args.decimals)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"--total-pages: {exc}")
    if getattr(args, "format", None) == "json":
        doc = {
            "spam_pages": table.spam_pages,
            "rows": [r.__dict__ for r in table.rows],
            "aggregate": {"pages": table.aggregate_pages, "percentage": table.aggregate_percentage, "links": table.aggregate_links},
            "anchor_terms": terms,
        }
        if occurrence:
            doc["occurrence"] = {"fraction": occurrence[0], "percentage": occurrence[1], "reciprocal": occurrence[2]}
        _write((json.dumps(doc, indent=2) + "\n").encode(), None)
        return 0
    lines = [table.render(args.decimals)]
    if occurrence:
        lines.append(f"occurrence: {table.spam_pages}/{args.total_pages} = {occurrence[1]} = {occurrence[2]}")
    for term, n in terms:
        lines.append(f"{term}\t{n}")
    print("\n".join(lines))
    return 0


def _tokens_for(paths: Sequence[str]) -> list[tuple[str, dict]]:
    return [(str(p), page_tokens(p.read_bytes())) for p in _html_files(paths)]


def cmd_prefilter(args, config: Config) -> int:
    if args.action == "train":
        spam, normal = _tokens_for(args.spam), _tokens_for(args.normal)
        try:
            model = nb_train([(t, SPAM) for _, t in spam] + [(t, NORMAL) for _, t in normal], args.cost_fp, args.cost_fn, args.alpha)
        except ValueError as exc:
            raise UsageError(str(exc))
        model.save(args.model)
        print(f"trained on {len(spam)} spam and {len(normal)} normal pages; threshold {model.threshold:.6g}", file=sys.stderr)
        return 0
    try:
        model = NBModel.load(args.model)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load model {args.model}: {exc}")
    if args.cost_fp is not None or args.cost_fn is not None:
        try:
            model = model.with_costs(args.cost_fp or model.cost_fp, args.cost_fn or model.cost_fn)
        except ValueError as exc:
            raise UsageError(str(exc))
    rows = []
    for path, tokens in _tokens_for(args.paths):
        post = nb_score(model, tokens)
        flagged = post >= model.threshold
        if flagged or not args.flagged_only:
            rows.append({"path": path, "posterior": post, "flagged": flagged})
    if getattr(args, "format", None) == "json":
        _write((json.dumps({"threshold": model.threshold, "pages": rows}, indent=2) + "\n").encode(), None)
    else:
        print("path\tposterior\tflagged")
        for r in rows:
            print(f"{r['path']}\t{r['posterior']:.6g}\t{int(r['flagged'])}")
    return 0


def cmd_diff(args, config: Config) -> int:
    try:
        spider = Path(args.spider).read_bytes()
        browser = Path(args.browser).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read snapshot: {exc.strerror or exc}")
    findings = compare_snapshots(spider, browser, args.base_url)
    page = PageResult(args.spider, findings=findings, link_total=len(findings),
                      techniques_present=frozenset(f.technique for f in findings))
    report = ScanReport([page], config_echo(config), __version__)
    _write(emit_report(report, getattr(args, "format", "json")), args.output)
    return 0


COMMANDS = {"scan": cmd_scan, "gen": cmd_gen, "aggregate": cmd_aggregate, "prefilter": cmd_prefilter, "diff": cmd_diff}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    verbosity = getattr(args, "verbose", 0) or 0
    logging.basicConfig(level=logging.DEBUG if verbosity > 1 else logging.INFO if verbosity else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"hiddenlinks: error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception:
        log.exception("internal error")
        return 2


if __name__ == "__main__":
    sys.exit(main())
