"""Scanning, aggregation into prevalence tables, and report serialization.

Two report formats are supported, both versioned and readable back with
:func:`read_report`:

* ``json``: one object ``{schema, tool_version, config, totals, pages}``;
* ``tsv``: tab-separated typed rows.  The first column is the row type
  (``schema``, ``config``, ``page``, ``finding``, ``note``); list-valued
  cells hold JSON arrays.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import re
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import __version__
from .detector import TECHNIQUES, Config, Finding, PageResult, classify_page
from .dom import Hyperlink

SCHEMA = "hiddenlinks-report/1"
FORMATS = ("json", "tsv")
HTML_SUFFIXES = (".html", ".htm")


class UsageError(ValueError):
    """Bad command-line input (missing paths, unknown format ...)."""


def config_echo(config: Config) -> dict:
    # worker count is excluded: it must not change the report
    return {k: v for k, v in dataclasses.asdict(config).items() if k != "workers"}


@dataclass
class ScanReport:
    pages: list[PageResult] = field(default_factory=list)
    config_echo: dict = field(default_factory=lambda: config_echo(Config()))
    tool_version: str = __version__
    notes: list[str] = field(default_factory=list)

    @property
    def totals(self) -> dict:
        per_tech = Counter({t: 0 for t in TECHNIQUES})
        for page in self.pages:
            for f in page.findings:
                per_tech[f.technique] += 1
        return {
            "pages_scanned": len(self.pages),
            "pages_with_findings": sum(1 for p in self.pages if p.findings),
            "findings_per_technique": dict(sorted(per_tech.items())),
            "hidden_links_total": sum(len(hidden_links(p)) for p in self.pages),
        }


def _link_key(link: Hyperlink) -> tuple:
    return (link.anchor_node, link.href_resolved, link.synthetic)


def hidden_links(page: PageResult) -> dict[tuple, Hyperlink]:
    """Distinct links of one page with at least one finding."""
    out: dict[tuple, Hyperlink] = {}
    for f in page.findings:
        out.setdefault(_link_key(f.link), f.link)
    return out


def merge(*reports: ScanReport) -> ScanReport:
    """Union of reports, pages in canonical path order; order of arguments does not matter."""
    if not reports:
        return ScanReport()
    echoes = {json.dumps(r.config_echo, sort_keys=True) for r in reports}
    notes = sorted({n for r in reports for n in r.notes})
    if len(echoes) > 1:
        notes.append("merged reports used different configurations")
    pages = sorted((p for r in reports for p in r.pages), key=_page_sort_key)
    return ScanReport(pages, json.loads(min(echoes)), reports[0].tool_version, notes)


def _page_sort_key(p: PageResult) -> tuple:
    # the full serialized page breaks ties between duplicate paths
    return (p.url_or_path, json.dumps(_page_dict(p), sort_keys=True, ensure_ascii=False))


# ----------------------------------------------------------------------------
# scanning

def _discover(paths: Sequence[str]) -> tuple[list[str], list[str]]:
    files: list[str] = []
    notes: list[str] = []
    for raw in paths:
        if raw == "-":
            files.append("-")
            continue
        p = Path(raw)
        if p.is_dir():
            found = sorted(
                str(q) for q in p.rglob("*") if q.is_file() and q.suffix.lower() in HTML_SUFFIXES
            )
            files.extend(found)
        elif p.is_file():
            files.append(str(p))
        else:
            notes.append(f"not found: {raw}")
    return files, notes


def _sidecars_for(path: str, cache: dict) -> dict[str, str]:
    if path == "-":
        return {}
    folder = os.path.dirname(path) or "."
    if folder not in cache:
        sheets = {}
        for q in sorted(Path(folder).glob("*.css")):
            try:
                sheets[q.name] = q.read_text(encoding="utf-8", errors="replace")
            except OSError:
                continue
        cache[folder] = sheets
    return cache[folder]


def _scan_one(args: tuple) -> PageResult:
    path, sidecar, config, base_url, stdin_bytes = args
    if path == "-":
        data = stdin_bytes or b""
    else:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            return PageResult(path, notes=[f"unreadable: {exc.strerror or exc}"], error=f"unreadable: {exc.strerror or exc}")
    return classify_page(data, sidecar, config, url_or_path=path, base_url=base_url)


def scan_paths(
    paths: Sequence[str],
    config: Config = Config(),
    base_url: Optional[str] = None,
    stdin: Optional[bytes] = None,
) -> ScanReport:
    """Classify every HTML file under ``paths``; ``-`` reads one page from standard input."""
    files, notes = _discover(paths)
    if not files:
        raise UsageError("no readable HTML inputs")
    if "-" in files and stdin is None:
        stdin = sys.stdin.buffer.read()
    cache: dict = {}
    jobs = [(f, _sidecars_for(f, cache), config, base_url, stdin if f == "-" else None) for f in files]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            pages = list(pool.map(_scan_one, jobs, chunksize=max(1, len(jobs) // (config.workers * 4))))
    else:
        pages = [_scan_one(j) for j in jobs]
    for p in pages:
        if p.error:
            notes.append(f"{p.url_or_path}: {p.error}")
    pages.sort(key=_page_sort_key)
    return ScanReport(pages, config_echo(config), __version__, notes)


# ----------------------------------------------------------------------------
# aggregation

@dataclass(frozen=True)
class PrevalenceRow:
    technique: str
    pages: int
    percentage: float  # of pages with findings, in percent
    links: int


@dataclass(frozen=True)
class PrevalenceTable:
    rows: tuple[PrevalenceRow, ...]
    spam_pages: int
    aggregate_pages: int
    aggregate_percentage: float
    aggregate_links: int

    def render(self, decimals: int = 1) -> str:
        lines = ["technique & pages (percentage) => hidden links"]
        for r in self.rows:
            lines.append(f"{r.technique} & {r.pages} ({r.percentage:.{decimals}f}%) => {r.links}")
        lines.append(
            f"Aggregate & {self.aggregate_pages} ({self.aggregate_pages}/{self.spam_pages}="
            f"{self.aggregate_percentage:.{decimals}f}%) => {self.aggregate_links}"
        )
        return "\n".join(lines)


def aggregate_prevalence(report: ScanReport) -> PrevalenceTable:
    spam_pages = [p for p in report.pages if p.findings]
    denom = len(spam_pages)
    page_counts = Counter()
    link_counts = Counter()
    for page in spam_pages:
        per_tech: dict[str, set] = {}
        for f in page.findings:
            per_tech.setdefault(f.technique, set()).add(_link_key(f.link))
        for tech, links in per_tech.items():
            page_counts[tech] += 1
            link_counts[tech] += len(links)
    rows = tuple(
        PrevalenceRow(t, page_counts[t], 100.0 * page_counts[t] / denom if denom else 0.0, link_counts[t])
        for t in TECHNIQUES
    )
    agg = sum(page_counts.values())
    return PrevalenceTable(
        rows=rows,
        spam_pages=denom,
        aggregate_pages=agg,
        aggregate_percentage=100.0 * agg / denom if denom else 0.0,
        aggregate_links=sum(len(hidden_links(p)) for p in spam_pages),
    )


def percentage_occurrence(spam_pages: int, total_pages: int, decimals: int = 1) -> tuple[float, str, str]:
    """(fraction, percentage text, ``1/N`` text) for ``spam_pages`` out of ``total_pages``."""
    if total_pages <= 0:
        raise ZeroDivisionError("total_pages must be positive")
    if spam_pages < 0 or spam_pages > total_pages:
        raise ValueError("spam_pages must lie in [0, total_pages]")
    frac = spam_pages / total_pages
    pct = f"{100 * frac:.{decimals}f}%"
    if spam_pages == 0:
        return frac, "0%", "0"
    return frac, pct, f"1/{round(total_pages / spam_pages)}"


_TERM = re.compile(r"\w+", re.UNICODE)


def anchor_term_frequencies(report: ScanReport, k: int) -> list[tuple[str, int]]:
    if k <= 0:
        return []
    counts: Counter = Counter()
    for page in report.pages:
        for link in hidden_links(page).values():
            counts.update(t.casefold() for t in _TERM.findall(link.anchor_text.replace("_", " ")))
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


# ----------------------------------------------------------------------------
# serialization

def _link_dict(link: Hyperlink) -> dict:
    return {
        "href_raw": link.href_raw,
        "href_resolved": link.href_resolved,
        "anchor_text": link.anchor_text,
        "anchor_node": link.anchor_node,
        "title_attr": link.title_attr,
        "unresolved": link.unresolved,
        "synthetic": link.synthetic,
    }


def _finding_dict(f: Finding) -> dict:
    return {"technique": f.technique, "confidence": f.confidence, "evidence": list(f.evidence), "link": _link_dict(f.link)}


def _page_dict(p: PageResult) -> dict:
    return {
        "url_or_path": p.url_or_path,
        "link_total": p.link_total,
        "techniques_present": sorted(p.techniques_present),
        "error": p.error,
        "notes": list(p.notes),
        "findings": [_finding_dict(f) for f in p.findings],
    }


def _finding_from(d: Mapping) -> Finding:
    return Finding(Hyperlink(**d["link"]), d["technique"], tuple(d["evidence"]), d["confidence"])


def report_to_dict(report: ScanReport) -> dict:
    return {
        "schema": SCHEMA,
        "tool_version": report.tool_version,
        "config": dict(sorted(report.config_echo.items())),
        "notes": list(report.notes),
        "totals": report.totals,
        "pages": [_page_dict(p) for p in report.pages],
    }


def _tsv_rows(report: ScanReport) -> Iterable[list]:
    yield ["schema", SCHEMA, report.tool_version]
    for k, v in sorted(report.config_echo.items()):
        yield ["config", k, json.dumps(v)]
    for n in report.notes:
        yield ["note", n]
    for i, p in enumerate(report.pages):
        yield ["page", i, p.url_or_path, p.link_total, json.dumps(sorted(p.techniques_present)),
               json.dumps(p.error), json.dumps(p.notes, ensure_ascii=False)]
        for f in p.findings:
            L = f.link
            yield ["finding", i, f.technique, f.confidence, L.anchor_node, L.href_raw, L.href_resolved,
                   L.anchor_text, json.dumps(L.title_attr, ensure_ascii=False), int(L.unresolved), int(L.synthetic),
                   json.dumps(list(f.evidence), ensure_ascii=False)]


def emit_report(report: ScanReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2, sort_keys=False, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "tsv":
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        for row in _tsv_rows(report):
            writer.writerow(row)
        return buf.getvalue().encode("utf-8")
    raise UsageError(f"unknown report format: {fmt!r} (expected one of {', '.join(FORMATS)})")


def detect_format(data: bytes) -> str:
    return "json" if data.lstrip()[:1] == b"{" else "tsv"


def read_report(data: Union[bytes, str], fmt: Optional[str] = None) -> ScanReport:
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fmt = fmt or detect_format(raw)
    text = raw.decode("utf-8")
    if fmt == "json":
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise UsageError(f"unsupported report schema: {d.get('schema')!r}")
        pages = [
            PageResult(
                url_or_path=p["url_or_path"],
                findings=[_finding_from(f) for f in p["findings"]],
                link_total=p["link_total"],
                techniques_present=frozenset(p["techniques_present"]),
                notes=list(p["notes"]),
                error=p["error"],
            )
            for p in d["pages"]
        ]
        return ScanReport(pages, d["config"], d["tool_version"], list(d.get("notes", [])))
    if fmt != "tsv":
        raise UsageError(f"unknown report format: {fmt!r}")
    reader = csv.reader(io.StringIO(text), delimiter="\t")
    pages: list[PageResult] = []
    config: dict = {}
    notes: list[str] = []
    version = ""
    seen_schema = False
    for row in reader:
        if not row:
            continue
        kind = row[0]
        if kind == "schema":
            if row[1] != SCHEMA:
                raise UsageError(f"unsupported report schema: {row[1]!r}")
            version, seen_schema = row[2], True
        elif kind == "config":
            config[row[1]] = json.loads(row[2])
        elif kind == "note":
            notes.append(row[1])
        elif kind == "page":
            pages.append(PageResult(
                url_or_path=row[2], link_total=int(row[3]), techniques_present=frozenset(json.loads(row[4])),
                error=json.loads(row[5]), notes=json.loads(row[6]),
            ))
        elif kind == "finding":
            link = Hyperlink(row[5], row[6], row[7], int(row[4]), json.loads(row[8]), bool(int(row[9])), bool(int(row[10])))
            pages[int(row[1])].findings.append(Finding(link, row[2], tuple(json.loads(row[11])), row[3]))
        else:
            raise UsageError(f"unknown tsv row type: {kind!r}")
    if not seen_schema:
        raise UsageError("missing schema row")
    return ScanReport(pages, config, version, notes)


# ----------------------------------------------------------------------------
# synthetic reports for aggregation checks

def synthetic_report(
    spam_pages: int,
    page_counts: Mapping[str, int],
    link_counts: Mapping[str, int],
    overlaps: Sequence[tuple[str, str, int]] = (),
) -> ScanReport:
    """A report with prescribed per-technique page and link counts.

    ``overlaps`` lists ``(t1, t2, shared)`` page pairs: one page carrying both
    techniques, with ``shared`` links labelled by both (0 means disjoint link
    sets).  Single-technique pages make up the remaining page counts; links
    are spread as evenly as possible, at least one per page.
    """
    remaining = dict(page_counts)
    plan: list[list[str]] = []
    for t1, t2, _ in overlaps:
        plan.append([t1, t2])
        remaining[t1] -= 1
        remaining[t2] -= 1
    for t in sorted(remaining):
        if remaining[t] < 0:
            raise ValueError(f"overlaps exceed page count for {t}")
        plan.extend([t] for _ in range(remaining[t]))
    if len(plan) != spam_pages:
        raise ValueError(f"page plan has {len(plan)} pages, expected {spam_pages}")

    # how many links each (page, technique) slot gets
    slots: dict[str, list[int]] = {t: [i for i, techs in enumerate(plan) if t in techs] for t in page_counts}
    alloc: dict[tuple[int, str], int] = {}
    for t, idx in slots.items():
        n, k = link_counts.get(t, 0), len(idx)
        if k and n < k:
            raise ValueError(f"{t}: {n} links cannot cover {k} pages")
        for j, i in enumerate(idx):
            alloc[(i, t)] = n // k + (1 if j < n % k else 0)
    shared = {i: s for i, (_, _, s) in enumerate(overlaps)}

    pages = []
    for i, techs in enumerate(plan):
        findings: list[Finding] = []
        node = 1
        links_by_tech: dict[str, list[Hyperlink]] = {}
        s = shared.get(i, 0)
        if s:
            common = [Hyperlink(f"http://s{i}.example/{j}", f"http://s{i}.example/{j}", f"shared {j}", node + j) for j in range(s)]
            node += s
            for t in techs:
                if alloc[(i, t)] < s:
                    raise ValueError("shared links exceed a technique's allocation")
                links_by_tech[t] = list(common)
        for t in techs:
            have = links_by_tech.setdefault(t, [])
            extra = alloc[(i, t)] - len(have)
            for j in range(extra):
                have.append(Hyperlink(f"http://p{i}.example/{t}{j}", f"http://p{i}.example/{t}{j}", f"{t} term{j % 7}", node))
                node += 1
            findings += [Finding(L, t, (f"node {L.anchor_node} synthetic {t}",), "high") for L in have]
        findings.sort(key=lambda f: (f.link.anchor_node, f.technique))
        pages.append(PageResult(
            url_or_path=f"synthetic/{i:04d}.html",
            findings=findings,
            link_total=node - 1,
            techniques_present=frozenset(techs),
        ))
    return ScanReport(pages)


def labels_by_page(report: ScanReport, relative_to: Optional[Union[str, Path]] = None) -> dict[str, dict[str, set]]:
    """``{page path: {href_raw: labels}}``, paths optionally made relative (POSIX form)."""
    out: dict[str, dict[str, set]] = {}
    for page in report.pages:
        key = page.url_or_path
        if relative_to is not None and key != "-":
            key = Path(key).relative_to(relative_to).as_posix()
        per = out.setdefault(key, {})
        for f in page.findings:
            per.setdefault(f.link.href_raw, set()).add(f.technique)
    return out
