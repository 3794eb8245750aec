import json

import pytest
from hypothesis import given, strategies as st

from conftest import GAUNTLET
from hiddenlinks.corpus import CONTROL, TECHNIQUES, generate_corpus
from hiddenlinks.detector import Config, Finding, PageResult
from hiddenlinks.dom import Hyperlink
from hiddenlinks.report import (
    ScanReport,
    UsageError,
    aggregate_prevalence,
    anchor_term_frequencies,
    emit_report,
    merge,
    percentage_occurrence,
    read_report,
    scan_paths,
    synthetic_report,
)


def page(path, *findings):
    fs = [Finding(Hyperlink(h, h, text, node), t, (f"node {node}",), "high") for node, h, text, t in findings]
    return PageResult(path, fs, link_total=len({f.link.anchor_node for f in fs}) + 1, techniques_present=frozenset(f.technique for f in fs))


# -- scanning -------------------------------------------------------------------

def test_single_listing_totals():
    r = scan_paths([str(GAUNTLET / "A_inline_colors.html")])
    t = r.totals
    assert (t["pages_scanned"], t["pages_with_findings"], t["hidden_links_total"]) == (1, 1, 1)
    assert t["findings_per_technique"]["A"] == 1
    assert sum(t["findings_per_technique"].values()) == 1


def test_generated_directory_scan(tmp_path):
    counts = {t: 10 for t in TECHNIQUES}
    counts[CONTROL] = 50
    records = generate_corpus(counts, 3, tmp_path)
    r = scan_paths([str(tmp_path)])
    assert r.totals["pages_scanned"] == 170
    flagged = {p.url_or_path for p in r.pages if p.findings}
    spam = {str(tmp_path / rec["path"]) for rec in records if rec["technique"] != CONTROL}
    assert flagged == spam and len(flagged) == 120


def test_empty_directory_is_usage_error(tmp_path):
    with pytest.raises(UsageError):
        scan_paths([str(tmp_path)])


def test_missing_file_noted(tmp_path):
    r = scan_paths([str(GAUNTLET / "A_inline_colors.html"), str(tmp_path / "nope.html")])
    assert r.totals["pages_scanned"] == 1
    assert any("nope.html" in n for n in r.notes)


def test_parallel_scan_matches_serial(tmp_path):
    generate_corpus({"A": 3, "F": 3, "H": 3, "J": 2, CONTROL: 3}, 4, tmp_path)
    serial = scan_paths([str(tmp_path)], Config(workers=1))
    parallel = scan_paths([str(tmp_path)], Config(workers=3))
    assert emit_report(serial) == emit_report(parallel)


# -- aggregation ----------------------------------------------------------------

def test_one_page_one_finding():
    table = aggregate_prevalence(ScanReport([page("p", (1, "/x", "t", "A"))]))
    a = table.rows[0]
    assert (a.technique, a.pages, a.percentage, a.links) == ("A", 1, 100.0, 1)
    assert table.render().splitlines()[1] == "A & 1 (100.0%) => 1"


def test_empty_report_table():
    table = aggregate_prevalence(ScanReport())
    assert all(r.pages == 0 and r.links == 0 and r.percentage == 0 for r in table.rows)
    assert (table.spam_pages, table.aggregate_pages, table.aggregate_links) == (0, 0, 0)


def test_multi_labelled_link_counts_once_in_total():
    r = ScanReport([page("p", (1, "/x", "t", "F"), (1, "/x", "t", "G"), (2, "/y", "u", "G"))])
    table = aggregate_prevalence(r)
    rows = {row.technique: row for row in table.rows}
    assert (rows["F"].links, rows["G"].links) == (1, 2)
    assert table.aggregate_pages == 2 and table.aggregate_percentage == 200.0
    assert table.aggregate_links == r.totals["hidden_links_total"] == 2


PAGE_COUNTS = dict(A=6, B=3, C=8, D=19, E=8, F=68, G=30, H=111, I=5, J=9, K=15, L=3)
LINK_COUNTS = dict(A=39, B=29, C=33, D=21, E=117, F=4333, G=1876, H=3210, I=122, J=31, K=15, L=47)
OVERLAPS = [("H", "K", 0)] * 5 + [("F", "G", 5), ("F", "G", 4)]


def test_synthetic_prevalence_arithmetic():
    table = aggregate_prevalence(synthetic_report(278, PAGE_COUNTS, LINK_COUNTS, OVERLAPS))
    assert table.spam_pages == 278
    assert table.aggregate_pages == sum(PAGE_COUNTS.values()) == 285
    assert f"{table.aggregate_percentage:.1f}" == "102.5"
    assert table.aggregate_links == 9864
    assert {r.technique: r.pages for r in table.rows} == PAGE_COUNTS
    assert "Aggregate & 285 (285/278=102.5%) => 9864" in table.render()


@pytest.mark.parametrize(
    "spam, total, decimals, pct, recip",
    [(994, 41405, 1, "2.4%", "1/42"), (81765, 5542046, 2, "1.48%", "1/68"), (0, 100, 1, "0%", "0")],
)
def test_percentage_occurrence(spam, total, decimals, pct, recip):
    _, p, r = percentage_occurrence(spam, total, decimals)
    assert (p, r) == (pct, recip)


def test_percentage_occurrence_needs_pages():
    with pytest.raises(ZeroDivisionError):
        percentage_occurrence(0, 0)


def test_anchor_terms():
    r = ScanReport([page("p", (1, "/a", "buy gold", "A"), (2, "/b", "Gold server", "C"))])
    assert anchor_term_frequencies(r, 5)[0] == ("gold", 2)
    assert anchor_term_frequencies(r, 5)[1:] == [("buy", 1), ("server", 1)]
    assert anchor_term_frequencies(r, 0) == []
    assert anchor_term_frequencies(ScanReport(), 3) == []


# -- serialization ----------------------------------------------------------------

def test_empty_report_documents():
    for fmt in ("json", "tsv"):
        back = read_report(emit_report(ScanReport(), fmt), fmt)
        assert back.pages == [] and back.totals["pages_scanned"] == 0


def test_json_totals_rederive_from_pages():
    r = synthetic_report(10, {"A": 6, "B": 4}, {"A": 12, "B": 4})
    doc = json.loads(emit_report(r))
    assert doc["schema"] == "hiddenlinks-report/1"
    assert doc["totals"] == read_report(emit_report(r)).totals


def test_unknown_format_rejected():
    with pytest.raises(UsageError):
        emit_report(ScanReport(), "xml")


def test_foreign_schema_rejected():
    with pytest.raises(UsageError):
        read_report(b'{"schema": "other/9", "pages": []}')


hrefs = st.sampled_from(["/a", "/b", "http://x.cn/", "q?x=1\tz", 'quote"d'])
texts = st.text(alphabet="ab \t\n\"'é中", max_size=8)
findings = st.tuples(st.integers(1, 30), hrefs, texts, st.sampled_from(TECHNIQUES))
pages = st.builds(
    lambda path, fs: page(path, *fs),
    st.text(alphabet="abc/._", min_size=1, max_size=8),
    st.lists(findings, max_size=4),
)
reports = st.builds(lambda ps: ScanReport(ps), st.lists(pages, max_size=5))


@given(reports, st.sampled_from(["json", "tsv"]))
def test_emit_read_round_trip(report, fmt):
    data = emit_report(report, fmt)
    back = read_report(data)
    assert back.pages == report.pages
    assert back.config_echo == report.config_echo and back.tool_version == report.tool_version
    assert emit_report(back, fmt) == data == emit_report(report, fmt)


@given(reports, reports)
def test_merge_is_order_insensitive(r1, r2):
    assert aggregate_prevalence(merge(r1, r2)) == aggregate_prevalence(merge(r2, r1))
    assert emit_report(merge(r1, r2)) == emit_report(merge(r2, r1))


@given(reports, reports, reports)
def test_merge_is_associative(r1, r2, r3):
    assert emit_report(merge(merge(r1, r2), r3)) == emit_report(merge(r1, merge(r2, r3)))


@given(reports)
def test_per_technique_totals_match_pages(report):
    t = report.totals
    for tech in TECHNIQUES:
        assert t["findings_per_technique"][tech] == sum(1 for p in report.pages for f in p.findings if f.technique == tech)
