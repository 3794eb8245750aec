import hashlib
import re
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from hiddenlinks.corpus import (
    CONTROL,
    TECHNIQUES,
    VARIANTS,
    closure_stats,
    generate_case,
    generate_corpus,
    read_manifest,
)
from hiddenlinks.detector import classify_page
from hiddenlinks.dom import extract_links, parse_document
from hiddenlinks.style import collect_stylesheets, compute_style, effective_background

ALL = list(TECHNIQUES) + [CONTROL]


def tree_digest(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*")) if p.is_file()}


def found_labels(case):
    r = classify_page(case.page_bytes, sidecar=case.sidecars)
    out = {}
    for f in r.findings:
        out.setdefault(f.link.href_raw, set()).add(f.technique)
    return out


@given(st.sampled_from(ALL), st.integers(0, 10**6))
def test_regeneration_is_byte_identical(technique, seed):
    a, b = generate_case(technique, seed), generate_case(technique, seed)
    assert a.page_bytes == b.page_bytes and a.planted_links == b.planted_links and a.sidecars == b.sidecars


@given(st.sampled_from(ALL), st.integers(0, 10**6))
def test_planted_links_nonempty_iff_spam(technique, seed):
    case = generate_case(technique, seed)
    assert bool(case.planted_links) == (technique != CONTROL)


@settings(max_examples=150)
@given(st.sampled_from(ALL), st.integers(0, 10**6))
def test_generator_detector_closure(technique, seed):
    case = generate_case(technique, seed)
    assert found_labels(case) == {h: set(ls) for h, ls in case.planted_links}


@given(st.sampled_from(ALL), st.integers(0, 10**6))
def test_links_recovered_from_generated_pages(technique, seed):
    case = generate_case(technique, seed)
    hrefs = {l.href_raw for l in extract_links(parse_document(case.page_bytes))}
    expected = {h for h, labels in case.planted_links if labels != {"K"}}
    assert expected <= hrefs
    assert len(hrefs) == len(re.findall(rb"<a\s[^>]*href=", case.page_bytes))


@pytest.mark.parametrize("technique", TECHNIQUES)
def test_every_variant_closes(technique):
    for i, variant in enumerate(VARIANTS[technique]):
        case = generate_case(technique, 11 + i, {"variant": variant})
        assert case.variant == variant
        assert found_labels(case) == {h: set(ls) for h, ls in case.planted_links}, variant


def test_unknown_technique_rejected():
    with pytest.raises(ValueError):
        generate_case("Z", 1)
    with pytest.raises(ValueError):
        generate_case("A", 1, {"variant": "nope"})


def test_color_case_matches_background():
    case = generate_case("A", 7, {"variant": "inline"})
    root = parse_document(case.page_bytes)
    rules, _ = collect_stylesheets(root, case.sidecars)
    styles = compute_style(root, rules)
    (href, _), = case.planted_links
    anchor = next(n for n in root.iter() if n.tag == "a" and n.get("href") == href)
    assert styles[anchor.node_id].color == effective_background(anchor, styles)[0]
    assert found_labels(case) == {href: {"A"}}


def test_control_has_no_plants():
    case = generate_case(CONTROL, 1)
    assert case.planted_links == ()
    assert found_labels(case) == {}


def test_hex_eval_variant_embeds_decoder():
    case = generate_case("H", 3, {"variant": "hex-eval"})
    text = case.page_bytes.decode()
    assert "eval(" in text and "fromCharCode" in text and "parseInt" in text


def test_corpus_counts(tmp_path):
    counts = {t: 10 for t in TECHNIQUES}
    counts[CONTROL] = 50
    records = generate_corpus(counts, 5, tmp_path)
    assert len(records) == 170
    assert len(list(tmp_path.rglob("*.html"))) == 170
    assert read_manifest(tmp_path / "manifest.jsonl") == records
    for rec in records:
        assert (tmp_path / rec["path"]).is_file()
        assert set(rec) >= {"path", "technique", "planted", "expected_labels"}


def test_all_zero_counts_write_manifest_only(tmp_path):
    assert generate_corpus({t: 0 for t in ALL}, 1, tmp_path) == []
    assert [p.name for p in tmp_path.iterdir()] == ["manifest.jsonl"]
    assert (tmp_path / "manifest.jsonl").read_text() == ""


def test_same_seed_same_tree(tmp_path):
    counts = {"A": 4, "H": 4, "J": 2, CONTROL: 3}
    generate_corpus(counts, 9, tmp_path / "a")
    generate_corpus(counts, 9, tmp_path / "b")
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_negative_count_rejected(tmp_path):
    with pytest.raises(ValueError):
        generate_corpus({"A": -1}, 1, tmp_path)


def test_closure_stats_reports_misses():
    records = [
        {"path": "a.html", "technique": "A", "planted": [{"href": "/x", "labels": ["A"]}]},
        {"path": "c.html", "technique": CONTROL, "planted": []},
    ]
    perfect = closure_stats(records, {"a.html": {"/x": {"A"}}})
    assert perfect.exact and perfect.recall("A") == 1.0 and perfect.control_findings == 0
    bad = closure_stats(records, {"a.html": {"/y": {"A"}}, "c.html": {"/z": {"G"}}})
    assert bad.recall("A") == 0.0 and bad.control_findings == 1 and len(bad.mismatches) == 3
