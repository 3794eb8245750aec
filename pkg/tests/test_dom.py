import re
from urllib.parse import urljoin

import html5lib
import pytest
from hypothesis import given, strategies as st

from conftest import fixture_bytes
from hiddenlinks.dom import (
    ElementNode,
    TextRun,
    decode_bytes,
    extract_links,
    index_nodes,
    normalize_space,
    parse_document,
    resolve_url,
    sniff_encoding,
)


def shape(node):
    """Structural fingerprint including ids, for determinism checks."""
    if isinstance(node, TextRun):
        return ("#text", node.text, node.node_id)
    return (node.tag, tuple(node.attributes.items()), node.node_id, tuple(shape(c) for c in node.children))


def test_span_anchor_tree():
    root = parse_document(fixture_bytes("A_inline_colors.html"))
    span = root.children[0] if isinstance(root.children[0], ElementNode) else root.children[1]
    assert span.tag == "span"
    (a,) = [c for c in span.children if isinstance(c, ElementNode)]
    assert a.tag == "a"
    assert [c.text for c in a.children] == ["anchor text"]


def test_empty_input_has_no_children():
    assert parse_document(b"").children == []


def test_unclosed_elements_auto_close():
    root = parse_document(b"<div><a href=x>t")
    (div,) = root.children
    (a,) = div.children
    assert (div.tag, a.tag, a.get("href")) == ("div", "a", "x")
    assert a.children[0].text == "t"


def test_unclosed_snippet_matches_reference_parser():
    doc = html5lib.parse("<div><a href=x>t", namespaceHTMLElements=False)
    ref = [e.tag for e in doc.iter() if e.tag not in ("html", "head", "body")]
    ours = [e.tag for e in parse_document(b"<div><a href=x>t").iter() if e.tag != "#document"]
    assert ours == ref


def test_stray_close_tags_dropped():
    root = parse_document(b"</b><p>x</i>y</p>")
    assert [n.tag for n in root.iter()] == ["#document", "p"]
    assert root.text_content() == "xy"


def test_attribute_names_lowercase_values_verbatim():
    root = parse_document(b"<A HREF='Target.HTML' onMouseOver=\"x()\">t</A>")
    a = next(n for n in root.iter() if n.tag == "a")
    assert a.attributes == {"href": "Target.HTML", "onmouseover": "x()"}


def test_nbsp_entity_decoded():
    root = parse_document(fixture_bytes("L_overflow.html"))
    links = extract_links(root)
    assert links[0].anchor_text == " "


def test_script_and_style_kept_raw():
    src = b"<script>if (a &lt; b && c) { x = '<b>'; }</script><style>a > b { color: red }</style>"
    root = parse_document(src)
    script = next(n for n in root.iter() if n.tag == "script")
    style = next(n for n in root.iter() if n.tag == "style")
    assert script.raw_text == "if (a &lt; b && c) { x = '<b>'; }"
    assert style.raw_text == "a > b { color: red }"


def test_plain_text_listing_link():
    links = extract_links(parse_document(fixture_bytes("D_plain_text.html")))
    assert [(l.anchor_text, l.href_raw) for l in links] == [("SEO company", "http://www.seomarketleaders.com")]


def test_anchor_without_href_ignored():
    assert extract_links(parse_document(b'<a name="x">t</a>')) == []


def test_overflow_listing_two_links_in_order():
    links = extract_links(parse_document(fixture_bytes("L_overflow.html")))
    assert [l.href_raw for l in links] == ["/", "target.html"]
    assert links[1].title_attr == "keywords"


def test_only_anchor_elements_produce_links():
    src = b'<area href="a.html"><link href="s.css"><iframe src="f.html"></iframe><a href="b.html">b</a>'
    assert [l.href_raw for l in extract_links(parse_document(src))] == ["b.html"]


def test_href_resolved_only_with_base():
    root = parse_document(b'<a href="target.html">t</a>')
    assert extract_links(root)[0].href_resolved == "target.html"
    assert extract_links(root, "http://example.cn/dir/")[0].href_resolved == "http://example.cn/dir/target.html"


@pytest.mark.parametrize(
    "href, base, expected",
    [
        ("target.html", "http://example.cn/", "http://example.cn/target.html"),
        ("http://a.cn/x", "http://example.cn/", "http://a.cn/x"),
        ("//b.cn/y", "http://a.cn/", "http://b.cn/y"),
        # reference resolution examples from RFC 3986
        ("g", "http://a/b/c/d;p?q", "http://a/b/c/g"),
        ("../g", "http://a/b/c/d;p?q", "http://a/b/g"),
        ("?y", "http://a/b/c/d;p?q", "http://a/b/c/d;p?y"),
        ("#s", "http://a/b/c/d;p?q", "http://a/b/c/d;p?q#s"),
        ("../../../g", "http://a/b/c/d;p?q", "http://a/g"),
    ],
)
def test_resolve_url(href, base, expected):
    assert resolve_url(href, base) == expected


def test_unparseable_href_returned_verbatim():
    root = parse_document(b'<a href="http://[bad">t</a>')
    (link,) = extract_links(root, "http://example.cn/")
    assert link.unresolved
    assert link.href_resolved == "http://[bad"


def test_meta_charset_sniffing():
    data = '<meta charset="gb2312"><p>中文</p>'.encode("gb18030")
    assert sniff_encoding(data) == "gb18030"
    assert "中文" in parse_document(data).text_content()


def test_charset_beyond_first_kilobyte_ignored():
    data = b" " * 1100 + b'<meta charset="latin-1">'
    assert sniff_encoding(data) == "utf-8"


def test_undecodable_bytes_replaced():
    assert decode_bytes(b"a\xffb") == "a�b"


def test_normalize_space_keeps_nbsp():
    assert normalize_space(" a \t\n b  ") == "a b "


# -- properties ---------------------------------------------------------------

TAGS = ("div", "span", "b", "i", "em")
texts = st.text(alphabet="abc xyz", min_size=1, max_size=8)


@st.composite
def fragments(draw, depth=0):
    """Well-formed markup from a small tag set; anchors are never nested."""
    parts = []
    for _ in range(draw(st.integers(0, 3))):
        kind = draw(st.sampled_from(["text", "elem", "link"] if depth < 3 else ["text", "link"]))
        if kind == "text":
            parts.append(draw(texts))
        elif kind == "link":
            href = draw(st.sampled_from(["a.html", "/b", "http://c.cn/", "d?x=1"]))
            parts.append(f'<a href="{href}">{draw(texts)}</a>')
        else:
            tag = draw(st.sampled_from(TAGS))
            parts.append(f"<{tag}>{draw(fragments(depth + 1))}</{tag}>")
    return "".join(parts)


@given(st.binary(max_size=300))
def test_parse_never_raises_and_is_deterministic(data):
    assert shape(parse_document(data)) == shape(parse_document(data))


@given(st.binary(max_size=300))
def test_tree_invariants(data):
    root = parse_document(data)
    nodes = list(root.iter_all())
    ids = [n.node_id for n in nodes]
    assert len(ids) == len(set(ids))
    assert set(index_nodes(root)) == set(ids)
    for node in nodes:
        if node is root:
            continue
        assert node.parent is not None
        assert sum(1 for c in node.parent.children if c is node) == 1
        if isinstance(node, ElementNode):
            assert all(k == k.lower() for k in node.attributes)


@given(fragments())
def test_link_count_matches_regex_counter(markup):
    expected = len(re.findall(r"<a\s[^>]*href=", markup))
    assert len(extract_links(parse_document(markup))) == expected


@given(fragments())
def test_links_match_reference_parser(markup):
    doc = html5lib.parse(markup, namespaceHTMLElements=False)
    ref = [(a.get("href"), normalize_space("".join(a.itertext()))) for a in doc.iter("a") if a.get("href") is not None]
    ours = [(l.href_raw, l.anchor_text) for l in extract_links(parse_document(markup))]
    assert ours == ref


@given(fragments(), st.sampled_from(["http://example.cn/", "https://a.b/c/d.html", "http://x.org/p?q=1"]))
def test_resolution_agrees_with_urljoin(markup, base):
    for link in extract_links(parse_document(markup), base):
        assert link.href_resolved == urljoin(base, link.href_raw)
        assert "://" in link.href_resolved
