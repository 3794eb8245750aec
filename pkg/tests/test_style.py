import math

import pytest
from hypothesis import given, strategies as st

from conftest import fixture_bytes
from hiddenlinks.dom import parse_document
from hiddenlinks.style import (
    BLACK,
    TRANSPARENT,
    UNEVALUATED,
    WHITE,
    ColorValue,
    cascade,
    collect_stylesheets,
    color_distance,
    compute_style,
    effective_background,
    hover_reveals,
    parse_color,
    parse_declarations,
    parse_length,
    parse_selector,
    parse_stylesheet,
    selector_matches,
)


def styled(markup, sidecar=None):
    root = parse_document(markup)
    rules, _ = collect_stylesheets(root, sidecar)
    return root, rules, compute_style(root, rules)


def find(root, tag=None, id_=None):
    for n in root.iter():
        if (tag is None or n.tag == tag) and (id_ is None or n.element_id == id_):
            return n
    raise LookupError(tag or id_)


# -- colors -------------------------------------------------------------------

@pytest.mark.parametrize("text", ["white", "#fff", "#FFFFFF", "rgb(255,255,255)", "rgb(100%, 100%, 100%)", "WHITE"])
def test_white_spellings_agree(text):
    assert parse_color(text) == WHITE


def test_near_white_hex():
    assert parse_color("#FEFFEE") == ColorValue(0xFE, 0xFF, 0xEE)


def test_transparent_and_garbage():
    assert parse_color("transparent") == TRANSPARENT
    assert parse_color("rgba(1,2,3,0)") == TRANSPARENT
    assert parse_color("#12345") is None
    assert parse_color("notacolor") is None


def test_channel_range_enforced():
    with pytest.raises(ValueError):
        ColorValue(256, 0, 0)
    with pytest.raises(ValueError):
        ColorValue(0, 0, 0, 1.5)


def test_color_distance_examples():
    assert color_distance(WHITE, WHITE) == 0
    assert color_distance(parse_color("#FEFFEE"), WHITE) == pytest.approx(math.sqrt(290))
    assert color_distance(parse_color("#FEFFEE"), WHITE) == pytest.approx(17.029, abs=1e-3)
    assert color_distance(BLACK, WHITE) == pytest.approx(441.673, abs=1e-3)


channels = st.integers(0, 255)
colors = st.builds(ColorValue, channels, channels, channels)


@given(colors, colors, colors)
def test_color_distance_is_metric(a, b, c):
    assert color_distance(a, b) == color_distance(b, a)
    assert (color_distance(a, b) == 0) == ((a.r, a.g, a.b) == (b.r, b.g, b.b))
    assert color_distance(a, c) <= color_distance(a, b) + color_distance(b, c) + 1e-9


@given(colors)
def test_hex_forms_round_trip(c):
    assert parse_color(c.hex()) == c
    assert parse_color(c.hex().upper()) == c
    assert parse_color(f"rgb({c.r}, {c.g}, {c.b})") == c


# -- lengths and declarations -------------------------------------------------

@pytest.mark.parametrize(
    "value, expected",
    [("-977px", -977.0), ("0", 0.0), ("1em", 16.0), ("12pt", 16.0), ("auto", None), ("expression(23-1000)", -977.0)],
)
def test_parse_length(value, expected):
    assert parse_length(value) == expected


def test_non_constant_expression_unevaluated():
    assert parse_length("expression(document.body.clientWidth)") == UNEVALUATED


def test_stylesheet_rule_counts():
    (rule,) = parse_stylesheet(".hiddenclass { position : absolute; left : -977px; }")
    assert [(d.prop, d.value) for d in rule.declarations] == [("position", "absolute"), ("left", "-977px")]
    (rule,) = parse_stylesheet("#spam{width:99px;height:20px;overflow:hidden;position:absolute;}")
    assert len(rule.declarations) == 4
    assert parse_stylesheet("") == []


def test_comments_and_at_rules_skipped():
    rules = parse_stylesheet("/* c */ @media print { a { color: red } } @import url(x.css); p { color: blue }")
    assert [r.selector.text for r in rules] == ["p"]


def test_important_flag():
    (d,) = parse_declarations("color: red !important")
    assert d.important and d.value == "red"


# -- selectors ----------------------------------------------------------------

def test_selector_grammar():
    root = parse_document(b'<ul class="menu"><li id="x"><a class="k j">t</a></li></ul>')
    a = find(root, "a")
    for text in ("a", ".k", "a.k.j", "ul a", "#x a", "ul.menu li#x a.k"):
        assert selector_matches(parse_selector(text), a), text
    for text in ("p", ".m", "ol a", "#y a", "a:hover"):
        assert not selector_matches(parse_selector(text), a), text
    assert selector_matches(parse_selector("a:hover"), a, hover=True)


@pytest.mark.parametrize("text", ["a + b", "a ~ b", "a[href]", "a::before", "li:first-child", "*:not(p)"])
def test_unsupported_selectors_are_opaque(text):
    sel = parse_selector(text)
    assert sel.opaque
    root = parse_document(b"<a><b>x</b></a>")
    assert not any(selector_matches(sel, n) for n in root.iter())


def test_child_combinator_supported():
    root = parse_document(b"<div><p><a>x</a></p></div>")
    a = find(root, "a")
    assert selector_matches(parse_selector("p > a"), a)
    assert not selector_matches(parse_selector("div > a"), a)


def test_specificity_order():
    assert parse_selector("#a").specificity > parse_selector(".a.b.c").specificity > parse_selector("div p").specificity


# -- cascade ------------------------------------------------------------------

def test_white_on_white_listing():
    root, rules, styles = styled(fixture_bytes("A_inline_colors.html"))
    a = find(root, "a")
    assert styles[a.node_id].color == WHITE
    assert effective_background(a, styles)[0] == WHITE


def test_defaults_without_rules():
    root, _, styles = styled(b"<div><span>x</span></div>")
    st_ = styles[find(root, "span").node_id]
    assert (st_.color, st_.background_color, st_.font_size) == (BLACK, None, 16.0)
    assert styles[find(root, "div").node_id].display == "block"
    assert st_.display == "inline"


def test_class_rule_applies():
    root, _, styles = styled(fixture_bytes("F_class_stylesheet.html"))
    div = find(root, "div")
    assert styles[div.node_id].position == "absolute"
    assert styles[div.node_id].left == -977.0


def test_inline_beats_id_beats_class_beats_tag():
    css = b"<style>p{color:#010101} .c{color:#020202} #i{color:#030303}</style>"
    root, _, styles = styled(css + b'<p class="c" id="i" style="color:#040404">x</p><p class="c" id="i">y</p><p class="c">z</p><p>w</p>')
    ps = [n for n in root.iter() if n.tag == "p"]
    assert [styles[p.node_id].color.r for p in ps] == [4, 3, 2, 1]


def test_later_rule_wins_tie_and_important_overrides():
    root, _, styles = styled(b"<style>p{color:red !important} p{color:blue}</style><p style='color:green'>x</p>")
    assert styles[find(root, "p").node_id].color == parse_color("red")
    root, _, styles = styled(b"<style>p{color:red} p{color:blue}</style><p>x</p>")
    assert styles[find(root, "p").node_id].color == parse_color("blue")


def test_nearest_background_wins():
    root, _, styles = styled(b'<body style="background:#fff"><div style="background-color:#000"><a href=x>t</a></div></body>')
    color, image, supplier = effective_background(find(root, "a"), styles)
    assert color == BLACK and not image and supplier == find(root, "div").node_id


def test_document_canvas_is_white():
    root, _, styles = styled(b"<a href=x>t</a>")
    assert effective_background(find(root, "a"), styles)[:2] == (WHITE, False)


def test_background_image_flagged():
    root, _, styles = styled(b'<div style="background:url(bg.gif)"><a href=x>t</a></div>')
    assert effective_background(find(root, "a"), styles)[1] is True


def test_sidecar_and_remote_sheets():
    page = b'<link rel="stylesheet" href="s.css"><link rel="stylesheet" href="http://x.cn/r.css"><p>x</p>'
    root = parse_document(page)
    rules, notes = collect_stylesheets(root, {"s.css": "p { color: #fefefe }"})
    assert compute_style(root, rules)[find(root, "p").node_id].color == ColorValue(254, 254, 254)
    assert notes == ["remote stylesheet ignored: http://x.cn/r.css"]


def test_hover_reveal():
    page = b'<style>ul.menu{display:none} li:hover ul.menu{display:block}</style><ul><li>M<ul class="menu"><li><a href=x>t</a></li></ul></li></ul>'
    root = parse_document(page)
    rules, _ = collect_stylesheets(root)
    reveals = hover_reveals(root, rules, compute_style(root, rules), compute_style(root, rules, hover=True))
    menu = next(n for n in root.iter() if "menu" in n.classes)
    assert [r.node_id for r in reveals] == [menu.node_id]
    assert reveals[0].revealed_by_selector.selector.text == "li:hover ul.menu"


def test_no_hover_rules_no_reveals():
    root, rules, styles = styled(b"<style>ul{display:none}</style><ul><li>x</li></ul>")
    assert hover_reveals(root, rules, styles, compute_style(root, rules, hover=True)) == []


def test_hidden_in_both_states_not_reported():
    page = b"<style>ul{display:none} li:hover ul{color:red}</style><ul><li>x</li></ul>"
    root = parse_document(page)
    rules, _ = collect_stylesheets(root)
    assert hover_reveals(root, rules, compute_style(root, rules), compute_style(root, rules, hover=True)) == []


# -- properties ---------------------------------------------------------------

PROPS = {
    "color": ["red", "#123456", "white", "rgb(1,2,3)"],
    "font-size": ["0px", "12px", "1em", "30px"],
    "visibility": ["hidden", "visible"],
    "cursor": ["text", "pointer"],
    "display": ["none", "block", "inline"],
    "line-height": ["20px", "normal"],
}
SELECTORS = ["div", "p", "span", "a", ".c", ".d", "#x", "div p", "div .c", "p a", "#x span", ".c a"]
PAGE = b'<div class="c" id="x"><p class="d">t <span class="c">s <a href=u>a</a></span></p><span>q</span></div><p><a class="d" href=v>b</a></p>'


@st.composite
def rule_sets(draw):
    n = draw(st.integers(1, 8))
    rules = []
    for order in range(n):
        decls = "; ".join(
            f"{p}: {draw(st.sampled_from(PROPS[p]))}{' !important' if draw(st.booleans()) else ''}"
            for p in draw(st.lists(st.sampled_from(sorted(PROPS)), min_size=1, max_size=3, unique=True))
        )
        rules.extend(parse_stylesheet(f"{draw(st.sampled_from(SELECTORS))} {{ {decls} }}", base_order=order))
    return rules


@given(rule_sets(), st.randoms(use_true_random=False))
def test_cascade_ignores_rule_input_order(rules, rnd):
    root = parse_document(PAGE)
    shuffled = list(rules)
    rnd.shuffle(shuffled)
    assert compute_style(root, rules) == compute_style(root, shuffled)


INHERITED_FIELDS = {"color": "color", "font-size": "font_size", "visibility": "visibility", "cursor": "cursor", "line-height": "line_height"}


@given(rule_sets())
def test_inherited_values_follow_parent(rules):
    root = parse_document(PAGE)
    styles = compute_style(root, rules)
    for node in root.iter():
        if node.parent is None or node.parent.tag == "#document":
            continue
        declared = set(cascade(node, rules)) | {d.prop for d in parse_declarations(node.get("style") or "")}
        for prop, attr in INHERITED_FIELDS.items():
            if prop in declared:
                continue
            if prop == "color" and node.tag == "a":
                continue  # user-agent link color
            assert getattr(styles[node.node_id], attr) == getattr(styles[node.parent.node_id], attr), (node.tag, prop)
