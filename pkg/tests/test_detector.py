import pytest
from hypothesis import given, strategies as st

from conftest import fixture_bytes
from hiddenlinks.detector import TECHNIQUES, Config, classify_page, compare_snapshots


def labels(result):
    """href -> set of technique labels."""
    out = {}
    for f in result.findings:
        out.setdefault(f.link.href_raw, set()).add(f.technique)
    return out


def classify(markup, config=Config(), **kw):
    return classify_page(markup if isinstance(markup, bytes) else markup.encode(), config=config, **kw)


# -- A / B ----------------------------------------------------------------------

def test_white_on_white_is_A():
    r = classify(fixture_bytes("A_inline_colors.html"))
    (f,) = r.findings
    assert (f.technique, f.link.anchor_text, f.confidence) == ("A", "anchor text", "high")
    assert r.techniques_present == {"A"}


def test_near_color_is_B():
    assert labels(classify(fixture_bytes("B_near_color.html"))) == {"target.html": {"B"}}


def test_black_on_white_is_clean():
    assert classify('<a href="x" style="color:black">t</a>').findings == []


def test_background_image_gives_low_confidence():
    r = classify('<div style="background:#fff url(bg.gif)"><a href="x" style="color:#fff">t</a></div>')
    (f,) = r.findings
    assert f.technique == "A" and f.confidence == "low"


# -- C / F / L ------------------------------------------------------------------

def test_zero_font_is_C():
    assert labels(classify(fixture_bytes("C_anchor_font_zero.html"))) == {"target.html": {"C"}}


def test_far_left_container_is_F():
    assert labels(classify(fixture_bytes("F_class_stylesheet.html"))) == {"target.html": {"F"}}


def test_verbatim_id_form_does_not_match_class_rule():
    # a class selector never matches an element that only has that id
    page = b"<style>.hiddenclass { position : absolute; left : -977px; }</style><div id=\"hiddenclass\"><a href=\"target.html\">keywords</a></div>"
    assert classify(page).findings == []


def test_z_index_layer_is_L():
    assert labels(classify(fixture_bytes("L_z_index.html"))) == {"target.html": {"L"}}


def test_overflow_clip_is_L_only_for_clipped_link():
    assert labels(classify(fixture_bytes("L_overflow.html"))) == {"target.html": {"L"}}


# -- G / E ----------------------------------------------------------------------

def test_visibility_class_is_G():
    assert labels(classify(fixture_bytes("G_visibility_class.html"))) == {"target.html": {"G"}}


def test_fast_marquee_is_E():
    assert labels(classify(fixture_bytes("E_fast_marquee.html"))) == {"target.html": {"E"}}


def test_default_marquee_is_clean():
    assert classify('<marquee><a href="x">news</a></marquee>').findings == []


# -- D --------------------------------------------------------------------------

def test_plain_text_disguise_is_D():
    r = classify(fixture_bytes("D_plain_text.html"))
    (f,) = r.findings
    assert (f.technique, f.confidence) == ("D", "high")


def test_default_link_is_clean():
    assert classify('<p>see <a href="x">here</a></p>').findings == []


def test_single_disguise_signal_is_not_enough():
    assert classify('<p>see <a href="x" style="text-decoration:none;color:#c00">here</a></p>').findings == []


# -- H / I ----------------------------------------------------------------------

def test_script_hidden_div_is_H():
    for name in ("H_hex_array.html", "H_concat.html", "H_hex_eval.html", "H_document_write.html"):
        assert labels(classify(fixture_bytes(name))) == {"target.html": {"H"}}, name


def test_meta_refresh_marks_every_other_link():
    page = '<meta http-equiv="refresh" content="0;url=http://b.cn/"><a href="/1">a</a><a href="/2">b</a><a href="/3">c</a>'
    assert labels(classify(page)) == {"/1": {"I"}, "/2": {"I"}, "/3": {"I"}}


def test_scripts_without_hiding_are_clean():
    assert classify('<a href="x">t</a><script>var a = 1 + 2; document.title = "hi";</script>').findings == []


# -- J --------------------------------------------------------------------------

def test_hover_menu_is_J(gauntlet_manifest):
    href = gauntlet_manifest["J_hover_menu.html"]["href"]
    assert labels(classify(fixture_bytes("J_hover_menu.html"))) == {href: {"J"}}


def test_long_list_in_tiny_clip_is_J_and_L():
    items = "".join(f'<li><a href="/{i}">item {i}</a></li>' for i in range(25))
    page = f'<div style="height:20px;overflow:hidden"><ul>{items}</ul></div>'
    found = labels(classify(page))
    assert all("J" in found[f"/{i}"] for i in range(25))
    assert all(found[f"/{i}"] == {"J", "L"} for i in range(2, 25))


def test_short_visible_nav_is_clean():
    items = "".join(f'<li><a href="/{i}">item {i}</a></li>' for i in range(5))
    assert classify(f"<ul>{items}</ul>").findings == []


# -- K --------------------------------------------------------------------------

def test_url_late_in_long_title_is_K():
    title = "x" * 250 + "http://spam.cn" + "y" * 36
    r = classify(f"<title>{title}</title>")
    (f,) = r.findings
    assert f.technique == "K" and f.link.synthetic and "spam.cn" in f.link.href_raw
    assert r.link_total == 1


def test_meta_keywords_url_is_K():
    r = classify('<meta name="keywords" content="buy, www.spam.cn, cheap">')
    assert [f.technique for f in r.findings] == ["K"]


def test_short_title_is_clean():
    assert classify("<title>Welcome</title>").findings == []


# -- page level -----------------------------------------------------------------

def test_combined_page_has_F_and_H():
    page = (
        b"<style>.hc { position:absolute; left:-977px }</style>"
        b'<div class="hc"><a href="/f">f</a></div>'
        b'<div id="ql1000"><a href="/h">h</a></div>'
        b'<script>document.getElementById("ql1000").style.display="none";</script>'
    )
    r = classify(page)
    assert labels(r) == {"/f": {"F"}, "/h": {"H"}}
    assert r.techniques_present == {"F", "H"}


def test_empty_page():
    r = classify(b"")
    assert r.findings == [] and r.link_total == 0 and r.error is None


def test_deep_nesting_is_recorded_not_raised():
    r = classify(b"<div>" * 5000 + b'<a href="x">t</a>')
    assert r.error is None or "recursion" in r.error


def test_snapshot_diff():
    links = "".join(f'<a href="/{i}">{i}</a>' for i in range(3))
    extra = "".join(f'<a href="/x{i}">x</a>' for i in range(10))
    assert compare_snapshots(links, links) == []
    spider_only = compare_snapshots(links + extra, links)
    assert sorted(f.link.href_raw for f in spider_only) == sorted(f"/x{i}" for i in range(10))
    assert all(f.technique == "I" for f in spider_only)
    assert compare_snapshots(links, links + extra) == []


def test_snapshot_diff_counts_duplicates():
    assert len(compare_snapshots('<a href="/a">1</a><a href="/a">2</a>', '<a href="/a">1</a>')) == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "h.conf"
    cfg.write_text("# thresholds\ntau_color = 20\nviewport-width=800  # narrower\n\n")
    c = Config.load(cfg)
    assert (c.tau_color, c.viewport, c.tau_menu) == (20.0, (800, 768), 20)
    cfg.write_text("nonsense = 1\n")
    with pytest.raises(KeyError):
        Config.load(cfg)


# -- properties -------------------------------------------------------------------

GAUNTLET_NAMES = [
    "A_inline_colors.html", "B_near_color.html", "C_div_one_pixel.html", "D_plain_text.html", "E_fast_marquee.html",
    "F_text_indent.html", "G_visibility_class.html", "H_concat.html", "I_meta_refresh.html", "J_hover_menu.html",
    "K_long_title.html", "L_overflow.html",
]


@pytest.mark.parametrize("name", GAUNTLET_NAMES)
def test_classification_is_deterministic(name):
    data = fixture_bytes(name)
    first = classify(data)
    assert repr(first) == repr(classify(data))
    assert first.techniques_present <= set(TECHNIQUES)
    assert first.techniques_present == {f.technique for f in first.findings}


def color_page(shade):
    return f'<div style="background:#ffffff"><a href="/t" style="color:rgb({shade},{shade},{shade})">t</a></div>'


@given(st.integers(200, 255), st.floats(0, 200), st.floats(0, 200))
def test_raising_color_threshold_keeps_findings(shade, t1, t2):
    lo, hi = sorted((t1, t2))
    page = color_page(shade)
    before = {(f.link.href_raw, f.technique) for f in classify(page, Config(tau_color=lo)).findings}
    after = {(f.link.href_raw, f.technique) for f in classify(page, Config(tau_color=hi)).findings}
    assert before <= after
    assert not ({"A", "B"} <= {t for _, t in after})


@given(st.integers(1, 5000), st.floats(1, 5000), st.floats(1, 5000))
def test_lowering_scroll_threshold_keeps_E(amount, t1, t2):
    lo, hi = sorted((t1, t2))
    page = f'<marquee scrollamount="{amount}"><a href="/t">t</a></marquee>'
    e = lambda tau: {f.link.href_raw for f in classify(page, Config(tau_scroll=tau)).findings if f.technique == "E"}
    assert e(hi) <= e(lo)


@given(st.lists(st.sampled_from(["/a", "/b", "/c", "/d"]), min_size=1, max_size=6), st.booleans())
def test_redirect_target_never_reported(hrefs, via_script):
    target = "/a"
    redirect = (
        f'<script>location.href="{target}";</script>' if via_script
        else f'<meta http-equiv="refresh" content="0;url={target}">'
    )
    page = redirect + "".join(f'<a href="{h}">x</a>' for h in hrefs)
    r = classify(page)
    assert all(f.link.href_raw != target for f in r.findings if f.technique == "I")
    assert {f.link.href_raw for f in r.findings} == {h for h in hrefs if h != target}
