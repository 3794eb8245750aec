"""Ground-truth page generator: one template family per technique plus visible-link controls.

Every case is a pure function of ``(technique, seed, params)``.  A case records
the exact label set expected for each planted href; any other link on the page
is expected to produce no finding at all.
"""

from __future__ import annotations

import dataclasses
import html
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .jsparse import encode_hex
from .style import ColorValue, color_distance

TECHNIQUES = tuple("ABCDEFGHIJKL")
CONTROL = "control"

VARIANTS: dict[str, tuple[str, ...]] = {
    "A": ("inline", "stylesheet", "font-tag", "sidecar"),
    "B": ("inline", "stylesheet"),
    "C": ("anchor-font", "div-font", "div-box", "marquee", "class-font"),
    "D": ("three-signals", "cursor-status", "cursor-decoration"),
    "E": ("marquee", "marquee-sized", "blink"),
    "F": ("class-left", "inline-left-top", "expression", "text-indent", "margin-left", "top-only"),
    "G": ("display-inline", "visibility-class", "display-id", "hidden-attr"),
    "H": ("plain", "concat", "hex-eval", "array", "doc_write"),
    "I": ("meta-refresh", "script-href", "script-replace"),
    "J": ("hover-display", "hover-visibility", "list-collapsed", "list-hidden"),
    "K": ("title", "meta-keywords", "meta-description"),
    "L": ("z-index-img", "z-index-div", "overflow"),
}

_WORDS = (
    "market news service travel garden river city report energy school health music film "
    "local review guide shop price quality office museum library science sport weather "
    "family community project design history season harbour mountain festival journal"
).split()
_ANCHOR_WORDS = "cheap buy online casino loans pills replica watches discount games free poker gold".split()


@dataclass(frozen=True)
class GroundTruthCase:
    technique: str
    page_bytes: bytes
    planted_links: tuple[tuple[str, frozenset], ...]
    seed: int
    params: Mapping[str, str] = field(default_factory=dict)
    sidecars: Mapping[str, str] = field(default_factory=dict)

    @property
    def variant(self) -> str:
        return self.params.get("variant", "")

    def expected(self) -> dict[str, frozenset]:
        return dict(self.planted_links)


# ----------------------------------------------------------------------------
# random helpers

class _Page:
    """Incidental content shared by all templates."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        shade = rng.randint(0xE8, 0xFF)
        self.bg = ColorValue(shade, rng.randint(0xE8, 0xFF), rng.randint(0xE8, 0xFF))
        dark = rng.randint(0x00, 0x40)
        self.text = ColorValue(dark, rng.randint(0x00, 0x40), rng.randint(0x00, 0x40))
        self.site = f"{rng.choice(_WORDS)}{rng.randint(1, 999)}"
        self.head: list[str] = []
        self.styles: list[str] = []
        self._hrefs: set[str] = set()

    def words(self, n: int) -> str:
        return " ".join(self.rng.choice(_WORDS) for _ in range(n))

    def ident(self, prefix: str = "") -> str:
        return prefix + "".join(self.rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(2)) + str(self.rng.randint(100, 9999))

    def href(self, spam: bool = False) -> str:
        while True:
            if spam:
                h = f"http://www.{self.rng.choice(_ANCHOR_WORDS)}-{self.rng.randint(1, 99999)}.example.com/{self.rng.choice(_ANCHOR_WORDS)}.html"
            else:
                h = f"/{self.rng.choice(_WORDS)}/{self.rng.randint(1, 9999)}.html"
            if h not in self._hrefs:
                self._hrefs.add(h)
                return h

    def anchor_text(self) -> str:
        return " ".join(self.rng.choice(_ANCHOR_WORDS) for _ in range(self.rng.randint(1, 3)))

    def nav(self, n: int = 5) -> str:
        items = "".join(f'<li><a href="{self.href()}">{self.words(1).title()}</a></li>' for _ in range(n))
        return f'<ul class="nav">{items}</ul>'

    def paragraph(self, with_link: bool = True) -> str:
        text = self.words(self.rng.randint(8, 20))
        if with_link:
            text += f' <a href="{self.href()}">{self.words(2)}</a> ' + self.words(self.rng.randint(3, 9))
        return f"<p>{text}.</p>"

    def render(self, body: str, title: Optional[str] = None) -> bytes:
        title = title if title is not None else f"{self.site.title()} {self.words(2)}"
        css = (
            f"body {{ background-color: {self.bg.hex()}; color: {self.text.hex()}; }}\n"
            + "".join(s + "\n" for s in self.styles)
        )
        head = "".join(self.head)
        doc = (
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
            f"<title>{html.escape(title, quote=False)}</title>\n{head}"
            f"<style type=\"text/css\">\n{css}</style>\n</head>\n<body>\n"
            f"{self.nav()}\n{self.paragraph()}\n{body}\n{self.paragraph(False)}\n</body>\n</html>\n"
        )
        return doc.encode("utf-8")


def _near_color(rng: random.Random, base: ColorValue, tau: float) -> ColorValue:
    while True:
        delta = [rng.randint(-18, 18) for _ in range(3)]
        c = ColorValue(*(min(255, max(0, ch + d)) for ch, d in zip((base.r, base.g, base.b), delta)))
        if 0 < color_distance(c, base) <= tau:
            return c


def _js_concat(rng: random.Random, s: str) -> str:
    """``s`` as a ``"a" + "b" + ...`` expression of at least two parts."""
    if len(s) < 2:
        return f'"{s}" + ""'
    cuts = sorted(rng.sample(range(1, len(s)), k=min(len(s) - 1, rng.randint(1, 3))))
    parts = [s[i:j] for i, j in zip([0, *cuts], [*cuts, len(s)])]
    return " + ".join(f'"{p}"' for p in parts)


# ----------------------------------------------------------------------------
# templates; each returns (body html, planted [(href, labels)])

def _tpl_A(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    color = ColorValue(rng.randint(0, 255), rng.randint(0, 255), rng.randint(0, 255))
    href, text = p.href(True), p.anchor_text()
    if v == "inline":
        body = f'<span style="background:{color.hex()};"><a href="{href}" style="color:{color.hex()}">{text}</a></span>'
    elif v == "stylesheet":
        cls = p.ident("c")
        p.styles.append(f"div.{cls} {{ background-color: {color.hex()} }} .{cls} a {{ color: {color.hex()} }}")
        body = f'<div class="{cls}"><a href="{href}">{text}</a></div>'
    elif v == "font-tag":
        body = f'<table bgcolor="{color.hex()}"><tr><td><font color="{color.hex()}"><a href="{href}" style="color:inherit">{text}</a></font></td></tr></table>'
    else:
        cls = p.ident("s")
        name = f"{p.ident('sheet')}.css"
        sidecars[name] = f".{cls} {{ background: {color.hex()}; }}\n.{cls} a {{ color: {color.hex()}; }}\n"
        p.head.append(f'<link rel="stylesheet" type="text/css" href="{name}">\n')
        body = f'<div class="{cls}"><a href="{href}">{text}</a></div>'
    return body, [(href, {"A"})]


def _tpl_B(p: _Page, v: str, sidecars: dict, tau: float) -> tuple[str, list]:
    rng = p.rng
    bg = ColorValue(rng.randint(0, 255), rng.randint(0, 255), rng.randint(0, 255))
    fg = _near_color(rng, bg, min(tau, 30.0))
    href, text = p.href(True), p.anchor_text()
    if v == "inline":
        body = f'<div style="background-color:{bg.hex()};"><a href="{href}" style="color:{fg.hex()}">{text}</a></div>'
    else:
        cls = p.ident("n")
        p.styles.append(f".{cls} {{ background-color: {bg.hex()}; }}\n.{cls} a {{ color: {fg.hex()}; }}")
        body = f'<div class="{cls}"><a href="{href}">{text}</a></div>'
    return body, [(href, {"B"})]


def _tpl_C(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    href, text = p.href(True), p.anchor_text()
    size = rng.choice(("0px", "1px", "0"))
    if v == "anchor-font":
        body = f'<a href="{href}" style="font-size:{size}">{text}</a>'
    elif v == "div-font":
        body = f'<div style="font-size:{size};"><a href="{href}">{text}</a></div>'
    elif v == "div-box":
        w, h = rng.randint(0, 2), rng.randint(0, 2)
        body = f'<div style="width:{w}px;height:{h}px;"><a href="{href}">{text}</a></div>'
    elif v == "marquee":
        body = f'<marquee scrollamount={rng.randint(1, 10)} width={rng.randint(1, 2)} height={rng.randint(1, 2)}><a href="{href}">{text}</a></marquee>'
    else:
        cls = p.ident("t")
        p.styles.append(f".{cls} {{ font-size: {size}; }}")
        body = f'<div class="{cls}"><a href="{href}">{text}</a></div>'
    return body, [(href, {"C"})]


def _tpl_D(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    href, text = p.href(True), p.anchor_text()
    color = p.text.hex()
    status = ' onMouseOver="window.status=\'\';return true;"'
    if v == "three-signals":
        attrs, css = status, f"cursor:text;color:{color};text-decoration:none;"
    elif v == "cursor-status":
        attrs, css = status, f"cursor:text;color:{color};text-decoration:underline;"
    else:
        attrs, css = "", f"cursor:text;color:{color};text-decoration:none;"
    link = f'<a href="{href}"{attrs} style="{css}">{text}</a>'
    body = f"<p>{p.words(6)} {link} {p.words(10)}.</p>"
    return body, [(href, {"D"})]


def _tpl_E(p: _Page, v: str, sidecars: dict, tau_scroll: float) -> tuple[str, list]:
    rng = p.rng
    href, text = p.href(True), p.anchor_text()
    amount = rng.randint(int(tau_scroll), 5000)
    if v == "marquee":
        body = f'<marquee height=1 width={rng.randint(1, 10)} scrollamount={amount}><a href="{href}">{text}</a></marquee>'
        return body, [(href, {"E"})]
    if v == "marquee-sized":
        body = f'<marquee width={rng.randint(100, 400)} height={rng.randint(20, 60)} scrollamount={amount}><a href="{href}">{text}</a></marquee>'
        return body, [(href, {"E"})]
    body = f'<blink style="font-size:1px"><a href="{href}">{text}</a></blink>'
    return body, [(href, {"C", "E"})]


def _tpl_F(p: _Page, v: str, sidecars: dict, width: int) -> tuple[str, list]:
    rng = p.rng
    href, text = p.href(True), p.anchor_text()
    off = rng.randint(977, 5000)
    link = f'<a href="{href}">{text}</a>'
    if v == "class-left":
        cls = p.ident("h")
        p.styles.append(f".{cls} {{\n    position : absolute;\n    left : -{off}px;\n}}")
        body = f'<div class="{cls}">{link}</div>'
    elif v == "inline-left-top":
        body = f'<div style="left: -{off}px; position: absolute; top: -{rng.randint(0, 2000)}px">{link}</div>'
    elif v == "expression":
        a = rng.randint(1, 99)
        body = f'<div style="left:expression({a}-{off + a}); position: absolute; top: -{off}px">{link}</div>'
    elif v == "text-indent":
        body = f'<div style="text-indent: -{rng.randint(5000, 9999)}px; ">{link}</div>'
    elif v == "margin-left":
        body = f'<div style="margin-left: -{rng.randint(2000, 9999)}px;">{link}</div>'
    else:
        body = f'<div style="position:absolute; top:-{off}px; left:{rng.randint(0, width // 2)}px">{link}</div>'
    return body, [(href, {"F"})]


def _tpl_G(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    href, text = p.href(True), p.anchor_text()
    link = f'<a href="{href}">{text}</a>'
    if v == "display-inline":
        body = f'<div style="display:none">{link}</div>'
    elif v == "visibility-class":
        cls = p.ident("v")
        p.styles.append(f".{cls} {{\n    visibility : hidden;\n}}")
        body = f'<div class="{cls}">{link}</div>'
    elif v == "display-id":
        ident = p.ident("g")
        p.styles.append(f"#{ident} {{ display: none }}")
        body = f'<div id="{ident}"><span>{link}</span></div>'
    else:
        body = f"<div hidden>{link}</div>"
    return body, [(href, {"G"})]


def _tpl_H(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    href, text = p.href(True), p.anchor_text()
    ident = p.ident("ql")
    prop, value = rng.choice((("display", "none"), ("visibility", "hidden")))
    statement = f'document.getElementById("{ident}").style.{prop} = "{value}"'
    container = f'<div id="{ident}"><a href="{href}" title="{text}">{text}</a></div>'
    if v == "plain":
        script = f"<script type=\"text/javascript\">\n{statement};\n</script>"
    elif v == "concat":
        script = (
            "<script type=\"text/javascript\">\n"
            f"document.getElementById({_js_concat(rng, ident)}).style.{prop}\n    ={_js_concat(rng, value)};\n</script>"
        )
    elif v == "hex-eval":
        fn = rng.choice(("HexTostring", "decode", "h2s", "unpack"))
        payload = statement.encode("ascii").hex()
        script = (
            f"<script language=\"javascript\">function {fn}(s){{\n"
            "    var r='';\n"
            "    for(var i=0;i<s.length;i+=2){\n"
            "        var sxx=parseInt(s.substring(i,i+2),16);\n"
            "        r+=String.fromCharCode(sxx);}\n"
            "    return r;}\n"
            f"    eval({fn}(\"{payload}\"));\n</script>"
        )
    elif v == "array":
        names = [prop, value, ident, "style", "getElementById"]
        order = list(range(5))
        rng.shuffle(order)
        arr = [None] * 5
        for slot, k in enumerate(order):
            arr[slot] = names[k]
        pos = {name: i for i, name in enumerate(arr)}
        var = rng.choice(("_xa", "_0x1f", "q", "_k"))
        lits = ",".join(f'"{encode_hex(s)}"' for s in arr)
        script = (
            f"<script language=\"JavaScript\">\n    var {var}= [{lits}];\n"
            f"    document[{var}[{pos['getElementById']}]]({var}[{pos[ident]}])[{var}[{pos['style']}]][{var}[{pos[prop]}]]={var}[{pos[value]}];\n</script>"
        )
    else:
        css = f"{prop}:{value}"
        opener = rng.choice(("div", "span"))
        body = (
            f"<script language=\"JavaScript\" type=\"text/javascript\">\n    document.write( \"<{opener} style='{css}'>\" );\n</script>\n"
            f'<a href="{href}">{text}</a>\n'
            f"<script language=\"JavaScript\" type=\"text/javascript\">\n    document.write( \"</{opener}>\" );\n</script>"
        )
        return body, [(href, {"H"})]
    return container + "\n" + script, [(href, {"H"})]


def _tpl_I(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    target = f"http://{rng.choice(_ANCHOR_WORDS)}{rng.randint(1, 999)}.example.cn/"
    if v == "meta-refresh":
        p.head.append(f'<meta http-equiv="refresh" content="{rng.randint(0, 3)};url={target}">\n')
        script = ""
    elif v == "script-href":
        script = f'<script type="text/javascript">\nwindow.location.href = {_js_concat(rng, target)};\n</script>'
    else:
        script = f'<script type="text/javascript">\nlocation.replace("{target}");\n</script>'
    hrefs = [p.href(True) for _ in range(rng.randint(1, 4))]
    links = " ".join(f'<a href="{h}">{p.anchor_text()}</a>' for h in hrefs)
    body = f'{script}\n<p>{links}</p>\n<p><a href="{target}">continue</a></p>'
    return body, [(h, {"I"}) for h in hrefs]


def _tpl_J(p: _Page, v: str, sidecars: dict, tau_menu: int) -> tuple[str, list]:
    rng = p.rng
    if v in ("hover-display", "hover-visibility"):
        cls = p.ident("m")
        hide, show = ("display:none", "display:block") if v == "hover-display" else ("visibility:hidden", "visibility:visible")
        p.styles.append(f"ul.{cls} {{ {hide}; }}\nli:hover ul.{cls} {{ {show}; }}")
        hrefs = [p.href(True) for _ in range(rng.randint(1, 6))]
        items = "".join(f'<li><a href="{h}">{p.anchor_text()}</a></li>' for h in hrefs)
        body = f'<ul class="topmenu"><li>{p.words(1).title()}<ul class="{cls}">{items}</ul></li></ul>'
        return body, [(h, {"J"}) for h in hrefs]
    n = rng.randint(tau_menu, tau_menu + 15)
    hrefs = [p.href(True) for _ in range(n)]
    items = "".join(f'<li><a href="{h}">{p.anchor_text()}</a></li>' for h in hrefs)
    ident = p.ident("list")
    if v == "list-collapsed":
        p.styles.append(f"#{ident} {{ height:20px; overflow:hidden; }}\n#{ident} li {{ line-height:20px; }}")
        body = f'<div id="{ident}"><ul>{items}</ul></div>'
        return body, [(h, {"J"} if i == 0 else {"J", "L"}) for i, h in enumerate(hrefs)]
    p.styles.append(f"#{ident} {{ display:none; }}")
    body = f'<div id="{ident}"><ul>{items}</ul></div>'
    return body, [(h, {"J", "G"}) for h in hrefs]


def _tpl_K(p: _Page, v: str, sidecars: dict, tau_title: int) -> tuple[str, list, Optional[str]]:
    rng = p.rng
    host = f"{rng.choice(_ANCHOR_WORDS)}{rng.randint(1, 9999)}"
    token = rng.choice((f"http://{host}.example.cn/", f"www.{host}.com", f"{host}.net"))
    if v == "title":
        prefix = p.words(30)
        while len(prefix) < tau_title:
            prefix += " " + p.words(3)
        return "", [(token, {"K"})], f"{prefix} {token} {p.words(2)}"
    name = "keywords" if v == "meta-keywords" else "description"
    content = f"{p.words(3)}, {token}, {p.words(2)}"
    p.head.append(f'<meta name="{name}" content="{content}">\n')
    return "", [(token, {"K"})], None


def _tpl_L(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    href, text = p.href(True), p.anchor_text()
    # layers sit below the page's in-flow content so they cover nothing else
    x, y = rng.randint(0, 400), rng.randint(1500, 3000)
    if v == "z-index-img":
        body = (
            f'<div id="{p.ident("front")}" style="position:absolute; left:{x}px; top:{y}px; z-index:{rng.randint(1, 50)}">'
            f'<img src="{p.words(1)}.gif" ></div>\n'
            f'<div id="{p.ident("back")}" style="position:absolute; left:{x}px; top:{y}px; z-index:-{rng.randint(1, 50)}">'
            f'<a href="{href}" target="_blank">{text}</a></div>'
        )
    elif v == "z-index-div":
        body = (
            f'<div style="position:absolute; left:{x}px; top:{y}px; width:400px; height:200px; '
            f'background-color:{p.bg.hex()}; z-index:{rng.randint(2, 9)}">{p.words(5)}</div>\n'
            f'<div style="position:absolute; left:{x}px; top:{y}px; z-index:1"><a href="{href}">{text}</a></div>'
        )
    else:
        ident = p.ident("spam")
        p.styles.append(
            f"#{ident}{{width:99px;height:20px;overflow:hidden;position:absolute;}}\n"
            f"#{ident} a{{display:block;line-height:20px;text-decoration:none;}}"
        )
        body = f'<div id="{ident}">\n    <a href="{p.href()}">&#160;</a>\n    <a href="{href}" title="{text}">{text}</a>\n</div>'
    return body, [(href, {"L"})]


def _control(p: _Page, v: str, sidecars: dict) -> tuple[str, list]:
    rng = p.rng
    parts = [p.paragraph() for _ in range(rng.randint(1, 3))]
    parts.append(
        f'<marquee scrollamount={rng.randint(1, 10)} width={rng.randint(200, 600)} height={rng.randint(20, 40)}>'
        f'<a href="{p.href()}">{p.words(3)}</a></marquee>'
    )
    year = rng.randint(1999, 2012)
    parts.append(
        "<script type=\"text/javascript\">\n"
        f"var visits = {rng.randint(1, 99)}; var label = \"Updated \" + \"{year}\";\n"
        "document.write(\"<p>\" + label + \"</p>\");\n"
        "function track(x) { return x + 1; }\n</script>"
    )
    parts.append(f'<div style="background-color:{p.bg.hex()}"><a href="{p.href()}">{p.words(2)}</a></div>')
    p.head.append(f'<meta name="description" content="{p.words(8)}">\n')
    return "\n".join(parts), []


def generate_case(technique: str, seed: int, params: Optional[Mapping[str, object]] = None) -> GroundTruthCase:
    """Build one page.  ``params`` may set ``variant`` and threshold keys (tau_color ...)."""
    params = dict(params or {})
    if technique != CONTROL and technique not in TECHNIQUES:
        raise ValueError(f"unknown technique: {technique!r}")
    key = json.dumps({"t": technique, "seed": seed, "params": params}, sort_keys=True, default=str)
    rng = random.Random(key)
    variants = VARIANTS.get(technique, ("default",))
    variant = str(params.get("variant") or variants[seed % len(variants)])
    if variant not in variants:
        raise ValueError(f"unknown variant {variant!r} for {technique}")
    p = _Page(rng)
    sidecars: dict[str, str] = {}
    title = None
    if technique == "A":
        body, planted = _tpl_A(p, variant, sidecars)
    elif technique == "B":
        body, planted = _tpl_B(p, variant, sidecars, float(params.get("tau_color", 32.0)))
    elif technique == "C":
        body, planted = _tpl_C(p, variant, sidecars)
    elif technique == "D":
        body, planted = _tpl_D(p, variant, sidecars)
    elif technique == "E":
        body, planted = _tpl_E(p, variant, sidecars, float(params.get("tau_scroll", 50)))
    elif technique == "F":
        body, planted = _tpl_F(p, variant, sidecars, int(params.get("viewport_width", 1024)))
    elif technique == "G":
        body, planted = _tpl_G(p, variant, sidecars)
    elif technique == "H":
        body, planted = _tpl_H(p, variant, sidecars)
    elif technique == "I":
        body, planted = _tpl_I(p, variant, sidecars)
    elif technique == "J":
        body, planted = _tpl_J(p, variant, sidecars, int(params.get("tau_menu", 20)))
    elif technique == "K":
        body, planted, title = _tpl_K(p, variant, sidecars, int(params.get("tau_title", 80)))
    elif technique == "L":
        body, planted = _tpl_L(p, variant, sidecars)
    else:
        body, planted = _control(p, variant, sidecars)
    if technique == "I":
        # every ordinary link on a redirecting page is hidden as well
        page = p.render(body, title)
        nav_hrefs = sorted(h for h in p._hrefs if not any(h == q for q, _ in planted))
        planted = planted + [(h, {"I"}) for h in nav_hrefs]
    else:
        page = p.render(body, title)
    params = {**{k: str(v) for k, v in params.items()}, "variant": variant}
    return GroundTruthCase(
        technique=technique,
        page_bytes=page,
        planted_links=tuple(sorted((h, frozenset(labels)) for h, labels in planted)),
        seed=seed,
        params=params,
        sidecars=sidecars,
    )


def case_record(case: GroundTruthCase, path: str) -> dict:
    return {
        "path": path,
        "technique": case.technique,
        "seed": case.seed,
        "params": dict(sorted(case.params.items())),
        "planted": [{"href": h, "labels": sorted(labels)} for h, labels in case.planted_links],
        "expected_labels": sorted(set().union(*(labels for _, labels in case.planted_links))) if case.planted_links else [],
        "sidecars": sorted(case.sidecars),
    }


def generate_corpus(
    counts: Mapping[str, int], seed: int, out_dir: Union[str, Path], params: Optional[Mapping[str, object]] = None
) -> list[dict]:
    """Write ``cases/<technique>/<nnnn>.html`` plus ``manifest.jsonl``; returns the manifest records."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for technique in sorted(counts):
        n = int(counts[technique])
        if n < 0:
            raise ValueError("counts must be non-negative")
        for i in range(n):
            case = generate_case(technique, seed * 100_003 + i, params)
            rel = Path("cases") / technique / f"{i:04d}.html"
            target = out / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            # cases share a directory, so sidecar names get the case index as prefix
            page = case.page_bytes
            renamed = {}
            for name, text in case.sidecars.items():
                unique = f"{i:04d}-{name}"
                page = page.replace(f'href="{name}"'.encode(), f'href="{unique}"'.encode())
                renamed[unique] = text
                (target.parent / unique).write_text(text, encoding="utf-8")
            case = dataclasses.replace(case, page_bytes=page, sidecars=renamed)
            target.write_bytes(page)
            records.append(case_record(case, rel.as_posix()))
    with open(out / "manifest.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
    return records


def read_manifest(path: Union[str, Path]) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass
class ClosureStats:
    """Generated corpus vs. scan: per-technique recall and false positives."""

    planted: dict[str, int] = field(default_factory=dict)  # technique -> planted (link, label) pairs
    recovered: dict[str, int] = field(default_factory=dict)
    control_findings: int = 0
    mismatches: list[tuple[str, str, list, list]] = field(default_factory=list)  # path, href, expected, got

    def recall(self, technique: str) -> float:
        n = self.planted.get(technique, 0)
        return self.recovered.get(technique, 0) / n if n else 1.0

    @property
    def exact(self) -> bool:
        return not self.mismatches


def closure_stats(records: Iterable[Mapping], labels_by_path: Mapping[str, Mapping[str, set]]) -> ClosureStats:
    """Compare manifest records with ``{path: {href_raw: labels}}`` from a scan.

    A case matches when every planted href carries exactly its labels and no
    other href on the page carries any.
    """
    stats = ClosureStats()
    for rec in records:
        got = {h: set(ls) for h, ls in labels_by_path.get(rec["path"], {}).items() if ls}
        expected = {p["href"]: set(p["labels"]) for p in rec["planted"]}
        if rec["technique"] == CONTROL:
            stats.control_findings += sum(len(ls) for ls in got.values())
        for href, labels in expected.items():
            for label in labels:
                stats.planted[label] = stats.planted.get(label, 0) + 1
                if label in got.get(href, ()):
                    stats.recovered[label] = stats.recovered.get(label, 0) + 1
        for href in sorted(set(got) | set(expected)):
            if got.get(href, set()) != expected.get(href, set()):
                stats.mismatches.append((rec["path"], href, sorted(expected.get(href, ())), sorted(got.get(href, ()))))
    return stats
